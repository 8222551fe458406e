#include "sembox/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

namespace sembox {

namespace {

std::atomic<int> g_workers{0}; // 0 = not set yet, use hardware

int hardware_workers() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Persistent pool. Each parallel region is a Job with its own chunk
// counters, so stragglers from an earlier region can never touch a later
// one: a stale worker sees its old job exhausted and goes back to sleep.
class Pool {
public:
  static Pool& instance() {
    static Pool pool;
    return pool;
  }

  void run(std::int64_t nchunks, const std::function<void(std::int64_t)>& chunk_fn,
           int nworkers) {
    ensure_threads(nworkers - 1);
    auto job = std::make_shared<Job>();
    job->fn = &chunk_fn;
    job->total = nchunks;
    {
      std::lock_guard<std::mutex> lk(mutex_);
      current_ = job;
      ++generation_;
    }
    cv_start_.notify_all();
    work(*job);
    {
      std::unique_lock<std::mutex> lk(mutex_);
      cv_done_.wait(lk, [&] { return job->done.load() == job->total; });
      current_.reset();
    }
  }

private:
  struct Job {
    const std::function<void(std::int64_t)>* fn = nullptr;
    std::int64_t total = 0;
    std::atomic<std::int64_t> next{0};
    std::atomic<std::int64_t> done{0};
  };

  Pool() = default;
  ~Pool() {
    {
      std::lock_guard<std::mutex> lk(mutex_);
      shutdown_ = true;
      ++generation_;
    }
    cv_start_.notify_all();
    for (auto& t : threads_) t.join();
  }

  void ensure_threads(int n) {
    std::lock_guard<std::mutex> lk(mutex_);
    while (static_cast<int>(threads_.size()) < n) {
      threads_.emplace_back([this, gen = generation_] { worker_loop(gen); });
    }
  }

  void worker_loop(std::uint64_t seen_generation) {
    for (;;) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock<std::mutex> lk(mutex_);
        cv_start_.wait(lk, [&] { return shutdown_ || generation_ != seen_generation; });
        if (shutdown_) return;
        seen_generation = generation_;
        job = current_;
      }
      if (job) work(*job);
    }
  }

  void work(Job& job) {
    for (;;) {
      const std::int64_t c = job.next.fetch_add(1, std::memory_order_relaxed);
      if (c >= job.total) break;
      (*job.fn)(c);
      if (job.done.fetch_add(1, std::memory_order_acq_rel) + 1 == job.total) {
        std::lock_guard<std::mutex> lk(mutex_); // pair with the waiter's check
        cv_done_.notify_all();
      }
    }
  }

  std::mutex mutex_;
  std::condition_variable cv_start_, cv_done_;
  std::vector<std::thread> threads_;
  std::shared_ptr<Job> current_;
  std::uint64_t generation_ = 0;
  bool shutdown_ = false;
};

thread_local bool t_inside_parallel = false;

} // namespace

void set_worker_count(int n) { g_workers.store(n < 1 ? 1 : n); }

int worker_count() {
  int n = g_workers.load();
  return n == 0 ? hardware_workers() : n;
}

void parallel_for_ranges(std::int64_t n,
                         const std::function<void(std::int64_t, std::int64_t)>& fn) {
  if (n <= 0) return;
  const int nw = worker_count();
  // Nested regions run serially: the pool is not reentrant.
  if (nw == 1 || n == 1 || t_inside_parallel) {
    fn(0, n);
    return;
  }
  // ~4 chunks per worker for load balance; chunk boundaries are a pure
  // function of n and nw, never of timing.
  const std::int64_t nchunks = std::min<std::int64_t>(n, 4LL * nw);
  const std::int64_t base = n / nchunks, rem = n % nchunks;
  std::function<void(std::int64_t)> chunk_fn = [&](std::int64_t c) {
    t_inside_parallel = true;
    const std::int64_t b = c * base + std::min(c, rem);
    const std::int64_t e = b + base + (c < rem ? 1 : 0);
    fn(b, e);
    t_inside_parallel = false;
  };
  Pool::instance().run(nchunks, chunk_fn, nw);
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  parallel_for_ranges(n, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) fn(i);
  });
}

} // namespace sembox
