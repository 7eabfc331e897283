#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fklab {

/// Persistent pool of worker threads for site-range parallelism.
///
/// Work is always split into fixed contiguous chunks (one per worker), so the
/// set of sites each worker touches depends only on (count, workers), never on
/// scheduling. Callers must only write to disjoint locations per index;
/// reductions are done by the caller over per-chunk results in chunk order.
/// This keeps every parallel result bitwise identical to the sequential one.
class WorkerPool {
 public:
  explicit WorkerPool(int workers = 1) : workers_(workers < 1 ? 1 : workers) {
    for (int t = 1; t < workers_; ++t) {
      threads_.emplace_back([this, t] { worker_loop(t); });
    }
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::unique_lock<std::mutex> lk(mu_);
      stop_ = true;
      ++epoch_;
    }
    cv_.notify_all();
    for (auto& th : threads_) th.join();
  }

  int workers() const noexcept { return workers_; }

  /// Runs fn(begin, end) over [0, count) split into one chunk per worker.
  void parallel_for(std::int64_t count, const std::function<void(std::int64_t, std::int64_t)>& fn) {
    if (count <= 0) return;
    if (workers_ == 1 || count < min_parallel_count_) {
      fn(0, count);
      return;
    }
    {
      std::unique_lock<std::mutex> lk(mu_);
      job_ = &fn;
      job_count_ = count;
      pending_ = workers_ - 1;
      ++epoch_;
    }
    cv_.notify_all();
    run_chunk(0, fn, count);
    std::unique_lock<std::mutex> lk(mu_);
    done_cv_.wait(lk, [this] { return pending_ == 0; });
    job_ = nullptr;
  }

 private:
  void run_chunk(int t, const std::function<void(std::int64_t, std::int64_t)>& fn, std::int64_t count) const {
    const std::int64_t chunk = (count + workers_ - 1) / workers_;
    const std::int64_t b = t * chunk;
    const std::int64_t e = std::min<std::int64_t>(count, b + chunk);
    if (b < e) fn(b, e);
  }

  void worker_loop(int t) {
    std::uint64_t seen = 0;
    for (;;) {
      const std::function<void(std::int64_t, std::int64_t)>* job = nullptr;
      std::int64_t count = 0;
      {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait(lk, [&] { return epoch_ != seen; });
        seen = epoch_;
        if (stop_) return;
        job = job_;
        count = job_count_;
      }
      if (job) run_chunk(t, *job, count);
      {
        std::unique_lock<std::mutex> lk(mu_);
        if (--pending_ == 0) done_cv_.notify_all();
      }
    }
  }

  int workers_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  const std::function<void(std::int64_t, std::int64_t)>* job_ = nullptr;
  std::int64_t job_count_ = 0;
  int pending_ = 0;
  std::uint64_t epoch_ = 0;
  bool stop_ = false;
  static constexpr std::int64_t min_parallel_count_ = 4096;
};

}  // namespace fklab
