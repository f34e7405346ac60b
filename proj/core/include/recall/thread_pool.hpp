#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace recall {

// Fixed worker pool. Tasks are indexed, so callers collect results into
// index-addressed slots and output order stays deterministic regardless of
// scheduling.
class ThreadPool {
 public:
  explicit ThreadPool(std::size_t n_threads) {
    if (n_threads == 0) n_threads = 1;
    workers_.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) {
      workers_.emplace_back([this] {
        for (;;) {
          std::function<void()> task;
          {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [this] { return stop_ || !tasks_.empty(); });
            if (stop_ && tasks_.empty()) return;
            task = std::move(tasks_.front());
            tasks_.pop();
          }
          task();
        }
      });
    }
  }

  ~ThreadPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
  }

  std::size_t size() const { return workers_.size(); }

  // Run fn(i) for i in [0, n); blocks until all complete. Exceptions from
  // tasks propagate (first one wins).
  template <class Fn>
  void parallel_for(std::size_t n, Fn&& fn) {
    if (n == 0) return;
    std::mutex done_mu;
    std::condition_variable done_cv;
    std::size_t remaining = n;
    std::exception_ptr error;
    for (std::size_t i = 0; i < n; ++i) {
      enqueue([&, i] {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(done_mu);
          if (!error) error = std::current_exception();
        }
        std::lock_guard lock(done_mu);
        if (--remaining == 0) done_cv.notify_one();
      });
    }
    std::unique_lock lock(done_mu);
    done_cv.wait(lock, [&] { return remaining == 0; });
    if (error) std::rethrow_exception(error);
  }

 private:
  void enqueue(std::function<void()> task) {
    {
      std::lock_guard lock(mu_);
      tasks_.push(std::move(task));
    }
    cv_.notify_one();
  }

  std::vector<std::thread> workers_;
  std::queue<std::function<void()>> tasks_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stop_ = false;
};

}  // namespace recall
