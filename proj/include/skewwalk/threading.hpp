#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace skewwalk {

/// Runs fn(task_index) for every index in [0, tasks) on up to `threads`
/// workers. Callers write each task's result into a task-indexed slot and
/// reduce the slots in index order afterwards, so the combined result does
/// not depend on scheduling or on the worker count.
inline void parallel_tasks(std::size_t tasks, unsigned threads,
                           const std::function<void(std::size_t)>& fn) {
  if (tasks == 0) return;
  unsigned workers = threads < 1 ? 1u : threads;
  if (workers > tasks) workers = static_cast<unsigned>(tasks);
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Neumaier compensated accumulator; summation order still matters, so
/// callers keep a fixed order when reproducibility is required.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace skewwalk
