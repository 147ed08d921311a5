#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "fsr/types.hpp"

namespace fsr::io {

/**
 * A fixed set of workers executing [begin, end) index chunks. Work is always
 * split into static contiguous ranges — one per worker — so a computation
 * whose chunks own disjoint state produces identical results at any worker
 * count.
 */
class ThreadPool {
 public:
  explicit ThreadPool(int threads);
  ~ThreadPool();

  ThreadPool(const ThreadPool&) = delete;
  ThreadPool& operator=(const ThreadPool&) = delete;

  int size() const { return static_cast<int>(workers_.size()) + 1; }

  /// Runs fn(begin, end) over a static partition of [0, total); the calling
  /// thread takes the first chunk. Returns after every chunk completes.
  /// Exceptions from chunks are rethrown (first one wins).
  void run(Eigen::Index total,
           const std::function<void(Eigen::Index, Eigen::Index)>& fn);

 private:
  struct Task {
    const std::function<void(Eigen::Index, Eigen::Index)>* fn = nullptr;
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
  };

  void worker_loop(std::size_t slot);

  std::vector<std::thread> workers_;
  std::vector<Task> tasks_;          // one slot per worker
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  std::uint64_t generation_ = 0;     // bumped per run() to publish tasks
  std::size_t pending_ = 0;
  std::exception_ptr error_;
  bool stop_ = false;
};

/// Executor over a pool, shape-compatible with fsr::SerialExecutor.
class PoolExecutor {
 public:
  explicit PoolExecutor(ThreadPool& pool) : pool_(&pool) {}

  template <class Fn>
  void operator()(Eigen::Index total, Fn&& fn) const {
    const std::function<void(Eigen::Index, Eigen::Index)> wrapped =
        [&fn](Eigen::Index begin, Eigen::Index end) { fn(begin, end); };
    pool_->run(total, wrapped);
  }

 private:
  ThreadPool* pool_;
};

}  // namespace fsr::io
