#include "io/parallel.hpp"

namespace fsr::io {

ThreadPool::ThreadPool(int threads) {
  if (threads < 1) throw Error("pool: thread count must be >= 1");
  const std::size_t helpers = static_cast<std::size_t>(threads) - 1;
  tasks_.resize(helpers);
  workers_.reserve(helpers);
  for (std::size_t slot = 0; slot < helpers; ++slot)
    workers_.emplace_back([this, slot] { worker_loop(slot); });
}

ThreadPool::~ThreadPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  for (std::thread& w : workers_) w.join();
}

void ThreadPool::run(Eigen::Index total,
                     const std::function<void(Eigen::Index, Eigen::Index)>& fn) {
  if (total <= 0) return;
  const Eigen::Index chunks =
      std::min<Eigen::Index>(total, static_cast<Eigen::Index>(size()));
  const Eigen::Index base = total / chunks;
  const Eigen::Index extra = total % chunks;
  // Chunk c covers [bounds[c], bounds[c+1]); the first `extra` chunks get one
  // more element. The partition depends only on (total, size()).
  std::vector<Eigen::Index> bounds(static_cast<std::size_t>(chunks) + 1, 0);
  for (Eigen::Index c = 0; c < chunks; ++c)
    bounds[static_cast<std::size_t>(c) + 1] =
        bounds[static_cast<std::size_t>(c)] + base + (c < extra ? 1 : 0);

  {
    std::lock_guard lock(mutex_);
    error_ = nullptr;
    pending_ = static_cast<std::size_t>(chunks) - 1;
    for (std::size_t slot = 0; slot + 1 < static_cast<std::size_t>(chunks); ++slot) {
      tasks_[slot].fn = &fn;
      tasks_[slot].begin = bounds[slot + 1];
      tasks_[slot].end = bounds[slot + 2];
    }
    ++generation_;
  }
  wake_.notify_all();

  try {
    fn(bounds[0], bounds[1]);
  } catch (...) {
    std::lock_guard lock(mutex_);
    if (!error_) error_ = std::current_exception();
  }

  std::unique_lock lock(mutex_);
  done_.wait(lock, [this] { return pending_ == 0; });
  if (error_) std::rethrow_exception(error_);
}

void ThreadPool::worker_loop(std::size_t slot) {
  std::uint64_t seen = 0;
  while (true) {
    Task task;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      task = tasks_[slot];
      tasks_[slot].fn = nullptr;
    }
    if (task.fn) {
      try {
        (*task.fn)(task.begin, task.end);
      } catch (...) {
        std::lock_guard lock(mutex_);
        if (!error_) error_ = std::current_exception();
      }
    }
    {
      std::lock_guard lock(mutex_);
      if (task.fn && pending_ > 0) --pending_;
      if (pending_ == 0) done_.notify_all();
    }
  }
}

}  // namespace fsr::io
