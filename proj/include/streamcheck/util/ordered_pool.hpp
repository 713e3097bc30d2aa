#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

namespace streamcheck {

// Runs up to `max_in_flight` jobs concurrently and hands their results to
// `emit` strictly in submission order (a reorder buffer at the output).
template <typename Out>
class OrderedPool {
 public:
  OrderedPool(std::size_t max_in_flight, std::function<void(Out)> emit)
      : max_in_flight_(max_in_flight ? max_in_flight : 1), emit_(std::move(emit)) {}

  OrderedPool(const OrderedPool&) = delete;
  OrderedPool& operator=(const OrderedPool&) = delete;

  ~OrderedPool() { wait_idle(); }

  // Blocks while the pool is saturated.
  void submit(std::function<Out()> job) {
    std::uint64_t seq;
    {
      std::unique_lock lock(mutex_);
      slot_free_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
      ++in_flight_;
      seq = next_seq_++;
    }
    reap_finished();
    auto done = std::make_shared<std::atomic<bool>>(false);
    std::thread worker([this, seq, done, job = std::move(job)] {
      Out out = job();
      {
        std::lock_guard lock(mutex_);
        ready_.emplace(seq, std::move(out));
        --in_flight_;
      }
      slot_free_.notify_all();
      drain();
      done->store(true);
    });
    std::lock_guard lock(threads_mutex_);
    threads_.push_back({std::move(worker), std::move(done)});
  }

  // Returns once every submitted job has been emitted.
  void wait_idle() {
    std::list<Worker> threads;
    {
      std::lock_guard lock(threads_mutex_);
      threads.swap(threads_);
    }
    for (auto& w : threads) w.thread.join();
  }

  std::size_t in_flight() const {
    std::lock_guard lock(mutex_);
    return in_flight_;
  }

 private:
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  void drain() {
    std::lock_guard emit_lock(emit_mutex_);
    for (;;) {
      std::unique_lock lock(mutex_);
      auto it = ready_.find(next_emit_);
      if (it == ready_.end()) return;
      Out out = std::move(it->second);
      ready_.erase(it);
      ++next_emit_;
      lock.unlock();
      emit_(std::move(out));
    }
  }

  void reap_finished() {
    std::lock_guard lock(threads_mutex_);
    for (auto it = threads_.begin(); it != threads_.end();) {
      if (it->done->load()) {
        it->thread.join();
        it = threads_.erase(it);
      } else {
        ++it;
      }
    }
  }

  const std::size_t max_in_flight_;
  std::function<void(Out)> emit_;

  mutable std::mutex mutex_;
  std::condition_variable slot_free_;
  std::size_t in_flight_ = 0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_emit_ = 0;
  std::map<std::uint64_t, Out> ready_;

  std::mutex emit_mutex_;
  std::mutex threads_mutex_;
  std::list<Worker> threads_;
};

}  // namespace streamcheck
