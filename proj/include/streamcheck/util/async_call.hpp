#pragma once

#include <chrono>
#include <exception>
#include <future>
#include <memory>
#include <thread>
#include <type_traits>
#include <utility>

#include "streamcheck/error.hpp"

namespace streamcheck {

using Clock = std::chrono::steady_clock;

// A backend call running on its own detached thread. The caller waits with a
// deadline and walks away on timeout; the callable must therefore own (or
// share ownership of) everything it touches.
template <typename R>
class AsyncCall {
 public:
  template <typename F>
  static AsyncCall start(F fn) {
    auto promise = std::make_shared<std::promise<R>>();
    AsyncCall call;
    call.future_ = promise->get_future();
    std::thread([promise, fn = std::move(fn)]() mutable {
      try {
        if constexpr (std::is_void_v<R>) {
          fn();
          promise->set_value();
        } else {
          promise->set_value(fn());
        }
      } catch (...) {
        promise->set_exception(std::current_exception());
      }
    }).detach();
    return call;
  }

  // Throws BackendTimeout if the call is not done by `deadline`; rethrows
  // whatever the callable threw.
  R get_until(Clock::time_point deadline) {
    if (future_.wait_until(deadline) == std::future_status::timeout) {
      throw BackendTimeout("backend call exceeded its deadline");
    }
    return future_.get();
  }

 private:
  std::future<R> future_;
};

template <typename F>
auto call_with_deadline(F fn, std::chrono::duration<double> timeout) {
  using R = std::invoke_result_t<F>;
  auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(timeout);
  return AsyncCall<R>::start(std::move(fn)).get_until(deadline);
}

}  // namespace streamcheck
