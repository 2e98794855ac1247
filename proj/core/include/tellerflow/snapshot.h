#pragma once

#include <memory>
#include <mutex>
#include <utility>

namespace tellerflow {

// Immutable value published behind a lock-protected shared_ptr. Readers take
// a reference-counted copy and keep using it across a concurrent swap.
template <typename T>
class Snapshot {
 public:
  Snapshot() : value_(std::make_shared<const T>()) {}
  explicit Snapshot(T value) : value_(std::make_shared<const T>(std::move(value))) {}

  std::shared_ptr<const T> load() const {
    std::lock_guard lock(mu_);
    return value_;
  }

  void store(T value) {
    auto next = std::make_shared<const T>(std::move(value));
    std::lock_guard lock(mu_);
    value_ = std::move(next);
  }

  // Builds the replacement from the current value under the lock, so two
  // concurrent updates cannot both derive from the same predecessor.
  template <typename Fn>
  std::shared_ptr<const T> update(Fn&& fn) {
    std::lock_guard lock(mu_);
    auto next = std::make_shared<const T>(fn(*value_));
    value_ = next;
    return next;
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const T> value_;
};

}  // namespace tellerflow
