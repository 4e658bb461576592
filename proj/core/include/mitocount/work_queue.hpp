// Copyright 2026 The mitocount Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>

namespace mitocount {

enum class PushResult { kOk, kFull, kClosed };

/// Pull-based FIFO shared by producer and consumer pools. Implementations
/// may be in-process or networked.
template <typename T>
class WorkQueue {
 public:
  virtual ~WorkQueue() = default;
  /// Blocks while full. Returns false (leaving `item` untouched) once closed.
  virtual bool push(T&& item) = 0;
  /// Never blocks; `item` is consumed only on kOk.
  virtual PushResult try_push(T&& item) = 0;
  /// Blocks while empty; nullopt once closed and drained.
  virtual std::optional<T> pop() = 0;
  /// Wakes every waiter; queued items stay poppable.
  virtual void close() = 0;
  [[nodiscard]] virtual std::size_t size() const = 0;
  [[nodiscard]] virtual std::size_t capacity() const noexcept = 0;
  [[nodiscard]] virtual std::size_t high_water() const = 0;
};

template <typename T>
class BoundedQueue final : public WorkQueue<T> {
 public:
  /// Called with the new depth after every push and pop, under the queue lock.
  using DepthObserver = std::function<void(std::size_t depth)>;

  explicit BoundedQueue(std::size_t capacity, DepthObserver observer = nullptr)
      : capacity_(capacity), observer_(std::move(observer)) {
    if (capacity_ == 0) throw std::invalid_argument("queue capacity must be >= 1");
  }

  bool push(T&& item) override {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    enqueue(std::move(item));
    return true;
  }

  PushResult try_push(T&& item) override {
    std::lock_guard lock(mutex_);
    if (closed_) return PushResult::kClosed;
    if (items_.size() >= capacity_) return PushResult::kFull;
    enqueue(std::move(item));
    return PushResult::kOk;
  }

  std::optional<T> pop() override {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    if (observer_) observer_(items_.size());
    not_full_.notify_one();
    return item;
  }

  void close() override {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    not_full_.notify_all();
    not_empty_.notify_all();
  }

  std::size_t size() const override {
    std::lock_guard lock(mutex_);
    return items_.size();
  }
  std::size_t capacity() const noexcept override { return capacity_; }
  std::size_t high_water() const override {
    std::lock_guard lock(mutex_);
    return high_water_;
  }

 private:
  void enqueue(T&& item) {
    items_.push_back(std::move(item));
    if (items_.size() > capacity_) throw std::logic_error("bounded queue exceeded its capacity");
    high_water_ = std::max(high_water_, items_.size());
    if (observer_) observer_(items_.size());
    not_empty_.notify_one();
  }

  const std::size_t capacity_;
  DepthObserver observer_;
  mutable std::mutex mutex_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<T> items_;
  std::size_t high_water_ = 0;
  bool closed_ = false;
};

}  // namespace mitocount
