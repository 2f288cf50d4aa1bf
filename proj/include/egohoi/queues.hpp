#pragma once

#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>

namespace egohoi {

// Bounded FIFO connecting pipeline stages. push() blocks when full (the
// backpressure path); push_drop_oldest() never blocks (the visualization
// path). close() lets consumers drain and then observe end-of-stream.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    // Blocks while full. Returns false if the queue was closed.
    bool push(T item) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
        if (closed_) return false;
        items_.push_back(std::move(item));
        not_empty_.notify_one();
        return true;
    }

    // Never blocks; evicts the oldest element when full. Returns the number
    // of dropped elements (0 or 1), or -1 if closed.
    int push_drop_oldest(T item) {
        std::lock_guard lock(mutex_);
        if (closed_) return -1;
        int dropped = 0;
        if (items_.size() >= capacity_) {
            items_.pop_front();
            dropped = 1;
        }
        items_.push_back(std::move(item));
        not_empty_.notify_one();
        return dropped;
    }

    // Blocks until an item is available or the queue is closed and drained.
    std::optional<T> pop() {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
        return take(lock);
    }

    // Waits at most until `deadline` (steady clock); nullopt on timeout or
    // closed-and-drained. The deadline is re-checked against the steady
    // clock around a system-clock wait: wall-clock jumps only cause early
    // re-loops, and the system-clock wait keeps sanitizer runtimes that
    // lack a pthread_cond_clockwait interceptor working.
    std::optional<T> pop_until(const std::chrono::steady_clock::time_point& deadline) {
        std::unique_lock lock(mutex_);
        const auto ready = [&] { return !items_.empty() || closed_; };
        while (!ready()) {
            const auto remaining = deadline - std::chrono::steady_clock::now();
            if (remaining <= std::chrono::steady_clock::duration::zero()) break;
            not_empty_.wait_until(lock, std::chrono::system_clock::now() + remaining);
        }
        return take(lock);
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return items_.size();
    }

    bool closed() const {
        std::lock_guard lock(mutex_);
        return closed_;
    }

private:
    std::optional<T> take(std::unique_lock<std::mutex>& lock) {
        if (items_.empty()) return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        lock.unlock();
        return item;
    }

    mutable std::mutex mutex_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
    std::deque<T> items_;
    std::size_t capacity_;
    bool closed_ = false;
};

}  // namespace egohoi
