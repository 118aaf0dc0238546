#pragma once

#include <chrono>
#include <mutex>

namespace tenq {

// Monotonic time source. Injected wherever wall-clock behavior must be testable
// (rate limiting, partition budgets).
class Clock {
public:
    using duration = std::chrono::nanoseconds;
    using time_point = std::chrono::time_point<std::chrono::steady_clock, duration>;

    virtual ~Clock() = default;
    virtual time_point now() const = 0;
    virtual void sleep_until(time_point t) const = 0;
};

class SteadyClock final : public Clock {
public:
    time_point now() const override;
    void sleep_until(time_point t) const override;
};

const Clock& steady_clock();

// Deterministic clock for tests. Optionally advances by a fixed tick on every
// now() call; sleep_until jumps straight to the target.
class FakeClock final : public Clock {
public:
    explicit FakeClock(duration tick_per_read = duration::zero()) : tick_(tick_per_read) {}

    time_point now() const override;
    void sleep_until(time_point t) const override;
    void advance(duration d);

private:
    mutable std::mutex mutex_;
    mutable time_point now_{};
    duration tick_;
};

class Deadline {
public:
    Deadline(const Clock& clock, Clock::duration budget)
        : clock_(&clock), end_(clock.now() + budget) {}

    bool expired() const { return clock_->now() >= end_; }
    Clock::time_point end() const { return end_; }

private:
    const Clock* clock_;
    Clock::time_point end_;
};

}  // namespace tenq
