#include "tenq/clock.hpp"

#include <thread>

namespace tenq {

Clock::time_point SteadyClock::now() const {
    return std::chrono::time_point_cast<duration>(std::chrono::steady_clock::now());
}

void SteadyClock::sleep_until(time_point t) const {
    std::this_thread::sleep_until(t);
}

const Clock& steady_clock() {
    static const SteadyClock clock;
    return clock;
}

Clock::time_point FakeClock::now() const {
    std::lock_guard lock(mutex_);
    auto current = now_;
    now_ += tick_;
    return current;
}

void FakeClock::sleep_until(time_point t) const {
    std::lock_guard lock(mutex_);
    if (t > now_) now_ = t;
}

void FakeClock::advance(duration d) {
    std::lock_guard lock(mutex_);
    now_ += d;
}

}  // namespace tenq
