#include "bear/budget.hpp"

#include <atomic>
#include <string>

#include "bear/errors.hpp"

namespace bear::budget {

namespace {
std::atomic<std::uint64_t> g_cap{0};
std::atomic<std::uint64_t> g_current{0};
std::atomic<std::uint64_t> g_peak{0};

void bump_peak(std::uint64_t now) noexcept {
  std::uint64_t prev = g_peak.load(std::memory_order_relaxed);
  while (now > prev &&
         !g_peak.compare_exchange_weak(prev, now, std::memory_order_relaxed)) {
  }
}
}  // namespace

void set_cap(std::uint64_t bytes) { g_cap.store(bytes, std::memory_order_relaxed); }

std::uint64_t cap() noexcept { return g_cap.load(std::memory_order_relaxed); }

std::uint64_t current() noexcept { return g_current.load(std::memory_order_relaxed); }

std::uint64_t peak() noexcept { return g_peak.load(std::memory_order_relaxed); }

void reset_peak() noexcept {
  g_peak.store(g_current.load(std::memory_order_relaxed), std::memory_order_relaxed);
}

void acquire(std::uint64_t bytes) {
  const std::uint64_t now = g_current.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  const std::uint64_t limit = cap();
  if (limit != 0 && now > limit) {
    g_current.fetch_sub(bytes, std::memory_order_relaxed);
    throw CapacityError("memory budget exceeded: requested " + std::to_string(bytes) +
                        " bytes with " + std::to_string(now - bytes) + " of " +
                        std::to_string(limit) + " in use");
  }
  bump_peak(now);
}

void release(std::uint64_t bytes) noexcept {
  g_current.fetch_sub(bytes, std::memory_order_relaxed);
}

}  // namespace bear::budget
