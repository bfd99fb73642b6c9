#pragma once

#include <cstdint>

namespace bear::budget {

// Process-wide accounting of matrix buffer allocations. Every Matrix registers
// its buffer here, so out-of-core code paths can prove they never materialize
// more than a configured budget. Memory-mapped file regions are not counted:
// they are file-backed and reclaimable by the OS.
//
// A cap of 0 means unlimited. When a cap is set, an allocation that would
// push the running total past it throws CapacityError before allocating.

void set_cap(std::uint64_t bytes);
std::uint64_t cap() noexcept;

std::uint64_t current() noexcept;
std::uint64_t peak() noexcept;
void reset_peak() noexcept;

// Called by Matrix. acquire() throws CapacityError if the cap would be exceeded.
void acquire(std::uint64_t bytes);
void release(std::uint64_t bytes) noexcept;

}  // namespace bear::budget
