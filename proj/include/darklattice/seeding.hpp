#pragma once

#include <cstdint>

namespace darklattice {

// splitmix64 finalizer; per-task streams are seeded with
// splitmix64(master ^ task) so results do not depend on scheduling.
constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t task_seed(std::uint64_t master, std::uint64_t task)
{
    return splitmix64(master ^ splitmix64(task));
}

} // namespace darklattice
