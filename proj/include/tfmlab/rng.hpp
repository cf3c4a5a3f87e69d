#pragma once

#include <cstdint>
#include <string_view>

namespace tfmlab {

// splitmix64 finalizer
constexpr std::uint64_t Mix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// FNV-1a, used to turn purpose labels into stream keys
constexpr std::uint64_t HashLabel(std::string_view label)
{
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : label)
  {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/**
 * Counter-based stream. Draw j of stream (seed, purpose, replication) is a pure
 * function of those four numbers, so replications can run on any worker in any
 * order and still see identical randomness.
 */
class RngStream
{
public:
  RngStream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t replication)
    : key_(Mix64(Mix64(seed ^ Mix64(purpose)) ^ replication))
  {}

  std::uint64_t NextU64()
  {
    return Mix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_);
  }

  // uniform on [0, 1) with 53 random bits
  double NextUniform()
  {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t counter() const
  {
    return counter_;
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_{0};
};

inline std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view label)
{
  return Mix64(seed ^ HashLabel(label));
}

}  // namespace tfmlab
