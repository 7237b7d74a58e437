#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace pasa {

/// Philox4x32-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Folds a list of context coordinates into one 64-bit word.
std::uint64_t hash_context(std::initializer_list<std::uint64_t> coords);

/// A stream of random draws fully determined by (seed, context). Draw n of a
/// stream is Philox(counter = {n, context}, key = seed), so two streams with
/// the same inputs agree no matter when or on which thread they are consumed.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::initializer_list<std::uint64_t> context);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  /// Standard Gumbel, -log(-log(U)).
  double gumbel();

 private:
  PhiloxKey key_;
  std::uint64_t context_;
  std::uint64_t counter_ = 0;
  PhiloxCounter block_{};
  int used_ = 4;
};

/// Domain tags keep streams for different purposes disjoint.
enum class StreamDomain : std::uint64_t {
  kRoutingBias = 0x5241,
  kInstance = 0x494e,
  kDrift = 0x4452,
  kTrajectory = 0x5452,
  kVerify = 0x5645,
  kTest = 0x5445,
};

}  // namespace pasa
