#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace coca {

/// Name and version of the generator contract. Bumped whenever the stream
/// produced for a given seed changes.
inline constexpr std::string_view kRngName = "mt19937_64/splitmix64-v1";

/// SplitMix64 finalizer, used to derive independent seeds.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for stream `index` under `base`: hash(base, index). Replicate i of
/// an experiment uses derive_seed(base_seed, i) in both serial and parallel runs.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

using Rng = std::mt19937_64;

[[nodiscard]] Rng make_rng(std::uint64_t seed);

}  // namespace coca
