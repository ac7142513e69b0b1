#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace gradescore {

using Rng = std::mt19937_64;

/// FNV-1a over a byte string, 64-bit variant.
std::uint64_t fnv1a64(std::string_view bytes);

/// splitmix64 finalizer; maps correlated inputs to well-spread seeds.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic per-key stream: the same (seed, key) pair always yields an
/// engine in the same state, independent of any other stream.
Rng derive_rng(std::uint64_t seed, std::string_view key);

/// Uniform draw from [0, n). Rejection sampling, so the result depends only
/// on the engine's output sequence, not on library internals.
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Index k with probability weights[k] / sum(weights). Weights must be
/// positive and finite. Hand-rolled cumulative walk for the same
/// cross-platform determinism as uniform_index.
std::size_t weighted_index(Rng& rng, std::span<const double> weights);

}  // namespace gradescore
