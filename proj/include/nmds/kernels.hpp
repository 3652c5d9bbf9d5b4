// SPDX-License-Identifier: Apache-2.0

// Data-parallel inner loops. Every parallel kernel has a serial reference
// that produces identical output; tests compare the two and bench/ times them.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nmds/codec.hpp"

namespace nmds::kernels {

void xor_into(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src);

/// fragments[s] holds the k data fragments of stripe s.
std::vector<Stripe> encode_stripes_serial(const CodeParams& params,
                                          std::span<const std::vector<Packet>> fragments);
std::vector<Stripe> encode_stripes_parallel(const CodeParams& params,
                                            std::span<const std::vector<Packet>> fragments);

/// Largest node count the bitmask scans accept (rows fit in 32 bits).
inline constexpr int kMaxMaskNodes = 32;

/// Bit i of a node mask is NodeId::from_index(i).
/// True when the nodes outside `failed_mask` have GF(2) rank k.
bool survivors_full_rank(int k, std::uint32_t failed_mask);

/// result[f] = number of f-node failure patterns that leave the data
/// recoverable, for f = 0..2k. Requires 2k <= kMaxMaskNodes - 2.
std::vector<std::uint64_t> count_recoverable_serial(int k);
std::vector<std::uint64_t> count_recoverable_parallel(int k);

}  // namespace nmds::kernels
