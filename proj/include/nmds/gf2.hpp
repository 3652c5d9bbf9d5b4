// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nmds/codec.hpp"

namespace nmds::gf2 {

/// Dense bit vector over GF(2).
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t bits) : bits_(bits), words_((bits + 63) / 64, 0) {}

  std::size_t size() const noexcept { return bits_; }
  bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i, bool v = true) {
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (v) words_[i / 64] |= mask;
    else words_[i / 64] &= ~mask;
  }
  void flip(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  Vector& operator^=(const Vector& other);
  bool is_zero() const noexcept;
  /// Index of the lowest set bit, or size() when zero.
  std::size_t lowest_set() const noexcept;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Row of node `id` in the d_1..d_k basis: a unit vector for S_i, the
/// all-ones vector with bit i cleared for P_i.
Vector node_row(const CodeParams& params, NodeId id);

std::size_t rank(std::span<const Vector> rows);

/// True when `target` lies in the span of `rows`.
bool in_span(std::span<const Vector> rows, const Vector& target);

}  // namespace nmds::gf2
