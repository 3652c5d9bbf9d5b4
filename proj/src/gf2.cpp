// SPDX-License-Identifier: Apache-2.0

#include "nmds/gf2.hpp"

#include <bit>
#include <stdexcept>

namespace nmds::gf2 {

Vector& Vector::operator^=(const Vector& other) {
  if (other.bits_ != bits_) throw std::invalid_argument("gf2::Vector size mismatch");
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
  return *this;
}

bool Vector::is_zero() const noexcept {
  for (auto w : words_)
    if (w != 0) return false;
  return true;
}

std::size_t Vector::lowest_set() const noexcept {
  for (std::size_t w = 0; w < words_.size(); ++w)
    if (words_[w] != 0) return w * 64 + static_cast<std::size_t>(std::countr_zero(words_[w]));
  return bits_;
}

Vector node_row(const CodeParams& params, NodeId id) {
  const auto k = static_cast<std::size_t>(params.k());
  Vector row(k);
  if (id.is_parity()) {
    for (std::size_t j = 0; j < k; ++j) row.set(j);
    row.set(static_cast<std::size_t>(id.partition), false);
  } else {
    row.set(static_cast<std::size_t>(id.partition));
  }
  return row;
}

namespace {

// Reduced basis keyed by pivot column; basis[c] has lowest set bit c.
class Basis {
 public:
  explicit Basis(std::size_t bits) : slots_(bits) {}

  Vector reduce(Vector v) const {
    for (auto pivot = v.lowest_set(); pivot < v.size(); pivot = v.lowest_set()) {
      if (slots_[pivot].size() == 0) break;
      v ^= slots_[pivot];
    }
    return v;
  }

  bool insert(const Vector& v) {
    Vector r = reduce(v);
    if (r.is_zero()) return false;
    slots_[r.lowest_set()] = std::move(r);
    ++rank_;
    return true;
  }

  std::size_t rank() const noexcept { return rank_; }

 private:
  std::vector<Vector> slots_;
  std::size_t rank_ = 0;
};

}  // namespace

std::size_t rank(std::span<const Vector> rows) {
  if (rows.empty()) return 0;
  Basis basis(rows.front().size());
  for (const auto& r : rows) basis.insert(r);
  return basis.rank();
}

bool in_span(std::span<const Vector> rows, const Vector& target) {
  Basis basis(target.size());
  for (const auto& r : rows) basis.insert(r);
  return basis.reduce(target).is_zero();
}

}  // namespace nmds::gf2
