// SPDX-License-Identifier: Apache-2.0

#include "nmds/kernels.hpp"

#include <bit>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nmds::kernels {

void xor_into(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src) {
  if (dst.size() != src.size()) throw std::invalid_argument("xor_into: size mismatch");
  std::uint8_t* d = dst.data();
  const std::uint8_t* s = src.data();
  const std::size_t n = dst.size();
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) d[i] ^= s[i];
}

std::vector<Stripe> encode_stripes_serial(const CodeParams& params,
                                          std::span<const std::vector<Packet>> fragments) {
  std::vector<Stripe> out;
  out.reserve(fragments.size());
  for (const auto& f : fragments) out.push_back(encode_stripe(params, f));
  return out;
}

std::vector<Stripe> encode_stripes_parallel(const CodeParams& params,
                                            std::span<const std::vector<Packet>> fragments) {
  const auto count = static_cast<std::ptrdiff_t>(fragments.size());
  std::vector<std::optional<Stripe>> slots(fragments.size());
  // exceptions may not escape an OpenMP region
  bool failed = false;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    try {
      slots[static_cast<std::size_t>(s)] = encode_stripe(params, fragments[static_cast<std::size_t>(s)]);
    } catch (...) {
#pragma omp atomic write
      failed = true;
    }
  }
  if (failed) return encode_stripes_serial(params, fragments);  // rethrows with context

  std::vector<Stripe> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace {

std::uint32_t row_mask(int k, int node_index) {
  const int partition = node_index / 2;
  const std::uint32_t unit = std::uint32_t{1} << partition;
  if (node_index % 2 == 0) return unit;
  const std::uint32_t ones = k == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << k) - 1;
  return ones & ~unit;
}

struct RowTable {
  explicit RowTable(int k) : k(k) {
    for (int i = 0; i < 2 * k; ++i) rows[static_cast<std::size_t>(i)] = row_mask(k, i);
  }
  int k;
  std::uint32_t rows[kMaxMaskNodes]{};
};

bool full_rank(const RowTable& t, std::uint32_t failed_mask) {
  std::uint32_t basis[32]{};
  int rank = 0;
  const int n = 2 * t.k;
  for (int i = 0; i < n && rank < t.k; ++i) {
    if ((failed_mask >> i) & 1u) continue;
    std::uint32_t v = t.rows[i];
    while (v != 0) {
      const int pivot = std::countr_zero(v);
      if (basis[pivot] == 0) {
        basis[pivot] = v;
        ++rank;
        break;
      }
      v ^= basis[pivot];
    }
  }
  return rank == t.k;
}

void check_scan_size(int k) {
  if (k < 1 || 2 * k > kMaxMaskNodes - 2)
    throw std::invalid_argument("bitmask scan supports 2k <= 30");
}

}  // namespace

bool survivors_full_rank(int k, std::uint32_t failed_mask) {
  if (k < 1 || 2 * k > kMaxMaskNodes) throw std::invalid_argument("bitmask rank needs 2k <= 32");
  return full_rank(RowTable(k), failed_mask);
}

std::vector<std::uint64_t> count_recoverable_serial(int k) {
  check_scan_size(k);
  const RowTable table(k);
  const int n = 2 * k;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(n + 1), 0);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t m = 0; m < total; ++m) {
    const auto mask = static_cast<std::uint32_t>(m);
    if (full_rank(table, mask)) ++counts[static_cast<std::size_t>(std::popcount(mask))];
  }
  return counts;
}

std::vector<std::uint64_t> count_recoverable_parallel(int k) {
  check_scan_size(k);
  const RowTable table(k);
  const int n = 2 * k;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(n + 1), 0);
  const auto total = static_cast<std::int64_t>(std::int64_t{1} << n);

#pragma omp parallel
  {
    std::vector<std::uint64_t> local(counts.size(), 0);
#pragma omp for schedule(static) nowait
    for (std::int64_t m = 0; m < total; ++m) {
      const auto mask = static_cast<std::uint32_t>(m);
      if (full_rank(table, mask)) ++local[static_cast<std::size_t>(std::popcount(mask))];
    }
#pragma omp critical(nmds_count_merge)
    for (std::size_t f = 0; f < counts.size(); ++f) counts[f] += local[f];
  }
  return counts;
}

}  // namespace nmds::kernels
