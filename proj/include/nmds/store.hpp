// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nmds/codec.hpp"
#include "nmds/repair.hpp"

namespace nmds::store {

// Shard container: fixed little-endian header followed by the payload.
//
//   offset size field
//   0      4    magic "NMDS"
//   4      1    version (1)
//   5      2    k
//   7      1    role (0 systematic, 1 parity)
//   8      2    partition (0-based)
//   10     4    stripe_index
//   14     4    fragment_size
//   18     8    original_file_len
//   26     4    payload_crc32 (IEEE, payload only)
//   30     ...  payload, fragment_size bytes
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 30;

struct ShardHeader {
  std::uint16_t k = 0;
  Role role = Role::Systematic;
  std::uint16_t partition = 0;
  std::uint32_t stripe_index = 0;
  std::uint32_t fragment_size = 0;
  std::uint64_t original_file_len = 0;
  std::uint32_t payload_crc32 = 0;

  NodeId node() const { return {partition, role}; }
  friend bool operator==(const ShardHeader&, const ShardHeader&) = default;
};

enum class ShardErrorKind { Truncated, BadMagic, UnsupportedVersion, CrcMismatch, BadHeader };

std::string to_string(ShardErrorKind kind);

class ShardError : public std::runtime_error {
 public:
  ShardError(ShardErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ShardErrorKind kind() const noexcept { return kind_; }

 private:
  ShardErrorKind kind_;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Serializes header + payload. payload_crc32 is computed from the payload;
/// the value in `header` is ignored.
std::vector<std::uint8_t> write_shard(const ShardHeader& header, const Packet& payload);

struct ParsedShard {
  ShardHeader header;
  Packet payload;
};

/// Throws ShardError with a distinct kind per failure.
ParsedShard read_shard(std::span<const std::uint8_t> bytes);

struct ShardKey {
  std::uint64_t stripe = 0;
  NodeId node;
  friend auto operator<=>(const ShardKey&, const ShardKey&) = default;
};

struct FileManifest {
  std::string basename;
  int k = 0;
  std::uint32_t fragment_size = 0;
  std::uint64_t stripe_count = 0;
  std::uint64_t original_file_len = 0;
  std::map<ShardKey, std::uint32_t> checksums;

  CodeParams params() const { return make_params(k); }
  std::uint64_t stripe_bytes() const {
    return static_cast<std::uint64_t>(k) * fragment_size;
  }
};

/// key = value lines, stable order.
std::string manifest_to_text(const FileManifest& manifest);
FileManifest parse_manifest(std::string_view text);

struct SplitFile {
  std::vector<std::vector<Packet>> stripes;  // k fragments each
  FileManifest manifest;                     // checksums left empty
};

/// Zero-pads the last stripe. Empty input yields one all-zero stripe.
SplitFile split_file(std::span<const std::uint8_t> data, int k, std::uint32_t fragment_size);

/// Inverse of split_file. An empty entry marks a stripe that was not decoded.
std::vector<std::uint8_t> assemble_file(std::span<const std::vector<Packet>> stripes,
                                        const FileManifest& manifest);

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string shard_filename(const std::string& basename, ShardKey key);

/// Raw shard bytes for one encoded file, keyed by (stripe, node).
struct ShardSet {
  FileManifest manifest;
  std::map<ShardKey, std::vector<std::uint8_t>> shards;
};

/// split + encode + serialize; fills the manifest checksums.
ShardSet encode_file(std::span<const std::uint8_t> data, int k, std::uint32_t fragment_size,
                     const std::string& basename);

enum class ScrubReason {
  Missing,
  Truncated,
  BadMagic,
  UnsupportedVersion,
  CrcMismatch,
  HeaderMismatch,    // parses, but disagrees with the manifest or its filename
  ChecksumMismatch,  // payload CRC differs from the manifest record
};

std::string to_string(ScrubReason reason);

struct ScrubFinding {
  NodeId node;
  ScrubReason reason;
  friend bool operator==(const ScrubFinding&, const ScrubFinding&) = default;
};

struct ScrubReport {
  std::map<std::uint64_t, std::vector<ScrubFinding>> by_stripe;  // only stripes with findings
  bool clean() const { return by_stripe.empty(); }
};

ScrubReport scrub(const ShardSet& set);

/// Decodes every stripe from intact shards and reassembles the file.
/// Throws StoreError naming the first undecodable stripe.
std::vector<std::uint8_t> decode_shard_set(const ShardSet& set);

struct StripeRepair {
  std::uint64_t stripe = 0;
  std::vector<RepairPlan> plans;
};

struct RepairOutcome {
  std::vector<StripeRepair> stripes;
  BandwidthReport per_stripe_max;  // bandwidth of the most expensive stripe
  BandwidthReport total;
};

/// Regenerates damaged shards in place. With `targets` empty every damaged
/// shard is repaired; otherwise only the listed nodes (when damaged).
/// Throws StoreError if a target cannot be repaired.
RepairOutcome repair_shard_set(ShardSet& set, std::span<const NodeId> targets = {});

namespace fs = std::filesystem;

/// Writes the manifest and every shard in `set` to `dir`.
void save_shard_set(const fs::path& dir, const ShardSet& set);
/// Writes only the listed shards.
void save_shards(const fs::path& dir, const ShardSet& set, std::span<const ShardKey> keys);
/// Loads the manifest `<basename>.manifest` (or the only manifest in `dir`
/// when basename is empty) and every shard file present.
ShardSet load_shard_set(const fs::path& dir, const std::string& basename = {});

}  // namespace nmds::store
