// SPDX-License-Identifier: Apache-2.0

#include "nmds/store.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <variant>

#include <boost/crc.hpp>

#include "nmds/kernels.hpp"

namespace nmds::store {

namespace {

constexpr std::uint8_t kMagic[4] = {'N', 'M', 'D', 'S'};

template <typename T>
void put_le(std::span<std::uint8_t> out, std::size_t offset, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out[offset + i] = static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(in[offset + i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

std::string to_string(ShardErrorKind kind) {
  switch (kind) {
    case ShardErrorKind::Truncated: return "truncated";
    case ShardErrorKind::BadMagic: return "bad-magic";
    case ShardErrorKind::UnsupportedVersion: return "unsupported-version";
    case ShardErrorKind::CrcMismatch: return "crc-mismatch";
    case ShardErrorKind::BadHeader: return "bad-header";
  }
  return "unknown";
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::vector<std::uint8_t> write_shard(const ShardHeader& header, const Packet& payload) {
  if (header.k < CodeParams::kMinK || header.partition >= header.k)
    throw ShardError(ShardErrorKind::BadHeader, "partition must be below k and k >= 2");
  if (payload.size() != header.fragment_size || payload.size() == 0)
    throw ShardError(ShardErrorKind::BadHeader, "payload length must equal fragment_size");
  std::vector<std::uint8_t> out(kHeaderSize + payload.size());
  std::copy(std::begin(kMagic), std::end(kMagic), out.begin());
  put_le<std::uint8_t>(out, 4, kVersion);
  put_le<std::uint16_t>(out, 5, header.k);
  put_le<std::uint8_t>(out, 7, static_cast<std::uint8_t>(header.role));
  put_le<std::uint16_t>(out, 8, header.partition);
  put_le<std::uint32_t>(out, 10, header.stripe_index);
  put_le<std::uint32_t>(out, 14, header.fragment_size);
  put_le<std::uint64_t>(out, 18, header.original_file_len);
  put_le<std::uint32_t>(out, 26, crc32(payload.bytes()));
  std::copy(payload.bytes().begin(), payload.bytes().end(), out.begin() + kHeaderSize);
  return out;
}

ParsedShard read_shard(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize)
    throw ShardError(ShardErrorKind::Truncated,
                     "shard is " + std::to_string(bytes.size()) + " bytes, header needs " +
                         std::to_string(kHeaderSize));
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin()))
    throw ShardError(ShardErrorKind::BadMagic, "not a shard (bad magic)");
  if (const auto v = bytes[4]; v != kVersion)
    throw ShardError(ShardErrorKind::UnsupportedVersion,
                     "unsupported shard version " + std::to_string(v));

  ShardHeader h;
  h.k = get_le<std::uint16_t>(bytes, 5);
  const auto role = bytes[7];
  h.partition = get_le<std::uint16_t>(bytes, 8);
  h.stripe_index = get_le<std::uint32_t>(bytes, 10);
  h.fragment_size = get_le<std::uint32_t>(bytes, 14);
  h.original_file_len = get_le<std::uint64_t>(bytes, 18);
  h.payload_crc32 = get_le<std::uint32_t>(bytes, 26);
  if (role > 1) throw ShardError(ShardErrorKind::BadHeader, "role byte must be 0 or 1");
  h.role = static_cast<Role>(role);
  if (h.k < CodeParams::kMinK || h.partition >= h.k || h.fragment_size == 0)
    throw ShardError(ShardErrorKind::BadHeader, "header fields out of range");

  const auto payload = bytes.subspan(kHeaderSize);
  if (payload.size() < h.fragment_size)
    throw ShardError(ShardErrorKind::Truncated,
                     "payload is " + std::to_string(payload.size()) + " bytes, expected " +
                         std::to_string(h.fragment_size));
  if (payload.size() > h.fragment_size)
    throw ShardError(ShardErrorKind::BadHeader, "trailing bytes after payload");
  if (crc32(payload) != h.payload_crc32)
    throw ShardError(ShardErrorKind::CrcMismatch, "payload CRC mismatch");
  return {h, Packet(std::vector<std::uint8_t>(payload.begin(), payload.end()))};
}

std::string manifest_to_text(const FileManifest& m) {
  std::ostringstream out;
  out << "format = nmds-manifest\n"
      << "version = " << static_cast<int>(kVersion) << "\n"
      << "basename = " << m.basename << "\n"
      << "k = " << m.k << "\n"
      << "fragment_size = " << m.fragment_size << "\n"
      << "stripe_count = " << m.stripe_count << "\n"
      << "original_file_len = " << m.original_file_len << "\n";
  for (const auto& [key, crc] : m.checksums)
    out << "crc.s" << key.stripe << "." << to_string(key.node) << " = " << std::hex
        << std::setw(8) << std::setfill('0') << crc << std::dec << "\n";
  return out.str();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, int base = 10) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out, base);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw StoreError("manifest: bad value for " + std::string(key) + ": '" +
                     std::string(value) + "'");
  return out;
}

}  // namespace

FileManifest parse_manifest(std::string_view text) {
  FileManifest m;
  bool saw_format = false;
  bool saw_k = false;
  bool saw_fs = false;
  bool saw_count = false;
  bool saw_len = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw StoreError("manifest: expected key = value, got '" + std::string(line) + "'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "format") {
      if (value != "nmds-manifest") throw StoreError("manifest: unknown format");
      saw_format = true;
    } else if (key == "version") {
      if (parse_number<int>(key, value) != kVersion)
        throw StoreError("manifest: unsupported version");
    } else if (key == "basename") {
      m.basename = std::string(value);
    } else if (key == "k") {
      m.k = parse_number<int>(key, value);
      saw_k = true;
    } else if (key == "fragment_size") {
      m.fragment_size = parse_number<std::uint32_t>(key, value);
      saw_fs = true;
    } else if (key == "stripe_count") {
      m.stripe_count = parse_number<std::uint64_t>(key, value);
      saw_count = true;
    } else if (key == "original_file_len") {
      m.original_file_len = parse_number<std::uint64_t>(key, value);
      saw_len = true;
    } else if (key.starts_with("crc.s")) {
      const auto rest = key.substr(5);
      const auto dot = rest.find('.');
      if (dot == std::string_view::npos) throw StoreError("manifest: bad checksum key");
      ShardKey sk;
      sk.stripe = parse_number<std::uint64_t>(key, rest.substr(0, dot));
      const auto node = parse_node(rest.substr(dot + 1));
      if (!node) throw StoreError("manifest: bad node in " + std::string(key));
      sk.node = *node;
      m.checksums[sk] = parse_number<std::uint32_t>(key, value, 16);
    } else {
      throw StoreError("manifest: unknown key '" + std::string(key) + "'");
    }
  }
  if (!saw_format || !saw_k || !saw_fs || !saw_count || !saw_len)
    throw StoreError("manifest: missing required keys");
  if (m.k < CodeParams::kMinK || m.k > CodeParams::kMaxK) throw StoreError("manifest: bad k");
  if (m.fragment_size == 0) throw StoreError("manifest: fragment_size must be positive");
  const auto expected =
      m.original_file_len == 0 ? 1 : (m.original_file_len + m.stripe_bytes() - 1) / m.stripe_bytes();
  if (m.stripe_count != expected)
    throw StoreError("manifest: stripe_count " + std::to_string(m.stripe_count) +
                     " does not match file length (expected " + std::to_string(expected) + ")");
  for (const auto& [key, crc] : m.checksums)
    if (key.stripe >= m.stripe_count || key.node.partition >= m.k)
      throw StoreError("manifest: checksum entry out of range");
  return m;
}

SplitFile split_file(std::span<const std::uint8_t> data, int k, std::uint32_t fragment_size) {
  const auto params = make_params(k);
  if (fragment_size == 0) throw StoreError("fragment_size must be at least 1");
  SplitFile out;
  auto& m = out.manifest;
  m.k = params.k();
  m.fragment_size = fragment_size;
  m.original_file_len = data.size();
  const std::uint64_t stripe_bytes = m.stripe_bytes();
  m.stripe_count = data.empty() ? 1 : (data.size() + stripe_bytes - 1) / stripe_bytes;
  if (m.stripe_count > UINT32_MAX) throw StoreError("file needs more than 2^32 stripes");

  out.stripes.resize(m.stripe_count);
  for (std::uint64_t s = 0; s < m.stripe_count; ++s) {
    auto& frags = out.stripes[s];
    frags.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      Packet p(fragment_size);
      const std::uint64_t begin = s * stripe_bytes + static_cast<std::uint64_t>(i) * fragment_size;
      if (begin < data.size()) {
        const auto n = std::min<std::uint64_t>(fragment_size, data.size() - begin);
        std::memcpy(p.mutable_bytes().data(), data.data() + begin, n);
      }
      frags.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<std::uint8_t> assemble_file(std::span<const std::vector<Packet>> stripes,
                                        const FileManifest& m) {
  if (stripes.size() != m.stripe_count)
    throw StoreError("stripe count mismatch: have " + std::to_string(stripes.size()) +
                     ", manifest says " + std::to_string(m.stripe_count));
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(m.stripe_count * m.stripe_bytes()));
  for (std::size_t s = 0; s < stripes.size(); ++s) {
    if (stripes[s].empty()) throw StoreError("missing stripe " + std::to_string(s));
    if (stripes[s].size() != static_cast<std::size_t>(m.k))
      throw StoreError("stripe " + std::to_string(s) + " has the wrong fragment count");
    for (const auto& f : stripes[s]) {
      if (f.size() != m.fragment_size)
        throw StoreError("stripe " + std::to_string(s) + " has a wrong-sized fragment");
      out.insert(out.end(), f.bytes().begin(), f.bytes().end());
    }
  }
  if (out.size() < m.original_file_len) throw StoreError("stripes shorter than original file");
  out.resize(static_cast<std::size_t>(m.original_file_len));
  return out;
}

std::string shard_filename(const std::string& basename, ShardKey key) {
  return basename + ".s" + std::to_string(key.stripe) + "." + to_string(key.node) + ".shard";
}

namespace {

ShardHeader header_for(const FileManifest& m, ShardKey key) {
  ShardHeader h;
  h.k = static_cast<std::uint16_t>(m.k);
  h.role = key.node.role;
  h.partition = static_cast<std::uint16_t>(key.node.partition);
  h.stripe_index = static_cast<std::uint32_t>(key.stripe);
  h.fragment_size = m.fragment_size;
  h.original_file_len = m.original_file_len;
  return h;
}

}  // namespace

ShardSet encode_file(std::span<const std::uint8_t> data, int k, std::uint32_t fragment_size,
                     const std::string& basename) {
  auto split = split_file(data, k, fragment_size);
  ShardSet set;
  set.manifest = std::move(split.manifest);
  set.manifest.basename = basename;
  const auto params = set.manifest.params();
  const auto stripes = kernels::encode_stripes_parallel(params, split.stripes);
  for (std::uint64_t s = 0; s < stripes.size(); ++s) {
    for (int i = 0; i < params.n(); ++i) {
      const ShardKey key{s, NodeId::from_index(i)};
      const auto& payload = stripes[s].packet(key.node);
      set.manifest.checksums[key] = crc32(payload.bytes());
      set.shards[key] = write_shard(header_for(set.manifest, key), payload);
    }
  }
  return set;
}

std::string to_string(ScrubReason reason) {
  switch (reason) {
    case ScrubReason::Missing: return "missing";
    case ScrubReason::Truncated: return "truncated";
    case ScrubReason::BadMagic: return "bad-magic";
    case ScrubReason::UnsupportedVersion: return "unsupported-version";
    case ScrubReason::CrcMismatch: return "crc-mismatch";
    case ScrubReason::HeaderMismatch: return "header-mismatch";
    case ScrubReason::ChecksumMismatch: return "checksum-mismatch";
  }
  return "unknown";
}

namespace {

ScrubReason reason_for(ShardErrorKind kind) {
  switch (kind) {
    case ShardErrorKind::Truncated: return ScrubReason::Truncated;
    case ShardErrorKind::BadMagic: return ScrubReason::BadMagic;
    case ShardErrorKind::UnsupportedVersion: return ScrubReason::UnsupportedVersion;
    case ShardErrorKind::CrcMismatch: return ScrubReason::CrcMismatch;
    case ShardErrorKind::BadHeader: return ScrubReason::HeaderMismatch;
  }
  return ScrubReason::HeaderMismatch;
}

// Parses and validates one shard against the manifest.
std::variant<Packet, ScrubReason> check_shard(const ShardSet& set, ShardKey key) {
  const auto it = set.shards.find(key);
  if (it == set.shards.end()) return ScrubReason::Missing;
  ParsedShard parsed;
  try {
    parsed = read_shard(it->second);
  } catch (const ShardError& e) {
    return reason_for(e.kind());
  }
  auto expected = header_for(set.manifest, key);
  expected.payload_crc32 = parsed.header.payload_crc32;
  if (parsed.header != expected) return ScrubReason::HeaderMismatch;
  if (auto c = set.manifest.checksums.find(key);
      c != set.manifest.checksums.end() && c->second != parsed.header.payload_crc32)
    return ScrubReason::ChecksumMismatch;
  return std::move(parsed.payload);
}

}  // namespace

ScrubReport scrub(const ShardSet& set) {
  ScrubReport report;
  const auto params = set.manifest.params();
  for (std::uint64_t s = 0; s < set.manifest.stripe_count; ++s) {
    for (int i = 0; i < params.n(); ++i) {
      const ShardKey key{s, NodeId::from_index(i)};
      auto r = check_shard(set, key);
      if (auto* reason = std::get_if<ScrubReason>(&r))
        report.by_stripe[s].push_back({key.node, *reason});
    }
  }
  return report;
}

std::vector<std::uint8_t> decode_shard_set(const ShardSet& set) {
  const auto params = set.manifest.params();
  std::vector<std::vector<Packet>> stripes(set.manifest.stripe_count);
  for (std::uint64_t s = 0; s < set.manifest.stripe_count; ++s) {
    std::map<NodeId, Packet> intact;
    for (int i = 0; i < params.n(); ++i) {
      const ShardKey key{s, NodeId::from_index(i)};
      auto r = check_shard(set, key);
      if (auto* p = std::get_if<Packet>(&r)) intact.emplace(key.node, std::move(*p));
    }
    std::vector<NodeId> available;
    for (const auto& [id, _] : intact) available.push_back(id);
    const auto chosen = select_recovery_set(params, available);
    if (!chosen)
      throw StoreError("stripe " + std::to_string(s) + " is undecodable: intact shards " +
                       to_string(available));
    std::vector<Share> shares;
    for (auto id : *chosen) shares.push_back({id, std::move(intact.at(id))});
    stripes[s] = decode(params, shares);
  }
  return assemble_file(stripes, set.manifest);
}

RepairOutcome repair_shard_set(ShardSet& set, std::span<const NodeId> targets) {
  const auto params = set.manifest.params();
  for (auto t : targets)
    if (!t.valid_for(params)) throw StoreError("repair target " + to_string(t) + " out of range");

  RepairOutcome outcome;
  std::vector<RepairPlan> all_plans;
  for (const auto& [stripe, findings] : scrub(set).by_stripe) {
    std::vector<NodeId> failed;
    for (const auto& f : findings) failed.push_back(f.node);
    std::vector<NodeId> wanted;
    for (auto id : failed)
      if (targets.empty() || std::find(targets.begin(), targets.end(), id) != targets.end())
        wanted.push_back(id);
    if (wanted.empty()) continue;

    std::vector<RepairPlan> plans;
    try {
      plans = plan_cheapest_first(params, failed, wanted);
    } catch (const CodeError& e) {
      throw StoreError("stripe " + std::to_string(stripe) + ": " + e.what());
    }

    std::map<NodeId, Packet> packets;
    for (int i = 0; i < params.n(); ++i) {
      const ShardKey key{stripe, NodeId::from_index(i)};
      auto r = check_shard(set, key);
      if (auto* p = std::get_if<Packet>(&r)) packets.emplace(key.node, std::move(*p));
    }
    for (const auto& plan : plans) {
      const ShardKey key{stripe, plan.target};
      Packet rebuilt = execute_plan(plan, packets);
      const auto crc = crc32(rebuilt.bytes());
      if (auto c = set.manifest.checksums.find(key);
          c != set.manifest.checksums.end() && c->second != crc)
        throw StoreError("stripe " + std::to_string(stripe) + ": rebuilt " +
                         to_string(plan.target) + " does not match its recorded checksum");
      set.shards[key] = write_shard(header_for(set.manifest, key), rebuilt);
      packets[plan.target] = std::move(rebuilt);
    }

    const auto bw = repair_bandwidth(plans, set.manifest.fragment_size);
    if (bw.fragment_units > outcome.per_stripe_max.fragment_units) outcome.per_stripe_max = bw;
    all_plans.insert(all_plans.end(), plans.begin(), plans.end());
    outcome.stripes.push_back({stripe, std::move(plans)});
  }
  outcome.total = repair_bandwidth(all_plans, set.manifest.fragment_size);
  return outcome;
}

namespace {

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw StoreError("cannot write " + path.string());
}

}  // namespace

void save_shards(const fs::path& dir, const ShardSet& set, std::span<const ShardKey> keys) {
  for (const auto& key : keys) {
    auto it = set.shards.find(key);
    if (it == set.shards.end()) throw StoreError("no shard to save for " + to_string(key.node));
    write_file(dir / shard_filename(set.manifest.basename, key), it->second);
  }
}

void save_shard_set(const fs::path& dir, const ShardSet& set) {
  fs::create_directories(dir);
  const auto text = manifest_to_text(set.manifest);
  write_file(dir / (set.manifest.basename + ".manifest"),
             std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  std::vector<ShardKey> keys;
  for (const auto& [key, _] : set.shards) keys.push_back(key);
  save_shards(dir, set, keys);
}

ShardSet load_shard_set(const fs::path& dir, const std::string& basename) {
  fs::path manifest_path;
  if (!basename.empty()) {
    manifest_path = dir / (basename + ".manifest");
  } else {
    if (!fs::is_directory(dir)) throw StoreError("not a directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".manifest") continue;
      if (!manifest_path.empty())
        throw StoreError("several manifests in " + dir.string() + "; pick one by name");
      manifest_path = entry.path();
    }
    if (manifest_path.empty()) throw StoreError("no manifest in " + dir.string());
  }
  const auto raw = read_file(manifest_path);
  ShardSet set;
  set.manifest = parse_manifest(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
  if (set.manifest.basename.empty()) set.manifest.basename = manifest_path.stem().string();
  const auto params = set.manifest.params();
  for (std::uint64_t s = 0; s < set.manifest.stripe_count; ++s) {
    for (int i = 0; i < params.n(); ++i) {
      const ShardKey key{s, NodeId::from_index(i)};
      const auto path = dir / shard_filename(set.manifest.basename, key);
      if (fs::exists(path)) set.shards[key] = read_file(path);
    }
  }
  return set;
}

}  // namespace nmds::store
