#pragma once

#include "topigen/category_graph.hpp"

#include <cstring>
#include <limits>
#include <string>

namespace topigen {

inline constexpr std::string_view kIndexMagic = "TOPIGEN1";

namespace detail {

inline void put_u8(std::string& out, std::uint8_t v) {
  out.push_back(static_cast<char>(v));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class IndexReader {
public:
  IndexReader(std::string_view data, std::string path)
      : data_(data), path_(std::move(path)) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  std::string bytes(std::size_t n) {
    need(n);
    std::string out(data_.substr(pos_, n));
    pos_ += n;
    return out;
  }

  bool exhausted() const { return pos_ == data_.size(); }

  void fail(const std::string& msg) const {
    throw IndexFormatError(path_ + ": " + msg);
  }

private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) {
      throw IndexFormatError(path_ + ": truncated index file");
    }
  }

  std::string_view data_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Serializes a graph to the versioned on-disk index format, written
/// atomically. Layout after the 8-byte magic: node table (kind + id, ids
/// ascending), label table, then subject and broader adjacency in CSR form.
/// All integers little-endian.
inline void save_index(const CategoryGraph& g, const std::filesystem::path& path) {
  if (g.node_count() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error("graph too large for index format (node count exceeds 32 bits)");
  }
  std::string out;
  out.append(kIndexMagic);
  detail::put_u64(out, g.node_count());
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    detail::put_u8(out, static_cast<std::uint8_t>(g.kind_of(i)));
    const std::string& id = g.id_of(i);
    detail::put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.append(id);
  }
  detail::put_u64(out, g.stored_labels().size());
  for (const auto& [node, label] : g.stored_labels()) {
    detail::put_u32(out, node);
    detail::put_u32(out, static_cast<std::uint32_t>(label.size()));
    out.append(label);
  }
  auto put_csr = [&](const std::vector<std::uint64_t>& offsets,
                     const std::vector<std::uint32_t>& targets) {
    detail::put_u64(out, targets.size());
    for (std::uint64_t o : offsets) detail::put_u64(out, o);
    for (std::uint32_t t : targets) detail::put_u32(out, t);
  };
  put_csr(g.subject_offsets(), g.subject_targets());
  put_csr(g.broader_offsets(), g.broader_targets());
  write_file_atomic(path, out);
}

/// Loads and validates an index file. Throws IndexFormatError for files that
/// are not a topigen index (or are corrupt), IndexVersionError for indexes
/// written by a different format version.
inline CategoryGraph load_index(const std::filesystem::path& path) {
  const std::string data = read_text_file(path);
  if (data.size() < kIndexMagic.size() ||
      std::string_view(data).substr(0, 7) != kIndexMagic.substr(0, 7)) {
    throw IndexFormatError(path.string() + ": not a topigen index file");
  }
  if (data[7] != kIndexMagic[7]) {
    throw IndexVersionError(path.string() + ": unsupported index version '" +
                            std::string(1, data[7]) + "' (this build reads '" +
                            std::string(1, kIndexMagic[7]) + "')");
  }
  detail::IndexReader rd(std::string_view(data).substr(8), path.string());

  const std::uint64_t node_count = rd.u64();
  if (node_count > std::numeric_limits<std::uint32_t>::max()) {
    rd.fail("node count out of range");
  }
  std::vector<std::string> ids;
  std::vector<NodeKind> kinds;
  ids.reserve(node_count);
  kinds.reserve(node_count);
  for (std::uint64_t i = 0; i < node_count; ++i) {
    const std::uint8_t kind = rd.u8();
    if (kind > 1) rd.fail("invalid node kind");
    kinds.push_back(static_cast<NodeKind>(kind));
    ids.push_back(rd.bytes(rd.u32()));
    if (i > 0 && !(ids[i - 1] < ids[i])) rd.fail("node table not sorted");
  }

  std::map<std::uint32_t, std::string> labels;
  const std::uint64_t label_count = rd.u64();
  for (std::uint64_t i = 0; i < label_count; ++i) {
    const std::uint32_t node = rd.u32();
    if (node >= node_count) rd.fail("label for unknown node");
    labels[node] = rd.bytes(rd.u32());
  }

  auto read_csr = [&](std::vector<std::uint64_t>& offsets,
                      std::vector<std::uint32_t>& targets) {
    const std::uint64_t target_count = rd.u64();
    offsets.reserve(node_count + 1);
    offsets.clear();
    for (std::uint64_t i = 0; i < node_count + 1; ++i) {
      offsets.push_back(rd.u64());
      if (i > 0 && offsets[i] < offsets[i - 1]) rd.fail("offsets not monotone");
    }
    if (offsets.front() != 0 || offsets.back() != target_count) {
      rd.fail("offset table does not match target count");
    }
    targets.reserve(target_count);
    targets.clear();
    for (std::uint64_t i = 0; i < target_count; ++i) {
      const std::uint32_t t = rd.u32();
      if (t >= node_count) rd.fail("edge target out of range");
      targets.push_back(t);
    }
  };
  std::vector<std::uint64_t> subject_offsets, broader_offsets;
  std::vector<std::uint32_t> subject_targets, broader_targets;
  read_csr(subject_offsets, subject_targets);
  read_csr(broader_offsets, broader_targets);
  if (!rd.exhausted()) rd.fail("trailing bytes after index payload");

  return CategoryGraph::from_parts(std::move(ids), std::move(kinds),
                                   std::move(subject_offsets),
                                   std::move(subject_targets),
                                   std::move(broader_offsets),
                                   std::move(broader_targets), std::move(labels));
}

}  // namespace topigen
