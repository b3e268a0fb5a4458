#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vifusion/error.hpp"

namespace vifusion {

/// Flat 32-bit float payload. `data.size()` is the padded length; elements at
/// [logical_len, padded_len) are zero. A tensor is either unpadded
/// (padded_len == logical_len) or padded to a power of two.
struct Tensor {
  std::vector<float> data;
  std::size_t logical_len = 0;

  Tensor() = default;
  explicit Tensor(std::vector<float> values)
      : data(std::move(values)), logical_len(data.size()) {}
  Tensor(std::vector<float> values, std::size_t logical)
      : data(std::move(values)), logical_len(logical) {}

  std::size_t padded_len() const { return data.size(); }
  std::size_t padded_bytes() const { return data.size() * sizeof(float); }
  std::size_t logical_bytes() const { return logical_len * sizeof(float); }

  /// The logical prefix, without padding.
  std::vector<float> logical_values() const {
    return std::vector<float>(data.begin(), data.begin() + logical_len);
  }
};

/// Modality tag carried by a query segment. Opaque to the core; only used to
/// keep per-modality ordering inside a fused batch.
enum class Modality : std::uint8_t { RGB = 0, FLOW = 1, TEXT = 2 };

inline const char* to_string(Modality m) {
  switch (m) {
    case Modality::RGB: return "RGB";
    case Modality::FLOW: return "FLOW";
    case Modality::TEXT: return "TEXT";
  }
  return "?";
}

/// Identity and arrival metadata for one query segment.
struct SegmentDescriptor {
  std::uint64_t query_id = 0;
  Modality modality = Modality::RGB;
  std::int64_t arrival_time_ns = 0;
  std::size_t logical_len = 0;
};

/// Placement of one segment inside a fused buffer.
struct SegmentOffset {
  std::uint64_t query_id = 0;
  std::size_t start_index = 0;
  std::size_t logical_len = 0;
};

/// One backing buffer plus the offset table mapping query segments into it.
/// Segments are stored padded, contiguously, in admission order.
struct FusedTensor {
  Tensor buffer;
  std::vector<SegmentOffset> offsets;
};

/// Counters exposed by fuse so the single-write contract is observable:
/// each logical element is copied into the backing buffer exactly once and
/// padding bytes are never copied at all.
struct FuseMetrics {
  std::size_t elements_copied = 0;
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Pads a tensor to the smallest power-of-two element count, zero-filling the
/// tail. Idempotent. Logical elements are unchanged.
inline Tensor pad_to_pow2(const Tensor& t) {
  if (t.logical_len == 0) {
    throw InvalidInputError("pad_to_pow2: zero-length tensor");
  }
  if (t.data.size() < t.logical_len) {
    throw InvalidInputError("pad_to_pow2: data shorter than logical_len");
  }
  Tensor out;
  out.logical_len = t.logical_len;
  out.data.assign(t.data.begin(), t.data.begin() + t.logical_len);
  out.data.resize(next_pow2(t.logical_len), 0.0f);
  return out;
}

inline std::size_t padded_pow2_bytes(std::size_t logical_len) {
  return next_pow2(logical_len) * sizeof(float);
}

/// Concatenates segments into one fused buffer. Each segment is padded to a
/// power of two and laid out contiguously in list order; the offsets table
/// records where each query's logical elements live. Throws
/// CapacityExceededError when the padded total would exceed capacity_bytes.
inline FusedTensor fuse(
    const std::vector<std::pair<SegmentDescriptor, Tensor>>& segments,
    std::size_t capacity_bytes = static_cast<std::size_t>(-1),
    FuseMetrics* metrics = nullptr) {
  if (segments.empty()) {
    throw InvalidInputError("fuse: empty segment list");
  }
  std::size_t total = 0;
  for (const auto& [desc, t] : segments) {
    if (t.logical_len == 0) {
      throw InvalidInputError("fuse: zero-length segment");
    }
    total += next_pow2(t.logical_len);
  }
  if (total * sizeof(float) > capacity_bytes) {
    throw CapacityExceededError("fuse: fused size " +
                                std::to_string(total * sizeof(float)) +
                                " B exceeds capacity " +
                                std::to_string(capacity_bytes) + " B");
  }

  FusedTensor out;
  out.buffer.data.assign(total, 0.0f);
  out.buffer.logical_len = total;
  out.offsets.reserve(segments.size());

  std::size_t cursor = 0;
  std::size_t copied = 0;
  for (const auto& [desc, t] : segments) {
    out.offsets.push_back({desc.query_id, cursor, t.logical_len});
    std::copy(t.data.begin(), t.data.begin() + t.logical_len,
              out.buffer.data.begin() + cursor);
    copied += t.logical_len;
    cursor += next_pow2(t.logical_len);
  }
  if (metrics) metrics->elements_copied = copied;
  return out;
}

/// Inverse of fuse: one tensor per offset entry, padding stripped.
inline std::vector<std::pair<std::uint64_t, Tensor>> unfuse(
    const FusedTensor& f) {
  if (f.offsets.empty() && f.buffer.padded_len() != 0) {
    throw CorruptionError("unfuse: non-empty buffer with empty offset table");
  }
  std::vector<std::pair<std::uint64_t, Tensor>> out;
  out.reserve(f.offsets.size());
  for (const auto& off : f.offsets) {
    if (off.start_index + off.logical_len > f.buffer.padded_len()) {
      throw CorruptionError("unfuse: offset range [" +
                            std::to_string(off.start_index) + ", " +
                            std::to_string(off.start_index + off.logical_len) +
                            ") outside buffer of " +
                            std::to_string(f.buffer.padded_len()));
    }
    Tensor t;
    t.logical_len = off.logical_len;
    t.data.assign(f.buffer.data.begin() + off.start_index,
                  f.buffer.data.begin() + off.start_index + off.logical_len);
    out.emplace_back(off.query_id, std::move(t));
  }
  return out;
}

/// Element-wise IEEE-754 sum of two equally padded tensors. logical_len is
/// taken from the first operand.
inline Tensor reduce_sum(const Tensor& a, const Tensor& b) {
  if (a.padded_len() != b.padded_len()) {
    throw InvalidInputError("reduce_sum: padded length mismatch (" +
                            std::to_string(a.padded_len()) + " vs " +
                            std::to_string(b.padded_len()) + ")");
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] += b.data[i];
  }
  return out;
}

/// In-place accumulation used on hot paths; same contract as reduce_sum.
inline void reduce_sum_into(std::vector<float>& acc,
                            const std::vector<float>& other) {
  if (acc.size() != other.size()) {
    throw InvalidInputError("reduce_sum_into: length mismatch");
  }
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += other[i];
}

/// Splits a tensor into chunks of chunk_bytes (last may be shorter). Chunks
/// cover the padded payload in order; concatenating them reproduces it.
inline std::vector<Tensor> chunk_split(const Tensor& t,
                                       std::size_t chunk_bytes) {
  if (chunk_bytes == 0 || chunk_bytes % sizeof(float) != 0) {
    throw InvalidInputError(
        "chunk_split: chunk_bytes must be a positive multiple of " +
        std::to_string(sizeof(float)));
  }
  const std::size_t chunk_elems = chunk_bytes / sizeof(float);
  std::vector<Tensor> chunks;
  for (std::size_t start = 0; start < t.padded_len(); start += chunk_elems) {
    const std::size_t len = std::min(chunk_elems, t.padded_len() - start);
    Tensor c;
    c.logical_len = len;
    c.data.assign(t.data.begin() + start, t.data.begin() + start + len);
    chunks.push_back(std::move(c));
  }
  if (chunks.empty()) {
    // zero-length input: keep the covering property with a single empty chunk
    chunks.emplace_back();
  }
  return chunks;
}

}  // namespace vifusion
