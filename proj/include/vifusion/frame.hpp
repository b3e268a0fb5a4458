#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "vifusion/error.hpp"

namespace vifusion {

// Wire message exchanged by workers and aggregation servers:
//
//   offset  size  field
//        0     4  magic "VIFU"
//        4     1  version (1)
//        5     1  msg_type (high bit = error flag)
//        6     8  job_id
//       14     4  round
//       18     4  chunk_index
//       22     4  sender_id
//       26     4  payload_len (bytes, multiple of 4)
//       30     -  payload: payload_len/4 little-endian 32-bit floats
//
// All integers little-endian. Header is exactly 30 bytes.

inline constexpr std::array<std::uint8_t, 4> kFrameMagic = {'V', 'I', 'F',
                                                            'U'};
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderBytes = 30;

/// Set on msg_type to signal rejection (ACK with error bit = NACK).
inline constexpr std::uint8_t kMsgErrorFlag = 0x80;

enum class MsgType : std::uint8_t {
  PushPartial = 1,
  GroupSum = 2,
  GlobalSum = 3,
  Broadcast = 4,
  Ack = 5,
};

inline const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::PushPartial: return "PUSH_PARTIAL";
    case MsgType::GroupSum: return "GROUP_SUM";
    case MsgType::GlobalSum: return "GLOBAL_SUM";
    case MsgType::Broadcast: return "BROADCAST";
    case MsgType::Ack: return "ACK";
  }
  return "?";
}

struct AllReduceFrame {
  std::uint8_t msg_type = 0;  // MsgType value, optionally | kMsgErrorFlag
  std::uint64_t job_id = 0;
  std::uint32_t round = 0;
  std::uint32_t chunk_index = 0;
  std::uint32_t sender_id = 0;
  std::vector<float> payload;

  MsgType type() const {
    return static_cast<MsgType>(msg_type & ~kMsgErrorFlag);
  }
  bool is_error() const { return (msg_type & kMsgErrorFlag) != 0; }
  std::size_t payload_bytes() const { return payload.size() * 4; }
  std::size_t wire_bytes() const {
    return kFrameHeaderBytes + payload_bytes();
  }

  static AllReduceFrame make(MsgType t, std::uint64_t job, std::uint32_t round,
                             std::uint32_t chunk, std::uint32_t sender,
                             std::vector<float> payload = {}) {
    AllReduceFrame f;
    f.msg_type = static_cast<std::uint8_t>(t);
    f.job_id = job;
    f.round = round;
    f.chunk_index = chunk;
    f.sender_id = sender;
    f.payload = std::move(payload);
    return f;
  }
};

namespace detail {

inline void put_le(std::uint8_t* out, std::uint64_t v, std::size_t bytes) {
  for (std::size_t i = 0; i < bytes; ++i) {
    out[i] = static_cast<std::uint8_t>(v >> (8 * i));
  }
}

inline std::uint64_t get_le(const std::uint8_t* in, std::size_t bytes) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  }
  return v;
}

}  // namespace detail

inline bool valid_msg_type(std::uint8_t raw) {
  std::uint8_t t = raw & ~kMsgErrorFlag;
  return t >= static_cast<std::uint8_t>(MsgType::PushPartial) &&
         t <= static_cast<std::uint8_t>(MsgType::Ack);
}

inline void encode_header(const AllReduceFrame& f,
                          std::uint8_t out[kFrameHeaderBytes]) {
  std::memcpy(out, kFrameMagic.data(), 4);
  out[4] = kFrameVersion;
  out[5] = f.msg_type;
  detail::put_le(out + 6, f.job_id, 8);
  detail::put_le(out + 14, f.round, 4);
  detail::put_le(out + 18, f.chunk_index, 4);
  detail::put_le(out + 22, f.sender_id, 4);
  detail::put_le(out + 26, f.payload_bytes(), 4);
}

inline std::vector<std::uint8_t> encode_frame(const AllReduceFrame& f) {
  std::vector<std::uint8_t> out(f.wire_bytes());
  encode_header(f, out.data());
  std::uint8_t* p = out.data() + kFrameHeaderBytes;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(p, f.payload.data(), f.payload_bytes());
  } else {
    for (float x : f.payload) {
      std::uint32_t bits;
      std::memcpy(&bits, &x, 4);
      detail::put_le(p, bits, 4);
      p += 4;
    }
  }
  return out;
}

/// Parses a 30-byte header; returns the frame shell plus the payload byte
/// count still to be read. Throws FramingError on bad magic, version,
/// message type, or a payload length that is not a multiple of 4.
inline std::size_t decode_header(const std::uint8_t in[kFrameHeaderBytes],
                                 AllReduceFrame& out) {
  if (std::memcmp(in, kFrameMagic.data(), 4) != 0) {
    throw FramingError("bad frame magic");
  }
  if (in[4] != kFrameVersion) {
    throw FramingError("unsupported frame version " + std::to_string(in[4]));
  }
  if (!valid_msg_type(in[5])) {
    throw FramingError("unknown msg_type " + std::to_string(in[5]));
  }
  out.msg_type = in[5];
  out.job_id = detail::get_le(in + 6, 8);
  out.round = static_cast<std::uint32_t>(detail::get_le(in + 14, 4));
  out.chunk_index = static_cast<std::uint32_t>(detail::get_le(in + 18, 4));
  out.sender_id = static_cast<std::uint32_t>(detail::get_le(in + 22, 4));
  std::size_t payload_len =
      static_cast<std::size_t>(detail::get_le(in + 26, 4));
  if (payload_len % 4 != 0) {
    throw FramingError("payload_len " + std::to_string(payload_len) +
                       " not a multiple of 4");
  }
  return payload_len;
}

inline AllReduceFrame decode_frame(const std::uint8_t* data,
                                   std::size_t size) {
  if (size < kFrameHeaderBytes) {
    throw FramingError("truncated frame header");
  }
  AllReduceFrame f;
  std::size_t payload_len = decode_header(data, f);
  if (size != kFrameHeaderBytes + payload_len) {
    throw FramingError("frame size mismatch: header says " +
                       std::to_string(payload_len) + " payload bytes, got " +
                       std::to_string(size - kFrameHeaderBytes));
  }
  f.payload.resize(payload_len / 4);
  const std::uint8_t* p = data + kFrameHeaderBytes;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(f.payload.data(), p, payload_len);
  } else {
    for (auto& x : f.payload) {
      std::uint32_t bits = static_cast<std::uint32_t>(detail::get_le(p, 4));
      std::memcpy(&x, &bits, 4);
      p += 4;
    }
  }
  return f;
}

inline AllReduceFrame decode_frame(const std::vector<std::uint8_t>& bytes) {
  return decode_frame(bytes.data(), bytes.size());
}

/// NACK carrying the missing sender ids, bit-cast into the float payload.
inline AllReduceFrame make_nack(std::uint64_t job, std::uint32_t round,
                                std::uint32_t chunk, std::uint32_t sender,
                                const std::vector<std::uint32_t>& absent) {
  AllReduceFrame f = AllReduceFrame::make(MsgType::Ack, job, round, chunk,
                                          sender);
  f.msg_type |= kMsgErrorFlag;
  f.payload.resize(absent.size());
  for (std::size_t i = 0; i < absent.size(); ++i) {
    std::memcpy(&f.payload[i], &absent[i], 4);
  }
  return f;
}

inline std::vector<std::uint32_t> nack_absent_ids(const AllReduceFrame& f) {
  std::vector<std::uint32_t> out(f.payload.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::memcpy(&out[i], &f.payload[i], 4);
  }
  return out;
}

}  // namespace vifusion
