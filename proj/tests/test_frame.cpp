#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "test_util.hpp"
#include "vifusion/frame.hpp"

using namespace vifusion;

TEST_CASE("golden header bytes") {
  AllReduceFrame f = AllReduceFrame::make(
      MsgType::PushPartial, 0x0102030405060708ULL, 7, 3, 42, {1.0f, -2.5f});

  const std::vector<std::uint8_t> expected = {
      0x56, 0x49, 0x46, 0x55,                          // "VIFU"
      0x01,                                            // version
      0x01,                                            // PUSH_PARTIAL
      0x08, 0x07, 0x06, 0x05, 0x04, 0x03, 0x02, 0x01,  // job_id
      0x07, 0x00, 0x00, 0x00,                          // round
      0x03, 0x00, 0x00, 0x00,                          // chunk_index
      0x2a, 0x00, 0x00, 0x00,                          // sender_id
      0x08, 0x00, 0x00, 0x00,                          // payload_len
      0x00, 0x00, 0x80, 0x3f,                          // 1.0f
      0x00, 0x00, 0x20, 0xc0,                          // -2.5f
  };
  REQUIRE(expected.size() == kFrameHeaderBytes + 8);
  REQUIRE(encode_frame(f) == expected);
}

TEST_CASE("encode/decode round trip over randomized frames") {
  testutil::Rng rng(4242);
  for (int i = 0; i < 1000; ++i) {
    AllReduceFrame f;
    f.msg_type = static_cast<std::uint8_t>(rng.uniform_int(1, 5));
    if (rng.uniform() < 0.1) f.msg_type |= kMsgErrorFlag;
    f.job_id = rng.next();
    f.round = static_cast<std::uint32_t>(rng.next());
    f.chunk_index = static_cast<std::uint32_t>(rng.next());
    f.sender_id = static_cast<std::uint32_t>(rng.next());
    f.payload.resize(rng.uniform_int(0, 300));
    for (auto& x : f.payload) x = rng.uniform_pm1();

    AllReduceFrame g = decode_frame(encode_frame(f));
    REQUIRE(g.msg_type == f.msg_type);
    REQUIRE(g.job_id == f.job_id);
    REQUIRE(g.round == f.round);
    REQUIRE(g.chunk_index == f.chunk_index);
    REQUIRE(g.sender_id == f.sender_id);
    REQUIRE(g.payload == f.payload);
  }
}

TEST_CASE("malformed frames are rejected") {
  AllReduceFrame f = AllReduceFrame::make(MsgType::Ack, 1, 0, 0, 9);
  auto bytes = encode_frame(f);

  SECTION("bad magic") {
    bytes[0] = 'X';
    REQUIRE_THROWS_AS(decode_frame(bytes), FramingError);
  }
  SECTION("bad version") {
    bytes[4] = 9;
    REQUIRE_THROWS_AS(decode_frame(bytes), FramingError);
  }
  SECTION("bad msg_type") {
    bytes[5] = 0;
    REQUIRE_THROWS_AS(decode_frame(bytes), FramingError);
    bytes[5] = 6;
    REQUIRE_THROWS_AS(decode_frame(bytes), FramingError);
  }
  SECTION("payload_len not a multiple of 4") {
    bytes[26] = 3;
    REQUIRE_THROWS_AS(decode_frame(bytes), FramingError);
  }
  SECTION("truncated") {
    bytes.resize(10);
    REQUIRE_THROWS_AS(decode_frame(bytes), FramingError);
  }
}

TEST_CASE("nack payload carries absent sender ids") {
  AllReduceFrame nack = make_nack(9, 2, 0, 77, {3, 5, 0xffffffff});
  REQUIRE(nack.is_error());
  REQUIRE(nack.type() == MsgType::Ack);
  AllReduceFrame round = decode_frame(encode_frame(nack));
  REQUIRE(round.is_error());
  REQUIRE(nack_absent_ids(round) ==
          std::vector<std::uint32_t>{3, 5, 0xffffffff});
}
