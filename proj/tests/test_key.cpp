#include <gtest/gtest.h>

#include <random>

#include "restcipher/arrangement.hpp"
#include "restcipher/error.hpp"
#include "restcipher/key.hpp"

using namespace restcipher;

namespace {

Errc error_of(const std::array<std::int64_t, 10>& k, int* element = nullptr) {
  try {
    validate_key(k);
  } catch (const Error& e) {
    if (element) *element = e.element();
    return e.code();
  }
  ADD_FAILURE() << "key accepted";
  return Errc::Malformed;
}

}  // namespace

TEST(Key, ValidatesWorkedKey) {
  const auto k = validate_key({12, 6, 1, 1, 1, 14, 4, 1, 3, 2});
  EXPECT_EQ(k.rows, 12u);
  EXPECT_EQ(k.cols, 6u);
  EXPECT_TRUE(k.start_with);
  EXPECT_TRUE(k.reverse);
  EXPECT_EQ(k.final_sum, 3u);
  EXPECT_EQ(k.power, 2u);
}

TEST(Key, BitOutOfRangeNamesElement) {
  int element = -1;
  EXPECT_EQ(error_of({12, 6, 2, 1, 1, 14, 4, 1, 3, 2}, &element), Errc::OutOfRange);
  EXPECT_EQ(element, 2);
  EXPECT_EQ(error_of({12, 6, 1, 1, 1, 64, 4, 1, 3, 2}, &element), Errc::OutOfRange);
  EXPECT_EQ(element, 5);
  EXPECT_EQ(error_of({12, 6, 1, 1, 1, 14, 73, 1, 3, 2}, &element), Errc::OutOfRange);
  EXPECT_EQ(element, 6);
  EXPECT_EQ(error_of({0, 6, 1, 1, 1, 14, 4, 1, 3, 2}, &element), Errc::OutOfRange);
  EXPECT_EQ(element, 0);
  EXPECT_EQ(error_of({12, 6, 1, 1, 1, 14, 4, 1, 3, 0}, &element), Errc::OutOfRange);
  EXPECT_EQ(element, 9);
}

TEST(Key, WidthTooSmall) {
  // 18^2 + 6^2 = 360 needs three digits.
  EXPECT_EQ(error_of({12, 6, 1, 1, 1, 14, 4, 1, 2, 2}), Errc::WidthTooSmall);
}

TEST(Key, WidthCheckCoversEveryHeaderPair) {
  // Exhaustive scan of the header grid agrees with the closed-form maximum.
  for (std::int64_t sw = 0; sw <= 1; ++sw) {
    for (std::int64_t p = 1; p <= 3; ++p) {
      for (std::int64_t fs = 1; fs <= 6; ++fs) {
        const std::int64_t rows = 7, cols = 9;
        std::uint64_t max_v = 0;
        for (std::int64_t r = 1; r <= rows; ++r) {
          for (std::int64_t c = 1; c <= cols; ++c) {
            const std::uint64_t rh = sw ? cols + r : r;
            const std::uint64_t ch = sw ? c : rows + c;
            std::uint64_t v = 1, w = 1;
            for (int i = 0; i < p; ++i) {
              v *= rh;
              w *= ch;
            }
            max_v = std::max(max_v, v + w);
          }
        }
        const bool fits = std::to_string(max_v).size() <= static_cast<std::size_t>(fs);
        bool ok = true;
        try {
          validate_key({rows, cols, sw, 0, 0, 2, 1, 0, fs, p});
        } catch (const Error& e) {
          ok = false;
          if (fits) ADD_FAILURE() << e.what();
        }
        EXPECT_EQ(ok, fits) << "sw=" << sw << " p=" << p << " fs=" << fs;
      }
    }
  }
}

TEST(Key, CapacityExceeded) {
  // 95 printable characters cannot fit 4 cells.
  EXPECT_EQ(error_of({2, 2, 0, 0, 0, 63, 1, 0, 3, 1}), Errc::CapacityExceeded);
  // 26 characters cannot be told apart with one digit.
  EXPECT_EQ(error_of({6, 6, 0, 0, 0, 0, 1, 0, 1, 1}), Errc::CapacityExceeded);
}

TEST(Key, SerializeHasNoSpaces) {
  const auto k = validate_key({12, 6, 1, 1, 1, 14, 4, 1, 3, 2});
  EXPECT_EQ(serialize_key(k), "[12,6,1,1,1,14,4,1,3,2]");
  EXPECT_EQ(parse_key("[12,6,1,1,1,14,4,1,3,2]"), k);
}

TEST(Key, ParseRejectsMalformedText) {
  for (const char* bad : {"", "[]", "[12,6,1,1,1,14,4,1,3]", "[12,6,1,1,1,14,4,1,3,2,1]",
                          "[12, 6,1,1,1,14,4,1,3,2]", "12,6,1,1,1,14,4,1,3,2", "[12,6,1,1,1,14,4,1,3,x]",
                          "[012,6,1,1,1,14,4,1,3,2]", "[12,6,1,1,1,14,4,1,3,-2]", "[12,,1,1,1,14,4,1,3,2]"}) {
    try {
      parse_key(bad);
      ADD_FAILURE() << "accepted " << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::Malformed) << bad;
    }
  }
  EXPECT_THROW(parse_key("[12,6,2,1,1,14,4,1,3,2]"), Error);
}

TEST(Key, GenerateRespectsBounds) {
  std::mt19937_64 rng(7);
  KeyBounds b;
  for (int i = 0; i < 200; ++i) {
    const auto k = generate_key(b, rng);
    EXPECT_NO_THROW(validate_key(k.elements()));
    EXPECT_GE(k.rows, 4u);
    EXPECT_LE(k.rows, 16u);
    EXPECT_GE(k.cols, 4u);
    EXPECT_LE(k.cols, 16u);
    EXPECT_GE(k.power, 1u);
    EXPECT_LE(k.power, 3u);
  }
}

TEST(Key, GenerateRaisesWidth) {
  std::mt19937_64 rng(3);
  KeyBounds b;
  b.set(0, 12, 12).set(1, 6, 6).set(2, 1, 1).set(5, 14, 14).set(6, 4, 4).set(8, 1, 1).set(9, 2, 2);
  const auto k = generate_key(b, rng);
  EXPECT_EQ(k.final_sum, 3u);
  EXPECT_EQ(minimum_final_sum(k), 3u);
}

TEST(Key, GenerateNoValidKey) {
  std::mt19937_64 rng(1);
  KeyBounds b;
  b.set(0, 1, 1).set(1, 1, 1).set(5, 63, 63).set(6, 1, 1);
  try {
    generate_key(b, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoValidKeyInBounds);
  }
}

TEST(Key, GenerateIsDeterministicUnderSeed) {
  std::mt19937_64 a(42), b(42);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(generate_key({}, a), generate_key({}, b));
}

TEST(Arrangement, Classes) {
  EXPECT_EQ(charset_size(0), 26u);
  EXPECT_EQ(charset_size(63), 95u);
  const auto a = arrangement_for(14);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a[0], CharClass::Digit);
  EXPECT_EQ(a[1], CharClass::Capital);
  EXPECT_EQ(a[2], CharClass::Small);
  EXPECT_EQ(charset_for(14).substr(0, 11), "0123456789A");
  EXPECT_EQ(class_characters(CharClass::Special).front(), ' ');
  EXPECT_EQ(class_characters(CharClass::Special).size(), 33u);
  EXPECT_THROW(arrangement_for(64), Error);
}
