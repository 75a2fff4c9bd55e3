// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "regguard/util/bytes.hpp"
#include "regguard/util/crypto.hpp"
#include "regguard/util/rng.hpp"
#include "regguard/util/stats.hpp"
#include "regguard/util/toml.hpp"

using namespace regguard;

namespace {

std::vector<uint8_t> hex(const std::string& s) {
  auto v = from_hex(s);
  REQUIRE(v.has_value());
  return *v;
}

std::vector<uint8_t> str_bytes(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_CASE("hex encoding round-trips and rejects malformed input") {
  std::vector<uint8_t> data = {0x00, 0x01, 0xab, 0xff, 0x7e};
  REQUIRE(to_hex(std::span<const uint8_t>(data)) == "0001abff7e");
  REQUIRE(from_hex("0001abff7e") == data);
  REQUIRE(from_hex("0x0001ABFF7E") == data);
  REQUIRE(from_hex("") == std::vector<uint8_t>{});
  REQUIRE_FALSE(from_hex("abc").has_value());
  REQUIRE_FALSE(from_hex("zz").has_value());
  REQUIRE_FALSE(from_hex("0xg0").has_value());
}

TEST_CASE("address and word hex parsing enforce exact widths") {
  std::string addr40(40, 'a');
  REQUIRE(address_from_hex("0x" + addr40).has_value());
  REQUIRE_FALSE(address_from_hex("0x" + addr40 + "aa").has_value());
  REQUIRE_FALSE(address_from_hex("0xabcd").has_value());
  std::string word64(64, '1');
  REQUIRE(bytes32_from_hex(word64).has_value());
  REQUIRE_FALSE(bytes32_from_hex(word64 + "11").has_value());

  Address a = *address_from_hex("0x" + addr40);
  REQUIRE(to_hex(a) == "0x" + addr40);
  REQUIRE_FALSE(a.is_zero());
  REQUIRE(Address{}.is_zero());
}

TEST_CASE("u64 words use big-endian placement in the low bytes") {
  uint64_t v = 0x0102030405060708ull;
  Bytes32 b = bytes32_from_u64(v);
  for (int i = 0; i < 24; ++i) REQUIRE(b.bytes[i] == 0);
  REQUIRE(b.bytes[24] == 0x01);
  REQUIRE(b.bytes[31] == 0x08);
  REQUIRE(u64_from_bytes32(b) == v);

  Address a = address_from_u64(0xdeadbeefull);
  REQUIRE(a.bytes[19] == 0xef);
  REQUIRE(a.bytes[16] == 0xde);
  Bytes32 slot = bytes32_from_address(a);
  for (int i = 0; i < 12; ++i) REQUIRE(slot.bytes[i] == 0);
  REQUIRE(slot.bytes[12 + 16] == 0xde);
}

TEST_CASE("byte writer and reader round-trip every field type") {
  ByteWriter w;
  w.u8(0x7f);
  w.u32be(0x01020304);
  w.u64be(0x0a0b0c0d0e0f1011ull);
  w.i64be(-5);
  Address a = address_from_u64(77);
  Bytes32 h = bytes32_from_u64(99);
  w.raw(a);
  w.raw(h);
  std::vector<uint8_t> payload = {9, 8, 7};
  w.blob(payload);
  w.str("hello");

  ByteReader r(w.bytes());
  REQUIRE(r.u8() == 0x7f);
  REQUIRE(r.u32be() == 0x01020304u);
  REQUIRE(r.u64be() == 0x0a0b0c0d0e0f1011ull);
  REQUIRE(r.i64be() == -5);
  REQUIRE(r.address() == a);
  REQUIRE(r.bytes32() == h);
  REQUIRE(r.blob() == payload);
  REQUIRE(r.str() == "hello");
  REQUIRE(r.done());
  REQUIRE(r.remaining() == 0);
}

TEST_CASE("byte reader throws on truncated input") {
  ByteWriter w;
  w.u32be(1000);  // blob length prefix promising bytes that never follow
  ByteReader r(w.bytes());
  REQUIRE_THROWS_AS(r.blob(), std::out_of_range);

  ByteReader r2(std::span<const uint8_t>{});
  REQUIRE_THROWS_AS(r2.u8(), std::out_of_range);
  REQUIRE(r2.done());
}

TEST_CASE("integer serialization is big-endian on the wire") {
  ByteWriter w;
  w.u32be(0x01020304);
  REQUIRE(w.bytes() == std::vector<uint8_t>{0x01, 0x02, 0x03, 0x04});
}

TEST_CASE("sha256 matches published digests") {
  REQUIRE(to_hex(sha256(str_bytes(""))) ==
          "0xe3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  REQUIRE(to_hex(sha256(str_bytes("abc"))) ==
          "0xba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  std::vector<uint8_t> zeros(8, 0);
  REQUIRE(to_hex(sha256(zeros)) ==
          "0xaf5570f5a1810b7af78caf4bc70a660f0df51e42baf91d4de5b2328de0e83dfc");
}

TEST_CASE("hmac-sha256 matches the published test vector") {
  auto mac = hmac_sha256(str_bytes("Jefe"), str_bytes("what do ya want for nothing?"));
  REQUIRE(to_hex(mac) ==
          "0x5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843");
}

TEST_CASE("aead seal matches the published chacha20-poly1305 vector") {
  auto key = hex("808182838485868788898a8b8c8d8e8f909192939495969798999a9b9c9d9e9f");
  auto nonce = hex("070000004041424344454647");
  auto aad = hex("50515253c0c1c2c3c4c5c6c7");
  auto plain = str_bytes(
      "Ladies and Gentlemen of the class of '99: If I could offer you "
      "only one tip for the future, sunscreen would be it.");
  auto sealed = aead::seal(key, nonce, aad, plain);
  REQUIRE(to_hex(std::span<const uint8_t>(sealed)) ==
          "d31a8d34648e60db7b86afbc53ef7ec2a4aded51296e08fea9e2b5a736ee62d6"
          "3dbea45e8ca9671282fafb69da92728b1a71de0a9e060b2905d6a5b67ecd3b36"
          "92ddbd7f2d778b8c9803aee328091b58fab324e4fad675945585808b4831d7bc"
          "3ff4def08e4b7a9de576d26586cec64b6116"
          "1ae10b594f09e26a7e902ecbd0600691");
  auto open = aead::open(key, nonce, aad, sealed);
  REQUIRE(open.has_value());
  REQUIRE(*open == plain);
}

TEST_CASE("aead rejects any tampering with ciphertext, tag, aad or keys") {
  std::vector<uint8_t> key(32, 0x11), nonce(12, 0x22), aad = {1, 2, 3};
  auto plain = str_bytes("payload");
  auto sealed = aead::seal(key, nonce, aad, plain);
  REQUIRE(sealed.size() == plain.size() + aead::kTagSize);
  REQUIRE(aead::open(key, nonce, aad, sealed).value() == plain);

  auto flip = [&](size_t i) {
    auto s = sealed;
    s[i] ^= 1;
    return aead::open(key, nonce, aad, s);
  };
  REQUIRE_FALSE(flip(0).has_value());                 // ciphertext byte
  REQUIRE_FALSE(flip(sealed.size() - 1).has_value());  // tag byte

  auto key2 = key;
  key2[0] ^= 1;
  REQUIRE_FALSE(aead::open(key2, nonce, aad, sealed).has_value());
  auto nonce2 = nonce;
  nonce2[0] ^= 1;
  REQUIRE_FALSE(aead::open(key, nonce2, aad, sealed).has_value());
  std::vector<uint8_t> aad2 = {1, 2, 4};
  REQUIRE_FALSE(aead::open(key, nonce, aad2, sealed).has_value());
  std::vector<uint8_t> tiny = {1, 2};
  REQUIRE_FALSE(aead::open(key, nonce, aad, tiny).has_value());
}

TEST_CASE("aead handles empty plaintext and empty aad") {
  std::vector<uint8_t> key(32, 3), nonce(12, 4);
  auto sealed = aead::seal(key, nonce, {}, {});
  REQUIRE(sealed.size() == aead::kTagSize);
  auto open = aead::open(key, nonce, {}, sealed);
  REQUIRE(open.has_value());
  REQUIRE(open->empty());
  auto s2 = sealed;
  s2[3] ^= 1;
  REQUIRE_FALSE(aead::open(key, nonce, {}, s2).has_value());
}

TEST_CASE("aead rejects bad key and nonce sizes") {
  std::vector<uint8_t> key(31, 0), nonce(12, 0);
  REQUIRE_THROWS_AS(aead::seal(key, nonce, {}, {}), std::invalid_argument);
  std::vector<uint8_t> key32(32, 0), nonce11(11, 0);
  REQUIRE_THROWS_AS(aead::seal(key32, nonce11, {}, {}), std::invalid_argument);
  REQUIRE_FALSE(aead::open(key, nonce, {}, std::vector<uint8_t>(16)).has_value());
}

TEST_CASE("rng streams are deterministic per seed") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 64; ++i) {
    uint64_t x = a.next_u64(), y = b.next_u64(), z = c.next_u64();
    all_equal = all_equal && x == y;
    any_diff = any_diff || x != z;
  }
  REQUIRE(all_equal);
  REQUIRE(any_diff);
}

TEST_CASE("derive_seed separates named concerns") {
  uint64_t m = 1234;
  REQUIRE(derive_seed(m, "workload") == derive_seed(m, "workload"));
  REQUIRE(derive_seed(m, "workload") != derive_seed(m, "cache"));
  REQUIRE(derive_seed(m, "workload") != derive_seed(m + 1, "workload"));
  Rng tagged(m, "workload");
  Rng direct(derive_seed(m, "workload"));
  REQUIRE(tagged.next_u64() == direct.next_u64());
}

TEST_CASE("rng samplers respect their ranges") {
  Rng r(7);
  for (int i = 0; i < 2000; ++i) {
    uint64_t u = r.uniform_u64(10);
    REQUIRE(u < 10);
    int64_t v = r.uniform_i64(-3, 3);
    REQUIRE(v >= -3);
    REQUIRE(v <= 3);
    double x = r.uniform01();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
  }
  REQUIRE(r.uniform_u64(0) == 0);
  REQUIRE(r.uniform_u64(1) == 0);
  REQUIRE(r.poisson(0.0) == 0);
  REQUIRE_FALSE(r.chance(0.0));
  REQUIRE(r.chance(1.0));
}

TEST_CASE("rng uniform_u64 covers all residues") {
  Rng r(11);
  std::set<uint64_t> seen;
  for (int i = 0; i < 500; ++i) seen.insert(r.uniform_u64(7));
  REQUIRE(seen.size() == 7);
}

TEST_CASE("rng normal matches its first two moments") {
  Rng r(99);
  const int n = 40000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double x = r.normal(5.0, 2.0);
    s += x;
    s2 += x * x;
  }
  double mean = s / n;
  double var = s2 / n - mean * mean;
  REQUIRE(std::abs(mean - 5.0) < 0.05);
  REQUIRE(std::abs(std::sqrt(var) - 2.0) < 0.05);
}

TEST_CASE("rng poisson matches its mean") {
  Rng r(5);
  const int n = 20000;
  double s = 0;
  for (int i = 0; i < n; ++i) s += static_cast<double>(r.poisson(3.0));
  REQUIRE(std::abs(s / n - 3.0) < 0.1);
}

TEST_CASE("rng exponential matches its mean") {
  Rng r(6);
  const int n = 20000;
  double s = 0;
  for (int i = 0; i < n; ++i) s += r.exponential(2.0);
  REQUIRE(std::abs(s / n - 0.5) < 0.02);
}

TEST_CASE("rng shuffle permutes without losing elements") {
  Rng r(3);
  std::vector<int> v = {1, 2, 3, 4, 5, 6, 7, 8};
  auto orig = v;
  bool moved = false;
  for (int round = 0; round < 10; ++round) {
    r.shuffle(v);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == orig);
    if (v != orig) moved = true;
  }
  REQUIRE(moved);
}

TEST_CASE("rng fill_bytes consumes words big-endian first") {
  Rng a(17), b(17);
  uint8_t buf[20];
  a.fill_bytes(buf, sizeof(buf));
  uint64_t w0 = b.next_u64(), w1 = b.next_u64(), w2 = b.next_u64();
  for (int i = 0; i < 8; ++i) REQUIRE(buf[i] == static_cast<uint8_t>(w0 >> (8 * (7 - i))));
  for (int i = 0; i < 8; ++i) REQUIRE(buf[8 + i] == static_cast<uint8_t>(w1 >> (8 * (7 - i))));
  for (int i = 0; i < 4; ++i) REQUIRE(buf[16 + i] == static_cast<uint8_t>(w2 >> (8 * (7 - i))));
  uint8_t empty[1] = {0xAA};
  a.fill_bytes(empty, 0);
  REQUIRE(empty[0] == 0xAA);
}

TEST_CASE("toml parses the supported value kinds") {
  auto t = toml::Table::parse(
      "top = 1\n"
      "# comment line\n"
      "[scenario]\n"
      "name = \"hello world\"  # trailing\n"
      "seed = 42\n"
      "rate = 2.5\n"
      "sci = 1e3\n"
      "neg = -7\n"
      "on = true\n"
      "off = false  # comment\n");
  REQUIRE(t.get_int("top") == 1);
  REQUIRE(t.get_string("scenario.name") == "hello world");
  REQUIRE(t.get_int("scenario.seed") == 42);
  REQUIRE(t.get_float("scenario.rate") == 2.5);
  REQUIRE(t.get_float("scenario.sci") == 1000.0);
  REQUIRE(t.get_int("scenario.neg") == -7);
  REQUIRE(t.get_bool("scenario.on") == true);
  REQUIRE(t.get_bool("scenario.off") == false);
  REQUIRE(t.get_float("scenario.seed") == 42.0);  // ints widen to float
  REQUIRE_FALSE(t.get_int("scenario.rate").has_value());
  REQUIRE_FALSE(t.get_string("missing").has_value());
  REQUIRE(t.has("scenario.seed"));
  REQUIRE_FALSE(t.has("scenario.nope"));
  REQUIRE(t.line_of("scenario.seed") == 5);
  REQUIRE(t.line_of("unknown") == 0);
}

TEST_CASE("toml keys are flattened and sorted") {
  auto t = toml::Table::parse("[b]\nz = 1\na = 2\n[a]\nk = 3\n");
  REQUIRE(t.keys() == std::vector<std::string>{"a.k", "b.a", "b.z"});
}

TEST_CASE("toml reports malformed input with line numbers") {
  auto line_err = [](const std::string& text, const std::string& needle) {
    try {
      toml::Table::parse(text);
      FAIL("expected parse error for: " << text);
    } catch (const std::runtime_error& e) {
      REQUIRE_THAT(e.what(), Catch::Matchers::ContainsSubstring(needle));
    }
  };
  line_err("a = 1\na = 2\n", "line 2: duplicate key 'a'");
  line_err("[broken\n", "line 1: malformed table header");
  line_err("[]\n", "malformed table header");
  line_err("just words\n", "expected key = value");
  line_err("k =\n", "expected key = value");
  line_err("k = [1, 2]\n", "arrays and inline tables are not supported");
  line_err("k = \"unterminated\n", "unterminated string");
  line_err("k = \"a\" trailing\n", "trailing content after string");
  line_err("k = 12abc\n", "unrecognized value");
  line_err("\nk = nonsense\n", "line 2: unrecognized value 'nonsense'");
}

TEST_CASE("stats mean variance and ci95 behave on known samples") {
  std::vector<double> xs = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  REQUIRE(stats::mean(xs) == Catch::Approx(5.0));
  REQUIRE(stats::variance(xs) == Catch::Approx(32.0 / 7.0));
  auto ci = stats::ci95(xs);
  double half = 1.96 * std::sqrt((32.0 / 7.0) / 8.0);
  REQUIRE(ci.lo == Catch::Approx(5.0 - half));
  REQUIRE(ci.hi == Catch::Approx(5.0 + half));

  REQUIRE(stats::mean({}) == 0.0);
  REQUIRE(stats::variance({}) == 0.0);
  std::vector<double> one = {3.0};
  auto ci1 = stats::ci95(one);
  REQUIRE(ci1.lo == 3.0);
  REQUIRE(ci1.hi == 3.0);
}

TEST_CASE("linear fit recovers an exact line with unit r-squared") {
  std::vector<double> x = {1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(3.0 * v - 1.0);
  auto f = stats::linear_fit(x, y);
  REQUIRE(f.slope == Catch::Approx(3.0));
  REQUIRE(f.intercept == Catch::Approx(-1.0));
  REQUIRE(f.r_squared == Catch::Approx(1.0));
}

TEST_CASE("linear fit degrades gracefully on degenerate input") {
  std::vector<double> flat_x = {2, 2, 2}, y = {1, 2, 3};
  REQUIRE(stats::linear_fit(flat_x, y).r_squared == 0.0);
  std::vector<double> x = {1, 2, 3}, flat_y = {5, 5, 5};
  auto f = stats::linear_fit(x, flat_y);
  REQUIRE(f.slope == Catch::Approx(0.0));
  REQUIRE(f.r_squared == 1.0);
  REQUIRE(stats::linear_fit({}, {}).r_squared == 0.0);
  std::vector<double> noisy_y = {2.0, 4.1, 5.9};
  auto g = stats::linear_fit(x, noisy_y);
  REQUIRE(g.r_squared < 1.0);
  REQUIRE(g.r_squared > 0.9);
}

TEST_CASE("quantile interpolates between order statistics") {
  std::vector<double> xs = {4.0, 1.0, 3.0, 2.0};
  REQUIRE(stats::quantile(xs, 0.5) == Catch::Approx(2.5));
  REQUIRE(stats::quantile(xs, 0.0) == 1.0);
  REQUIRE(stats::quantile(xs, 1.0) == 4.0);
  REQUIRE(stats::quantile(xs, -0.5) == 1.0);
  REQUIRE(stats::quantile(xs, 2.0) == 4.0);
  REQUIRE(stats::quantile(xs, 1.0 / 3.0) == Catch::Approx(2.0));
  REQUIRE(stats::quantile({}, 0.5) == 0.0);
  std::vector<double> one = {7.0};
  REQUIRE(stats::quantile(one, 0.99) == 7.0);
}
