#include "support/doctest.hpp"

#include <fstream>
#include <set>

#include "nbi/common/checkpoint.hpp"
#include "nbi/common/error.hpp"
#include "nbi/common/files.hpp"
#include "nbi/common/hash.hpp"
#include "nbi/common/rng.hpp"
#include "support/fixtures.hpp"

using namespace nbi;

TEST_CASE("rng: same seed, same stream; forks differ") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng c(7);
  auto f1 = c.fork(1), f2 = c.fork(2);
  CHECK(f1.next() != f2.next());
}

TEST_CASE("rng: below stays in range and hits every value") {
  Rng r(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = r.below(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("rng: shuffle is a permutation") {
  Rng r(11);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  r.shuffle(std::span<int>(v));
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 10; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("fnv1a64 known vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("config hash ignores key order and sees values") {
  const auto a = nlohmann::json::parse(R"({"x":1,"y":[1,2]})");
  const auto b = nlohmann::json::parse(R"({"y":[1,2],"x":1})");
  const auto c = nlohmann::json::parse(R"({"y":[1,2],"x":2})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("checkpoint bytes survive a round trip unchanged") {
  Checkpoint ck;
  ck.meta = {{"kind", "test"}, {"epoch", 3}};
  ck.tensors.push_back({"w", torch::arange(6, torch::kFloat32).reshape({2, 3})});
  ck.tensors.push_back({"d", torch::randn({4}, torch::kFloat64)});
  ck.tensors.push_back({"i", torch::arange(3, torch::kInt64)});
  const auto bytes = serialize_checkpoint(ck);
  const auto back = deserialize_checkpoint(bytes);
  CHECK(serialize_checkpoint(back) == bytes);
  CHECK(back.meta == ck.meta);
  CHECK(torch::equal(back.at("w"), ck.tensors[0].value));
  CHECK(back.at("d").dtype() == torch::kFloat64);
  CHECK_THROWS_AS(back.at("missing"), ValidationError);
}

TEST_CASE("checkpoint rejects truncated or foreign bytes") {
  Checkpoint ck;
  ck.tensors.push_back({"w", torch::ones({8})});
  const auto bytes = serialize_checkpoint(ck);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 4)), ParseError);
  CHECK_THROWS_AS(deserialize_checkpoint("not a checkpoint at all"), ParseError);
}

TEST_CASE("checkpoint file round trip and module state") {
  testing::TempDir dir("nbi_ckpt");
  torch::manual_seed(0);
  torch::nn::Linear a(3, 2), b(3, 2);
  Checkpoint ck;
  append_module_state(ck.tensors, *a, "lin.");
  save_checkpoint(dir.path() / "m.ckpt", ck);
  const auto loaded = load_checkpoint(dir.path() / "m.ckpt");
  load_module_state(*b, loaded, "lin.");
  CHECK(torch::equal(a->weight, b->weight));
  CHECK(torch::equal(a->bias, b->bias));
  CHECK(read_checkpoint_meta(dir.path() / "m.ckpt").is_object());
  torch::nn::Linear wrong(4, 2);
  CHECK_THROWS_AS(load_module_state(*wrong, loaded, "lin."), ValidationError);
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "absent.ckpt"), IoError);
}

TEST_CASE("atomic text write and directory lock") {
  testing::TempDir dir("nbi_files");
  write_text_atomic(dir.path() / "a.txt", "hello\n");
  CHECK(read_text(dir.path() / "a.txt") == "hello\n");
  CHECK_FALSE(std::filesystem::exists(dir.path() / "a.txt.tmp"));
  {
    DirectoryLock lock(dir.path());
    CHECK(std::filesystem::exists(dir.path() / ".lock"));
  }
  DirectoryLock again(dir.path());
  CHECK_THROWS_AS(read_text(dir.path() / "none.txt"), IoError);
}
