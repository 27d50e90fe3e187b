#include "support/doctest.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "nbi/common/error.hpp"
#include "nbi/common/rng.hpp"
#include "nbi/data/augment.hpp"
#include "nbi/data/folds.hpp"
#include "nbi/data/image_io.hpp"
#include "nbi/data/manifest.hpp"
#include "nbi/data/synthetic.hpp"
#include "nbi/data/tensor_convert.hpp"
#include "support/fixtures.hpp"

using namespace nbi;
using namespace nbi::data;
using nbi::testing::patch;
using nbi::testing::TempDir;
using nbi::testing::toy_dataset;

namespace {

Image ramp(int h, int w) {
  Image img(h, w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = static_cast<float>(r * 1000 + c * 10 + ch) / 1e6f;
  return img;
}

std::vector<std::string> patient_names(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("p" + std::to_string(i));
  return out;
}

void write_png(const std::filesystem::path& p, int side, std::uint8_t v) {
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(side) * side * 3, v);
  write_image(p, from_u8(side, side, rgb.data()));
}

}  // namespace

TEST_CASE("tags and their names") {
  CHECK(to_string(DomainTag::wli_fake) == "WLI_f");
  CHECK(parse_tag("NBI_f") == DomainTag::nbi_fake);
  CHECK(tag_of(Modality::nbi, Provenance::fake) == DomainTag::nbi_fake);
  const auto set = parse_tag_set("NBI + NBI_f");
  REQUIRE(set);
  CHECK(set->contains(DomainTag::nbi));
  CHECK(set->contains(DomainTag::nbi_fake));
  CHECK(set->size() == 2);
  CHECK(parse_tag_set(to_string(*set)) == set);
  CHECK_FALSE(parse_tag_set("NBI+"));
  CHECK_FALSE(parse_tag_set("XYZ"));
}

TEST_CASE("8-bit normalization round trip for all values") {
  for (int v = 0; v < 256; ++v) {
    const float n = normalize_u8(static_cast<std::uint8_t>(v));
    REQUIRE(n >= -1.0f);
    REQUIRE(n <= 1.0f);
    REQUIRE(denormalize_u8(n) == v);
  }
  CHECK(denormalize_u8(-3.0f) == 0);
  CHECK(denormalize_u8(2.0f) == 255);
}

TEST_CASE("dataset counts and homogeneity") {
  const auto ds = toy_dataset(DomainTag::wli, patient_names(4), 3);
  CHECK(ds.size() == 12);
  CHECK((ds.counts() == LabelCounts{6, 6}));
  CHECK_FALSE(ds.is_composite());
  CHECK_THROWS_AS(DomainDataset(DomainTag::nbi, {patch("a", "p", Label::healthy, Modality::wli)}), ValidationError);
}

TEST_CASE("merge is a multiset union") {
  const auto a = toy_dataset(DomainTag::nbi, patient_names(3), 2);
  const auto b = toy_dataset(DomainTag::nbi_fake, patient_names(5), 1);
  const auto ab = merge_datasets(a, b);
  CHECK(ab.size() == a.size() + b.size());
  CHECK(ab.is_composite());
  CHECK((ab.tags() == TagSet{DomainTag::nbi, DomainTag::nbi_fake}));
  CHECK(ab.counts().total() == ab.size());
  CHECK(merge_datasets(a, DomainDataset{}).size() == a.size());
  CHECK(merge_datasets(a, a).size() == 2 * a.size());
}

TEST_CASE("canvas offsets") {
  CHECK((canvas_offset(500, 300, 768) == Offset{134, 234}));
  CHECK((canvas_offset(256, 256, 768) == Offset{256, 256}));
  CHECK((canvas_offset(768, 768, 768) == Offset{0, 0}));
}

TEST_CASE("padding keeps content centered and metadata intact") {
  const auto img = ramp(5, 3);
  const auto padded = pad_to_canvas(img, 9, {PadMode::constant, -1.0f});
  CHECK(padded.height == 9);
  CHECK(padded.width == 9);
  const auto off = canvas_offset(5, 3, 9);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 3; ++c) CHECK(padded.at(off.row + r, off.col + c, 1) == img.at(r, c, 1));
  CHECK(padded.at(0, 0, 0) == -1.0f);
  CHECK(pad_to_canvas(img, 5, {}).height == 5);
  CHECK_THROWS_AS(pad_to_canvas(img, 4, {}), ValidationError);

  auto p = patch("s", "p1", Label::celiac, Modality::nbi, 4, 0.25f);
  const auto pp = pad_to_canvas(p, 8);
  CHECK(pp.label == Label::celiac);
  CHECK(pp.patient_id == "p1");
  CHECK(pp.tag() == DomainTag::nbi);
  CHECK(pp.image().height == 8);
}

TEST_CASE("property: constant padding conserves the pixel multiset") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 1 + static_cast<int>(rng.below(12)), w = 1 + static_cast<int>(rng.below(12));
    const int canvas = std::max(h, w) + static_cast<int>(rng.below(6));
    Image img(h, w);
    for (auto& v : img.values) v = static_cast<float>(rng.uniform() * 1.8 - 0.9);
    const auto padded = pad_to_canvas(img, canvas, {PadMode::constant, -1.0f});
    std::vector<float> inside, original = img.values;
    for (float v : padded.values)
      if (v != -1.0f) inside.push_back(v);
    std::sort(inside.begin(), inside.end());
    std::sort(original.begin(), original.end());
    REQUIRE(inside == original);
  }
}

TEST_CASE("reflect padding mirrors without repeating the edge") {
  Image img(1, 3);
  for (int c = 0; c < 3; ++c) img.at(0, c, 0) = static_cast<float>(c);
  const auto padded = pad_to_canvas(img, 7, {PadMode::reflect});
  // Row of 7 centered at col 2: ... 2 1 [0 1 2] 1 0 ...
  std::vector<float> row;
  for (int c = 0; c < 7; ++c) row.push_back(padded.at(3, c, 0));
  CHECK((row == std::vector<float>{2, 1, 0, 1, 2, 1, 0}));
}

TEST_CASE("dihedral group on an asymmetric 2x2 image") {
  Image img(2, 2);
  for (int i = 0; i < 4; ++i) img.values[i * 3] = static_cast<float>(i + 1);
  std::vector<Image> outs;
  for (int id = 0; id < kDihedralOrder; ++id) outs.push_back(dihedral_transform(img, id));
  for (int a = 0; a < 8; ++a)
    for (int b = a + 1; b < 8; ++b) CHECK(outs[a] != outs[b]);
  CHECK(outs[0] == img);
  CHECK(dihedral_transform(outs[4], 4) == img);
}

TEST_CASE("property: dihedral composition is closed and matches pixels") {
  const auto img = ramp(3, 5);
  for (int a = 0; a < 8; ++a) {
    CHECK(compose_dihedral(0, a) == a);
    CHECK(compose_dihedral(a, 0) == a);
    CHECK(compose_dihedral(a, invert_dihedral(a)) == 0);
    for (int b = 0; b < 8; ++b) {
      const int ab = compose_dihedral(a, b);
      REQUIRE(ab >= 0);
      REQUIRE(ab < 8);
      REQUIRE(dihedral_transform(dihedral_transform(img, a), b) == dihedral_transform(img, ab));
    }
  }
}

TEST_CASE("dihedral augment keeps metadata and rejects bad ids") {
  auto p = patch("s", "p", Label::celiac, Modality::nbi, 3);
  const auto q = dihedral_augment(p, 5);
  CHECK(q.source_id == "s");
  CHECK(q.label == Label::celiac);
  CHECK_THROWS_AS(dihedral_augment(p, 8), ValidationError);
  CHECK_THROWS_AS(dihedral_augment(p, -1), ValidationError);
}

TEST_CASE("random crop offsets") {
  Rng rng(1);
  auto p = patch("s", "p", Label::healthy, Modality::wli, 256);
  const auto full = random_crop(p, 256, rng);
  CHECK((full.offset == Offset{0, 0}));
  for (int i = 0; i < 200; ++i) {
    const auto c = random_crop(p, 224, rng);
    REQUIRE(c.offset.row <= 32);
    REQUIRE(c.offset.col <= 32);
    const auto a = random_crop(p, 227, rng);
    REQUIRE(a.offset.row <= 29);
    REQUIRE(a.offset.col <= 29);
    REQUIRE(a.patch.image().height == 227);
  }
  CHECK_THROWS_AS(random_crop(p, 257, rng), ValidationError);
  Rng r1(9), r2(9);
  CHECK(random_crop(p, 100, r1).offset == random_crop(p, 100, r2).offset);
}

TEST_CASE("crop extracts the requested window") {
  const auto img = ramp(6, 6);
  const auto c = crop(img, {2, 1}, 3);
  CHECK(c.at(0, 0, 2) == img.at(2, 1, 2));
  CHECK(c.at(2, 2, 0) == img.at(4, 3, 0));
  CHECK(center_crop(img, 4).at(0, 0, 0) == img.at(1, 1, 0));
}

TEST_CASE("fold plan sizes") {
  std::set<std::string> ten, eleven;
  for (int i = 0; i < 10; ++i) ten.insert("p" + std::to_string(i));
  eleven = ten;
  eleven.insert("p10");
  auto sizes = assign_folds(ten, 5, 0).fold_sizes();
  CHECK(std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 2; }));
  sizes = assign_folds(eleven, 5, 0).fold_sizes();
  std::sort(sizes.begin(), sizes.end());
  CHECK((sizes == std::vector<std::size_t>{2, 2, 2, 2, 3}));
  CHECK_THROWS_AS(assign_folds(ten, 1, 0), ValidationError);
  CHECK_THROWS_AS(assign_folds(std::set<std::string>{"a", "b"}, 3, 0), ValidationError);
  CHECK(assign_folds(eleven, 5, 4) == assign_folds(eleven, 5, 4));
}

TEST_CASE("a patient keeps its fold across domains") {
  const auto wli = toy_dataset(DomainTag::wli, {"p1", "p2", "p3", "p7"}, 2);
  const auto nbi = toy_dataset(DomainTag::nbi, {"p4", "p5", "p6", "p7"}, 2);
  const auto plan = assign_folds(std::vector<const DomainDataset*>{&wli, &nbi}, 3, 2);
  const int f = plan.fold_of("p7");
  for (const auto* ds : {&wli, &nbi}) {
    const auto test = plan.test_part(*ds, f);
    const auto train = plan.training_part(*ds, f);
    CHECK(test.size() + train.size() == ds->size());
    for (const auto& p : train.patches()) CHECK(plan.fold_of(p.patient_id) != f);
    bool found = false;
    for (const auto& p : test.patches()) found |= p.patient_id == "p7";
    CHECK(found);
  }
  CHECK_THROWS_AS(plan.fold_of("nobody"), ValidationError);
}

TEST_CASE("manifest loading") {
  TempDir dir("nbi_manifest");
  std::filesystem::create_directories(dir.path() / "img");
  for (int i = 0; i < 3; ++i) write_png(dir.path() / "img" / ("a" + std::to_string(i) + ".png"), 8, 10 * i);
  write_png(dir.path() / "img" / "big.png", 9, 0);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir.path() / name) << text;
    return dir.path() / name;
  };
  const ManifestOptions opts{8};

  SUBCASE("valid rows") {
    const auto m = write("ok.csv",
                         "# comment\npath,patient_id,label,domain\nimg/a0.png,p1,healthy,WLI\n"
                         "img/a1.png,p1,celiac,WLI\n\nimg/a2.png,p2,healthy,WLI\n");
    const auto ds = load_manifest(m, opts);
    CHECK(ds.size() == 3);
    CHECK((ds.counts() == LabelCounts{2, 1}));
    CHECK(ds.tags() == TagSet{DomainTag::wli});
    CHECK(ds[1].image().at(0, 0, 0) == normalize_u8(10));
    for (const auto& p : ds.patches())
      for (float v : p.image().values) REQUIRE((v >= -1.0f && v <= 1.0f));
  }
  SUBCASE("empty manifest") {
    const auto ds = load_manifest(write("empty.csv", "path,patient_id,label,domain\n"), opts);
    CHECK(ds.empty());
    CHECK(ds.counts() == LabelCounts{});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(load_manifest(dir.path() / "missing.csv", opts), IoError);
    CHECK_THROWS_AS(load_manifest(write("bad.csv", "path,patient_id,label,domain\nimg/a0.png,p1,sick,WLI\n"), opts),
                    ParseError);
    CHECK_THROWS_AS(load_manifest(write("cols.csv", "path,patient_id,label\n"), opts), ParseError);
    CHECK_THROWS_AS(load_manifest(write("size.csv", "path,patient_id,label,domain\nimg/big.png,p1,healthy,WLI\n"),
                                  opts),
                    ValidationError);
    CHECK_THROWS_AS(load_manifest(write("dup.csv",
                                        "path,patient_id,label,domain\nimg/a0.png,p1,healthy,WLI\n"
                                        "img/a0.png,p2,healthy,WLI\n"),
                                  opts),
                    ValidationError);
    CHECK_THROWS_AS(load_manifest(write("mixed.csv",
                                        "path,patient_id,label,domain\nimg/a0.png,p1,healthy,WLI\n"
                                        "img/a1.png,p2,healthy,NBI\n"),
                                  opts),
                    ValidationError);
    CHECK_THROWS_AS(load_manifest(write("noimg.csv", "path,patient_id,label,domain\nimg/none.png,p1,healthy,WLI\n"),
                                  opts),
                    IoError);
    try {
      load_manifest(write("line.csv", "path,patient_id,label,domain\nimg/a0.png,p1,healthy,WLI\nimg/a1.png,p1\n"),
                    opts);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
}

TEST_CASE("manifest write/read round trip keeps fakes and sources") {
  TempDir dir("nbi_manifest_rt");
  std::vector<ImagePatch> ps;
  for (int i = 0; i < 4; ++i)
    ps.push_back(patch("src" + std::to_string(i), "p" + std::to_string(i % 2), i % 2 ? Label::celiac : Label::healthy,
                       Modality::nbi, 6, normalize_u8(static_cast<std::uint8_t>(40 * i)), Provenance::fake));
  const DomainDataset ds(DomainTag::nbi_fake, ps);
  write_manifest(dir.path() / "m.csv", ds, "images", "config_hash=abc");
  const auto back = load_manifest(dir.path() / "m.csv", {6});
  REQUIRE(back.size() == 4);
  CHECK(back.tags() == TagSet{DomainTag::nbi_fake});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(back[i].source_id == ds[i].source_id);
    CHECK(back[i].patient_id == ds[i].patient_id);
    CHECK(back[i].label == ds[i].label);
    CHECK(back[i].image() == ds[i].image());
  }
}

TEST_CASE("image file errors name the file") {
  TempDir dir("nbi_img");
  std::ofstream(dir.path() / "junk.png") << "not an image";
  try {
    read_image(dir.path() / "junk.png");
    FAIL("expected an io error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("junk.png") != std::string::npos);
  }
}

TEST_CASE("tensor conversion round trip") {
  const auto img = ramp(4, 5);
  const auto t = to_tensor(img);
  CHECK((t.sizes() == torch::IntArrayRef{1, 3, 4, 5}));
  CHECK(t[0][2][3][1].item<float>() == img.at(3, 1, 2));
  CHECK(from_tensor(t) == img);
}

TEST_CASE("synthetic task is deterministic and labelled") {
  const SyntheticOptions o{32, 6, 4, 3};
  const auto a = make_synthetic_task(o), b = make_synthetic_task(o);
  CHECK(a.x.size() == 12);
  CHECK(a.y.size() == 12);
  CHECK((a.x.counts() == LabelCounts{6, 6}));
  CHECK(a.y.tags() == TagSet{DomainTag::nbi});
  CHECK(a.x.patient_ids().size() == 4);
  for (std::size_t i = 0; i < a.x.size(); ++i) CHECK(a.x[i].image() == b.x[i].image());
  for (std::size_t i = 0; i < a.y.size(); ++i) {
    CHECK(a.y[i].image() == remap_color(a.y_content[i].image()));
    CHECK(a.y[i].label == a.y_content[i].label);
  }
  CHECK(a.x[0].image() != a.y_content[0].image());
}
