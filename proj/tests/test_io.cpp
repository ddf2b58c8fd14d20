#include <gtest/gtest.h>

#include <png.h>

#include <fstream>
#include <random>

#include "gaitgender/dataset.hpp"
#include "gaitgender/error.hpp"
#include "gaitgender/evaluation.hpp"
#include "gaitgender/image_io.hpp"
#include "gaitgender/model_io.hpp"
#include "support.hpp"

namespace gaitgender {
namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no gaitgender::Error thrown";
  return ErrorCode::InvalidArgument;
}

// --- images -----------------------------------------------------------------

TEST(Images, PngAndPgmRoundTrip) {
  const auto dir = testing::scratch_dir("images");
  std::mt19937_64 rng(61);
  const Mask m = testing::random_mask(rng, 37, 53, 0.4);
  for (const char* name : {"a.png", "a.pgm"}) {
    write_silhouette(dir / name, m);
    const auto back = read_silhouette(dir / name);
    EXPECT_EQ(back.height(), 37);
    EXPECT_EQ(back.width(), 53);
    EXPECT_TRUE((back.mask() == m).all()) << name;
  }
}

TEST(Images, GrayPngThresholdsAbove127) {
  const auto dir = testing::scratch_dir("threshold");
  const std::vector<unsigned char> gray = {0, 126, 127, 128, 200, 255};
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = 6;
  image.height = 1;
  image.format = PNG_FORMAT_GRAY;
  ASSERT_TRUE(png_image_write_to_file(&image, (dir / "g.png").c_str(), 0, gray.data(), 0, nullptr));
  const Mask m = read_silhouette(dir / "g.png").mask();
  const std::vector<int> want = {0, 0, 0, 1, 1, 1};
  for (int x = 0; x < 6; ++x) EXPECT_EQ(m(0, x), want[x]) << static_cast<int>(gray[x]);
}

TEST(Images, AsciiPgmWithCommentAndSmallMaxval) {
  const auto dir = testing::scratch_dir("pgm");
  write_text(dir / "a.pgm", "P2\n# comment\n3 2\n15\n0 7 8\n15 1 9\n");
  const Mask m = read_silhouette(dir / "a.pgm").mask();
  // Scaled to 8 bits: 7 -> 119, 8 -> 136.
  EXPECT_EQ(m(0, 0), 0);
  EXPECT_EQ(m(0, 1), 0);
  EXPECT_EQ(m(0, 2), 1);
  EXPECT_EQ(m(1, 0), 1);
  EXPECT_EQ(m(1, 1), 0);
  EXPECT_EQ(m(1, 2), 1);
}

TEST(Images, CorruptFiles) {
  const auto dir = testing::scratch_dir("corrupt");
  write_text(dir / "junk.png", "definitely not an image");
  write_text(dir / "short.pgm", "P5\n4 4\n255\nab");
  write_text(dir / "trunc.png", std::string("\x89PNG\r\n\x1a\n", 8) + "IHDR");
  for (const char* name : {"junk.png", "short.pgm", "trunc.png"}) {
    EXPECT_EQ(code_of([&] { read_silhouette(dir / name); }), ErrorCode::CorruptImage) << name;
  }
  EXPECT_EQ(code_of([&] { read_silhouette(dir / "absent.png"); }), ErrorCode::IoError);
}

// --- dataset ----------------------------------------------------------------

TEST(Manifest, FormatsAndErrors) {
  const auto dir = testing::scratch_dir("manifest");
  write_text(dir / "m.txt", "# header\n001 M\n002 female\n003 +1  # trailing\n\n004 -1\n005 f\n");
  const auto g = read_manifest(dir / "m.txt");
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.at("001"), kMale);
  EXPECT_EQ(g.at("002"), kFemale);
  EXPECT_EQ(g.at("003"), kMale);
  EXPECT_EQ(g.at("004"), kFemale);
  EXPECT_EQ(g.at("005"), kFemale);
  write_text(dir / "bad.txt", "001 X\n");
  EXPECT_EQ(code_of([&] { read_manifest(dir / "bad.txt"); }), ErrorCode::UnknownGender);
  EXPECT_EQ(code_of([&] { read_manifest(dir / "none.txt"); }), ErrorCode::MissingManifest);
}

TEST(Ingest, EmptyRootIsAnEmptyDataset) {
  const auto dir = testing::scratch_dir("empty");
  EXPECT_TRUE(ingest(dir).empty());
}

TEST(Ingest, ExportedSyntheticDataComesBackInOrder) {
  const auto dir = testing::scratch_dir("export");
  SyntheticDatasetOptions o;
  o.subjects_per_gender = 1;
  o.conditions = {Condition::Normal};
  o.frames_per_sequence = 3;
  const Dataset d = synthetic_dataset(o);
  export_dataset(d, dir);
  const Dataset back = ingest(dir);
  ASSERT_EQ(back.size(), 22u);
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].subject, i < 11 ? "001" : "002");
    EXPECT_EQ(back[i].gender, i < 11 ? kMale : kFemale);
    EXPECT_EQ(back[i].view, default_views()[i % 11]);
    EXPECT_EQ(back[i].condition, Condition::Normal);
    ASSERT_EQ(back[i].frames->size(), 3u);
  }
  // Pixels survive the trip; match sequences by subject and view.
  for (const auto& s : d) {
    for (const auto& b : back) {
      if (b.subject != s.subject || b.view != s.view) continue;
      for (std::size_t f = 0; f < 3; ++f) {
        EXPECT_TRUE((b.frames->load(f).mask() == s.frames->load(f).mask()).all());
      }
    }
  }
}

TEST(Ingest, ManifestProblems) {
  const auto dir = testing::scratch_dir("ingest-manifest");
  fs::create_directories(dir / "007" / "nm-01" / "090");
  EXPECT_EQ(code_of([&] { ingest(dir); }), ErrorCode::MissingManifest);
  write_text(dir / "manifest.txt", "001 M\n");
  EXPECT_EQ(code_of([&] { ingest(dir); }), ErrorCode::UnknownGender);
}

TEST(Ingest, OutOfOrderFramesNameTheFile) {
  const auto dir = testing::scratch_dir("order");
  const auto seq = dir / "001" / "nm-01" / "090";
  fs::create_directories(seq);
  write_text(dir / "manifest.txt", "001 M\n");
  const Mask m = Mask::Ones(4, 4);
  write_silhouette(seq / "f-2.png", m);
  write_silhouette(seq / "f-10.png", m);  // sorts before f-2
  try {
    ingest(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FrameOrder);
    EXPECT_NE(std::string(e.what()).find("f-2.png"), std::string::npos) << e.what();
  }
}

TEST(Ingest, CorruptFrameIsReportedWhenLoaded) {
  const auto dir = testing::scratch_dir("lazy");
  const auto seq = dir / "001" / "bg-02" / "018";
  fs::create_directories(seq);
  write_text(dir / "manifest.txt", "001 F\n");
  write_text(seq / "001.png", "garbage");
  const Dataset d = ingest(dir);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].condition, Condition::Bag);
  EXPECT_EQ(d[0].index, 2);
  EXPECT_EQ(d[0].view, 18);
  EXPECT_EQ(code_of([&] { d[0].frames->load(0); }), ErrorCode::CorruptImage);
}

// --- model files ------------------------------------------------------------

TrainedModel random_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto fill = [&](auto& a) {
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = testing::uniform(rng, -1, 1);
  };
  TrainedModel m;
  m.dataset_fingerprint = "abc123";
  for (int v : m.params.views) {
    Image<double> t(42, 144);
    fill(t);
    m.vp.templates[v] = t;
    Envelope e{Eigen::ArrayXd(360), Eigen::ArrayXd(360)};
    fill(e.upper);
    fill(e.lower);
    m.ds.envelopes[v] = e;
    LinearClassifier<double> c;
    c.view = v;
    c.weights.resize(144 * 144);
    fill(c.weights);
    c.bias = testing::uniform(rng, -1, 1);
    m.bank[v] = c;
  }
  return m;
}

TEST(ModelFile, RoundTripIsBitExact) {
  const auto m = random_model(71);
  const auto bytes = serialize_model(m);
  const auto back = deserialize_model(bytes);
  EXPECT_EQ(serialize_model(back), bytes);
  for (int v : m.params.views) {
    EXPECT_TRUE((back.vp.templates.at(v) == m.vp.templates.at(v)).all());
    EXPECT_TRUE((back.ds.at(v).upper == m.ds.at(v).upper).all());
    EXPECT_TRUE(back.bank.at(v).weights == m.bank.at(v).weights);
    EXPECT_EQ(back.bank.at(v).bias, m.bank.at(v).bias);
  }
  EXPECT_EQ(back.dataset_fingerprint, "abc123");

  const auto dir = testing::scratch_dir("model");
  save_model(m, dir / "m.bin");
  EXPECT_EQ(model_hash(load_model(dir / "m.bin")), model_hash(m));
}

TEST(ModelFile, DamageIsDetected) {
  const auto bytes = serialize_model(random_model(72));

  auto truncated = bytes;
  truncated.resize(bytes.size() - 100);
  EXPECT_EQ(code_of([&] { deserialize_model(truncated); }), ErrorCode::ChecksumMismatch);
  EXPECT_EQ(code_of([&] { deserialize_model(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 10)); }),
            ErrorCode::ChecksumMismatch);

  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_EQ(code_of([&] { deserialize_model(flipped); }), ErrorCode::ChecksumMismatch);

  auto versioned = bytes;
  versioned[8] = 99;
  EXPECT_EQ(code_of([&] { deserialize_model(versioned); }), ErrorCode::VersionMismatch);

  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(code_of([&] { deserialize_model(magic); }), ErrorCode::VersionMismatch);
}

TEST(ModelFile, ViewSetMustMatchParams) {
  auto m = random_model(73);
  m.vp.templates.erase(180);
  m.ds.envelopes.erase(180);
  m.bank.erase(180);
  EXPECT_EQ(code_of([&] { deserialize_model(serialize_model(m)); }), ErrorCode::ShapeInconsistency);

  auto extra = random_model(74);
  extra.params.views.pop_back();  // arrays for 180 remain
  EXPECT_EQ(code_of([&] { deserialize_model(serialize_model(extra)); }), ErrorCode::ShapeInconsistency);

  auto shape = random_model(75);
  shape.bank[90].weights.resize(10);
  EXPECT_EQ(code_of([&] { deserialize_model(serialize_model(shape)); }), ErrorCode::ShapeInconsistency);
}

TEST(ModelFile, HashTracksContent) {
  const auto a = random_model(76);
  auto b = a;
  EXPECT_EQ(model_hash(a), model_hash(b));
  b.params.svm.C = 2.0;
  EXPECT_NE(model_hash(a), model_hash(b));
  b = a;
  b.bank[0].bias += 1e-12;
  EXPECT_NE(model_hash(a), model_hash(b));
  EXPECT_EQ(model_hash(a).size(), 8u);
}

TEST(Params, JsonRoundTripAndDefaults) {
  PipelineParams p;
  p.svm.C = 0.25;
  p.train_stride = 4;
  p.attachment_removal = false;
  p.views = {0, 90};
  const auto q = parse_params(params_to_json(p));
  EXPECT_EQ(q.svm.C, 0.25);
  EXPECT_EQ(q.train_stride, 4);
  EXPECT_FALSE(q.attachment_removal);
  EXPECT_EQ(q.views, (std::vector<int>{0, 90}));

  const auto d = parse_params(R"({"params": {"max_iter": 7}})");
  EXPECT_EQ(d.svm.max_iter, 7);
  EXPECT_EQ(d.T(), 15);
  EXPECT_EQ(d.views.size(), 11u);
  EXPECT_EQ(code_of([] { parse_params("{nope"); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { parse_params(R"({"T": 20})"); }), ErrorCode::ShapeInconsistency);
}

}  // namespace
}  // namespace gaitgender
