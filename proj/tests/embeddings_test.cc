#include "mice/embeddings.h"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "mice/common.h"
#include "mice/rng.h"
#include "test_util.h"

namespace mice {
namespace {

using testing::MakeSentence;
using testing::TempDir;

FloatMatrix RandomMatrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  FloatMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(rng.Normal());
  return m;
}

TEST(AverageLayersTest, ElementwiseMean) {
  std::vector<FloatMatrix> layers = {RandomMatrix(4, 3, 1), RandomMatrix(4, 3, 2),
                                     RandomMatrix(4, 3, 3)};
  const FloatMatrix avg = AverageLayers(layers);
  for (Eigen::Index r = 0; r < 4; ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      const double want = (static_cast<double>(layers[0](r, c)) + layers[1](r, c) +
                           layers[2](r, c)) / 3.0;
      EXPECT_NEAR(avg(r, c), want, 1e-6);
    }
  }
  std::vector<FloatMatrix> reversed(layers.rbegin(), layers.rend());
  EXPECT_TRUE((AverageLayers(reversed).array() == avg.array()).all());
  EXPECT_THROW(AverageLayers(std::vector<FloatMatrix>{}), std::invalid_argument);
  layers.push_back(RandomMatrix(3, 3, 4));
  EXPECT_THROW(AverageLayers(layers), std::invalid_argument);
}

TEST(AlignTest, FirstSubtoken) {
  const FloatMatrix sub = RandomMatrix(5, 2, 7);
  // Words: [0], [1, 2], [3, 4]
  const FloatMatrix words = AlignFirstSubtoken(sub, {{0}, {1, 2}, {3, 4}});
  ASSERT_EQ(words.rows(), 3);
  EXPECT_TRUE((words.row(1).array() == sub.row(1).array()).all());
  EXPECT_TRUE((words.row(2).array() == sub.row(3).array()).all());
  EXPECT_THROW(AlignFirstSubtoken(sub, {{0}, {}}), std::invalid_argument);
  EXPECT_THROW(AlignFirstSubtoken(sub, {{9}}), std::out_of_range);
  const auto e = SentenceEmbedding::FromSubtokens("x", sub, {{0}, {1, 2}, {3, 4}});
  EXPECT_EQ(e.tokens(), 3u);
}

EmbeddingArchive SampleArchive() {
  EmbeddingArchive a(3, "unit-test");
  a.Add({"first", RandomMatrix(2, 3, 1)});
  a.Add({"second-id", RandomMatrix(5, 3, 2)});
  a.Add({"x", RandomMatrix(1, 3, 3)});
  return a;
}

TEST(ArchiveTest, AddValidates) {
  EmbeddingArchive a(3, "t");
  EXPECT_THROW(a.Add({"d", RandomMatrix(2, 4, 1)}), std::invalid_argument);
  FloatMatrix bad = RandomMatrix(2, 3, 1);
  bad(1, 1) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(a.Add({"n", bad}), std::invalid_argument);
  a.Add({"ok", RandomMatrix(2, 3, 1)});
  EXPECT_THROW(a.Add({"ok", RandomMatrix(2, 3, 2)}), std::invalid_argument);
  EXPECT_NE(a.Find("ok"), nullptr);
  EXPECT_EQ(a.Find("missing"), nullptr);
  EXPECT_THROW(EmbeddingArchive(0, "t"), std::invalid_argument);
}

TEST(ArchiveTest, RoundTripIsBitwise) {
  TempDir dir;
  const EmbeddingArchive a = SampleArchive();
  WriteArchive(a, dir / "a.emb");
  const EmbeddingArchive b = OpenArchive(dir / "a.emb");
  EXPECT_TRUE(a == b);
  EXPECT_EQ(b.provider_tag(), "unit-test");
}

TEST(ArchiveTest, FileSizeFormula) {
  TempDir dir;
  const EmbeddingArchive a = SampleArchive();
  WriteArchive(a, dir / "a.emb");
  // 8 magic + 4 version + 4 dim + 4 count + 2 + |tag|, then per entry
  // 2 + |id| + 4 + 4 T D.
  std::size_t want = 8 + 4 + 4 + 4 + 2 + std::string("unit-test").size();
  for (const auto& [id, t] : {std::pair<std::string, std::size_t>{"first", 2},
                              {"second-id", 5},
                              {"x", 1}}) {
    want += 2 + id.size() + 4 + 4 * t * 3;
  }
  EXPECT_EQ(std::filesystem::file_size(dir / "a.emb"), want);
}

TEST(ArchiveTest, HeaderBytesAreLittleEndian) {
  TempDir dir;
  WriteArchive(SampleArchive(), dir / "a.emb");
  const std::string bytes = testing::ReadText(dir / "a.emb");
  EXPECT_EQ(bytes.substr(0, 8), "MICEEMB1");
  auto u32 = [&](std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[at + i]);
    return v;
  };
  EXPECT_EQ(u32(8), 1u);
  EXPECT_EQ(u32(12), 3u);
  EXPECT_EQ(u32(16), 3u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[20]), 9);
  EXPECT_EQ(static_cast<unsigned char>(bytes[21]), 0);
  EXPECT_EQ(bytes.substr(22, 9), "unit-test");
  // First entry: id "first", T = 2, then the first value as an f32.
  EXPECT_EQ(bytes.substr(33, 5), "first");
  EXPECT_EQ(u32(38), 2u);
  const std::uint32_t raw = u32(42);
  float first;
  std::memcpy(&first, &raw, 4);
  EXPECT_EQ(first, SampleArchive().Find("first")->vectors(0, 0));
}

TEST(ArchiveTest, EveryTruncationIsRejected) {
  TempDir dir;
  WriteArchive(SampleArchive(), dir / "a.emb");
  const std::string bytes = testing::ReadText(dir / "a.emb");
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    testing::WriteText(dir / "t.emb", bytes.substr(0, n));
    EXPECT_THROW(OpenArchive(dir / "t.emb"), FormatError) << "prefix " << n;
  }
  testing::WriteText(dir / "t.emb", bytes + "x");
  EXPECT_THROW(OpenArchive(dir / "t.emb"), FormatError);
}

TEST(ArchiveTest, CorruptHeadersAreRejected) {
  TempDir dir;
  WriteArchive(SampleArchive(), dir / "a.emb");
  const std::string bytes = testing::ReadText(dir / "a.emb");
  auto expect_bad = [&](std::string b, const std::string& needle) {
    testing::WriteText(dir / "c.emb", b);
    try {
      OpenArchive(dir / "c.emb");
      ADD_FAILURE() << "accepted corrupt archive (" << needle << ")";
    } catch (const FormatError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  std::string b = bytes;
  b[0] = 'X';
  expect_bad(b, "magic");
  b = bytes;
  b[8] = 2;
  expect_bad(b, "version");
  b = bytes;
  b[12] = 0;
  expect_bad(b, "dim");
  // Rename "x" to "f" + duplicate of an earlier id is not possible without
  // changing lengths, so corrupt a float to NaN instead.
  b = bytes;
  const std::uint32_t nan_bits = 0x7fc00000u;
  std::memcpy(&b[42], &nan_bits, 4);
  expect_bad(b, "non-finite");
  EXPECT_THROW(OpenArchive(dir / "does-not-exist.emb"), std::runtime_error);
}

TEST(ArchiveTest, DuplicateIdInFileIsRejected) {
  TempDir dir;
  EmbeddingArchive a(2, "t");
  a.Add({"ab", RandomMatrix(1, 2, 1)});
  a.Add({"ac", RandomMatrix(1, 2, 2)});
  WriteArchive(a, dir / "a.emb");
  std::string bytes = testing::ReadText(dir / "a.emb");
  const auto pos = bytes.rfind("ac");
  bytes[pos + 1] = 'b';
  testing::WriteText(dir / "a.emb", bytes);
  EXPECT_THROW(OpenArchive(dir / "a.emb"), FormatError);
}

TEST(CoverageTest, ListsEveryProblem) {
  EmbeddingArchive a(2, "t");
  a.Add({"s1", RandomMatrix(2, 2, 1)});
  a.Add({"s2", RandomMatrix(3, 2, 1)});
  const Corpus c = {MakeSentence("s1", "e", "a b", "I O"), MakeSentence("s2", "e", "a b", "O O"),
                    MakeSentence("s3", "e", "a", "O"), MakeSentence("s4", "e", "a", "O")};
  const ArchiveCoverage cov = CheckCoverage(a, c);
  EXPECT_FALSE(cov.ok());
  EXPECT_EQ(cov.missing, (std::vector<std::string>{"s3", "s4"}));
  EXPECT_EQ(cov.length_mismatch, (std::vector<std::string>{"s2"}));
  const std::string d = cov.Describe();
  for (const char* id : {"s2", "s3", "s4"}) EXPECT_NE(d.find(id), std::string::npos);
  EXPECT_TRUE(CheckCoverage(a, std::span(c).first(1)).ok());
}

TEST(SyntheticProviderTest, DeterministicAndShared) {
  const Corpus c = {MakeSentence("a", "e", "w1 w2 w3", "O O O"),
                    MakeSentence("b", "e", "w3 w1", "O O")};
  SyntheticEmbeddingOptions o;
  o.dim = 8;
  const EmbeddingArchive x = SyntheticProvider(c, o);
  EXPECT_TRUE(x == SyntheticProvider(c, o));
  EXPECT_TRUE((x.Find("a")->vectors.row(0).array() == x.Find("b")->vectors.row(1).array()).all());
  o.seed = 2;
  EXPECT_FALSE(x == SyntheticProvider(c, o));
}

TEST(SyntheticProviderTest, PlantedOffset) {
  // Token 4 is idiomatic; tokens 1..7 are within 3 positions of it.
  const Corpus c = {MakeSentence("lit", "e", "t0 t1 t2 t3 t4 t5 t6 t7 t8", "O O O O O O O O O"),
                    MakeSentence("idi", "e", "t0 t1 t2 t3 t4 t5 t6 t7 t8", "O O O O I O O O O")};
  SyntheticEmbeddingOptions o;
  o.dim = 6;
  o.planted_signal = 2.0;
  const EmbeddingArchive a = SyntheticProvider(c, o);
  const FloatMatrix diff = a.Find("idi")->vectors - a.Find("lit")->vectors;
  for (Eigen::Index j = 0; j < 6; ++j) {
    EXPECT_NEAR(std::abs(diff(4, j)), 2.0, 1e-5);
    EXPECT_NEAR(diff(1, j), 0.5 * diff(4, j), 1e-5);
    EXPECT_NEAR(diff(7, j), 0.5 * diff(4, j), 1e-5);
    EXPECT_EQ(diff(0, j), 0.0f);
    EXPECT_EQ(diff(8, j), 0.0f);
  }
}

}  // namespace
}  // namespace mice
