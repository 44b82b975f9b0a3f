#include "mice/embeddings.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "binary_io.h"
#include "mice/rng.h"

namespace mice {
namespace {

bool AllFinite(const FloatMatrix& m) { return m.allFinite(); }

}  // namespace

FloatMatrix AverageLayers(std::span<const FloatMatrix> layers) {
  if (layers.empty()) throw std::invalid_argument("no layers to average");
  const auto rows = layers[0].rows();
  const auto cols = layers[0].cols();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(rows, cols);
  for (const auto& layer : layers) {
    if (layer.rows() != rows || layer.cols() != cols) {
      throw std::invalid_argument("layer shapes differ");
    }
    sum += layer.cast<double>();
  }
  sum /= static_cast<double>(layers.size());
  return sum.cast<float>();
}

FloatMatrix AlignFirstSubtoken(
    const FloatMatrix& subtoken_vectors,
    const std::vector<std::vector<std::size_t>>& word_to_subtokens) {
  FloatMatrix out(static_cast<Eigen::Index>(word_to_subtokens.size()),
                  subtoken_vectors.cols());
  for (std::size_t w = 0; w < word_to_subtokens.size(); ++w) {
    const auto& pieces = word_to_subtokens[w];
    if (pieces.empty()) {
      throw std::invalid_argument("word " + std::to_string(w) + " has no subtokens");
    }
    const std::size_t first = pieces.front();
    if (first >= static_cast<std::size_t>(subtoken_vectors.rows())) {
      throw std::out_of_range("subtoken index " + std::to_string(first) +
                              " out of range");
    }
    out.row(static_cast<Eigen::Index>(w)) =
        subtoken_vectors.row(static_cast<Eigen::Index>(first));
  }
  return out;
}

SentenceEmbedding SentenceEmbedding::FromSubtokens(
    std::string sentence_id, const FloatMatrix& subtoken_vectors,
    const std::vector<std::vector<std::size_t>>& word_to_subtokens) {
  return {std::move(sentence_id), AlignFirstSubtoken(subtoken_vectors, word_to_subtokens)};
}

bool SentenceEmbedding::operator==(const SentenceEmbedding& other) const {
  if (sentence_id != other.sentence_id || vectors.rows() != other.vectors.rows() ||
      vectors.cols() != other.vectors.cols()) {
    return false;
  }
  return std::memcmp(vectors.data(), other.vectors.data(),
                     sizeof(float) * static_cast<std::size_t>(vectors.size())) == 0;
}

EmbeddingArchive::EmbeddingArchive(std::size_t dim, std::string provider_tag)
    : dim_(dim), provider_tag_(std::move(provider_tag)) {
  if (dim_ == 0) throw std::invalid_argument("archive dim must be positive");
}

void EmbeddingArchive::Add(SentenceEmbedding entry) {
  if (entry.dim() != dim_) {
    throw std::invalid_argument("entry " + entry.sentence_id + " has dim " +
                                std::to_string(entry.dim()) + ", archive has " +
                                std::to_string(dim_));
  }
  if (!AllFinite(entry.vectors)) {
    throw std::invalid_argument("entry " + entry.sentence_id + " has non-finite values");
  }
  auto [it, inserted] = index_.try_emplace(entry.sentence_id, entries_.size());
  if (!inserted) {
    throw std::invalid_argument("duplicate sentence id " + entry.sentence_id);
  }
  entries_.push_back(std::move(entry));
}

const SentenceEmbedding* EmbeddingArchive::Find(const std::string& sentence_id) const {
  auto it = index_.find(sentence_id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

bool EmbeddingArchive::operator==(const EmbeddingArchive& other) const {
  return dim_ == other.dim_ && provider_tag_ == other.provider_tag_ &&
         entries_ == other.entries_;
}

void WriteArchive(const EmbeddingArchive& archive, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  binary::Writer w(out);
  w.Raw(kArchiveMagic, sizeof(kArchiveMagic));
  w.U32(kArchiveVersion);
  w.U32(static_cast<std::uint32_t>(archive.dim()));
  w.U32(static_cast<std::uint32_t>(archive.size()));
  w.String16(archive.provider_tag(), "provider tag");
  for (const auto& e : archive.entries()) {
    w.String16(e.sentence_id, "sentence id");
    w.U32(static_cast<std::uint32_t>(e.tokens()));
    const float* p = e.vectors.data();
    for (Eigen::Index i = 0; i < e.vectors.size(); ++i) w.F32(p[i]);
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

EmbeddingArchive OpenArchive(const std::filesystem::path& path) {
  binary::Reader r = binary::Reader::FromFile(path.string());
  const std::string where = path.string() + ": ";
  try {
    if (r.Bytes(sizeof(kArchiveMagic)) != std::string(kArchiveMagic, sizeof(kArchiveMagic))) {
      throw FormatError("bad magic");
    }
  } catch (const FormatError&) {
    throw FormatError(where + "bad magic (not an embedding archive)");
  }
  try {
    const std::uint32_t version = r.U32();
    if (version != kArchiveVersion) {
      throw FormatError("unsupported archive version " + std::to_string(version));
    }
    const std::uint32_t dim = r.U32();
    const std::uint32_t count = r.U32();
    if (dim == 0) throw FormatError("archive dim is 0");
    EmbeddingArchive archive(dim, r.String16());
    for (std::uint32_t e = 0; e < count; ++e) {
      SentenceEmbedding entry;
      entry.sentence_id = r.String16();
      const std::uint32_t tokens = r.U32();
      const std::size_t values = static_cast<std::size_t>(tokens) * dim;
      if (r.remaining() / sizeof(float) < values) {
        throw FormatError("truncated payload for entry " + entry.sentence_id);
      }
      entry.vectors.resize(tokens, dim);
      float* p = entry.vectors.data();
      for (std::size_t i = 0; i < values; ++i) p[i] = r.F32();
      try {
        archive.Add(std::move(entry));
      } catch (const std::invalid_argument& err) {
        throw FormatError(err.what());
      }
    }
    if (r.remaining() != 0) {
      throw FormatError(std::to_string(r.remaining()) + " trailing bytes after last entry");
    }
    return archive;
  } catch (const FormatError& err) {
    throw FormatError(where + err.what());
  }
}

std::string ArchiveCoverage::Describe() const {
  std::ostringstream os;
  if (!missing.empty()) {
    os << missing.size() << " sentence(s) missing from archive:";
    for (const auto& id : missing) os << ' ' << id;
  }
  if (!length_mismatch.empty()) {
    if (!missing.empty()) os << "; ";
    os << length_mismatch.size() << " sentence(s) with token count mismatch:";
    for (const auto& id : length_mismatch) os << ' ' << id;
  }
  return os.str();
}

ArchiveCoverage CheckCoverage(const EmbeddingArchive& archive,
                              std::span<const AnnotatedSentence> sentences) {
  ArchiveCoverage coverage;
  for (const auto& s : sentences) {
    const SentenceEmbedding* e = archive.Find(s.id);
    if (!e) {
      coverage.missing.push_back(s.id);
    } else if (e->tokens() != s.tokens.size()) {
      coverage.length_mismatch.push_back(s.id);
    }
  }
  return coverage;
}

EmbeddingArchive SyntheticProvider(std::span<const AnnotatedSentence> sentences,
                                   const SyntheticEmbeddingOptions& options) {
  if (options.dim < 2) throw std::invalid_argument("synthetic dim must be >= 2");
  std::string tag = "synthetic:dim=" + std::to_string(options.dim) +
                    ":seed=" + std::to_string(options.seed);
  if (options.planted_signal) {
    std::ostringstream os;
    os << ":planted=" << *options.planted_signal;
    tag += os.str();
  }
  EmbeddingArchive archive(options.dim, tag);

  const auto dim = static_cast<Eigen::Index>(options.dim);
  Eigen::RowVectorXf offset = Eigen::RowVectorXf::Zero(dim);
  if (options.planted_signal) {
    Rng direction(DeriveSeed(options.seed, "planted-direction"));
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double sign = direction.Bernoulli(0.5) ? 1.0 : -1.0;
      offset(j) = static_cast<float>(sign * *options.planted_signal);
    }
  }

  std::unordered_map<std::string, Eigen::RowVectorXf> base_cache;
  auto base = [&](const std::string& surface) -> const Eigen::RowVectorXf& {
    auto it = base_cache.find(surface);
    if (it != base_cache.end()) return it->second;
    Rng rng(DeriveSeed(options.seed, Fnv1a64(surface)));
    Eigen::RowVectorXf v(dim);
    for (Eigen::Index j = 0; j < dim; ++j) v(j) = static_cast<float>(rng.Normal());
    return base_cache.emplace(surface, std::move(v)).first->second;
  };

  for (const auto& s : sentences) {
    const std::size_t n = s.tokens.size();
    SentenceEmbedding entry;
    entry.sentence_id = s.id;
    entry.vectors.resize(static_cast<Eigen::Index>(n), dim);
    for (std::size_t t = 0; t < n; ++t) {
      entry.vectors.row(static_cast<Eigen::Index>(t)) = base(s.tokens[t]);
    }
    if (options.planted_signal) {
      std::vector<float> scale(n, 0.0f);
      const auto w = options.context_window;
      for (std::size_t t = 0; t < n; ++t) {
        if (s.token_labels[t] != TokenLabel::kIdiomatic) continue;
        const std::size_t lo = t >= w ? t - w : 0;
        const std::size_t hi = std::min(n - 1, t + w);
        for (std::size_t c = lo; c <= hi; ++c) scale[c] = std::max(scale[c], 0.5f);
        scale[t] = 1.0f;
      }
      for (std::size_t t = 0; t < n; ++t) {
        if (scale[t] > 0.0f) entry.vectors.row(static_cast<Eigen::Index>(t)) += scale[t] * offset;
      }
    }
    archive.Add(std::move(entry));
  }
  return archive;
}

}  // namespace mice
