#ifndef MICE_EMBEDDINGS_H_
#define MICE_EMBEDDINGS_H_

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mice/corpus.h"

namespace mice {

// T x D, one row per token.
using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Equal-weight elementwise mean of same-shaped layer outputs. Accumulates in
// double so the result does not depend on layer order.
FloatMatrix AverageLayers(std::span<const FloatMatrix> layers);

// Word-level vectors from subword vectors: word w takes the row of its first
// subtoken. word_to_subtokens[w] lists w's subtoken rows in order.
FloatMatrix AlignFirstSubtoken(
    const FloatMatrix& subtoken_vectors,
    const std::vector<std::vector<std::size_t>>& word_to_subtokens);

struct SentenceEmbedding {
  std::string sentence_id;
  FloatMatrix vectors;

  std::size_t tokens() const { return static_cast<std::size_t>(vectors.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }

  // Applies first-subtoken alignment once, at construction.
  static SentenceEmbedding FromSubtokens(
      std::string sentence_id, const FloatMatrix& subtoken_vectors,
      const std::vector<std::vector<std::size_t>>& word_to_subtokens);

  bool operator==(const SentenceEmbedding& other) const;
};

// Word-aligned frozen contextual vectors keyed by sentence id. Immutable once
// built or opened; safe to share between reader threads.
class EmbeddingArchive {
 public:
  EmbeddingArchive(std::size_t dim, std::string provider_tag);

  std::size_t dim() const { return dim_; }
  const std::string& provider_tag() const { return provider_tag_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<SentenceEmbedding>& entries() const { return entries_; }

  // Throws std::invalid_argument on dim mismatch, duplicate id, or
  // non-finite values.
  void Add(SentenceEmbedding entry);
  const SentenceEmbedding* Find(const std::string& sentence_id) const;

  // Bitwise comparison of payloads (NaN-free by construction).
  bool operator==(const EmbeddingArchive& other) const;

 private:
  std::size_t dim_;
  std::string provider_tag_;
  std::vector<SentenceEmbedding> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Binary layout, little-endian throughout:
//   "MICEEMB1" | u32 version (1) | u32 dim | u32 entry count
//   | u16 tag length, tag bytes
//   | per entry: u16 id length, id bytes, u32 T, T*dim f32 row-major
inline constexpr char kArchiveMagic[8] = {'M', 'I', 'C', 'E', 'E', 'M', 'B', '1'};
inline constexpr std::uint32_t kArchiveVersion = 1;

void WriteArchive(const EmbeddingArchive& archive, const std::filesystem::path& path);
// Reads and validates the whole file eagerly: header, dims, frame lengths,
// duplicate ids, finiteness, and trailing bytes. Throws FormatError.
EmbeddingArchive OpenArchive(const std::filesystem::path& path);

// Problems found when matching an archive against a corpus: sentences
// without an entry, and entries whose token count disagrees.
struct ArchiveCoverage {
  std::vector<std::string> missing;
  std::vector<std::string> length_mismatch;
  bool ok() const { return missing.empty() && length_mismatch.empty(); }
  std::string Describe() const;
};
ArchiveCoverage CheckCoverage(const EmbeddingArchive& archive,
                              std::span<const AnnotatedSentence> sentences);

struct SyntheticEmbeddingOptions {
  std::size_t dim = 16;
  std::uint64_t seed = 1;
  // Per-component magnitude of the offset added to IDIOMATIC tokens; tokens
  // within `context_window` of one get half of it. Unset disables planting.
  std::optional<double> planted_signal;
  std::size_t context_window = 3;
};

// Deterministic test double for a pretrained embedding model. A token's base
// vector is standard-normal noise seeded by hash(surface, seed), so repeated
// words share a vector.
EmbeddingArchive SyntheticProvider(std::span<const AnnotatedSentence> sentences,
                                   const SyntheticEmbeddingOptions& options);

}  // namespace mice

#endif  // MICE_EMBEDDINGS_H_
