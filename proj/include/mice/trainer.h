#ifndef MICE_TRAINER_H_
#define MICE_TRAINER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mice/corpus.h"
#include "mice/embeddings.h"
#include "mice/gru.h"

namespace mice {

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 0.001;
  double rho = 0.9;
  double epsilon = 1e-7;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  // Rescale the global gradient norm down to this value when exceeded.
  std::optional<double> clip_norm;
  std::size_t hidden = 100;
  double dropout = 0.5;

  // Throws std::invalid_argument if a field is out of range.
  void Validate() const;
};

// E <- rho E + (1 - rho) g^2;  theta <- theta - lr g / (sqrt(E) + eps)
void RmsPropUpdate(std::span<double> params, std::span<const double> grads,
                   std::span<double> mean_square, double learning_rate, double rho,
                   double epsilon);

class RmsProp {
 public:
  RmsProp(const BiGruParams& shape, double learning_rate, double rho, double epsilon);

  void Step(BiGruParams& params, const BiGruParams& grads);
  const BiGruParams& mean_square() const { return mean_square_; }

 private:
  BiGruParams mean_square_;
  double learning_rate_;
  double rho_;
  double epsilon_;
};

// Glorot-uniform matrices, zero biases, drawn from the "init" substream.
BiGruModel InitModel(std::size_t input_dim, const TrainConfig& config);

// Builds per-sentence training examples (inputs upcast to double).
TrainingExample MakeExample(const AnnotatedSentence& sentence,
                            const SentenceEmbedding& embedding, Task task);
std::vector<int> GoldLabels(const AnnotatedSentence& sentence, Task task);

struct TrainResult {
  BiGruModel model;
  std::vector<double> epoch_loss;  // mean training loss seen during each epoch
};

// Minibatch training, one sentence per sequence (no padding). Deterministic
// in (config.seed, sentences, archive). Throws std::invalid_argument listing
// every sentence without a usable embedding, std::runtime_error on a
// non-finite loss.
TrainResult Train(std::span<const AnnotatedSentence> sentences,
                  const EmbeddingArchive& archive, Task task, const TrainConfig& config);

// Positive-class probabilities: one per token (flattened in corpus order) or
// one per sentence. Dropout is off.
std::vector<double> PredictPositive(const BiGruModel& model,
                                    std::span<const AnnotatedSentence> sentences,
                                    const EmbeddingArchive& archive, Task task);

}  // namespace mice

#endif  // MICE_TRAINER_H_
