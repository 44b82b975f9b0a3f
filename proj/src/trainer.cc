#include "mice/trainer.h"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include "mice/rng.h"

namespace mice {
namespace {

template <typename Tensor>
std::span<double> Flat(Tensor& t) {
  return {t.data(), static_cast<std::size_t>(t.size())};
}

double GlobalNorm(const BiGruParams& grads) {
  double sum = 0.0;
  ForEachTensor(grads, [&](const std::string&, const auto& t) { sum += t.squaredNorm(); });
  return std::sqrt(sum);
}

}  // namespace

void TrainConfig::Validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (batch_size == 0) throw std::invalid_argument("batch size must be > 0");
  if (hidden == 0) throw std::invalid_argument("hidden size must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (clip_norm && !(*clip_norm > 0.0)) throw std::invalid_argument("clip norm must be > 0");
}

void RmsPropUpdate(std::span<double> params, std::span<const double> grads,
                   std::span<double> mean_square, double learning_rate, double rho,
                   double epsilon) {
  if (params.size() != grads.size() || params.size() != mean_square.size()) {
    throw std::invalid_argument("RMSProp shape mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    mean_square[i] = rho * mean_square[i] + (1.0 - rho) * g * g;
    params[i] -= learning_rate * g / (std::sqrt(mean_square[i]) + epsilon);
  }
}

RmsProp::RmsProp(const BiGruParams& shape, double learning_rate, double rho, double epsilon)
    : mean_square_(BiGruParams::Zeros(shape.input_dim(), shape.hidden())),
      learning_rate_(learning_rate),
      rho_(rho),
      epsilon_(epsilon) {}

void RmsProp::Step(BiGruParams& params, const BiGruParams& grads) {
  std::vector<std::span<double>> p, e;
  std::vector<std::span<const double>> g;
  ForEachTensor(params, [&](const std::string&, auto& t) { p.push_back(Flat(t)); });
  ForEachTensor(mean_square_, [&](const std::string&, auto& t) { e.push_back(Flat(t)); });
  ForEachTensor(grads, [&](const std::string&, const auto& t) {
    g.emplace_back(t.data(), static_cast<std::size_t>(t.size()));
  });
  for (std::size_t i = 0; i < p.size(); ++i) {
    RmsPropUpdate(p[i], g[i], e[i], learning_rate_, rho_, epsilon_);
  }
}

BiGruModel InitModel(std::size_t input_dim, const TrainConfig& config) {
  BiGruParams params = BiGruParams::Zeros(input_dim, config.hidden);
  Rng rng(DeriveSeed(config.seed, "init"));
  ForEachTensor(params, [&](const std::string&, auto& t) {
    if constexpr (std::is_same_v<std::decay_t<decltype(t)>, Eigen::VectorXd>) {
      return;  // biases stay zero
    }
    const double limit = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.Uniform(-limit, limit);
  });
  return BiGruModel(std::move(params), config.dropout);
}

std::vector<int> GoldLabels(const AnnotatedSentence& sentence, Task task) {
  if (task == Task::kSentence) return {sentence.idiomatic() ? 1 : 0};
  std::vector<int> labels;
  labels.reserve(sentence.token_labels.size());
  for (TokenLabel l : sentence.token_labels) labels.push_back(l == TokenLabel::kIdiomatic);
  return labels;
}

TrainingExample MakeExample(const AnnotatedSentence& sentence,
                            const SentenceEmbedding& embedding, Task task) {
  if (embedding.tokens() != sentence.tokens.size()) {
    throw std::invalid_argument("embedding for " + sentence.id + " has " +
                                std::to_string(embedding.tokens()) + " rows for " +
                                std::to_string(sentence.tokens.size()) + " tokens");
  }
  TrainingExample ex;
  ex.inputs = embedding.vectors.cast<double>();
  ex.labels = GoldLabels(sentence, task);
  return ex;
}

TrainResult Train(std::span<const AnnotatedSentence> sentences,
                  const EmbeddingArchive& archive, Task task, const TrainConfig& config) {
  config.Validate();
  const ArchiveCoverage coverage = CheckCoverage(archive, sentences);
  if (!coverage.ok()) throw std::invalid_argument(coverage.Describe());

  TrainResult result{InitModel(archive.dim(), config), {}};
  RmsProp optimizer(result.model.params(), config.learning_rate, config.rho, config.epsilon);
  const std::uint64_t dropout_base = DeriveSeed(config.seed, "dropout");
  const std::uint64_t shuffle_base = DeriveSeed(config.seed, "shuffle");

  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle(DeriveSeed(shuffle_base, static_cast<std::uint64_t>(epoch)));
    shuffle.Shuffle(std::span(order));
    double loss_sum = 0.0;
    std::size_t units = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<TrainingExample> batch;
      batch.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) {
        const AnnotatedSentence& s = sentences[order[k]];
        TrainingExample ex = MakeExample(s, *archive.Find(s.id), task);
        ex.dropout_seed =
            DeriveSeed(dropout_base, static_cast<std::uint64_t>(epoch), order[k]);
        batch.push_back(std::move(ex));
      }
      LossAndGradient lg = ComputeLossAndGradient(result.model, batch, task, true);
      if (!std::isfinite(lg.loss)) {
        std::ostringstream os;
        os << "non-finite loss at epoch " << epoch + 1 << ", batch starting at "
           << start << " (first sentence " << sentences[order[start]].id << ")";
        throw std::runtime_error(os.str());
      }
      if (config.clip_norm) {
        const double norm = GlobalNorm(lg.gradient);
        if (norm > *config.clip_norm) {
          const double scale = *config.clip_norm / norm;
          ForEachTensor(lg.gradient, [&](const std::string&, auto& t) { t *= scale; });
        }
      }
      optimizer.Step(result.model.mutable_params(), lg.gradient);
      loss_sum += lg.loss * static_cast<double>(lg.units);
      units += lg.units;
    }
    result.epoch_loss.push_back(units ? loss_sum / static_cast<double>(units) : 0.0);
  }
  return result;
}

std::vector<double> PredictPositive(const BiGruModel& model,
                                    std::span<const AnnotatedSentence> sentences,
                                    const EmbeddingArchive& archive, Task task) {
  const ArchiveCoverage coverage = CheckCoverage(archive, sentences);
  if (!coverage.ok()) throw std::invalid_argument(coverage.Describe());
  std::vector<double> out;
  for (const auto& s : sentences) {
    const Eigen::MatrixXd inputs = archive.Find(s.id)->vectors.cast<double>();
    if (task == Task::kToken) {
      const Eigen::MatrixXd probs = model.PredictTokens(inputs);
      for (Eigen::Index t = 0; t < probs.rows(); ++t) out.push_back(probs(t, 1));
    } else {
      out.push_back(model.PredictSentence(inputs)(1));
    }
  }
  return out;
}

}  // namespace mice
