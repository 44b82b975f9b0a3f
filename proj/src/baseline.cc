#include "mice/baseline.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "mice/rng.h"

namespace mice {

double Dot(const SparseVector& x, std::span<const double> dense) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.nnz(); ++i) {
    if (x.index[i] < dense.size()) sum += x.value[i] * dense[x.index[i]];
  }
  return sum;
}

double Norm(const SparseVector& x) {
  double sum = 0.0;
  for (double v : x.value) sum += v * v;
  return std::sqrt(sum);
}

TfIdfVocabulary TfIdfVocabulary::Build(std::span<const std::vector<std::string>> documents) {
  if (documents.empty()) throw std::invalid_argument("tf-idf needs at least one document");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    for (const auto& term : std::set<std::string>(doc.begin(), doc.end())) ++df[term];
  }
  TfIdfVocabulary vocab;
  vocab.documents_ = documents.size();
  const double n = static_cast<double>(documents.size());
  std::uint32_t next = 0;
  for (const auto& [term, count] : df) {
    const double idf = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
    vocab.terms_.emplace(term, Entry{next++, count, idf});
  }
  return vocab;
}

std::optional<std::uint32_t> TfIdfVocabulary::Index(const std::string& term) const {
  auto it = terms_.find(term);
  if (it == terms_.end()) return std::nullopt;
  return it->second.index;
}

std::size_t TfIdfVocabulary::DocumentFrequency(const std::string& term) const {
  auto it = terms_.find(term);
  return it == terms_.end() ? 0 : it->second.df;
}

double TfIdfVocabulary::Idf(const std::string& term) const {
  auto it = terms_.find(term);
  if (it == terms_.end()) throw std::out_of_range("term not in vocabulary: " + term);
  return it->second.idf;
}

SparseVector TfIdfVocabulary::Transform(std::span<const std::string> document) const {
  std::map<std::uint32_t, double> weights;
  for (const auto& term : document) {
    auto it = terms_.find(term);
    if (it != terms_.end()) weights[it->second.index] += it->second.idf;
  }
  SparseVector v;
  for (const auto& [index, w] : weights) {
    v.index.push_back(index);
    v.value.push_back(w);
  }
  const double norm = Norm(v);
  if (norm > 0.0) {
    for (double& x : v.value) x /= norm;
  }
  return v;
}

std::vector<std::string> TokenWindow(std::span<const std::string> tokens, std::size_t index,
                                     std::size_t k) {
  if (index >= tokens.size()) throw std::out_of_range("token index out of range");
  const std::size_t lo = index >= k ? index - k : 0;
  const std::size_t hi = std::min(tokens.size() - 1, index + k);
  return {tokens.begin() + static_cast<std::ptrdiff_t>(lo),
          tokens.begin() + static_cast<std::ptrdiff_t>(hi + 1)};
}

double LinearSvm::Decision(const SparseVector& x) const {
  return Dot(x, weights_) + bias_;
}

LinearSvm LinearSvm::Rescaled(double c) const {
  std::vector<double> w = weights_;
  for (double& x : w) x /= c;
  return LinearSvm(std::move(w), bias_, lambda_);
}

LinearSvm TrainSvm(std::span<const SparseVector> features, std::span<const int> labels,
                   std::size_t dimension, const SvmOptions& options) {
  if (features.size() != labels.size()) {
    throw std::invalid_argument("feature and label counts differ");
  }
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!has_pos || !has_neg) {
    throw std::invalid_argument("SVM training needs examples of both classes");
  }
  if (!(options.lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");

  // w = scale * v; v[dimension] is the bias weight on a constant feature.
  std::vector<double> v(dimension + 1, 0.0);
  double scale = 1.0;
  std::vector<std::size_t> order(features.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    Rng rng(DeriveSeed(options.seed, static_cast<std::uint64_t>(epoch)));
    rng.Shuffle(std::span(order));
    for (std::size_t i : order) {
      ++step;
      const double eta = 1.0 / (options.lambda * static_cast<double>(step));
      const SparseVector& x = features[i];
      const double y = labels[i] ? 1.0 : -1.0;
      const double margin = y * scale * (Dot(x, v) + v[dimension]);
      const double shrink = 1.0 - eta * options.lambda;
      if (shrink <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        const double step_size = eta * y / scale;
        for (std::size_t k = 0; k < x.nnz(); ++k) {
          if (x.index[k] >= dimension) throw std::out_of_range("feature index >= dimension");
          v[x.index[k]] += step_size * x.value[k];
        }
        v[dimension] += step_size;
      }
      if (scale < 1e-9) {
        for (double& w : v) w *= scale;
        scale = 1.0;
      }
    }
  }
  std::vector<double> w(dimension);
  for (std::size_t k = 0; k < dimension; ++k) w[k] = scale * v[k];
  return LinearSvm(std::move(w), scale * v[dimension], options.lambda);
}

ConstantClassifier ConstantClassifier::Majority(std::span<const int> train_labels) {
  const auto positives =
      static_cast<std::size_t>(std::count(train_labels.begin(), train_labels.end(), 1));
  return ConstantClassifier(2 * positives >= train_labels.size() ? 1 : 0);
}

}  // namespace mice
