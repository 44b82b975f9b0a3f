#ifndef MICE_BASELINE_H_
#define MICE_BASELINE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mice {

struct SparseVector {
  std::vector<std::uint32_t> index;  // ascending
  std::vector<double> value;

  std::size_t nnz() const { return index.size(); }
};

double Dot(const SparseVector& x, std::span<const double> dense);
double Norm(const SparseVector& x);

// Term statistics over a document collection. Term indices are dense and
// follow lexicographic term order.
//   idf(t) = ln((1 + N) / (1 + df(t))) + 1,  tf = raw count,
// and transformed vectors are L2-normalised.
class TfIdfVocabulary {
 public:
  static TfIdfVocabulary Build(std::span<const std::vector<std::string>> documents);

  std::size_t size() const { return terms_.size(); }
  std::size_t document_count() const { return documents_; }
  std::optional<std::uint32_t> Index(const std::string& term) const;
  std::size_t DocumentFrequency(const std::string& term) const;
  double Idf(const std::string& term) const;

  // Out-of-vocabulary terms are ignored; an all-OOV document maps to the
  // zero vector.
  SparseVector Transform(std::span<const std::string> document) const;

 private:
  struct Entry {
    std::uint32_t index;
    std::size_t df;
    double idf;
  };
  std::map<std::string, Entry> terms_;
  std::size_t documents_ = 0;
};

// tokens[index - k .. index + k] clipped to the sentence, target included.
std::vector<std::string> TokenWindow(std::span<const std::string> tokens, std::size_t index,
                                     std::size_t k = 3);

struct SvmOptions {
  double lambda = 1e-4;
  int epochs = 20;
  std::uint64_t seed = 0;
};

// Linear decision function w.x + b. The bias is learned as the weight of an
// implicit constant feature.
class LinearSvm {
 public:
  LinearSvm() = default;
  LinearSvm(std::vector<double> weights, double bias, double lambda)
      : weights_(std::move(weights)), bias_(bias), lambda_(lambda) {}

  double Decision(const SparseVector& x) const;
  bool Predict(const SparseVector& x) const { return Decision(x) >= 0.0; }
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  double lambda() const { return lambda_; }
  // Feature weights divided by c, for inputs multiplied by c.
  LinearSvm Rescaled(double c) const;

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
  double lambda_ = 0.0;
};

// Pegasos primal sub-gradient descent on the regularised hinge loss. Labels
// are 0/1; both classes must be present.
LinearSvm TrainSvm(std::span<const SparseVector> features, std::span<const int> labels,
                   std::size_t dimension, const SvmOptions& options);

// Constant predictors behind the "default classifier" reference rows.
class ConstantClassifier {
 public:
  // Most frequent training label; ties go to IDIOMATIC (1).
  static ConstantClassifier Majority(std::span<const int> train_labels);
  static ConstantClassifier AllPositive() { return ConstantClassifier(1); }

  int label() const { return label_; }
  std::vector<int> Predict(std::size_t n) const { return std::vector<int>(n, label_); }

 private:
  explicit ConstantClassifier(int label) : label_(label) {}
  int label_;
};

}  // namespace mice

#endif  // MICE_BASELINE_H_
