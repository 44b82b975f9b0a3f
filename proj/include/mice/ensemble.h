#ifndef MICE_ENSEMBLE_H_
#define MICE_ENSEMBLE_H_

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mice {

inline constexpr double kLatentClip = 1e-6;

// ln(p' / (1 - p')) with p' = clamp(p, eps, 1 - eps).
double InverseLogistic(double p, double eps = kLatentClip);

// Concatenates the inverse-logistic transforms of r >= 2 member
// probabilities of the positive class, in member order.
Eigen::VectorXd StackLatents(std::span<const double> member_probabilities,
                             double eps = kLatentClip);

struct GaussianComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  double LogPdf(const Eigen::VectorXd& u) const;
};

// Latent density of one class plus the prior factors of the posterior.
struct ClassDensity {
  std::vector<GaussianComponent> components;
  double gamma = 0.0;  // frequency prior
  double count = 0.0;  // n_t, true labels of this class in training

  double LogDensity(const Eigen::VectorXd& u) const;
};

struct MixtureOptions {
  int components = 1;           // K per class
  double ridge = 1e-6;          // added to every covariance diagonal
  int max_iterations = 100;     // EM, K > 1
  double tolerance = 1e-8;      // EM log-likelihood change
  std::uint64_t seed = 0;
  bool shared_covariance = false;  // K = 1 only: pooled within-class covariance
};

// Class-conditional Gaussian-mixture model over stacked latents:
//   p(T = t | u) = p(u | theta_t) gamma_t n_t / sum_i p(u | theta_i) gamma_i n_i
// with the sum taken over the two classes. Index 1 is IDIOMATIC.
class MixtureEnsemble {
 public:
  MixtureEnsemble() = default;
  explicit MixtureEnsemble(std::array<ClassDensity, 2> classes) : classes_(std::move(classes)) {}

  // latents: n x d, one row per training example; labels 0/1. A class with
  // fewer than d + 1 examples falls back to a diagonal covariance and records
  // a warning.
  static MixtureEnsemble Fit(const Eigen::MatrixXd& latents, std::span<const int> labels,
                             const MixtureOptions& options = {});

  // Posterior over {LITERAL, IDIOMATIC}, evaluated in log space.
  std::array<double, 2> Predict(const Eigen::VectorXd& u) const;

  const std::array<ClassDensity, 2>& classes() const { return classes_; }
  std::array<ClassDensity, 2>& mutable_classes() { return classes_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  Eigen::Index dim() const { return classes_[0].components.front().mean.size(); }

 private:
  std::array<ClassDensity, 2> classes_;
  std::vector<std::string> warnings_;
};

// Same binary conventions as checkpoints: "MICEMM01" | u32 version | u32 dim
// | per class: f64 gamma, f64 count, u32 K, per component: f64 weight,
// d f64 mean, d*d f64 covariance (column-major).
void SaveEnsemble(const MixtureEnsemble& ensemble, const std::filesystem::path& path);
MixtureEnsemble LoadEnsemble(const std::filesystem::path& path);

struct VoteOutcome {
  int label = 0;
  bool tied = false;  // only possible with an even number of voters
};

// Unweighted majority of 0/1 votes; a tie goes to IDIOMATIC.
VoteOutcome Vote(std::span<const int> predictions);

}  // namespace mice

#endif  // MICE_ENSEMBLE_H_
