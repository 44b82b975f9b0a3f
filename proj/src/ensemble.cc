#include "mice/ensemble.h"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "binary_io.h"
#include "mice/common.h"
#include "mice/rng.h"

namespace mice {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double LogSumExp(std::span<const double> xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - m);
  return m + std::log(sum);
}

MatrixXd Covariance(const MatrixXd& rows, const VectorXd& mean, const VectorXd& weights) {
  const MatrixXd centered = rows.rowwise() - mean.transpose();
  return centered.transpose() * weights.asDiagonal() * centered / weights.sum();
}

// Adds ridge (growing it if needed) until the matrix factorises.
MatrixXd Regularise(MatrixXd cov, double ridge, std::vector<std::string>& warnings) {
  cov = 0.5 * (cov + cov.transpose());
  double extra = ridge;
  for (int attempt = 0; attempt < 12; ++attempt) {
    MatrixXd candidate = cov;
    candidate.diagonal().array() += extra;
    Eigen::LLT<MatrixXd> llt(candidate);
    if (llt.info() == Eigen::Success) {
      if (attempt > 0) warnings.push_back("covariance needed ridge " + std::to_string(extra));
      return candidate;
    }
    extra *= 10.0;
  }
  throw std::runtime_error("covariance is not positive definite even after regularisation");
}

GaussianComponent SingleGaussian(const MatrixXd& rows, double ridge, bool diagonal,
                                 std::vector<std::string>& warnings) {
  GaussianComponent g;
  g.mean = rows.colwise().mean().transpose();
  MatrixXd cov = Covariance(rows, g.mean, VectorXd::Ones(rows.rows()));
  if (diagonal) cov = MatrixXd(cov.diagonal().asDiagonal());
  g.covariance = Regularise(std::move(cov), ridge, warnings);
  return g;
}

std::vector<GaussianComponent> FitMixture(const MatrixXd& rows, int k, const MixtureOptions& opt,
                                          std::uint64_t seed, std::vector<std::string>& warnings) {
  const Index n = rows.rows();
  const MatrixXd base_cov =
      Regularise(Covariance(rows, rows.colwise().mean().transpose(), VectorXd::Ones(n)),
                 opt.ridge, warnings);
  std::vector<Index> pick(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pick[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.Shuffle(std::span(pick));
  std::vector<GaussianComponent> comps(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    comps[c].weight = 1.0 / k;
    comps[c].mean = rows.row(pick[static_cast<std::size_t>(c)]).transpose();
    comps[c].covariance = base_cov;
  }

  double previous = -std::numeric_limits<double>::infinity();
  MatrixXd resp(n, k);
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    double ll = 0.0;
    std::vector<double> logs(static_cast<std::size_t>(k));
    for (Index i = 0; i < n; ++i) {
      const VectorXd u = rows.row(i).transpose();
      for (int c = 0; c < k; ++c) logs[c] = std::log(comps[c].weight) + comps[c].LogPdf(u);
      const double norm = LogSumExp(logs);
      ll += norm;
      for (int c = 0; c < k; ++c) resp(i, c) = std::exp(logs[c] - norm);
    }
    for (int c = 0; c < k; ++c) {
      const VectorXd w = resp.col(c);
      const double mass = w.sum();
      if (mass < 1e-10) {
        warnings.push_back("mixture component collapsed; keeping previous parameters");
        continue;
      }
      comps[c].weight = mass / static_cast<double>(n);
      comps[c].mean = (rows.transpose() * w) / mass;
      comps[c].covariance = Regularise(Covariance(rows, comps[c].mean, w), opt.ridge, warnings);
    }
    if (std::abs(ll - previous) < opt.tolerance) break;
    previous = ll;
  }
  return comps;
}

}  // namespace

double InverseLogistic(double p, double eps) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability outside [0, 1]");
  const double q = std::clamp(p, eps, 1.0 - eps);
  return std::log(q / (1.0 - q));
}

VectorXd StackLatents(std::span<const double> member_probabilities, double eps) {
  if (member_probabilities.size() < 2) {
    throw std::invalid_argument("stacking needs at least two member models");
  }
  VectorXd u(static_cast<Index>(member_probabilities.size()));
  for (std::size_t i = 0; i < member_probabilities.size(); ++i) {
    u(static_cast<Index>(i)) = InverseLogistic(member_probabilities[i], eps);
  }
  return u;
}

double GaussianComponent::LogPdf(const VectorXd& u) const {
  const Eigen::LLT<MatrixXd> llt(covariance);
  const VectorXd y = llt.matrixL().solve(u - mean);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double d = static_cast<double>(u.size());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + log_det + y.squaredNorm());
}

double ClassDensity::LogDensity(const VectorXd& u) const {
  std::vector<double> logs;
  logs.reserve(components.size());
  for (const auto& c : components) logs.push_back(std::log(c.weight) + c.LogPdf(u));
  return LogSumExp(logs);
}

MixtureEnsemble MixtureEnsemble::Fit(const MatrixXd& latents, std::span<const int> labels,
                                     const MixtureOptions& options) {
  if (static_cast<std::size_t>(latents.rows()) != labels.size()) {
    throw std::invalid_argument("latent and label counts differ");
  }
  if (options.components < 1) throw std::invalid_argument("need at least one component");
  const Index d = latents.cols();
  const double n = static_cast<double>(labels.size());
  MixtureEnsemble model;
  std::array<MatrixXd, 2> rows;
  for (int t = 0; t < 2; ++t) {
    std::vector<Index> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if ((labels[i] ? 1 : 0) == t) members.push_back(static_cast<Index>(i));
    }
    if (members.empty()) {
      throw std::invalid_argument("class " + std::to_string(t) + " has no training examples");
    }
    rows[t] = latents(members, Eigen::all);
  }

  for (int t = 0; t < 2; ++t) {
    ClassDensity& cls = model.classes_[t];
    const Index nt = rows[t].rows();
    cls.count = static_cast<double>(nt);
    cls.gamma = cls.count / n;
    const bool degenerate = nt < d + 1;
    if (degenerate) {
      model.warnings_.push_back("class " + std::to_string(t) + " has " + std::to_string(nt) +
                                " examples for " + std::to_string(d) +
                                " latent dims; using a diagonal covariance");
    }
    const int k = static_cast<int>(std::min<Index>(options.components, nt));
    if (k < options.components) {
      model.warnings_.push_back("class " + std::to_string(t) + " reduced to " +
                                std::to_string(k) + " components");
    }
    if (k == 1 || degenerate) {
      cls.components = {SingleGaussian(rows[t], options.ridge, degenerate, model.warnings_)};
    } else {
      cls.components = FitMixture(rows[t], k, options,
                                  DeriveSeed(options.seed, static_cast<std::uint64_t>(t)),
                                  model.warnings_);
    }
  }

  if (options.shared_covariance) {
    if (options.components != 1) {
      throw std::invalid_argument("shared covariance requires one component per class");
    }
    MatrixXd pooled = MatrixXd::Zero(d, d);
    for (int t = 0; t < 2; ++t) {
      const MatrixXd centered =
          rows[t].rowwise() - model.classes_[t].components[0].mean.transpose();
      pooled += centered.transpose() * centered;
    }
    pooled /= n;
    const MatrixXd shared = Regularise(pooled, options.ridge, model.warnings_);
    for (auto& cls : model.classes_) cls.components[0].covariance = shared;
  }
  return model;
}

std::array<double, 2> MixtureEnsemble::Predict(const VectorXd& u) const {
  std::array<double, 2> scores;
  for (int t = 0; t < 2; ++t) {
    const ClassDensity& cls = classes_[t];
    const double prior = cls.gamma * cls.count;
    scores[t] = prior > 0.0 ? cls.LogDensity(u) + std::log(prior)
                            : -std::numeric_limits<double>::infinity();
  }
  const double norm = LogSumExp(scores);
  if (!std::isfinite(norm)) return {0.5, 0.5};
  return {std::exp(scores[0] - norm), std::exp(scores[1] - norm)};
}

void SaveEnsemble(const MixtureEnsemble& ensemble, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  binary::Writer w(out);
  w.Raw("MICEMM01", 8);
  w.U32(1);
  w.U32(static_cast<std::uint32_t>(ensemble.dim()));
  for (const auto& cls : ensemble.classes()) {
    w.F64(cls.gamma);
    w.F64(cls.count);
    w.U32(static_cast<std::uint32_t>(cls.components.size()));
    for (const auto& c : cls.components) {
      w.F64(c.weight);
      for (Index i = 0; i < c.mean.size(); ++i) w.F64(c.mean(i));
      for (Index i = 0; i < c.covariance.size(); ++i) w.F64(c.covariance.data()[i]);
    }
  }
}

MixtureEnsemble LoadEnsemble(const std::filesystem::path& path) {
  binary::Reader r = binary::Reader::FromFile(path.string());
  try {
    if (r.remaining() < 8 || r.Bytes(8) != "MICEMM01") throw FormatError("bad magic");
    if (r.U32() != 1) throw FormatError("unsupported ensemble version");
    const Index d = r.U32();
    std::array<ClassDensity, 2> classes;
    for (auto& cls : classes) {
      cls.gamma = r.F64();
      cls.count = r.F64();
      const std::uint32_t k = r.U32();
      if (k == 0) throw FormatError("class without components");
      for (std::uint32_t c = 0; c < k; ++c) {
        GaussianComponent g;
        g.weight = r.F64();
        g.mean.resize(d);
        for (Index i = 0; i < d; ++i) g.mean(i) = r.F64();
        g.covariance.resize(d, d);
        for (Index i = 0; i < d * d; ++i) g.covariance.data()[i] = r.F64();
        cls.components.push_back(std::move(g));
      }
    }
    if (r.remaining() != 0) throw FormatError("trailing bytes");
    return MixtureEnsemble(std::move(classes));
  } catch (const FormatError& e) {
    throw e.WithContext(path.string());
  }
}

VoteOutcome Vote(std::span<const int> predictions) {
  if (predictions.empty()) throw std::invalid_argument("no votes");
  const auto yes = static_cast<std::size_t>(std::count_if(
      predictions.begin(), predictions.end(), [](int p) { return p != 0; }));
  const std::size_t no = predictions.size() - yes;
  return {yes >= no ? 1 : 0, yes == no};
}

}  // namespace mice
