#include "mice/gru.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mice/rng.h"

namespace mice {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd Sigmoid(const VectorXd& a) {
  return (1.0 + (-a.array()).exp()).inverse().matrix();
}

Eigen::Vector2d Softmax2(const Eigen::Vector2d& logits) {
  const double m = logits.maxCoeff();
  Eigen::Vector2d e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

// Intermediates of one direction, stored by sequence position.
struct DirectionCache {
  MatrixXd z, r, candidate, h, h_prev;  // T x H
};

DirectionCache RunDirection(const GruCell& cell, const MatrixXd& inputs, bool reverse) {
  const Index steps = inputs.rows();
  const Index hidden = cell.hidden();
  DirectionCache c;
  c.z.resize(steps, hidden);
  c.r.resize(steps, hidden);
  c.candidate.resize(steps, hidden);
  c.h.resize(steps, hidden);
  c.h_prev.resize(steps, hidden);
  const MatrixXd xz = inputs * cell.w_z.transpose();
  const MatrixXd xr = inputs * cell.w_r.transpose();
  const MatrixXd xh = inputs * cell.w_h.transpose();
  VectorXd h = VectorXd::Zero(hidden);
  for (Index k = 0; k < steps; ++k) {
    const Index t = reverse ? steps - 1 - k : k;
    const VectorXd z = Sigmoid(xz.row(t).transpose() + cell.u_z * h + cell.b_z);
    const VectorXd r = Sigmoid(xr.row(t).transpose() + cell.u_r * h + cell.b_r);
    const VectorXd cand =
        (xh.row(t).transpose() + cell.u_h * r.cwiseProduct(h) + cell.b_h).array().tanh().matrix();
    c.h_prev.row(t) = h.transpose();
    c.z.row(t) = z.transpose();
    c.r.row(t) = r.transpose();
    c.candidate.row(t) = cand.transpose();
    h = z.cwiseProduct(h) + (1.0 - z.array()).matrix().cwiseProduct(cand);
    c.h.row(t) = h.transpose();
  }
  return c;
}

// dh_out: T x H, gradient of the loss w.r.t. each h_t from outside the
// recurrence. Accumulates parameter gradients into `grad`.
void BackpropDirection(const GruCell& cell, const MatrixXd& inputs,
                       const DirectionCache& c, const MatrixXd& dh_out, bool reverse,
                       GruCell& grad) {
  const Index steps = inputs.rows();
  const Index hidden = cell.hidden();
  MatrixXd da_z(steps, hidden), da_r(steps, hidden), da_c(steps, hidden);
  VectorXd carry = VectorXd::Zero(hidden);
  for (Index k = steps - 1; k >= 0; --k) {
    const Index t = reverse ? steps - 1 - k : k;
    const VectorXd dh = dh_out.row(t).transpose() + carry;
    const auto z = c.z.row(t).transpose().array();
    const auto r = c.r.row(t).transpose().array();
    const auto cand = c.candidate.row(t).transpose().array();
    const auto h_prev = c.h_prev.row(t).transpose().array();

    const VectorXd dz = (dh.array() * (h_prev - cand)).matrix();
    const VectorXd az = (dz.array() * z * (1.0 - z)).matrix();
    const VectorXd ac = (dh.array() * (1.0 - z) * (1.0 - cand.square())).matrix();
    const VectorXd drh = cell.u_h.transpose() * ac;
    const VectorXd ar = (drh.array() * h_prev * r * (1.0 - r)).matrix();

    da_z.row(t) = az.transpose();
    da_r.row(t) = ar.transpose();
    da_c.row(t) = ac.transpose();
    carry = (dh.array() * z + drh.array() * r).matrix() + cell.u_z.transpose() * az +
            cell.u_r.transpose() * ar;
  }
  grad.w_z.noalias() += da_z.transpose() * inputs;
  grad.w_r.noalias() += da_r.transpose() * inputs;
  grad.w_h.noalias() += da_c.transpose() * inputs;
  grad.u_z.noalias() += da_z.transpose() * c.h_prev;
  grad.u_r.noalias() += da_r.transpose() * c.h_prev;
  const MatrixXd gated_prev = c.r.cwiseProduct(c.h_prev);
  grad.u_h.noalias() += da_c.transpose() * gated_prev;
  grad.b_z += da_z.colwise().sum().transpose();
  grad.b_r += da_r.colwise().sum().transpose();
  grad.b_h += da_c.colwise().sum().transpose();
}

MatrixXd DropoutMask(Index rows, Index cols, double rate, DropoutMode mode) {
  if (!mode.train || rate <= 0.0) return MatrixXd::Ones(rows, cols);
  Rng rng(mode.seed);
  const double keep_scale = 1.0 / (1.0 - rate);
  MatrixXd mask(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) mask(i, j) = rng.Bernoulli(rate) ? 0.0 : keep_scale;
  }
  return mask;
}

void CheckInputs(const BiGruParams& p, const MatrixXd& inputs) {
  if (inputs.rows() < 1) throw std::invalid_argument("empty input sequence");
  if (static_cast<std::size_t>(inputs.cols()) != p.input_dim()) {
    throw std::invalid_argument("input dim " + std::to_string(inputs.cols()) +
                                " does not match model dim " +
                                std::to_string(p.input_dim()));
  }
}

SoftmaxHead ZeroHead(std::size_t hidden) {
  return {MatrixXd::Zero(2, static_cast<Index>(2 * hidden)), VectorXd::Zero(2)};
}

// Loss of one unit and d(loss)/d(logits), with the floor applied to the
// probability that enters the log.
double UnitLoss(const Eigen::Vector2d& p, int label, Eigen::Vector2d* dlogits) {
  const int k = label ? 1 : 0;
  const double prob = p(k);
  const bool clamped = prob < kProbabilityFloor;
  const double loss = -std::log(clamped ? kProbabilityFloor : prob);
  if (dlogits) {
    if (clamped) {
      dlogits->setZero();
    } else {
      // d(-log p_k)/d logit_j = p_j - [j == k]
      *dlogits = p;
      (*dlogits)(k) -= 1.0;
    }
  }
  return loss;
}

struct BatchResult {
  double loss_sum = 0.0;
  std::size_t units = 0;
};

BatchResult RunBatch(const BiGruModel& model, std::span<const TrainingExample> batch,
                     Task task, bool train_mode, BiGruParams* grad) {
  const BiGruParams& p = model.params();
  const Index hidden = static_cast<Index>(p.hidden());
  const SoftmaxHead& head = task == Task::kToken ? p.token_head : p.sentence_head;
  SoftmaxHead* head_grad =
      grad ? (task == Task::kToken ? &grad->token_head : &grad->sentence_head) : nullptr;
  BatchResult result;
  for (const auto& ex : batch) {
    CheckInputs(p, ex.inputs);
    const Index steps = ex.inputs.rows();
    const std::size_t expected = task == Task::kToken ? static_cast<std::size_t>(steps) : 1;
    if (ex.labels.size() != expected) {
      throw std::invalid_argument("label count does not match task");
    }
    const DirectionCache fwd = RunDirection(p.forward, ex.inputs, false);
    const DirectionCache bwd = RunDirection(p.backward, ex.inputs, true);

    MatrixXd states;
    if (task == Task::kToken) {
      states.resize(steps, 2 * hidden);
      states << fwd.h, bwd.h;
    } else {
      states.resize(1, 2 * hidden);
      states << fwd.h.row(steps - 1), bwd.h.row(0);
    }
    const MatrixXd mask = DropoutMask(states.rows(), states.cols(), model.dropout_rate(),
                                      {train_mode, ex.dropout_seed});
    const MatrixXd dropped = states.cwiseProduct(mask);
    MatrixXd dstates = MatrixXd::Zero(states.rows(), states.cols());
    for (Index u = 0; u < states.rows(); ++u) {
      const Eigen::VectorXd v = dropped.row(u).transpose();
      const Eigen::Vector2d prob = Softmax2(head.weight * v + head.bias);
      Eigen::Vector2d dlogits;
      result.loss_sum += UnitLoss(prob, ex.labels[static_cast<std::size_t>(u)],
                                  grad ? &dlogits : nullptr);
      ++result.units;
      if (grad) {
        head_grad->weight.noalias() += dlogits * v.transpose();
        head_grad->bias += dlogits;
        dstates.row(u) = (head.weight.transpose() * dlogits).transpose().cwiseProduct(mask.row(u));
      }
    }
    if (!grad) continue;

    MatrixXd dh_fwd = MatrixXd::Zero(steps, hidden);
    MatrixXd dh_bwd = MatrixXd::Zero(steps, hidden);
    if (task == Task::kToken) {
      dh_fwd = dstates.leftCols(hidden);
      dh_bwd = dstates.rightCols(hidden);
    } else {
      dh_fwd.row(steps - 1) = dstates.row(0).head(hidden);
      dh_bwd.row(0) = dstates.row(0).tail(hidden);
    }
    BackpropDirection(p.forward, ex.inputs, fwd, dh_fwd, false, grad->forward);
    BackpropDirection(p.backward, ex.inputs, bwd, dh_bwd, true, grad->backward);
  }
  return result;
}

}  // namespace

GruCell GruCell::Zeros(std::size_t hidden, std::size_t input_dim) {
  const auto h = static_cast<Index>(hidden);
  const auto d = static_cast<Index>(input_dim);
  GruCell c;
  c.w_z = c.w_r = c.w_h = MatrixXd::Zero(h, d);
  c.u_z = c.u_r = c.u_h = MatrixXd::Zero(h, h);
  c.b_z = c.b_r = c.b_h = VectorXd::Zero(h);
  return c;
}

BiGruParams BiGruParams::Zeros(std::size_t input_dim, std::size_t hidden) {
  if (input_dim == 0 || hidden == 0) {
    throw std::invalid_argument("input dim and hidden size must be positive");
  }
  return {GruCell::Zeros(hidden, input_dim), GruCell::Zeros(hidden, input_dim),
          ZeroHead(hidden), ZeroHead(hidden)};
}

std::size_t ParameterCount(const BiGruParams& params) {
  std::size_t n = 0;
  ForEachTensor(params, [&](const std::string&, const auto& t) {
    n += static_cast<std::size_t>(t.size());
  });
  return n;
}

VectorXd GruCellStep(const GruCell& cell, const VectorXd& x, const VectorXd& h_prev) {
  if (!x.allFinite() || !h_prev.allFinite()) {
    throw std::domain_error("non-finite input to GRU step");
  }
  if (x.size() != cell.input_dim() || h_prev.size() != cell.hidden()) {
    throw std::invalid_argument("GRU step shape mismatch");
  }
  const VectorXd z = Sigmoid(cell.w_z * x + cell.u_z * h_prev + cell.b_z);
  const VectorXd r = Sigmoid(cell.w_r * x + cell.u_r * h_prev + cell.b_r);
  const VectorXd cand =
      (cell.w_h * x + cell.u_h * r.cwiseProduct(h_prev) + cell.b_h).array().tanh().matrix();
  return z.cwiseProduct(h_prev) + (1.0 - z.array()).matrix().cwiseProduct(cand);
}

BiGruStates BiGruForward(const BiGruParams& params, const MatrixXd& inputs) {
  CheckInputs(params, inputs);
  const DirectionCache fwd = RunDirection(params.forward, inputs, false);
  const DirectionCache bwd = RunDirection(params.backward, inputs, true);
  const Index steps = inputs.rows();
  const Index hidden = static_cast<Index>(params.hidden());
  BiGruStates s;
  s.per_token.resize(steps, 2 * hidden);
  s.per_token << fwd.h, bwd.h;
  s.pooled.resize(2 * hidden);
  s.pooled << fwd.h.row(steps - 1).transpose(), bwd.h.row(0).transpose();
  return s;
}

BiGruModel::BiGruModel(std::size_t input_dim, std::size_t hidden, double dropout_rate)
    : BiGruModel(BiGruParams::Zeros(input_dim, hidden), dropout_rate) {}

BiGruModel::BiGruModel(BiGruParams params, double dropout_rate)
    : params_(std::move(params)), dropout_rate_(dropout_rate) {
  if (!(dropout_rate_ >= 0.0 && dropout_rate_ < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }
}

MatrixXd BiGruModel::PredictTokens(const MatrixXd& inputs, DropoutMode dropout) const {
  const BiGruStates s = BiGruForward(params_, inputs);
  const MatrixXd mask =
      DropoutMask(s.per_token.rows(), s.per_token.cols(), dropout_rate_, dropout);
  MatrixXd out(inputs.rows(), 2);
  for (Index t = 0; t < inputs.rows(); ++t) {
    const VectorXd v = s.per_token.row(t).cwiseProduct(mask.row(t)).transpose();
    out.row(t) = Softmax2(params_.token_head.weight * v + params_.token_head.bias).transpose();
  }
  return out;
}

Eigen::Vector2d BiGruModel::PredictSentence(const MatrixXd& inputs,
                                            DropoutMode dropout) const {
  const BiGruStates s = BiGruForward(params_, inputs);
  const MatrixXd mask = DropoutMask(1, s.pooled.size(), dropout_rate_, dropout);
  const VectorXd v = s.pooled.cwiseProduct(mask.row(0).transpose());
  return Softmax2(params_.sentence_head.weight * v + params_.sentence_head.bias);
}

double BceLoss(std::span<const double> positive_probs, std::span<const int> labels) {
  if (positive_probs.size() != labels.size()) {
    throw std::invalid_argument("probability and label counts differ");
  }
  if (positive_probs.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(positive_probs[i], kProbabilityFloor, 1.0 - kProbabilityFloor);
    sum -= labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  return sum / static_cast<double>(labels.size());
}

LossAndGradient ComputeLossAndGradient(const BiGruModel& model,
                                       std::span<const TrainingExample> batch, Task task,
                                       bool train_mode) {
  LossAndGradient out;
  out.gradient = BiGruParams::Zeros(model.input_dim(), model.hidden());
  const BatchResult r = RunBatch(model, batch, task, train_mode, &out.gradient);
  out.units = r.units;
  if (r.units == 0) return out;
  const double scale = 1.0 / static_cast<double>(r.units);
  out.loss = r.loss_sum * scale;
  ForEachTensor(out.gradient, [&](const std::string&, auto& t) { t *= scale; });
  return out;
}

double ComputeLoss(const BiGruModel& model, std::span<const TrainingExample> batch, Task task,
                   bool train_mode) {
  const BatchResult r = RunBatch(model, batch, task, train_mode, nullptr);
  return r.units ? r.loss_sum / static_cast<double>(r.units) : 0.0;
}

}  // namespace mice
