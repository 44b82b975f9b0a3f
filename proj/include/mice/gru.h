#ifndef MICE_GRU_H_
#define MICE_GRU_H_

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mice/common.h"

namespace mice {

// z = sigmoid(W_z x + U_z h + b_z)
// r = sigmoid(W_r x + U_r h + b_r)
// h' = z . h + (1 - z) . tanh(W_h x + U_h (r . h) + b_h)
struct GruCell {
  Eigen::MatrixXd w_z, w_r, w_h;  // H x D
  Eigen::MatrixXd u_z, u_r, u_h;  // H x H
  Eigen::VectorXd b_z, b_r, b_h;  // H

  static GruCell Zeros(std::size_t hidden, std::size_t input_dim);
  Eigen::Index hidden() const { return w_z.rows(); }
  Eigen::Index input_dim() const { return w_z.cols(); }
};

// Two-unit softmax classifier over a 2H state: index 1 is IDIOMATIC.
struct SoftmaxHead {
  Eigen::MatrixXd weight;  // 2 x 2H
  Eigen::VectorXd bias;    // 2
};

struct BiGruParams {
  GruCell forward;
  GruCell backward;
  SoftmaxHead token_head;
  SoftmaxHead sentence_head;

  static BiGruParams Zeros(std::size_t input_dim, std::size_t hidden);
  std::size_t input_dim() const { return static_cast<std::size_t>(forward.input_dim()); }
  std::size_t hidden() const { return static_cast<std::size_t>(forward.hidden()); }
};

// Calls fn(name, tensor) for every parameter tensor in a fixed order. Works
// for const and non-const params; tensors are Eigen::MatrixXd or VectorXd.
template <typename Params, typename Fn>
void ForEachTensor(Params& p, Fn&& fn) {
  auto cell = [&](auto& c, std::string_view prefix) {
    fn(std::string(prefix) + ".w_z", c.w_z);
    fn(std::string(prefix) + ".w_r", c.w_r);
    fn(std::string(prefix) + ".w_h", c.w_h);
    fn(std::string(prefix) + ".u_z", c.u_z);
    fn(std::string(prefix) + ".u_r", c.u_r);
    fn(std::string(prefix) + ".u_h", c.u_h);
    fn(std::string(prefix) + ".b_z", c.b_z);
    fn(std::string(prefix) + ".b_r", c.b_r);
    fn(std::string(prefix) + ".b_h", c.b_h);
  };
  cell(p.forward, "forward");
  cell(p.backward, "backward");
  fn(std::string("token_head.weight"), p.token_head.weight);
  fn(std::string("token_head.bias"), p.token_head.bias);
  fn(std::string("sentence_head.weight"), p.sentence_head.weight);
  fn(std::string("sentence_head.bias"), p.sentence_head.bias);
}

std::size_t ParameterCount(const BiGruParams& params);

// One recurrence step. Throws std::domain_error on non-finite input.
Eigen::VectorXd GruCellStep(const GruCell& cell, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& h_prev);

struct BiGruStates {
  Eigen::MatrixXd per_token;  // T x 2H: [forward_t, backward_t]
  Eigen::VectorXd pooled;     // [forward_{T-1}, backward_0]
};

// Both directions start from h = 0. inputs is T x D with T >= 1.
BiGruStates BiGruForward(const BiGruParams& params, const Eigen::MatrixXd& inputs);

// Inverted dropout on the head input. The mask is a pure function of `seed`,
// so a forward pass can be replayed exactly.
struct DropoutMode {
  bool train = false;
  std::uint64_t seed = 0;
};

class BiGruModel {
 public:
  BiGruModel() = default;
  BiGruModel(std::size_t input_dim, std::size_t hidden = 100, double dropout_rate = 0.5);
  BiGruModel(BiGruParams params, double dropout_rate);

  const BiGruParams& params() const { return params_; }
  BiGruParams& mutable_params() { return params_; }
  double dropout_rate() const { return dropout_rate_; }
  std::size_t input_dim() const { return params_.input_dim(); }
  std::size_t hidden() const { return params_.hidden(); }

  // T x 2 rows of softmax(token_head(dropout(state_t))).
  Eigen::MatrixXd PredictTokens(const Eigen::MatrixXd& inputs,
                                DropoutMode dropout = {}) const;
  // softmax(sentence_head(dropout(pooled))).
  Eigen::Vector2d PredictSentence(const Eigen::MatrixXd& inputs,
                                  DropoutMode dropout = {}) const;

 private:
  BiGruParams params_;
  double dropout_rate_ = 0.5;
};

// Mean over units of -[y log p + (1 - y) log(1 - p)], p clamped to
// [1e-12, 1 - 1e-12].
inline constexpr double kProbabilityFloor = 1e-12;
double BceLoss(std::span<const double> positive_probs, std::span<const int> labels);

struct TrainingExample {
  Eigen::MatrixXd inputs;   // T x D
  std::vector<int> labels;  // T entries for Task::kToken, one for kSentence
  std::uint64_t dropout_seed = 0;
};

struct LossAndGradient {
  double loss = 0.0;
  std::size_t units = 0;
  BiGruParams gradient;
};

// Mean BCE over every predicted unit in the batch and its exact gradient
// with respect to all parameters (backpropagation through time).
LossAndGradient ComputeLossAndGradient(const BiGruModel& model,
                                       std::span<const TrainingExample> batch,
                                       Task task, bool train_mode);
double ComputeLoss(const BiGruModel& model, std::span<const TrainingExample> batch,
                   Task task, bool train_mode);

}  // namespace mice

#endif  // MICE_GRU_H_
