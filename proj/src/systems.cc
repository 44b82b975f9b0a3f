#include "mice/systems.h"

#include <stdexcept>

#include "mice/metrics.h"

namespace mice {

std::size_t UnitCount(std::span<const AnnotatedSentence> sentences, Task task) {
  if (task == Task::kSentence) return sentences.size();
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

void MajoritySystem::Fit(std::span<const AnnotatedSentence> train, const ArchiveSet&,
                         Task task) {
  label_ = ConstantClassifier::Majority(GoldUnits(train, task)).label();
}

std::vector<double> MajoritySystem::Predict(std::span<const AnnotatedSentence> test,
                                            const ArchiveSet&, Task task) const {
  return std::vector<double>(UnitCount(test, task), label_ ? 1.0 : 0.0);
}

std::vector<double> AllPositiveSystem::Predict(std::span<const AnnotatedSentence> test,
                                               const ArchiveSet&, Task task) const {
  return std::vector<double>(UnitCount(test, task), 1.0);
}

std::vector<std::vector<std::string>> SvmSystem::Documents(
    std::span<const AnnotatedSentence> sentences, Task task) const {
  std::vector<std::vector<std::string>> docs;
  for (const auto& s : sentences) {
    if (task == Task::kSentence) {
      docs.push_back(s.tokens);
      continue;
    }
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      docs.push_back(TokenWindow(s.tokens, i, window_));
    }
  }
  return docs;
}

void SvmSystem::Fit(std::span<const AnnotatedSentence> train, const ArchiveSet&, Task task) {
  task_ = task;
  svm_.reset();
  constant_.reset();
  const auto docs = Documents(train, task);
  const auto labels = GoldUnits(train, task);
  vocabulary_ = TfIdfVocabulary::Build(docs);
  bool pos = false;
  bool neg = false;
  for (int y : labels) (y ? pos : neg) = true;
  if (!(pos && neg)) {
    constant_ = ConstantClassifier::Majority(labels).label();
    return;
  }
  std::vector<SparseVector> features;
  features.reserve(docs.size());
  for (const auto& d : docs) features.push_back(vocabulary_.Transform(d));
  svm_ = TrainSvm(features, labels, vocabulary_.size(), options_);
}

std::vector<double> SvmSystem::Predict(std::span<const AnnotatedSentence> test,
                                       const ArchiveSet&, Task task) const {
  if (task != task_) throw std::invalid_argument("svm was fitted for another task");
  std::vector<double> out;
  if (constant_) return std::vector<double>(UnitCount(test, task), *constant_ ? 1.0 : 0.0);
  if (!svm_) throw std::logic_error("svm used before Fit");
  for (const auto& d : Documents(test, task)) {
    out.push_back(svm_->Predict(vocabulary_.Transform(d)) ? 1.0 : 0.0);
  }
  return out;
}

GruSystem GruSystem::Frozen(BiGruModel model, Task task, std::size_t archive_index,
                            std::string name) {
  GruSystem system(TrainConfig{}, archive_index, std::move(name));
  system.model_ = std::move(model);
  system.task_ = task;
  system.frozen_ = true;
  return system;
}

const EmbeddingArchive& GruSystem::ArchiveFor(const ArchiveSet& archives) const {
  if (archive_index_ >= archives.size() || archives[archive_index_] == nullptr) {
    throw std::invalid_argument(name_ + ": no archive at position " +
                                std::to_string(archive_index_));
  }
  return *archives[archive_index_];
}

void GruSystem::Fit(std::span<const AnnotatedSentence> train, const ArchiveSet& archives,
                    Task task) {
  if (frozen_) {
    if (task != task_) throw std::invalid_argument(name_ + ": pretrained for another task");
    return;
  }
  TrainResult result = Train(train, ArchiveFor(archives), task, config_);
  model_ = std::move(result.model);
  epoch_loss_ = std::move(result.epoch_loss);
  task_ = task;
}

std::vector<double> GruSystem::Predict(std::span<const AnnotatedSentence> test,
                                       const ArchiveSet& archives, Task task) const {
  if (!model_) throw std::logic_error(name_ + " used before Fit");
  if (task != task_) throw std::invalid_argument(name_ + ": fitted for another task");
  return PredictPositive(*model_, test, ArchiveFor(archives), task);
}

EnsembleSystem::EnsembleSystem(std::vector<std::shared_ptr<GruSystem>> members,
                               EnsembleMode mode, MixtureOptions options, std::string name)
    : members_(std::move(members)), mode_(mode), options_(options), name_(std::move(name)) {
  if (members_.size() < 2) throw std::invalid_argument("an ensemble needs at least 2 members");
  if (name_.empty()) name_ = mode_ == EnsembleMode::kVote ? "ensemble_vote" : "ensemble_mm";
}

Eigen::MatrixXd EnsembleSystem::MemberScores(std::span<const AnnotatedSentence> sentences,
                                             const ArchiveSet& archives, Task task) const {
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(UnitCount(sentences, task)),
                         static_cast<Eigen::Index>(members_.size()));
  for (std::size_t m = 0; m < members_.size(); ++m) {
    const auto p = members_[m]->Predict(sentences, archives, task);
    for (std::size_t i = 0; i < p.size(); ++i) {
      scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = p[i];
    }
  }
  return scores;
}

void EnsembleSystem::Fit(std::span<const AnnotatedSentence> train, const ArchiveSet& archives,
                         Task task) {
  for (auto& m : members_) m->Fit(train, archives, task);
  mixture_.reset();
  if (mode_ == EnsembleMode::kVote) return;
  const Eigen::MatrixXd scores = MemberScores(train, archives, task);
  Eigen::MatrixXd latents(scores.rows(), scores.cols());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      latents(i, j) = InverseLogistic(scores(i, j));
    }
  }
  mixture_ = MixtureEnsemble::Fit(latents, GoldUnits(train, task), options_);
}

std::vector<double> EnsembleSystem::Predict(std::span<const AnnotatedSentence> test,
                                            const ArchiveSet& archives, Task task) const {
  const Eigen::MatrixXd scores = MemberScores(test, archives, task);
  std::vector<double> out(static_cast<std::size_t>(scores.rows()));
  std::vector<double> row(static_cast<std::size_t>(scores.cols()));
  std::vector<int> votes(row.size());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      row[static_cast<std::size_t>(j)] = scores(i, j);
    }
    double score;
    if (mode_ == EnsembleMode::kVote) {
      for (std::size_t j = 0; j < row.size(); ++j) votes[j] = row[j] >= 0.5 ? 1 : 0;
      score = Vote(votes).label ? 1.0 : 0.0;
    } else {
      if (!mixture_) throw std::logic_error(name_ + " used before Fit");
      score = mixture_->Predict(StackLatents(row))[1];
    }
    out[static_cast<std::size_t>(i)] = score;
  }
  return out;
}

}  // namespace mice
