#ifndef MICE_SYSTEMS_H_
#define MICE_SYSTEMS_H_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mice/baseline.h"
#include "mice/common.h"
#include "mice/corpus.h"
#include "mice/embeddings.h"
#include "mice/ensemble.h"
#include "mice/gru.h"
#include "mice/trainer.h"

namespace mice {

// Archives visible to a system, addressed by position. Systems that do not
// read embeddings ignore them.
using ArchiveSet = std::vector<const EmbeddingArchive*>;

// A classifier evaluated by the protocols. Fit replaces any previous state.
// Predict returns one positive-class score per unit (every token in corpus
// order, or every sentence); the decision rule is score >= 0.5.
class System {
 public:
  virtual ~System() = default;
  virtual std::string name() const = 0;
  virtual void Fit(std::span<const AnnotatedSentence> train, const ArchiveSet& archives,
                   Task task) = 0;
  virtual std::vector<double> Predict(std::span<const AnnotatedSentence> test,
                                      const ArchiveSet& archives, Task task) const = 0;
};

class MajoritySystem : public System {
 public:
  std::string name() const override { return "majority"; }
  void Fit(std::span<const AnnotatedSentence> train, const ArchiveSet& archives,
           Task task) override;
  std::vector<double> Predict(std::span<const AnnotatedSentence> test,
                              const ArchiveSet& archives, Task task) const override;

 private:
  int label_ = 1;
};

class AllPositiveSystem : public System {
 public:
  std::string name() const override { return "all_positive"; }
  void Fit(std::span<const AnnotatedSentence>, const ArchiveSet&, Task) override {}
  std::vector<double> Predict(std::span<const AnnotatedSentence> test,
                              const ArchiveSet& archives, Task task) const override;
};

// tf-idf + linear SVM. Sentence task: one document per sentence. Token task:
// one document per token, the +-window tokens around it.
class SvmSystem : public System {
 public:
  explicit SvmSystem(SvmOptions options = {}, std::size_t window = 3)
      : options_(options), window_(window) {}
  std::string name() const override { return "svm"; }
  void Fit(std::span<const AnnotatedSentence> train, const ArchiveSet& archives,
           Task task) override;
  std::vector<double> Predict(std::span<const AnnotatedSentence> test,
                              const ArchiveSet& archives, Task task) const override;

 private:
  std::vector<std::vector<std::string>> Documents(std::span<const AnnotatedSentence> s,
                                                  Task task) const;

  SvmOptions options_;
  std::size_t window_;
  TfIdfVocabulary vocabulary_;
  std::optional<LinearSvm> svm_;
  std::optional<int> constant_;  // single-class training data
  Task task_ = Task::kSentence;
};

// The biGRU classifier over archive `archive_index`. A frozen system wraps a
// pretrained model and ignores Fit.
class GruSystem : public System {
 public:
  GruSystem(TrainConfig config, std::size_t archive_index = 0, std::string name = "mice")
      : config_(config), archive_index_(archive_index), name_(std::move(name)) {}
  static GruSystem Frozen(BiGruModel model, Task task, std::size_t archive_index = 0,
                          std::string name = "mice");

  std::string name() const override { return name_; }
  void Fit(std::span<const AnnotatedSentence> train, const ArchiveSet& archives,
           Task task) override;
  std::vector<double> Predict(std::span<const AnnotatedSentence> test,
                              const ArchiveSet& archives, Task task) const override;

  const std::optional<BiGruModel>& model() const { return model_; }
  const std::vector<double>& epoch_loss() const { return epoch_loss_; }

 private:
  const EmbeddingArchive& ArchiveFor(const ArchiveSet& archives) const;

  TrainConfig config_;
  std::size_t archive_index_;
  std::string name_;
  bool frozen_ = false;
  std::optional<BiGruModel> model_;
  Task task_ = Task::kSentence;
  std::vector<double> epoch_loss_;
};

enum class EnsembleMode { kVote, kMixture };

// Combines member GRUs. kVote: unweighted majority of member decisions.
// kMixture: the class-conditional Gaussian model fitted on the members'
// training-set predictions; the score is the IDIOMATIC posterior.
class EnsembleSystem : public System {
 public:
  EnsembleSystem(std::vector<std::shared_ptr<GruSystem>> members, EnsembleMode mode,
                 MixtureOptions options = {}, std::string name = "");

  std::string name() const override { return name_; }
  void Fit(std::span<const AnnotatedSentence> train, const ArchiveSet& archives,
           Task task) override;
  std::vector<double> Predict(std::span<const AnnotatedSentence> test,
                              const ArchiveSet& archives, Task task) const override;

  const std::optional<MixtureEnsemble>& mixture() const { return mixture_; }

 private:
  Eigen::MatrixXd MemberScores(std::span<const AnnotatedSentence> sentences,
                               const ArchiveSet& archives, Task task) const;

  std::vector<std::shared_ptr<GruSystem>> members_;
  EnsembleMode mode_;
  MixtureOptions options_;
  std::string name_;
  std::optional<MixtureEnsemble> mixture_;
};

// Number of evaluation units (tokens or sentences) of a corpus.
std::size_t UnitCount(std::span<const AnnotatedSentence> sentences, Task task);

}  // namespace mice

#endif  // MICE_SYSTEMS_H_
