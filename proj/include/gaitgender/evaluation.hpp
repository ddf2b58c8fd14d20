#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gaitgender/pipeline.hpp"
#include "gaitgender/synthetic.hpp"

namespace gaitgender {

/// Male is the positive class.
struct Confusion {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  void add(int truth, int predicted);
  std::int64_t total() const { return tp + tn + fp + fn; }
  /// (TP + TN) / N in percent; 0 for an empty cell.
  double ccr() const;
  Confusion& operator+=(const Confusion& o);
};

struct EvalReport {
  Condition condition = Condition::Normal;
  bool removal = true;
  std::uint64_t seed = 0;
  int folds = 0;
  /// Keyed by ground-truth view, pooled over folds.
  std::map<int, Confusion> confusion;
  /// Per-view CCR averaged over the folds that tested that view.
  std::map<int, double> view_ccr;
  /// Overall CCR of each fold, in fold order.
  std::vector<double> fold_ccr;
  double mean_ccr = 0.0;
  /// Sample standard deviation over folds.
  double std_ccr = 0.0;

  /// Mean and sample standard deviation of view_ccr across views.
  double view_mean() const;
  double view_std() const;
};

/// One (male, female) pair of subject ids.
struct FoldPair {
  std::string male;
  std::string female;
};

/// Shuffles each gender with a seeded Fisher-Yates and pairs them in order;
/// the larger gender is truncated. Needs two subjects of each gender.
std::vector<FoldPair> make_folds(const PreparedDataset& dataset, std::uint64_t seed);

struct CrossValidationOptions {
  std::uint64_t seed = 0;
  /// Run only the first `max_folds` folds; 0 runs all.
  int max_folds = 0;
  /// Visit the folds in reverse order.
  bool reverse_folds = false;
};

struct TestSetting {
  Condition condition = Condition::Normal;
  bool removal = true;
};

struct FoldDecision {
  int view = 0;
  int truth = kMale;
  int predicted = kMale;
};

/// Classifies one test sequence, frame by frame.
using SequenceTester = std::function<std::vector<FoldDecision>(const PreparedSequence&, bool removal)>;
/// Trains on the sequences of one fold and returns the tester for that fold.
using FoldTrainer = std::function<SequenceTester(std::span<const PreparedSequence* const>)>;

/// Leave-one-pair-out cross-validation with a custom trainer; one report per
/// setting, all sharing each fold's trained model.
std::vector<EvalReport> crossvalidate_with(const PreparedDataset& dataset,
                                           std::span<const TestSetting> settings,
                                           const CrossValidationOptions& options,
                                           const FoldTrainer& trainer);

/// Cross-validation of the full pipeline: train_pipeline on every other
/// pair, streaming classification of the held-out pair.
std::vector<EvalReport> crossvalidate(const PreparedDataset& dataset, const PipelineParams& params,
                                      std::span<const TestSetting> settings,
                                      const CrossValidationOptions& options);
EvalReport crossvalidate(const PreparedDataset& dataset, const PipelineParams& params,
                         TestSetting setting, const CrossValidationOptions& options);

/// Scores an already trained model on every sequence of `setting.condition`.
/// The report has one "fold"; view_ccr is the pooled per-view CCR.
EvalReport evaluate_model(const PreparedDataset& dataset, const TrainedModel& model,
                          TestSetting setting);

/// Streams a prepared sequence through a trained model.
std::vector<StreamDecision> classify_sequence(const PreparedSequence& sequence,
                                              const TrainedModel& model);

std::string to_json(const EvalReport& report);
/// Views as columns, one row per report, then mean and std.
std::string format_table(std::span<const EvalReport> reports);

struct SyntheticDatasetOptions {
  int subjects_per_gender = 8;
  std::vector<int> views = default_views();
  std::vector<Condition> conditions = {Condition::Normal, Condition::Bag};
  int sequences_per_condition = 1;
  int frames_per_sequence = 30;
  double noise = 0.0;
  std::uint64_t seed = 0;
  /// Random per-sequence placement and scale, to exercise normalization.
  bool jitter_placement = true;
};

/// Subjects "001".."N"; odd ids are male. Frames are rendered on demand.
Dataset synthetic_dataset(const SyntheticDatasetOptions& options);

}  // namespace gaitgender
