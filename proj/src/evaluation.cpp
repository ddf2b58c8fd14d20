#include "gaitgender/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gaitgender/error.hpp"

namespace gaitgender {

void Confusion::add(int truth, int predicted) {
  if (truth == kMale) {
    (predicted == kMale ? tp : fn) += 1;
  } else {
    (predicted == kFemale ? tn : fp) += 1;
  }
}

double Confusion::ccr() const {
  const auto n = total();
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(tp + tn) / static_cast<double>(n);
}

Confusion& Confusion::operator+=(const Confusion& o) {
  tp += o.tp;
  tn += o.tn;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng() % static_cast<std::uint64_t>(i)]);
  }
}

}  // namespace

double EvalReport::view_mean() const {
  std::vector<double> v;
  for (const auto& [view, ccr] : view_ccr) v.push_back(ccr);
  return mean_of(v);
}

double EvalReport::view_std() const {
  std::vector<double> v;
  for (const auto& [view, ccr] : view_ccr) v.push_back(ccr);
  return sample_std(v);
}

std::vector<FoldPair> make_folds(const PreparedDataset& dataset, std::uint64_t seed) {
  std::set<std::string> male_set;
  std::set<std::string> female_set;
  for (const auto& s : dataset) (s.gender == kMale ? male_set : female_set).insert(s.subject);
  if (male_set.size() < 2 || female_set.size() < 2) {
    throw Error(ErrorCode::InsufficientSubjects,
                "cross-validation needs at least 2 male and 2 female subjects, got " +
                    std::to_string(male_set.size()) + " and " + std::to_string(female_set.size()));
  }
  std::vector<std::string> males(male_set.begin(), male_set.end());
  std::vector<std::string> females(female_set.begin(), female_set.end());
  std::mt19937_64 rng(seed);
  seeded_shuffle(males, rng);
  seeded_shuffle(females, rng);
  const std::size_t n = std::min(males.size(), females.size());
  std::vector<FoldPair> folds;
  for (std::size_t i = 0; i < n; ++i) folds.push_back({males[i], females[i]});
  return folds;
}

std::vector<EvalReport> crossvalidate_with(const PreparedDataset& dataset,
                                           std::span<const TestSetting> settings,
                                           const CrossValidationOptions& options,
                                           const FoldTrainer& trainer) {
  std::vector<FoldPair> folds = make_folds(dataset, options.seed);
  std::set<std::string> selected;
  for (const auto& f : folds) selected.insert({f.male, f.female});

  std::vector<std::size_t> order(folds.size());
  std::iota(order.begin(), order.end(), 0);
  if (options.max_folds > 0 && static_cast<std::size_t>(options.max_folds) < order.size()) {
    order.resize(static_cast<std::size_t>(options.max_folds));
  }
  if (options.reverse_folds) std::reverse(order.begin(), order.end());

  const std::size_t ns = settings.size();
  // fold_view[s][fold][view]
  std::vector<std::vector<std::map<int, Confusion>>> fold_view(ns);
  for (std::size_t fi : order) {
    const FoldPair& pair = folds[fi];
    std::vector<const PreparedSequence*> train;
    std::vector<const PreparedSequence*> test;
    for (const auto& s : dataset) {
      if (!selected.contains(s.subject)) continue;
      (s.subject == pair.male || s.subject == pair.female ? test : train).push_back(&s);
    }
    const SequenceTester tester = trainer(train);
    for (std::size_t si = 0; si < ns; ++si) {
      std::map<int, Confusion> cells;
      for (const PreparedSequence* s : test) {
        if (s->condition != settings[si].condition) continue;
        for (const FoldDecision& d : tester(*s, settings[si].removal)) {
          cells[d.view].add(d.truth, d.predicted);
        }
      }
      fold_view[si].push_back(std::move(cells));
    }
  }

  std::vector<EvalReport> reports;
  for (std::size_t si = 0; si < ns; ++si) {
    EvalReport r;
    r.condition = settings[si].condition;
    r.removal = settings[si].removal;
    r.seed = options.seed;
    r.folds = static_cast<int>(order.size());
    std::map<int, std::vector<double>> per_view;
    for (const auto& cells : fold_view[si]) {
      Confusion fold_total;
      for (const auto& [view, c] : cells) {
        r.confusion[view] += c;
        if (c.total() > 0) per_view[view].push_back(c.ccr());
        fold_total += c;
      }
      if (fold_total.total() > 0) r.fold_ccr.push_back(fold_total.ccr());
    }
    for (const auto& [view, v] : per_view) r.view_ccr[view] = mean_of(v);
    r.mean_ccr = mean_of(r.fold_ccr);
    r.std_ccr = sample_std(r.fold_ccr);
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<StreamDecision> classify_sequence(const PreparedSequence& sequence,
                                              const TrainedModel& model) {
  std::vector<StreamDecision> out;
  StreamState state;
  for (const auto& f : sequence.frames) {
    std::optional<NormalizedSilhouette> s;
    if (f) s = f->silhouette;
    if (auto d = step_stream_normalized(state, s, model)) out.push_back(*d);
  }
  return out;
}

std::vector<EvalReport> crossvalidate(const PreparedDataset& dataset, const PipelineParams& params,
                                      std::span<const TestSetting> settings,
                                      const CrossValidationOptions& options) {
  const FoldTrainer trainer = [&params](std::span<const PreparedSequence* const> train) {
    auto with = std::make_shared<TrainedModel>(train_pipeline(train, params));
    auto without = std::make_shared<TrainedModel>(*with);
    with->params.attachment_removal = true;
    without->params.attachment_removal = false;
    return SequenceTester([with, without](const PreparedSequence& s, bool removal) {
      std::vector<FoldDecision> out;
      for (const StreamDecision& d : classify_sequence(s, removal ? *with : *without)) {
        out.push_back({s.view, s.gender, d.label});
      }
      return out;
    });
  };
  return crossvalidate_with(dataset, settings, options, trainer);
}

EvalReport crossvalidate(const PreparedDataset& dataset, const PipelineParams& params,
                         TestSetting setting, const CrossValidationOptions& options) {
  return crossvalidate(dataset, params, std::span<const TestSetting>(&setting, 1), options).front();
}

EvalReport evaluate_model(const PreparedDataset& dataset, const TrainedModel& model,
                          TestSetting setting) {
  TrainedModel m = model;
  m.params.attachment_removal = setting.removal;
  EvalReport r;
  r.condition = setting.condition;
  r.removal = setting.removal;
  r.folds = 1;
  Confusion all;
  for (const auto& s : dataset) {
    if (s.condition != setting.condition) continue;
    for (const StreamDecision& d : classify_sequence(s, m)) {
      r.confusion[s.view].add(s.gender, d.label);
      all.add(s.gender, d.label);
    }
  }
  for (const auto& [view, c] : r.confusion) {
    if (c.total() > 0) r.view_ccr[view] = c.ccr();
  }
  if (all.total() > 0) r.fold_ccr.push_back(all.ccr());
  r.mean_ccr = mean_of(r.fold_ccr);
  return r;
}

std::string to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["condition"] = to_string(report.condition);
  j["removal"] = report.removal;
  j["seed"] = report.seed;
  j["folds"] = report.folds;
  j["mean_ccr"] = report.mean_ccr;
  j["std_ccr"] = report.std_ccr;
  j["fold_ccr"] = report.fold_ccr;
  auto& views = j["views"] = nlohmann::ordered_json::array();
  for (const auto& [view, c] : report.confusion) {
    const auto it = report.view_ccr.find(view);
    views.push_back({{"view", view},
                     {"ccr", it == report.view_ccr.end() ? 0.0 : it->second},
                     {"tp", c.tp},
                     {"tn", c.tn},
                     {"fp", c.fp},
                     {"fn", c.fn}});
  }
  return j.dump();
}

std::string format_table(std::span<const EvalReport> reports) {
  std::set<int> views;
  for (const auto& r : reports) {
    for (const auto& [v, c] : r.view_ccr) views.insert(v);
  }
  std::ostringstream os;
  char cell[32];
  std::snprintf(cell, sizeof cell, "%-16s", "condition");
  os << cell;
  for (int v : views) {
    std::snprintf(cell, sizeof cell, "%7d", v);
    os << cell;
  }
  os << "     mean    std\n";
  for (const auto& r : reports) {
    std::string label(to_string(r.condition));
    label += r.removal ? "" : " (raw)";
    std::snprintf(cell, sizeof cell, "%-16s", label.c_str());
    os << cell;
    for (int v : views) {
      const auto it = r.view_ccr.find(v);
      if (it == r.view_ccr.end()) {
        std::snprintf(cell, sizeof cell, "%7s", "-");
      } else {
        std::snprintf(cell, sizeof cell, "%7.1f", it->second);
      }
      os << cell;
    }
    std::snprintf(cell, sizeof cell, "%9.1f%7.1f\n", r.mean_ccr, r.std_ccr);
    os << cell;
  }
  return os.str();
}

namespace {

class SyntheticFrames final : public FrameSource {
 public:
  SyntheticFrames(int gender, int view, int first_t, std::size_t count, WalkerOptions options,
                  std::string prefix)
      : gender_(gender), view_(view), first_t_(first_t), count_(count), options_(options),
        prefix_(std::move(prefix)) {}

  std::size_t size() const override { return count_; }
  RawSilhouette load(std::size_t index) const override {
    if (index >= count_) throw Error(ErrorCode::InvalidArgument, "frame index out of range");
    return generate_synthetic_walker(gender_, view_, first_t_ + static_cast<int>(index), options_);
  }
  std::string frame_id(std::size_t index) const override {
    char buf[16];
    std::snprintf(buf, sizeof buf, "/%03zu", index + 1);
    return prefix_ + buf;
  }

 private:
  int gender_;
  int view_;
  int first_t_;
  std::size_t count_;
  WalkerOptions options_;
  std::string prefix_;
};

}  // namespace

Dataset synthetic_dataset(const SyntheticDatasetOptions& options) {
  Dataset out;
  const int subjects = 2 * options.subjects_per_gender;
  for (int i = 1; i <= subjects; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "%03d", i);
    const int gender = i % 2 == 1 ? kMale : kFemale;
    const std::uint64_t subject_seed = options.seed * 1000003ULL + static_cast<std::uint64_t>(i);
    std::mt19937_64 rng(subject_seed ^ 0x5eedULL);
    for (Condition c : options.conditions) {
      for (int k = 1; k <= options.sequences_per_condition; ++k) {
        for (int view : options.views) {
          WalkerOptions w;
          w.seed = subject_seed;
          w.noise = options.noise;
          w.attachment = c == Condition::Bag ? Attachment::Bag
                         : c == Condition::Coat ? Attachment::Coat
                                                : Attachment::None;
          int first_t = 0;
          if (options.jitter_placement) {
            auto uniform = [&rng](double lo, double hi) {
              return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
            };
            w.offset_x = uniform(-20.0, 20.0);
            w.offset_y = uniform(-6.0, 6.0);
            w.body_height = uniform(160.0, 190.0);
            first_t = static_cast<int>(rng() % static_cast<std::uint64_t>(w.gait_period));
          }
          char prefix[64];
          std::snprintf(prefix, sizeof prefix, "%s/%s-%02d/%03d", id,
                        c == Condition::Normal ? "nm" : c == Condition::Bag ? "bg" : "cl", k, view);
          Sequence s;
          s.subject = id;
          s.gender = gender;
          s.condition = c;
          s.index = k;
          s.view = view;
          s.frames = std::make_shared<SyntheticFrames>(
              gender, view, first_t, static_cast<std::size_t>(options.frames_per_sequence), w, prefix);
          out.push_back(std::move(s));
        }
      }
    }
  }
  return out;
}

}  // namespace gaitgender
