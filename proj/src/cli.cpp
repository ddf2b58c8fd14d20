#include "gaitgender/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gaitgender/dataset.hpp"
#include "gaitgender/error.hpp"
#include "gaitgender/evaluation.hpp"
#include "gaitgender/image_io.hpp"
#include "gaitgender/model_io.hpp"
#include "gaitgender/pipeline.hpp"
#include "gaitgender/synthetic.hpp"

namespace gaitgender {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string gender_name(int label) { return label == kMale ? "male" : "female"; }

fs::path model_path(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kModelEnvVar); env && *env) return env;
  throw Error(ErrorCode::InvalidArgument,
              std::string("no model given: pass --model or set ") + kModelEnvVar);
}

// Files are taken as given; directories contribute their PNG/PGM files in
// lexicographic order.
std::vector<fs::path> expand_frames(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (!fs::is_directory(p)) {
      if (!fs::exists(p)) throw Error(ErrorCode::IoError, "no such file: " + in);
      out.push_back(p);
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p)) {
      if (!e.is_regular_file()) continue;
      std::string ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (ext == ".png" || ext == ".pgm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    out.insert(out.end(), files.begin(), files.end());
  }
  return out;
}

std::optional<NormalizedSilhouette> try_normalize(const RawSilhouette& raw, const PipelineParams& p,
                                                  const std::string& id) {
  const auto box = PassThroughDetector().detect(raw);
  if (!box) return std::nullopt;
  try {
    return normalize(raw, *box, p.norm, id);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::EmptySilhouette && e.code() != ErrorCode::DegenerateBox) throw;
  }
  return std::nullopt;
}

json runs_json(const std::vector<BinSpan>& runs) {
  json a = json::array();
  for (const auto& r : runs) a.push_back({r.first, r.last});
  return a;
}

std::vector<Condition> parse_conditions(const std::vector<std::string>& names) {
  std::vector<Condition> out;
  for (const auto& n : names) out.push_back(parse_condition(n));
  return out;
}

struct Common {
  std::string model;
  std::string config;
};

PipelineParams params_from(const Common& c) {
  return c.config.empty() ? PipelineParams{} : load_params(c.config);
}

// --- train ---------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string manifest;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> stride;
};

void cmd_train(const Common& c, const TrainArgs& a, std::ostream& out) {
  PipelineParams params = params_from(c);
  if (a.seed) params.svm.seed = *a.seed;
  if (a.stride) params.train_stride = *a.stride;
  const auto start = Clock::now();
  const Dataset data = a.manifest.empty() ? ingest(a.data) : ingest(a.data, a.manifest);
  if (data.empty()) throw Error(ErrorCode::InvalidArgument, "dataset at " + a.data + " is empty");
  const TrainedModel model = train_pipeline(data, params);
  save_model(model, a.out);
  json j;
  j["model"] = a.out;
  j["hash"] = model_hash(model);
  j["fingerprint"] = model.dataset_fingerprint;
  j["views"] = params.views;
  j["sequences"] = data.size();
  j["seconds"] = ms_since(start) / 1000.0;
  out << j.dump() << '\n';
}

// --- classify ------------------------------------------------------------

void cmd_classify(const Common& c, const std::vector<std::string>& inputs, bool no_removal,
                  std::ostream& out) {
  TrainedModel model = load_model(model_path(c.model));
  if (no_removal) model.params.attachment_removal = false;
  const auto frames = expand_frames(inputs);
  StreamState state;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const RawSilhouette raw = read_silhouette(frames[i]);
    const auto start = Clock::now();
    std::optional<Detection> det;
    if (const auto box = PassThroughDetector().detect(raw)) det = Detection{raw, *box};
    const auto d = step_stream(state, det, model);
    const double latency = ms_since(start);
    if (!d) continue;
    json j;
    j["frame"] = i + 1;
    j["source"] = frames[i].string();
    j["view"] = d->view;
    j["label"] = gender_name(d->label);
    j["decision"] = d->decision;
    j["counter"] = d->counter;
    j["removed_pixels"] = d->removed_pixels;
    j["latency_ms"] = latency;
    out << j.dump() << '\n';
  }
}

// --- estimate-view -------------------------------------------------------

void cmd_estimate_view(const Common& c, const std::vector<std::string>& inputs, std::ostream& out) {
  const TrainedModel model = load_model(model_path(c.model));
  std::vector<NormalizedSilhouette> frames;
  for (const auto& p : expand_frames(inputs)) {
    if (auto s = try_normalize(read_silhouette(p), model.params, p.string())) frames.push_back(std::move(*s));
  }
  if (frames.empty()) throw Error(ErrorCode::EmptyWindow, "no usable frames");
  const auto lower = extract_lower(compute_agi<double>(frames));
  json j;
  j["view"] = estimate_viewpoint(lower, model.vp);
  j["frames"] = frames.size();
  json d;
  for (const auto& [view, d2] : viewpoint_distances(lower.pixels, model.vp)) d[std::to_string(view)] = d2;
  j["squared_distances"] = d;
  out << j.dump() << '\n';
}

// --- remove-attachment ---------------------------------------------------

void cmd_remove_attachment(const Common& c, const std::string& input, const std::string& output,
                           std::optional<int> view, std::ostream& out) {
  const TrainedModel model = load_model(model_path(c.model));
  const auto s = try_normalize(read_silhouette(input), model.params, input);
  if (!s) throw Error(ErrorCode::EmptySilhouette, input + ": no foreground");
  const bool estimated = !view;
  if (!view) {
    const NormalizedSilhouette one[] = {*s};
    view = estimate_viewpoint(extract_lower(compute_agi<double>(one)), model.vp);
  }
  const AttachmentRemoval r = remove_attachment(*s, *view, model.ds, model.params.reference_refinements);
  write_silhouette(output, r.silhouette.mask());
  json j;
  j["input"] = input;
  j["output"] = output;
  j["view"] = *view;
  j["view_estimated"] = estimated;
  j["violating_runs"] = runs_json(r.report.violating_runs);
  j["removed_pixel_count"] = r.report.removed_pixel_count;
  const auto& bins = r.report.corrected_signal.bins;
  j["corrected_signal"] = std::vector<double>(bins.data(), bins.data() + bins.size());
  out << j.dump() << '\n';
}

// --- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::string data;
  std::string manifest;
  std::vector<std::string> conditions{"normal"};
  bool no_removal = false;
  bool cross_validate = false;
  std::uint64_t seed = 0;
  int folds = 0;
  std::string format = "table";
  std::string report;
};

void cmd_evaluate(const Common& c, const EvaluateArgs& a, std::ostream& out) {
  const Dataset data = a.manifest.empty() ? ingest(a.data) : ingest(a.data, a.manifest);
  std::vector<TestSetting> settings;
  for (Condition cond : parse_conditions(a.conditions)) settings.push_back({cond, !a.no_removal});

  std::vector<EvalReport> reports;
  const bool have_model = !c.model.empty() || (std::getenv(kModelEnvVar) && *std::getenv(kModelEnvVar));
  if (have_model && !a.cross_validate) {
    const TrainedModel model = load_model(model_path(c.model));
    const PreparedDataset prepared = prepare(data, model.params);
    for (const auto& s : settings) reports.push_back(evaluate_model(prepared, model, s));
  } else {
    PipelineParams params = params_from(c);
    params.svm.seed = a.seed;
    const PreparedDataset prepared = prepare(data, params);
    CrossValidationOptions opts;
    opts.seed = a.seed;
    opts.max_folds = a.folds;
    reports = crossvalidate(prepared, params, settings, opts);
  }

  if (!a.report.empty()) {
    std::ofstream f(a.report);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + a.report);
    for (const auto& r : reports) f << to_json(r) << '\n';
  }
  if (a.format == "json") {
    for (const auto& r : reports) out << to_json(r) << '\n';
  } else {
    out << format_table(reports);
  }
}

// --- synth ---------------------------------------------------------------

struct SynthArgs {
  std::string out;
  int subjects_per_gender = 8;
  std::vector<int> views = default_views();
  std::vector<std::string> conditions{"normal", "bag"};
  int sequences = 1;
  int frames = 30;
  double noise = 0.0;
  std::uint64_t seed = 0;
  bool no_jitter = false;
};

void cmd_synth(const SynthArgs& a, std::ostream& out) {
  SyntheticDatasetOptions o;
  o.subjects_per_gender = a.subjects_per_gender;
  o.views = a.views;
  o.conditions = parse_conditions(a.conditions);
  o.sequences_per_condition = a.sequences;
  o.frames_per_sequence = a.frames;
  o.noise = a.noise;
  o.seed = a.seed;
  o.jitter_placement = !a.no_jitter;
  const Dataset d = synthetic_dataset(o);
  export_dataset(d, a.out);
  json j;
  j["root"] = a.out;
  j["subjects"] = 2 * a.subjects_per_gender;
  j["sequences"] = d.size();
  j["frames"] = d.size() * static_cast<std::size_t>(a.frames);
  out << j.dump() << '\n';
}

// --- bench ---------------------------------------------------------------

struct BenchArgs {
  int frames = 300;
  int view = 90;
  bool bag = true;
  double budget_ms = 48.0;
  bool strict = false;
};

TrainedModel bench_model(const PipelineParams& params) {
  SyntheticDatasetOptions o;
  o.subjects_per_gender = 2;
  o.conditions = {Condition::Normal};
  o.frames_per_sequence = 20;
  PipelineParams p = params;
  p.train_stride = 5;
  return train_pipeline(synthetic_dataset(o), p);
}

int cmd_bench(const Common& c, const BenchArgs& a, std::ostream& out) {
  const TrainedModel model =
      (!c.model.empty() || std::getenv(kModelEnvVar)) ? load_model(model_path(c.model)) : bench_model(params_from(c));
  const int side = model.params.norm.height;
  WalkerOptions w;
  w.attachment = a.bag ? Attachment::Bag : Attachment::None;
  w.canvas_width = model.params.norm.width;
  w.canvas_height = side;
  w.body_height = 0.85 * side;
  w.seed = 4242;
  std::vector<Detection> frames;
  for (int t = 0; t < a.frames; ++t) {
    RawSilhouette raw = generate_synthetic_walker(kMale, a.view, t, w);
    const auto box = PassThroughDetector().detect(raw);
    if (!box) throw Error(ErrorCode::EmptySilhouette, "bench walker rendered empty");
    frames.push_back({std::move(raw), *box});
  }

  StreamState state;
  StageTimings sum;
  std::vector<double> totals;
  int decisions = 0;
  for (const auto& f : frames) {
    StageTimings t;
    const auto start = Clock::now();
    if (step_stream(state, f, model, &t)) ++decisions;
    totals.push_back(ms_since(start));
    sum.normalize_ms += t.normalize_ms;
    sum.window_ms += t.window_ms;
    sum.view_ms += t.view_ms;
    sum.removal_ms += t.removal_ms;
    sum.predict_ms += t.predict_ms;
  }
  const double n = static_cast<double>(frames.size());
  std::vector<double> sorted = totals;
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (double v : totals) mean += v / n;
  const double p95 = sorted.empty() ? 0.0 : sorted[static_cast<std::size_t>(0.95 * (n - 1))];

  json j;
  j["frames"] = frames.size();
  j["frame_size"] = {model.params.norm.width, side};
  j["decisions"] = decisions;
  j["stages_ms"] = {{"normalize", sum.normalize_ms / n},
                    {"window_agi", sum.window_ms / n},
                    {"view_estimate", sum.view_ms / n},
                    {"removal", sum.removal_ms / n},
                    {"predict", sum.predict_ms / n}};
  j["per_frame_ms"] = mean;
  j["p95_ms"] = p95;
  j["max_ms"] = sorted.empty() ? 0.0 : sorted.back();
  j["budget_ms"] = a.budget_ms;
  j["within_budget"] = mean <= a.budget_ms;
  out << j.dump() << '\n';
  return a.strict && mean > a.budget_ms ? 3 : 0;
}

void error_line(std::ostream& err, std::string_view code, const std::string& message) {
  json j;
  j["error"] = code;
  j["message"] = message;
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gait-based gender classification from silhouette sequences", "gaitgender"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--model", common.model, std::string("Model file (default: $") + kModelEnvVar + ")");
  app.add_option("--config", common.config, "Params JSON, same schema as the model header")
      ->check(CLI::ExistingFile);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a model from a dataset directory");
  c_train->add_option("--data", train.data, "Dataset root")->required()->check(CLI::ExistingDirectory);
  c_train->add_option("--manifest", train.manifest, "Manifest (default: <data>/manifest.txt)");
  c_train->add_option("--out,-o", train.out, "Model file to write")->required();
  c_train->add_option("--seed", train.seed, "SVM shuffle seed");
  c_train->add_option("--stride", train.stride, "Training window stride")->check(CLI::PositiveNumber);

  std::vector<std::string> frames;
  bool classify_raw = false;
  auto* c_classify = app.add_subcommand("classify", "Stream frames through a model, one JSON line per decision");
  c_classify->add_option("frames", frames, "Frame files or directories, in stream order")->required();
  c_classify->add_flag("--no-removal", classify_raw, "Skip attachment removal");

  auto* c_view = app.add_subcommand("estimate-view", "Estimate the walking direction of a frame set");
  c_view->add_option("frames", frames, "Frame files or directories")->required();

  std::string ra_in;
  std::string ra_out;
  std::optional<int> ra_view;
  auto* c_remove = app.add_subcommand("remove-attachment", "Remove an attachment from one silhouette");
  c_remove->add_option("input", ra_in, "Silhouette image")->required()->check(CLI::ExistingFile);
  c_remove->add_option("--out,-o", ra_out, "Corrected image (.png or .pgm)")->required();
  c_remove->add_option("--view", ra_view, "View in degrees (default: estimated from the frame)");

  EvaluateArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Score a model, or cross-validate when no model is given");
  c_eval->add_option("--data", eval.data, "Dataset root")->required()->check(CLI::ExistingDirectory);
  c_eval->add_option("--manifest", eval.manifest, "Manifest (default: <data>/manifest.txt)");
  c_eval->add_option("--condition", eval.conditions, "normal, bag or coat; repeatable")->capture_default_str();
  c_eval->add_flag("--no-removal", eval.no_removal, "Disable attachment removal");
  c_eval->add_flag("--cross-validate", eval.cross_validate, "Cross-validate even if a model is available");
  c_eval->add_option("--seed", eval.seed, "Fold selection and SVM seed")->capture_default_str();
  c_eval->add_option("--folds", eval.folds, "Run only the first N folds (0: all)")->capture_default_str();
  c_eval->add_option("--format", eval.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}))
      ->capture_default_str();
  c_eval->add_option("--report", eval.report, "Also write the reports as JSON lines to this file");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Write a synthetic dataset to disk");
  c_synth->add_option("--out,-o", synth.out, "Dataset root")->required();
  c_synth->add_option("--subjects-per-gender", synth.subjects_per_gender)->capture_default_str();
  c_synth->add_option("--views", synth.views)->capture_default_str();
  c_synth->add_option("--condition", synth.conditions, "Repeatable")->capture_default_str();
  c_synth->add_option("--sequences", synth.sequences, "Sequences per condition")->capture_default_str();
  c_synth->add_option("--frames", synth.frames, "Frames per sequence")->capture_default_str();
  c_synth->add_option("--noise", synth.noise, "Fraction of flipped pixels")->capture_default_str();
  c_synth->add_option("--seed", synth.seed)->capture_default_str();
  c_synth->add_flag("--no-jitter", synth.no_jitter, "Same placement and scale for every sequence");

  BenchArgs bench;
  bool bench_clean = false;
  auto* c_bench = app.add_subcommand("bench", "Per-stage latency of the streaming classify path");
  c_bench->add_option("--frames", bench.frames)->capture_default_str()->check(CLI::PositiveNumber);
  c_bench->add_option("--view", bench.view)->capture_default_str();
  c_bench->add_flag("--no-attachment", bench_clean, "Walker without a bag");
  c_bench->add_option("--budget-ms", bench.budget_ms)->capture_default_str();
  c_bench->add_flag("--strict", bench.strict, "Exit with 3 when over budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    error_line(err, "Usage", e.what());
    return 2;
  }

  try {
    if (*c_train) cmd_train(common, train, out);
    else if (*c_classify) cmd_classify(common, frames, classify_raw, out);
    else if (*c_view) cmd_estimate_view(common, frames, out);
    else if (*c_remove) cmd_remove_attachment(common, ra_in, ra_out, ra_view, out);
    else if (*c_eval) cmd_evaluate(common, eval, out);
    else if (*c_synth) cmd_synth(synth, out);
    else if (*c_bench) {
      bench.bag = !bench_clean;
      return cmd_bench(common, bench, out);
    }
  } catch (const Error& e) {
    error_line(err, to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_line(err, "Internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace gaitgender
