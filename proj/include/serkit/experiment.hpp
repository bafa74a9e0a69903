#pragma once

#include <json.hpp>

#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "serkit/config.hpp"
#include "serkit/io.hpp"
#include "serkit/selection.hpp"
#include "serkit/wav.hpp"

namespace serkit::pipeline {

struct ExtractConfig {
  dsp::FrontendConfig frontend;
  gabor::GaborBankConfig gabor;
  std::vector<std::string> features{"gbfb"};
};

/// Frame features of one clip: the requested families stacked row-wise.
inline FrameFeatures extract_frames(const dsp::AudioClip& clip, const ExtractConfig& cfg) {
  require(!cfg.features.empty(), ErrorKind::BadConfig, "no feature families requested");
  const auto lm = dsp::frontend(clip, cfg.frontend);
  FrameFeatures out;
  out.values.resize(0, lm.frames());
  for (const auto& name : cfg.features) {
    FrameFeatures part;
    if (name == "gbfb")
      part = gabor::extract_gbfb(lm, cfg.gabor);
    else if (name == "sgbfb")
      part = gabor::extract_sgbfb(lm, cfg.gabor);
    else if (name == "mfcc")
      part = dsp::mfcc_with_deltas(lm, cfg.frontend.n_ceps, cfg.frontend.delta_window);
    else if (name == "logmel") {
      part.values = lm.values;
      for (int c = 0; c < lm.mel_channels; ++c) part.dim_labels.push_back("logmel_" + std::to_string(c));
    } else
      throw Error(ErrorKind::BadConfig, "unknown feature family '" + name + "'");
    Matrix stacked(out.values.rows() + part.values.rows(), lm.frames());
    stacked << out.values, part.values;
    out.values = std::move(stacked);
    out.dim_labels.insert(out.dim_labels.end(), part.dim_labels.begin(), part.dim_labels.end());
  }
  return out;
}

inline std::vector<io::Utterance> extract_manifest(const io::Manifest& m, const ExtractConfig& cfg) {
  std::vector<io::Utterance> utts;
  for (const auto& e : m.entries) {
    try {
      auto clip = wav::read(e.path);
      clip.id = std::filesystem::path(e.path).stem().string();
      utts.push_back({clip.id, e.speaker, m.class_names[static_cast<std::size_t>(e.label)], extract_frames(clip, cfg)});
    } catch (const Error& err) {
      throw Error(err.kind(), "'" + e.path + "': " + err.what());
    }
  }
  return utts;
}

/// One row per utterance; class names sorted unless given.
inline FeatureMatrix utterance_matrix(const std::vector<io::Utterance>& utts, const functionals::FunctionalSet& set,
                                      std::vector<std::string> class_names = {}) {
  require(!utts.empty(), ErrorKind::BadInput, "no utterances");
  FeatureMatrix fm;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    const Vector v = functionals::apply_functionals(utts[i].frames, set);
    if (i == 0) {
      fm.X.resize(static_cast<Eigen::Index>(utts.size()), v.size());
      fm.feature_names = functionals::output_labels(utts[i].frames, set);
    }
    require(v.size() == fm.X.cols(), ErrorKind::BadInput, "utterance '" + utts[i].id + "' has a different dimension");
    fm.X.row(static_cast<Eigen::Index>(i)) = v.transpose();
    fm.speakers.push_back(utts[i].speaker);
    names.push_back(utts[i].label);
  }
  fm.class_names = std::move(class_names);
  fm.labels = io::encode_labels(names, fm.class_names);
  return fm;
}

// Experiments --------------------------------------------------------------------------

struct SelectionStage {
  selection::Method method = selection::Method::mrmr;
  std::size_t k = 0;
};

struct RunConfig {
  nlohmann::json raw;
  std::uint64_t seed = 0;
  std::filesystem::path base_dir;
  std::optional<eval::SynthConfig> synth;
  std::string features_csv, manifest_csv;
  ExtractConfig extract;
  functionals::FunctionalSet functionals = functionals::default_set();
  std::optional<SelectionStage> selection;
  std::optional<pqpso::ProjectionConfig> reduction;
  config::Classifier classifier;
  std::string output_dir;
};

inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  config::check_keys(j,
                     {"seed", "data", "frontend", "gabor", "features", "functionals", "selection", "reduction",
                      "classifier", "output_dir"},
                     "run config");
  RunConfig c;
  c.raw = j;
  c.base_dir = base_dir;
  config::read(j, "seed", c.seed);
  config::read(j, "output_dir", c.output_dir);
  require(j.contains("data"), ErrorKind::BadConfig, "run config needs a 'data' section");
  const auto& data = j["data"];
  config::check_keys(data, {"synth", "features", "manifest"}, "data");
  require(data.size() == 1, ErrorKind::BadConfig, "'data' must name exactly one of synth, features or manifest");
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return (path.is_relative() && !base_dir.empty() ? base_dir / path : path).string();
  };
  if (data.contains("synth")) {
    c.synth = config::synth(data["synth"]);
    if (!data["synth"].contains("seed")) c.synth->seed = c.seed;
  } else if (data.contains("features")) {
    c.features_csv = resolve(data["features"].get<std::string>());
  } else {
    c.manifest_csv = resolve(data["manifest"].get<std::string>());
  }
  if (j.contains("frontend")) c.extract.frontend = config::frontend(j["frontend"]);
  if (j.contains("gabor")) c.extract.gabor = config::gabor_bank(j["gabor"]);
  config::read(j, "features", c.extract.features);
  if (j.contains("functionals")) c.functionals = config::functional_set(j["functionals"]);
  if (j.contains("selection")) {
    const auto& s = j["selection"];
    config::check_keys(s, {"method", "k"}, "selection");
    SelectionStage st;
    if (s.contains("method")) st.method = selection::parse_method(s["method"].get<std::string>());
    config::read(s, "k", st.k);
    require(st.k >= 1, ErrorKind::BadConfig, "selection.k must be >= 1");
    c.selection = st;
  }
  if (j.contains("reduction")) c.reduction = config::projection(j["reduction"]);
  if (j.contains("classifier")) c.classifier = config::classifier(j["classifier"]);
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(io::read_json(path), std::filesystem::path(path).parent_path());
}

struct FoldOutcome {
  std::string speaker;
  std::uint64_t seed = 0;
  std::vector<std::size_t> test;
  std::vector<int> predicted;
  eval::EvalReport report;
  std::vector<std::size_t> selected;
  std::vector<pqpso::TraceRow> trace;
};

struct ExperimentResult {
  FeatureMatrix data;
  std::vector<FoldOutcome> folds;
  eval::EvalReport pooled;
};

template <typename F>
auto stage(const std::string& name, const std::string& fold, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), "stage '" + name + "'" + (fold.empty() ? "" : " (fold " + fold + ")") + ": " + e.what());
  }
}

inline FeatureMatrix load_data(const RunConfig& cfg) {
  if (cfg.synth) return stage("synth", "", [&] { return eval::synth_imbalanced(*cfg.synth); });
  if (!cfg.features_csv.empty()) return stage("load", "", [&] { return io::read_features(cfg.features_csv); });
  const auto manifest = stage("manifest", "", [&] { return io::read_manifest(cfg.manifest_csv); });
  const auto utts = stage("extract", "", [&] { return extract_manifest(manifest, cfg.extract); });
  return stage("functionals", "", [&] { return utterance_matrix(utts, cfg.functionals, manifest.class_names); });
}

/// Leave-one-speaker-out: selection, reduction and training see only the
/// training speakers of each fold.
inline ExperimentResult run_experiment(const RunConfig& cfg) {
  ExperimentResult res;
  res.data = load_data(cfg);
  const int m = res.data.num_classes();
  const auto folds = stage("folds", "", [&] { return eval::loso_folds(res.data.speakers); });
  std::vector<int> pooled_truth, pooled_pred;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    const auto& fold = folds[k];
    FoldOutcome out;
    out.speaker = fold.speaker;
    out.seed = rng::substream(cfg.seed, 0xf01d, k);
    out.test = fold.test;
    FeatureMatrix train = res.data.subset(fold.train);
    FeatureMatrix test = res.data.subset(fold.test);
    if (cfg.selection) {
      const auto sel = stage("select", fold.speaker, [&] {
        return selection::select(train, std::min<std::size_t>(cfg.selection->k, static_cast<std::size_t>(train.dims())),
                                 cfg.selection->method);
      });
      out.selected = sel.selected_indices;
      train = train.select_columns(sel.selected_indices);
      test = test.select_columns(sel.selected_indices);
    }
    if (cfg.reduction) {
      auto pc = *cfg.reduction;
      pc.d_out = std::min<int>(pc.d_out, static_cast<int>(train.dims()));
      pc.swarm.seed = rng::substream(out.seed, 2);
      const auto pr = stage("reduce", fold.speaker, [&] { return pqpso::learn_projection(train, pc); });
      out.trace = pr.trace;
      train.X = train.X * pr.projection;
      test.X = test.X * pr.projection;
    }
    auto helm = cfg.classifier.helm;
    helm.seed = rng::substream(out.seed, 1);
    const auto model =
        stage("train", fold.speaker, [&] { return elm::helm_train(train.X, train.labels, m, helm, cfg.classifier.scheme); });
    out.predicted = stage("predict", fold.speaker, [&] { return elm::predict(model, test.X).labels; });
    out.report = eval::compute_metrics(test.labels, out.predicted, m);
    pooled_truth.insert(pooled_truth.end(), test.labels.begin(), test.labels.end());
    pooled_pred.insert(pooled_pred.end(), out.predicted.begin(), out.predicted.end());
    res.folds.push_back(std::move(out));
  }
  res.pooled = eval::compute_metrics(pooled_truth, pooled_pred, m);
  return res;
}

inline nlohmann::json experiment_report(const ExperimentResult& res, const RunConfig& cfg) {
  nlohmann::json j = io::report_to_json(res.pooled, res.data.class_names);
  j["seed"] = cfg.seed;
  j["aggregation"] = "pooled";
  j["scheme"] = elm::to_string(cfg.classifier.scheme.kind);
  j["dataset_ir"] = io::round4(eval::imbalance_ratio(class_counts(res.data.labels, res.data.num_classes())));
  nlohmann::json per_fold = nlohmann::json::array();
  double war = 0.0, uar = 0.0, gmean = 0.0;
  std::size_t total = 0;
  for (const auto& f : res.folds) {
    auto fj = io::report_to_json(f.report, res.data.class_names);
    fj["speaker"] = f.speaker;
    fj["test_size"] = f.test.size();
    per_fold.push_back(std::move(fj));
    war += f.report.war;
    uar += f.report.uar;
    gmean += f.report.gmean;
    total += f.test.size();
  }
  const auto n = static_cast<double>(res.folds.size());
  j["per_fold"] = std::move(per_fold);
  j["fold_test_total"] = total;
  j["fold_mean"] = {{"war", io::round4(war / n)}, {"uar", io::round4(uar / n)}, {"gmean", io::round4(gmean / n)}};
  return j;
}

inline std::string fold_tag(std::size_t k, const std::string& speaker) {
  std::ostringstream os;
  os << "fold_" << std::setw(2) << std::setfill('0') << k << '_';
  for (char c : speaker) os << (std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_');
  return os.str();
}

/// Writes config snapshot, seeds, per-fold predictions and traces, and the
/// aggregate report under `dir`.
inline void write_run(const ExperimentResult& res, const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_json((dir / "config.json").string(), cfg.raw);
  nlohmann::json seeds = {{"seed", cfg.seed}, {"folds", nlohmann::json::array()}};
  for (std::size_t k = 0; k < res.folds.size(); ++k) {
    const auto& f = res.folds[k];
    seeds["folds"].push_back({{"speaker", f.speaker}, {"seed", f.seed}});
    const auto tag = fold_tag(k, f.speaker);
    auto out = io::open_out((dir / (tag + "_predictions.csv")).string());
    out << "row,speaker,truth,predicted\n";
    for (std::size_t i = 0; i < f.test.size(); ++i) {
      const auto row = f.test[i];
      out << row << ',' << io::csv_field(res.data.speakers[row]) << ','
          << io::csv_field(res.data.class_names[static_cast<std::size_t>(res.data.labels[row])]) << ','
          << io::csv_field(res.data.class_names[static_cast<std::size_t>(f.predicted[i])]) << '\n';
    }
    if (!f.trace.empty()) {
      auto tr = io::open_out((dir / (tag + "_trace.csv")).string());
      tr << "iteration,best_cost,alpha,mt\n";
      for (const auto& r : f.trace)
        tr << r.iteration << ',' << io::format_double(r.best_cost) << ',' << io::format_double(r.alpha) << ','
           << r.mt << '\n';
    }
  }
  io::write_json((dir / "seeds.json").string(), seeds);
  io::write_json((dir / "report.json").string(), experiment_report(res, cfg));
}

}  // namespace serkit::pipeline
