#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "serkit/serkit.hpp"

namespace {

using namespace serkit;
using nlohmann::json;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

pipeline::ExtractConfig extract_config(const std::string& path) {
  pipeline::ExtractConfig c;
  if (path.empty()) return c;
  const auto j = io::read_json(path);
  config::check_keys(j, {"frontend", "gabor", "features"}, path);
  if (j.contains("frontend")) c.frontend = config::frontend(j["frontend"]);
  if (j.contains("gabor")) c.gabor = config::gabor_bank(j["gabor"]);
  config::read(j, "features", c.features);
  return c;
}

int cmd_bank(const std::string& cfg_path) {
  const auto cfg = extract_config(cfg_path).gabor;
  const auto bank = gabor::build_gbfb_bank(cfg);
  std::cout << "filters " << bank.size() << "\ngbfb_dims " << gabor::gbfb_dimension(cfg) << "\nsgbfb_dims "
            << gabor::sgbfb_dimension(cfg) << '\n';
  gabor::check_reference_dimensions(cfg);
  return 0;
}

int cmd_extract(const std::string& manifest, const std::string& out, const std::string& cfg_path,
                const std::string& features) {
  auto cfg = extract_config(cfg_path);
  if (!features.empty()) cfg.features = split_list(features);
  const auto m = io::read_manifest(manifest);
  io::write_frames(out, pipeline::extract_manifest(m, cfg));
  return 0;
}

int cmd_functionals(const std::string& in, const std::string& set, const std::string& out) {
  json names = json::array();
  for (const auto& n : split_list(set)) names.push_back(n);
  io::write_features(out, pipeline::utterance_matrix(io::read_frames(in), config::functional_set(names)));
  return 0;
}

int cmd_select(const std::string& method, std::size_t k, const std::string& in, const std::string& out,
               const std::string& indices, bool apply) {
  const auto fm = io::read_features(in);
  std::vector<std::size_t> cols;
  if (apply) {
    cols = io::read_json(indices).at("selected").get<std::vector<std::size_t>>();
    for (auto c : cols) require(c < static_cast<std::size_t>(fm.dims()), ErrorKind::BadInput, "index out of range");
  } else {
    const auto res = selection::select(fm, k, selection::parse_method(method));
    cols = res.selected_indices;
    if (!indices.empty()) {
      json scores = json::array();
      for (double s : res.scores) scores.push_back(s);
      io::write_json(indices, {{"method", selection::to_string(res.method)},
                               {"selected", cols},
                               {"scores", scores},
                               {"cumulative", selection::cumulative_score_curve(res)}});
    }
  }
  io::write_features(out, fm.select_columns(cols));
  return 0;
}

int cmd_reduce(const std::string& method, int d_out, std::uint64_t seed, const std::string& in, const std::string& out,
               const std::string& matrix, const std::string& trace, const std::string& cfg_path, bool apply) {
  require(method == "pqpso", ErrorKind::BadConfig, "only the pqpso reduction is available");
  auto fm = io::read_features(in);
  Matrix P;
  if (apply) {
    const auto j = io::read_json(matrix);
    P = elm::matrix_from_json(j.at("matrix"));
    require(P.rows() == fm.dims(), ErrorKind::BadInput, "projection expects " + std::to_string(P.rows()) + " features");
  } else {
    auto pc = cfg_path.empty() ? pqpso::ProjectionConfig{} : config::projection(io::read_json(cfg_path));
    pc.d_out = d_out;
    pc.swarm.seed = seed;
    const auto res = pqpso::learn_projection(fm, pc);
    P = res.projection;
    if (!matrix.empty())
      io::write_json(matrix, {{"format_version", 1},
                              {"seed", seed},
                              {"best_cost", res.best_cost},
                              {"baseline_cost", res.baseline_cost},
                              {"matrix", elm::matrix_to_json(P)}});
    if (!trace.empty()) {
      auto t = io::open_out(trace);
      t << "iteration,best_cost,alpha,mt\n";
      for (const auto& r : res.trace)
        t << r.iteration << ',' << io::format_double(r.best_cost) << ',' << io::format_double(r.alpha) << ','
          << r.mt << '\n';
    }
  }
  fm.X = fm.X * P;
  fm.feature_names.clear();
  for (Eigen::Index j = 0; j < P.cols(); ++j) fm.feature_names.push_back("p" + std::to_string(j));
  io::write_features(out, fm);
  return 0;
}

int cmd_train(const std::string& scheme, const std::string& cfg_path, const std::string& in, const std::string& model_path,
              std::optional<std::uint64_t> seed) {
  auto cls = cfg_path.empty() ? config::Classifier{} : config::classifier(io::read_json(cfg_path));
  if (!scheme.empty()) cls.scheme.kind = elm::parse_scheme(scheme);
  if (seed) cls.helm.seed = *seed;
  const auto fm = io::read_features(in);
  auto model = elm::helm_train(fm.X, fm.labels, fm.num_classes(), cls.helm, cls.scheme);
  model.class_names = fm.class_names;
  io::write_json(model_path, elm::to_json(model));
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& in, const std::string& out) {
  const auto model = elm::model_from_json(io::read_json(model_path));
  const auto fm = io::read_features(in);
  const auto pred = elm::predict(model, fm.X);
  auto o = io::open_out(out);
  o << "row,speaker,truth,predicted\n";
  for (std::size_t i = 0; i < pred.labels.size(); ++i)
    o << i << ',' << io::csv_field(fm.speakers[i]) << ','
      << io::csv_field(fm.class_names[static_cast<std::size_t>(fm.labels[i])]) << ','
      << io::csv_field(model.class_names[static_cast<std::size_t>(pred.labels[i])]) << '\n';
  return 0;
}

int cmd_loso(const std::string& cfg_path, const std::string& out_dir) {
  const auto cfg = pipeline::load_run_config(cfg_path);
  std::filesystem::path dir = out_dir.empty() ? cfg.output_dir : out_dir;
  require(!dir.empty(), ErrorKind::BadConfig, "no output directory (use --out or output_dir)");
  if (out_dir.empty() && dir.is_relative()) dir = std::filesystem::path(cfg_path).parent_path() / dir;
  const auto res = pipeline::run_experiment(cfg);
  pipeline::write_run(res, cfg, dir);
  std::cout << "war " << io::round4(res.pooled.war) << " uar " << io::round4(res.pooled.uar) << " gmean "
            << io::round4(res.pooled.gmean) << '\n';
  return 0;
}

int cmd_synth(const std::string& preset, const std::string& out, std::uint64_t seed) {
  auto cfg = eval::synth_preset(preset);
  cfg.seed = seed;
  io::write_features(out, eval::synth_imbalanced(cfg));
  return 0;
}

std::vector<std::string> label_column(const io::CsvTable& t, std::initializer_list<const char*> names,
                                      const std::string& path) {
  for (const char* n : names) {
    const auto c = t.column(n);
    if (c < 0) continue;
    std::vector<std::string> out;
    for (const auto& row : t.rows) out.push_back(row[static_cast<std::size_t>(c)]);
    return out;
  }
  throw Error(ErrorKind::BadInput, "'" + path + "' has no label column");
}

int cmd_metrics(const std::string& truth_path, const std::string& pred_path, const std::string& out) {
  const auto truth = label_column(io::read_csv(truth_path), {"label", "truth"}, truth_path);
  const auto pred = label_column(io::read_csv(pred_path), {"predicted", "label"}, pred_path);
  std::vector<std::string> all(truth);
  all.insert(all.end(), pred.begin(), pred.end());
  std::vector<std::string> classes;
  io::encode_labels(all, classes);
  const auto r = eval::compute_metrics(io::encode_labels(truth, classes), io::encode_labels(pred, classes),
                                       static_cast<int>(classes.size()));
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  const auto j = io::report_to_json(r, classes);
  if (out.empty())
    std::cout << j.dump(2) << '\n';
  else
    io::write_json(out, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speech emotion recognition toolkit"};
  app.require_subcommand(1);

  std::string cfg, in, out, manifest, features, set = "mean,std,skew,kurt", method = "mrmr", indices, matrix, trace,
                                                 scheme, model, preset = "imbalanced10to1", truth, pred;
  std::size_t k = 100;
  int d_out = 50;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> train_seed;
  std::string red_method = "pqpso";
  bool apply = false;

  auto* bank = app.add_subcommand("bank", "Print and verify the Gabor filter bank sizes");
  bank->add_option("--config", cfg, "Extraction config (JSON)");

  auto* extract = app.add_subcommand("extract", "Frame-level features from a manifest of WAV files");
  extract->add_option("--manifest", manifest, "CSV with path,speaker,label")->required();
  extract->add_option("--out", out, "Frame feature CSV")->required();
  extract->add_option("--config", cfg, "Extraction config (JSON)");
  extract->add_option("--features", features, "Comma list of gbfb,sgbfb,mfcc,logmel");

  auto* func = app.add_subcommand("functionals", "Utterance-level statistics over frames");
  func->add_option("--in", in)->required();
  func->add_option("--set", set, "Comma list of functionals")->capture_default_str();
  func->add_option("--out", out)->required();

  auto* sel = app.add_subcommand("select", "Rank and keep the top-k features");
  sel->add_option("--method", method)->check(CLI::IsMember({"mrmr", "cfs"}))->capture_default_str();
  sel->add_option("--k", k)->capture_default_str();
  sel->add_option("--in", in)->required();
  sel->add_option("--out", out)->required();
  sel->add_option("--indices", indices, "Selected indices JSON (written, or read with --apply)");
  sel->add_flag("--apply", apply, "Reuse indices from --indices");

  auto* red = app.add_subcommand("reduce", "Learn or apply a linear projection");
  red->add_option("--method", red_method)->capture_default_str();
  red->add_option("--dout", d_out)->capture_default_str();
  red->add_option("--seed", seed)->capture_default_str();
  red->add_option("--in", in)->required();
  red->add_option("--out", out)->required();
  red->add_option("--matrix", matrix, "Projection JSON (written, or read with --apply)");
  red->add_option("--trace", trace, "Optimizer trace CSV");
  red->add_option("--config", cfg, "Reduction config (JSON)");
  red->add_flag("--apply", apply, "Reuse the projection from --matrix");

  auto* train = app.add_subcommand("train", "Train a hierarchical ELM");
  train->add_option("--scheme", scheme, "none, W1, W2, W3, W4 or proposed");
  train->add_option("--cfg", cfg, "Classifier config (JSON)");
  train->add_option("--in", in)->required();
  train->add_option("--model", model)->required();
  train->add_option("--seed", train_seed);

  auto* predict = app.add_subcommand("predict", "Classify a feature CSV");
  predict->add_option("--model", model)->required();
  predict->add_option("--in", in)->required();
  predict->add_option("--out", out)->required();

  auto* loso = app.add_subcommand("loso", "Leave-one-speaker-out experiment");
  loso->add_option("--config", cfg)->required();
  loso->add_option("--out", out, "Run directory (overrides output_dir)");

  auto* synth = app.add_subcommand("synth", "Synthetic Gaussian feature set");
  synth->add_option("--preset", preset)->capture_default_str();
  synth->add_option("--out", out)->required();
  synth->add_option("--seed", seed)->capture_default_str();

  auto* metrics = app.add_subcommand("metrics", "WAR, UAR, G-mean and confusion from label files");
  metrics->add_option("--truth", truth)->required();
  metrics->add_option("--pred", pred)->required();
  metrics->add_option("--out", out, "Report JSON (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bank) return cmd_bank(cfg);
    if (*extract) return cmd_extract(manifest, out, cfg, features);
    if (*func) return cmd_functionals(in, set, out);
    if (*sel) return cmd_select(method, k, in, out, indices, apply);
    if (*red) return cmd_reduce(red_method, d_out, seed, in, out, matrix, trace, cfg, apply);
    if (*train) return cmd_train(scheme, cfg, in, model, train_seed);
    if (*predict) return cmd_predict(model, in, out);
    if (*loso) return cmd_loso(cfg, out);
    if (*synth) return cmd_synth(preset, out, seed);
    if (*metrics) return cmd_metrics(truth, pred, out);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
