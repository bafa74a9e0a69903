#pragma once

#include <json.hpp>

#include <set>
#include <string>

#include "serkit/dsp.hpp"
#include "serkit/elm.hpp"
#include "serkit/eval.hpp"
#include "serkit/functionals.hpp"
#include "serkit/gabor.hpp"
#include "serkit/pqpso.hpp"

// JSON readers for every configurable stage. Missing keys keep their
// defaults; unknown keys are rejected.
namespace serkit::config {

using nlohmann::json;

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  require(j.is_object(), ErrorKind::BadConfig, "'" + section + "' must be an object");
  for (const auto& [key, value] : j.items())
    require(allowed.count(key) > 0, ErrorKind::BadConfig, "unknown key '" + key + "' in '" + section + "'");
}

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BadConfig, std::string("bad value for '") + key + "': " + e.what());
  }
}

inline dsp::Window parse_window(const std::string& s) {
  if (s == "hann") return dsp::Window::hann;
  if (s == "hamming") return dsp::Window::hamming;
  if (s == "rect") return dsp::Window::rect;
  throw Error(ErrorKind::BadConfig, "unknown window '" + s + "'");
}

inline std::string window_name(dsp::Window w) {
  return w == dsp::Window::hann ? "hann" : w == dsp::Window::hamming ? "hamming" : "rect";
}

inline dsp::FrontendConfig frontend(const json& j) {
  check_keys(j,
             {"sample_rate", "frame_len", "hop", "window", "fft_size", "mel_channels", "fmin", "fmax", "log_floor",
              "preemphasis", "use_vad", "vad_threshold_db", "n_ceps", "delta_window"},
             "frontend");
  dsp::FrontendConfig c;
  read(j, "sample_rate", c.sample_rate);
  read(j, "frame_len", c.frame_len);
  read(j, "hop", c.hop);
  if (j.contains("window")) c.window = parse_window(j["window"].get<std::string>());
  read(j, "fft_size", c.fft_size);
  read(j, "mel_channels", c.mel_channels);
  read(j, "fmin", c.fmin);
  read(j, "fmax", c.fmax);
  read(j, "log_floor", c.log_floor);
  read(j, "preemphasis", c.preemphasis);
  read(j, "use_vad", c.use_vad);
  read(j, "vad_threshold_db", c.vad_threshold_db);
  read(j, "n_ceps", c.n_ceps);
  read(j, "delta_window", c.delta_window);
  return c;
}

inline json to_json(const dsp::FrontendConfig& c) {
  return {{"sample_rate", c.sample_rate}, {"frame_len", c.frame_len},   {"hop", c.hop},
          {"window", window_name(c.window)}, {"fft_size", c.fft_size}, {"mel_channels", c.mel_channels},
          {"fmin", c.fmin},                {"fmax", c.fmax},            {"log_floor", c.log_floor},
          {"preemphasis", c.preemphasis},  {"use_vad", c.use_vad},      {"vad_threshold_db", c.vad_threshold_db},
          {"n_ceps", c.n_ceps},            {"delta_window", c.delta_window}};
}

inline gabor::GaborBankConfig gabor_bank(const json& j) {
  check_keys(j,
             {"num_channels", "frame_rate", "spectral_mod_freqs", "temporal_mod_freqs", "sgbfb_spectral_mod_freqs",
              "sgbfb_temporal_mod_freqs", "envelope_cycles", "support_sds", "max_spectral_half", "max_temporal_half",
              "subsample_fraction"},
             "gabor");
  gabor::GaborBankConfig c;
  read(j, "num_channels", c.num_channels);
  read(j, "frame_rate", c.frame_rate);
  read(j, "spectral_mod_freqs", c.spectral_mod_freqs);
  read(j, "temporal_mod_freqs", c.temporal_mod_freqs);
  read(j, "sgbfb_spectral_mod_freqs", c.sgbfb_spectral_mod_freqs);
  read(j, "sgbfb_temporal_mod_freqs", c.sgbfb_temporal_mod_freqs);
  read(j, "envelope_cycles", c.envelope_cycles);
  read(j, "support_sds", c.support_sds);
  read(j, "max_spectral_half", c.max_spectral_half);
  read(j, "max_temporal_half", c.max_temporal_half);
  read(j, "subsample_fraction", c.subsample_fraction);
  c.validate();
  return c;
}

inline json to_json(const gabor::GaborBankConfig& c) {
  return {{"num_channels", c.num_channels},
          {"frame_rate", c.frame_rate},
          {"spectral_mod_freqs", c.spectral_mod_freqs},
          {"temporal_mod_freqs", c.temporal_mod_freqs},
          {"sgbfb_spectral_mod_freqs", c.sgbfb_spectral_mod_freqs},
          {"sgbfb_temporal_mod_freqs", c.sgbfb_temporal_mod_freqs},
          {"envelope_cycles", c.envelope_cycles},
          {"support_sds", c.support_sds},
          {"max_spectral_half", c.max_spectral_half},
          {"max_temporal_half", c.max_temporal_half},
          {"subsample_fraction", c.subsample_fraction}};
}

inline functionals::FunctionalSet functional_set(const json& j) {
  require(j.is_array(), ErrorKind::BadConfig, "'functionals' must be a list of names");
  functionals::FunctionalSet set;
  for (const auto& name : j) set.push_back(functionals::parse(name.get<std::string>()));
  functionals::validate(set);
  return set;
}

/// Classifier section: network sizes plus the weighting scheme.
struct Classifier {
  elm::HelmConfig helm;
  elm::WeightScheme scheme;
};

inline Classifier classifier(const json& j) {
  check_keys(j,
             {"preset", "scheme", "d", "sparse_sizes", "proj_size", "lambda", "C", "fista_iters", "power_iters",
              "standardize", "projection_rms", "seed"},
             "classifier");
  Classifier c;
  if (j.contains("preset")) {
    const auto p = j["preset"].get<std::string>();
    if (p == "production")
      c.helm = elm::HelmConfig::production();
    else
      require(p == "desk", ErrorKind::BadConfig, "unknown classifier preset '" + p + "'");
  }
  if (j.contains("scheme")) c.scheme.kind = elm::parse_scheme(j["scheme"].get<std::string>());
  read(j, "d", c.scheme.d);
  read(j, "sparse_sizes", c.helm.sparse_sizes);
  read(j, "proj_size", c.helm.proj_size);
  read(j, "lambda", c.helm.lambda);
  read(j, "C", c.helm.C);
  read(j, "fista_iters", c.helm.fista_iters);
  read(j, "power_iters", c.helm.power_iters);
  read(j, "standardize", c.helm.standardize);
  read(j, "projection_rms", c.helm.projection_rms);
  read(j, "seed", c.helm.seed);
  c.helm.validate();
  require(c.scheme.kind != elm::SchemeKind::W3 || c.scheme.d >= 1.0, ErrorKind::BadConfig, "W3 needs d >= 1");
  return c;
}

inline pqpso::ProjectionConfig projection(const json& j) {
  check_keys(j,
             {"method", "d_out", "validation_fraction", "bound", "include_identity", "particles", "K", "alpha0",
              "alpha1", "T", "max_try", "epsilon", "seed"},
             "reduction");
  if (j.contains("method"))
    require(j["method"].get<std::string>() == "pqpso", ErrorKind::BadConfig, "only the pqpso reduction is available");
  pqpso::ProjectionConfig c;
  read(j, "d_out", c.d_out);
  read(j, "validation_fraction", c.validation_fraction);
  read(j, "bound", c.bound);
  read(j, "include_identity", c.include_identity);
  read(j, "particles", c.swarm.particles);
  read(j, "K", c.swarm.K);
  read(j, "alpha0", c.swarm.schedule.alpha0);
  read(j, "alpha1", c.swarm.schedule.alpha1);
  read(j, "T", c.swarm.schedule.T);
  read(j, "max_try", c.swarm.schedule.max_try);
  read(j, "epsilon", c.swarm.schedule.epsilon);
  read(j, "seed", c.swarm.seed);
  c.swarm.schedule.validate();
  return c;
}

inline eval::SynthConfig synth(const json& j) {
  check_keys(j, {"preset", "counts", "dims", "separation", "noise_sd", "speakers", "seed"}, "synth");
  eval::SynthConfig c;
  if (j.contains("preset")) c = eval::synth_preset(j["preset"].get<std::string>());
  read(j, "counts", c.counts);
  read(j, "dims", c.dims);
  read(j, "separation", c.separation);
  read(j, "noise_sd", c.noise_sd);
  read(j, "speakers", c.speakers);
  read(j, "seed", c.seed);
  return c;
}

}  // namespace serkit::config
