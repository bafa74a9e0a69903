#pragma once

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "serkit/types.hpp"

namespace serkit::dsp {

struct AudioClip {
  std::vector<double> samples;
  double sample_rate = 16000.0;
  std::string id;
};

struct LogMelSpectrogram {
  Matrix values;  // [mel_channels x frames], natural-log amplitude
  int mel_channels = 0;
  double frame_hop = 0.0;  // seconds
  double frame_len = 0.0;  // seconds

  Eigen::Index frames() const { return values.cols(); }
};

enum class Window { hann, hamming, rect };

struct FrontendConfig {
  double sample_rate = 16000.0;
  double frame_len = 0.025;
  double hop = 0.010;
  Window window = Window::hann;
  int fft_size = 512;
  int mel_channels = 23;
  double fmin = 64.0;
  double fmax = 0.0;  // 0 means Nyquist
  double log_floor = 1e-10;
  double preemphasis = 0.97;
  bool use_vad = true;
  double vad_threshold_db = 40.0;
  int n_ceps = 20;
  int delta_window = 2;
};

inline void validate(const AudioClip& clip) {
  require(!clip.samples.empty(), ErrorKind::EmptySignal, "clip '" + clip.id + "' has no samples");
  require(clip.sample_rate > 0.0, ErrorKind::BadConfig, "sample rate must be positive");
}

/// out[0] = in[0]; out[n] = in[n] - alpha * in[n-1].
inline AudioClip preemphasize(const AudioClip& clip, double alpha = 0.97) {
  require(!clip.samples.empty(), ErrorKind::EmptySignal, "cannot pre-emphasize an empty clip");
  require(alpha >= 0.0 && alpha < 1.0, ErrorKind::BadConfig, "pre-emphasis alpha must lie in [0,1)");
  AudioClip out = clip;
  for (std::size_t n = clip.samples.size() - 1; n > 0; --n)
    out.samples[n] = clip.samples[n] - alpha * clip.samples[n - 1];
  return out;
}

/// Symmetric window of length n.
inline Vector make_window(Eigen::Index n, Window type) {
  Vector w = Vector::Ones(n);
  if (type == Window::rect || n == 1) return w;
  const double denom = static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c = std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
    w(i) = type == Window::hann ? 0.5 - 0.5 * c : 0.54 - 0.46 * c;
  }
  return w;
}

inline Eigen::Index frame_count(std::size_t length, Eigen::Index frame_samples, Eigen::Index hop_samples) {
  if (static_cast<Eigen::Index>(length) < frame_samples) return 0;
  return (static_cast<Eigen::Index>(length) - frame_samples) / hop_samples + 1;
}

/// Frames in rows: [frames x frame_samples], each multiplied by the window.
inline Matrix frame_signal(std::span<const double> samples, Eigen::Index frame_samples,
                           Eigen::Index hop_samples, Window window) {
  require(frame_samples > 0 && hop_samples > 0 && frame_samples >= hop_samples, ErrorKind::BadConfig,
          "need frame_len >= hop > 0");
  const Eigen::Index count = frame_count(samples.size(), frame_samples, hop_samples);
  require(count >= 1, ErrorKind::TooShort,
          "signal of " + std::to_string(samples.size()) + " samples is shorter than one frame of " +
              std::to_string(frame_samples));
  const Vector w = make_window(frame_samples, window);
  Matrix frames(count, frame_samples);
  for (Eigen::Index f = 0; f < count; ++f)
    for (Eigen::Index i = 0; i < frame_samples; ++i)
      frames(f, i) = samples[static_cast<std::size_t>(f * hop_samples + i)] * w(i);
  return frames;
}

inline Matrix frame_and_window(const AudioClip& clip, double frame_len, double hop, Window window) {
  validate(clip);
  const auto frame_samples = static_cast<Eigen::Index>(std::lround(frame_len * clip.sample_rate));
  const auto hop_samples = static_cast<Eigen::Index>(std::lround(hop * clip.sample_rate));
  return frame_signal(clip.samples, frame_samples, hop_samples, window);
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Center frequencies (Hz) of the triangular filters, equally spaced in mel.
inline std::vector<double> mel_centers(int channels, double fmin, double fmax) {
  const double lo = hz_to_mel(fmin), hi = hz_to_mel(fmax);
  std::vector<double> centers(static_cast<std::size_t>(channels));
  for (int m = 0; m < channels; ++m)
    centers[static_cast<std::size_t>(m)] = mel_to_hz(lo + (hi - lo) * (m + 1) / (channels + 1));
  return centers;
}

/// Triangular filters on the mel scale: [channels x (fft_size/2 + 1)].
inline Matrix mel_filterbank(int channels, int fft_size, double sample_rate, double fmin, double fmax) {
  require(channels >= 1, ErrorKind::BadConfig, "mel_channels must be >= 1");
  require(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0 + 1e-9, ErrorKind::BadConfig,
          "band edges must satisfy 0 <= fmin < fmax <= sample_rate/2");
  const int bins = fft_size / 2 + 1;
  const double lo = hz_to_mel(fmin), hi = hz_to_mel(fmax);
  std::vector<double> edges(static_cast<std::size_t>(channels + 2));
  for (int m = 0; m < channels + 2; ++m)
    edges[static_cast<std::size_t>(m)] = lo + (hi - lo) * m / (channels + 1);
  Matrix fb = Matrix::Zero(channels, bins);
  for (int b = 0; b < bins; ++b) {
    const double mel = hz_to_mel(b * sample_rate / fft_size);
    for (int m = 0; m < channels; ++m) {
      const double l = edges[m], c = edges[m + 1], r = edges[m + 2];
      if (mel > l && mel <= c)
        fb(m, b) = (mel - l) / (c - l);
      else if (mel > c && mel < r)
        fb(m, b) = (r - mel) / (r - c);
    }
  }
  return fb;
}

/// Magnitude spectra of windowed frames: [(fft_size/2 + 1) x frames].
inline Matrix magnitude_spectra(const Matrix& frames, int fft_size) {
  require(frames.cols() <= fft_size, ErrorKind::BadConfig,
          "fft_size " + std::to_string(fft_size) + " shorter than frame of " +
              std::to_string(frames.cols()) + " samples");
  Eigen::FFT<double> fft;
  const int bins = fft_size / 2 + 1;
  Matrix mag(bins, frames.rows());
  std::vector<double> buf(static_cast<std::size_t>(fft_size));
  std::vector<std::complex<double>> spec;
  for (Eigen::Index f = 0; f < frames.rows(); ++f) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (Eigen::Index i = 0; i < frames.cols(); ++i) buf[static_cast<std::size_t>(i)] = frames(f, i);
    fft.fwd(spec, buf);
    for (int b = 0; b < bins; ++b) mag(b, f) = std::abs(spec[static_cast<std::size_t>(b)]);
  }
  return mag;
}

inline LogMelSpectrogram log_mel_from_frames(const Matrix& frames, const FrontendConfig& cfg) {
  const double fmax = cfg.fmax > 0.0 ? cfg.fmax : cfg.sample_rate / 2.0;
  const Matrix fb = mel_filterbank(cfg.mel_channels, cfg.fft_size, cfg.sample_rate, cfg.fmin, fmax);
  require(cfg.log_floor > 0.0, ErrorKind::BadConfig, "log floor must be positive");
  LogMelSpectrogram lm;
  lm.values = (fb * magnitude_spectra(frames, cfg.fft_size)).array().max(cfg.log_floor).log().matrix();
  lm.mel_channels = cfg.mel_channels;
  lm.frame_hop = cfg.hop;
  lm.frame_len = cfg.frame_len;
  return lm;
}

inline LogMelSpectrogram log_mel_spectrogram(const AudioClip& clip, const FrontendConfig& cfg) {
  const double fmax = cfg.fmax > 0.0 ? cfg.fmax : clip.sample_rate / 2.0;
  require(cfg.fmin < fmax && fmax <= clip.sample_rate / 2.0 + 1e-9 && cfg.fmin >= 0.0, ErrorKind::BadConfig,
          "band edges must satisfy fmin < fmax <= sample_rate/2");
  FrontendConfig local = cfg;
  local.sample_rate = clip.sample_rate;
  local.fmax = fmax;
  return log_mel_from_frames(frame_and_window(clip, cfg.frame_len, cfg.hop, cfg.window), local);
}

/// Keeps frames whose RMS is within threshold_db of the loudest frame.
inline std::vector<bool> energy_vad(const Matrix& frames, double threshold_db = 40.0) {
  require(frames.rows() >= 1, ErrorKind::BadInput, "VAD needs at least one frame");
  const Vector rms = (frames.rowwise().squaredNorm() / static_cast<double>(std::max<Eigen::Index>(frames.cols(), 1)))
                         .array()
                         .sqrt()
                         .matrix();
  Eigen::Index peak = 0;
  rms.maxCoeff(&peak);
  const double cut = rms(peak) * std::pow(10.0, -threshold_db / 20.0);
  std::vector<bool> keep(static_cast<std::size_t>(frames.rows()));
  for (Eigen::Index f = 0; f < frames.rows(); ++f) keep[static_cast<std::size_t>(f)] = rms(f) >= cut;
  keep[static_cast<std::size_t>(peak)] = true;
  return keep;
}

inline Matrix keep_rows(const Matrix& m, const std::vector<bool>& mask) {
  const auto kept = static_cast<Eigen::Index>(std::count(mask.begin(), mask.end(), true));
  Matrix out(kept, m.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (mask[static_cast<std::size_t>(i)]) out.row(r++) = m.row(i);
  return out;
}

/// Orthonormal DCT-II matrix [n_out x n_in].
inline Matrix dct_matrix(int n_out, int n_in) {
  Matrix d(n_out, n_in);
  for (int k = 0; k < n_out; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n_in);
    for (int n = 0; n < n_in; ++n)
      d(k, n) = scale * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) / (2.0 * n_in));
  }
  return d;
}

/// Regression deltas along the frame axis with edge replication.
inline Matrix deltas(const Matrix& x, int window) {
  require(window >= 1, ErrorKind::BadConfig, "delta window must be >= 1");
  const Eigen::Index frames = x.cols();
  double denom = 0.0;
  for (int n = 1; n <= window; ++n) denom += 2.0 * n * n;
  Matrix d = Matrix::Zero(x.rows(), frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int n = 1; n <= window; ++n) {
      const Eigen::Index fwd = std::min<Eigen::Index>(t + n, frames - 1);
      const Eigen::Index bwd = std::max<Eigen::Index>(t - n, 0);
      d.col(t) += n * (x.col(fwd) - x.col(bwd));
    }
  }
  return d / denom;
}

/// MFCC with first and second derivatives stacked: [3*n_ceps x frames].
inline FrameFeatures mfcc_with_deltas(const LogMelSpectrogram& lm, int n_ceps, int delta_window = 2) {
  require(n_ceps >= 1 && n_ceps <= lm.mel_channels, ErrorKind::BadConfig,
          "n_ceps must lie in [1, mel_channels]");
  require(lm.values.rows() == lm.mel_channels, ErrorKind::BadInput, "spectrogram shape mismatch");
  const Matrix ceps = dct_matrix(n_ceps, lm.mel_channels) * lm.values;
  const Matrix d1 = deltas(ceps, delta_window);
  const Matrix d2 = deltas(d1, delta_window);
  FrameFeatures ff;
  ff.values.resize(3 * n_ceps, ceps.cols());
  ff.values << ceps, d1, d2;
  for (const char* prefix : {"mfcc", "d_mfcc", "dd_mfcc"})
    for (int k = 0; k < n_ceps; ++k) ff.dim_labels.push_back(std::string(prefix) + std::to_string(k));
  return ff;
}

/// Band-limited resampling by windowed-sinc interpolation (Hann-windowed,
/// `zero_crossings` lobes on each side).
inline AudioClip resample(const AudioClip& clip, double target_rate, int zero_crossings = 16) {
  validate(clip);
  require(target_rate > 0.0, ErrorKind::BadConfig, "target sample rate must be positive");
  if (clip.sample_rate == target_rate) return clip;
  const double ratio = target_rate / clip.sample_rate;
  const double cutoff = std::min(1.0, ratio);
  const double half_width = zero_crossings / cutoff;
  const auto out_len = static_cast<std::size_t>(std::floor(clip.samples.size() * ratio));
  AudioClip out{std::vector<double>(std::max<std::size_t>(out_len, 1)), target_rate, clip.id};
  const auto n_in = static_cast<long>(clip.samples.size());
  for (std::size_t m = 0; m < out.samples.size(); ++m) {
    const double t = static_cast<double>(m) / ratio;
    const long lo = static_cast<long>(std::ceil(t - half_width));
    const long hi = static_cast<long>(std::floor(t + half_width));
    double acc = 0.0;
    for (long n = std::max(lo, 0L); n <= std::min(hi, n_in - 1); ++n) {
      const double x = t - static_cast<double>(n);
      const double arg = std::numbers::pi * cutoff * x;
      const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
      const double win = 0.5 + 0.5 * std::cos(std::numbers::pi * x / half_width);
      acc += clip.samples[static_cast<std::size_t>(n)] * cutoff * sinc * win;
    }
    out.samples[m] = acc;
  }
  return out;
}

/// Full front end: resample, pre-emphasis, framing, optional VAD, log-mel.
inline LogMelSpectrogram frontend(const AudioClip& input, const FrontendConfig& cfg) {
  AudioClip clip = input.sample_rate == cfg.sample_rate ? input : resample(input, cfg.sample_rate);
  clip = preemphasize(clip, cfg.preemphasis);
  Matrix frames = frame_and_window(clip, cfg.frame_len, cfg.hop, cfg.window);
  if (cfg.use_vad) frames = keep_rows(frames, energy_vad(frames, cfg.vad_threshold_db));
  return log_mel_from_frames(frames, cfg);
}

}  // namespace serkit::dsp
