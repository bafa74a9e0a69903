#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "serkit/dsp.hpp"
#include "serkit/types.hpp"

namespace serkit::gabor {

using cd = std::complex<double>;

/// Sampled 1D Gabor filter: Gaussian envelope times a complex sinusoid.
/// Sample t of the kernel sits at index t + half().
struct GaborFilter1D {
  ComplexVector kernel;
  double u0 = 0.0;       // cycles per sample
  double sigma_x = 1.0;  // envelope SD in samples

  Eigen::Index half() const { return kernel.size() / 2; }

  /// Bandwidth of the envelope in the modulation-frequency domain.
  double sigma_u() const { return 1.0 / (2.0 * std::numbers::pi * sigma_x); }

  /// Continuous-domain response 2*pi*sigma_x * exp(-2 pi^2 (u-u0)^2 sigma_x^2).
  double analytic_response(double u) const {
    const double du = u - u0;
    return 2.0 * std::numbers::pi * sigma_x *
           std::exp(-2.0 * std::numbers::pi * std::numbers::pi * du * du * sigma_x * sigma_x);
  }

  /// DTFT of the sampled kernel at frequency u (cycles/sample).
  cd response(double u) const {
    cd acc{0.0, 0.0};
    for (Eigen::Index i = 0; i < kernel.size(); ++i) {
      const double t = static_cast<double>(i - half());
      acc += kernel(i) * std::polar(1.0, -2.0 * std::numbers::pi * u * t);
    }
    return acc;
  }
};

/// Separable 2D Gabor filter; rows run along the spectral axis (x, u0),
/// columns along the temporal axis (y, v0).
struct GaborFilter2D {
  ComplexMatrix kernel;
  double u0 = 0.0, v0 = 0.0;
  double sigma_x = 1.0, sigma_y = 1.0;

  double sigma_u() const { return 1.0 / (2.0 * std::numbers::pi * sigma_x); }
  double sigma_v() const { return 1.0 / (2.0 * std::numbers::pi * sigma_y); }

  double analytic_response(double u, double v) const {
    const double du = u - u0, dv = v - v0;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return 2.0 * std::numbers::pi * sigma_x * sigma_y *
           std::exp(-2.0 * pi2 * (sigma_x * sigma_x * du * du + sigma_y * sigma_y * dv * dv));
  }
};

struct KernelOptions {
  double support_sds = 3.0;  // kernel covers +-ceil(support_sds * sigma)
  Eigen::Index max_half = std::numeric_limits<Eigen::Index>::max();
  bool dc_compensate = true;  // remove the zero-frequency response of modulated filters
};

inline GaborFilter1D make_gabor_1d(double u0, double sigma_x, const KernelOptions& opt = {}) {
  require(sigma_x > 0.0 && std::isfinite(sigma_x), ErrorKind::BadConfig, "sigma_x must be positive");
  require(std::isfinite(u0), ErrorKind::BadConfig, "modulation frequency must be finite");
  const double reach = std::ceil(opt.support_sds * sigma_x);
  const Eigen::Index half =
      std::min<Eigen::Index>(static_cast<Eigen::Index>(reach), opt.max_half);
  const Eigen::Index n = 2 * half + 1;
  const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma_x);
  Vector envelope(n);
  GaborFilter1D f;
  f.u0 = u0;
  f.sigma_x = sigma_x;
  f.kernel.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i - half);
    envelope(i) = norm * std::exp(-t * t / (2.0 * sigma_x * sigma_x));
    // u0 == 0 gives an exactly real kernel
    f.kernel(i) = u0 == 0.0 ? cd(envelope(i), 0.0)
                            : envelope(i) * std::polar(1.0, 2.0 * std::numbers::pi * u0 * t);
  }
  if (opt.dc_compensate && u0 != 0.0) {
    const cd offset = f.kernel.sum() / envelope.sum();
    for (Eigen::Index i = 0; i < n; ++i) f.kernel(i) -= offset * envelope(i);
  }
  return f;
}

/// Built as the outer product of the spectral and temporal 1D filters, which
/// is exactly the sampled 2D form since the Gaussian envelope factorizes.
inline GaborFilter2D make_gabor_2d(double u0, double v0, double sigma_x, double sigma_y,
                                   const KernelOptions& spectral = {}, const KernelOptions& temporal = {}) {
  require(sigma_x > 0.0 && sigma_y > 0.0, ErrorKind::BadConfig, "envelope SDs must be positive");
  const GaborFilter1D fx = make_gabor_1d(u0, sigma_x, spectral);
  const GaborFilter1D fy = make_gabor_1d(v0, sigma_y, temporal);
  GaborFilter2D f;
  f.u0 = u0;
  f.v0 = v0;
  f.sigma_x = sigma_x;
  f.sigma_y = sigma_y;
  f.kernel = fx.kernel * fy.kernel.transpose();
  return f;
}

/// Modulation-frequency grids and envelope rules for GBFB/SGBFB extraction.
/// Spectral frequencies are in cycles/channel, temporal ones in Hz.
struct GaborBankConfig {
  int num_channels = 23;
  double frame_rate = 100.0;
  std::vector<double> spectral_mod_freqs{0.0, 0.0746, 0.1306, 0.2286, 0.4};
  std::vector<double> temporal_mod_freqs{0.0, 6.2, 9.9, 15.7, 25.0};
  std::vector<double> sgbfb_spectral_mod_freqs{0.0, 0.0746, 0.1306, 0.2286, 0.4};
  std::vector<double> sgbfb_temporal_mod_freqs{0.0,  2.0,  2.3,  2.65, 3.05, 3.51,  4.04,
                                               4.65, 5.35, 6.16, 7.09, 8.16, 9.39,  10.81,
                                               12.44, 14.32, 16.48, 18.97, 21.83, 25.0};
  double envelope_cycles = 1.5;  // oscillations inside +-1 SD of the envelope
  double support_sds = 3.0;
  int max_spectral_half = 11;
  int max_temporal_half = 40;
  double subsample_fraction = 0.25;

  void validate() const {
    require(num_channels >= 1, ErrorKind::BadConfig, "num_channels must be >= 1");
    require(frame_rate > 0.0, ErrorKind::BadConfig, "frame_rate must be positive");
    require(envelope_cycles > 0.0 && support_sds > 0.0, ErrorKind::BadConfig,
            "envelope_cycles and support_sds must be positive");
    require(max_spectral_half >= 0 && max_temporal_half >= 0, ErrorKind::BadConfig, "negative kernel cap");
    require(subsample_fraction > 0.0 && subsample_fraction <= 1.0, ErrorKind::BadConfig,
            "subsample_fraction must lie in (0,1]");
    for (const auto* grid : {&spectral_mod_freqs, &temporal_mod_freqs, &sgbfb_spectral_mod_freqs,
                             &sgbfb_temporal_mod_freqs}) {
      require(!grid->empty(), ErrorKind::BadConfig, "empty modulation-frequency grid");
      bool has_dc = false;
      for (double f : *grid) {
        require(std::isfinite(f) && f >= 0.0, ErrorKind::BadConfig,
                "modulation frequencies must be finite and nonnegative");
        has_dc = has_dc || f == 0.0;
      }
      require(has_dc, ErrorKind::BadConfig, "modulation-frequency grids must include 0");
    }
    for (double f : spectral_mod_freqs)
      require(f <= 0.5, ErrorKind::BadConfig, "spectral modulation frequency above 0.5 cycles/channel");
    for (double f : sgbfb_spectral_mod_freqs)
      require(f <= 0.5, ErrorKind::BadConfig, "spectral modulation frequency above 0.5 cycles/channel");
    for (double f : temporal_mod_freqs)
      require(f <= frame_rate / 2.0, ErrorKind::BadConfig, "temporal modulation frequency above Nyquist");
    for (double f : sgbfb_temporal_mod_freqs)
      require(f <= frame_rate / 2.0, ErrorKind::BadConfig, "temporal modulation frequency above Nyquist");
  }

  /// Envelope SD for a frequency in cycles/sample. DC filters use the widest
  /// envelope the kernel cap allows.
  double sigma_for(double cycles, int max_half) const {
    if (cycles == 0.0) return std::max(1.0, max_half / support_sds);
    return envelope_cycles / (2.0 * std::abs(cycles));
  }

  /// Span holding envelope_cycles oscillations; unbounded for DC.
  double envelope_width(double cycles) const {
    return cycles == 0.0 ? std::numeric_limits<double>::infinity() : envelope_cycles / std::abs(cycles);
  }

  KernelOptions spectral_options() const { return {support_sds, max_spectral_half, true}; }
  KernelOptions temporal_options() const { return {support_sds, max_temporal_half, true}; }
};

/// Channels kept after filtering: evenly spaced at subsample_fraction of the
/// filter's spectral envelope width (stride at least one channel), centered
/// in the band.
inline std::vector<Eigen::Index> selected_channels(int num_channels, double envelope_width, double fraction) {
  double stride = fraction * envelope_width;
  if (!(stride >= 1.0)) stride = 1.0;
  const double span = num_channels - 1;
  const Eigen::Index count =
      std::isinf(stride) ? 1 : static_cast<Eigen::Index>(std::floor(span / stride + 1e-9)) + 1;
  const double offset = count == 1 ? span / 2.0 : (span - (count - 1) * stride) / 2.0;
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < count; ++j) idx.push_back(std::lround(j == 0 ? offset : offset + j * stride));
  return idx;
}

struct BankEntry {
  GaborFilter2D filter;
  double spectral_hz_or_cycles = 0.0;  // signed spectral modulation, cycles/channel
  double temporal_hz = 0.0;            // temporal modulation, Hz
};

/// One filter per non-redundant (spectral, temporal) pair. Negative spectral
/// frequencies appear only with nonzero temporal frequencies, so the DC pair
/// appears once. Order: spectral grid order, + before -, then temporal order.
inline std::vector<BankEntry> build_gbfb_bank(const GaborBankConfig& cfg) {
  cfg.validate();
  std::vector<BankEntry> bank;
  for (double u : cfg.spectral_mod_freqs) {
    for (int sign : {+1, -1}) {
      if (sign < 0 && u == 0.0) continue;
      for (double v_hz : cfg.temporal_mod_freqs) {
        if (sign < 0 && v_hz == 0.0) continue;
        const double su = sign * u;
        const double v = v_hz / cfg.frame_rate;
        BankEntry e;
        e.filter = make_gabor_2d(su, v, cfg.sigma_for(u, cfg.max_spectral_half),
                                 cfg.sigma_for(v, cfg.max_temporal_half), cfg.spectral_options(),
                                 cfg.temporal_options());
        e.spectral_hz_or_cycles = su;
        e.temporal_hz = v_hz;
        bank.push_back(std::move(e));
      }
    }
  }
  return bank;
}

inline Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  const Eigen::Index period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

/// Reflect-padded copy with `pr` extra rows and `pc` extra columns each side.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> reflect_pad(
    const Eigen::MatrixBase<Derived>& x, Eigen::Index pr, Eigen::Index pc) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(x.rows() + 2 * pr,
                                                                             x.cols() + 2 * pc);
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const Eigen::Index sj = reflect_index(j - pc, x.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = x(reflect_index(i - pr, x.rows()), sj);
  }
  return out;
}

/// Same-size 2D convolution with reflect padding: the kernel centre aligns
/// with the output sample, y(i,j) = sum_ab k(a,b) x(i-a, j-b).
template <typename DX, typename DK>
auto convolve2d(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DK>& k) {
  using S = decltype(typename DX::Scalar{} * typename DK::Scalar{});
  using M = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index hr = k.rows() / 2, hc = k.cols() / 2;
  const auto padded = reflect_pad(x, hr, hc);
  M y = M::Zero(x.rows(), x.cols());
  for (Eigen::Index b = 0; b < k.cols(); ++b)
    for (Eigen::Index a = 0; a < k.rows(); ++a) {
      const S w = k(a, b);
      if (w == S{}) continue;
      // x(i - (a - hr), j - (b - hc)) lives at padded(i + 2hr - a, j + 2hc - b)
      y += w * padded.block(2 * hr - a, 2 * hc - b, x.rows(), x.cols()).template cast<S>();
    }
  return y;
}

/// Convolves every column (channel axis) with a 1D kernel.
template <typename DX>
ComplexMatrix convolve_channels(const Eigen::MatrixBase<DX>& x, const ComplexVector& k) {
  const ComplexMatrix km = k;  // column kernel
  return convolve2d(x.template cast<cd>(), km);
}

/// Convolves every row (frame axis) with a 1D kernel.
template <typename DX>
ComplexMatrix convolve_frames(const Eigen::MatrixBase<DX>& x, const ComplexVector& k) {
  const ComplexMatrix km = k.transpose();
  return convolve2d(x.template cast<cd>(), km);
}

inline void check_channels(const dsp::LogMelSpectrogram& lm, const GaborBankConfig& cfg) {
  require(lm.values.rows() == cfg.num_channels && lm.mel_channels == cfg.num_channels, ErrorKind::BadConfig,
          "spectrogram has " + std::to_string(lm.values.rows()) + " channels, bank expects " +
              std::to_string(cfg.num_channels));
  require(lm.values.cols() >= 1, ErrorKind::BadInput, "spectrogram has no frames");
  if (lm.frame_hop > 0.0)
    require(std::abs(1.0 / lm.frame_hop - cfg.frame_rate) < 1e-6 * cfg.frame_rate, ErrorKind::BadConfig,
            "spectrogram frame rate does not match bank frame_rate");
}

inline std::string freq_tag(double f) {
  std::ostringstream os;
  os << f;
  return os.str();
}

inline Eigen::Index gbfb_dimension(const GaborBankConfig& cfg) {
  cfg.validate();
  Eigen::Index dims = 0;
  for (double u : cfg.spectral_mod_freqs) {
    const auto n = static_cast<Eigen::Index>(
        selected_channels(cfg.num_channels, cfg.envelope_width(u), cfg.subsample_fraction).size());
    for (int sign : {+1, -1}) {
      if (sign < 0 && u == 0.0) continue;
      for (double v : cfg.temporal_mod_freqs)
        if (!(sign < 0 && v == 0.0)) dims += n;
    }
  }
  return dims;
}

inline Eigen::Index sgbfb_dimension(const GaborBankConfig& cfg) {
  cfg.validate();
  Eigen::Index per_temporal = 0;
  for (double u : cfg.sgbfb_spectral_mod_freqs)
    per_temporal += static_cast<Eigen::Index>(
        selected_channels(cfg.num_channels, cfg.envelope_width(u), cfg.subsample_fraction).size());
  return per_temporal * static_cast<Eigen::Index>(cfg.sgbfb_temporal_mod_freqs.size());
}

/// Real part of each filter's response to the spectrogram, subsampled along
/// channels and stacked in bank order.
inline FrameFeatures extract_gbfb(const dsp::LogMelSpectrogram& lm, const std::vector<BankEntry>& bank,
                                  const GaborBankConfig& cfg) {
  check_channels(lm, cfg);
  std::vector<Matrix> blocks;
  std::vector<std::string> labels;
  Eigen::Index dims = 0;
  for (const auto& e : bank) {
    // x is real, so Re(x * h) = x * Re(h)
    const Matrix kr = e.filter.kernel.real();
    const Matrix filtered = convolve2d(lm.values, kr);
    const auto rows = selected_channels(cfg.num_channels, cfg.envelope_width(e.filter.u0), cfg.subsample_fraction);
    Matrix sub(static_cast<Eigen::Index>(rows.size()), filtered.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      sub.row(static_cast<Eigen::Index>(r)) = filtered.row(rows[r]);
      labels.push_back("gbfb_s" + freq_tag(e.spectral_hz_or_cycles) + "_t" + freq_tag(e.temporal_hz) + "_c" +
                       std::to_string(rows[r]));
    }
    dims += sub.rows();
    blocks.push_back(std::move(sub));
  }
  FrameFeatures ff;
  ff.values.resize(dims, lm.values.cols());
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    ff.values.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  ff.dim_labels = std::move(labels);
  return ff;
}

inline FrameFeatures extract_gbfb(const dsp::LogMelSpectrogram& lm, const GaborBankConfig& cfg) {
  return extract_gbfb(lm, build_gbfb_bank(cfg), cfg);
}

/// Separable variant: spectral 1D filtering along channels, then temporal 1D
/// filtering along frames, for every spectral x temporal combination.
inline FrameFeatures extract_sgbfb(const dsp::LogMelSpectrogram& lm, const GaborBankConfig& cfg) {
  cfg.validate();
  check_channels(lm, cfg);
  std::vector<GaborFilter1D> temporal;
  for (double v_hz : cfg.sgbfb_temporal_mod_freqs) {
    const double v = v_hz / cfg.frame_rate;
    temporal.push_back(make_gabor_1d(v, cfg.sigma_for(v, cfg.max_temporal_half), cfg.temporal_options()));
  }
  FrameFeatures ff;
  ff.values.resize(sgbfb_dimension(cfg), lm.values.cols());
  Eigen::Index at = 0;
  for (double u : cfg.sgbfb_spectral_mod_freqs) {
    const GaborFilter1D spec = make_gabor_1d(u, cfg.sigma_for(u, cfg.max_spectral_half), cfg.spectral_options());
    const ComplexMatrix z = convolve_channels(lm.values, spec.kernel);
    const auto rows = selected_channels(cfg.num_channels, cfg.envelope_width(u), cfg.subsample_fraction);
    ComplexMatrix zs(static_cast<Eigen::Index>(rows.size()), z.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) zs.row(static_cast<Eigen::Index>(r)) = z.row(rows[r]);
    for (std::size_t t = 0; t < temporal.size(); ++t) {
      ff.values.middleRows(at, zs.rows()) = convolve_frames(zs, temporal[t].kernel).real();
      for (auto r : rows)
        ff.dim_labels.push_back("sgbfb_s" + freq_tag(u) + "_t" + freq_tag(cfg.sgbfb_temporal_mod_freqs[t]) +
                                "_c" + std::to_string(r));
      at += zs.rows();
    }
  }
  return ff;
}

/// Throws a BadConfig diagnostic unless the configuration reproduces the
/// reference sizes: 41 filters, 455 GBFB and 1020 SGBFB dimensions.
inline void check_reference_dimensions(const GaborBankConfig& cfg) {
  const auto filters = build_gbfb_bank(cfg).size();
  const auto gbfb = gbfb_dimension(cfg);
  const auto sgbfb = sgbfb_dimension(cfg);
  if (filters != 41 || gbfb != 455 || sgbfb != 1020) {
    std::ostringstream os;
    os << "Gabor bank config yields " << filters << " filters, " << gbfb << " GBFB dims and " << sgbfb
       << " SGBFB dims; expected 41, 455 and 1020 with " << cfg.num_channels << " channels";
    throw Error(ErrorKind::BadConfig, os.str());
  }
}

}  // namespace serkit::gabor
