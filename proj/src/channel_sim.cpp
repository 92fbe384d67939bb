#include "chanest/channel_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include "chanest/error.hpp"

namespace chanest {
namespace {

constexpr double kMaxSnrDb = 300.0;

template <typename T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

double laplace(std::mt19937_64& rng, double stddev) {
  if (stddev <= 0.0) return 0.0;
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  const double u = unif(rng);
  const double b = stddev / std::numbers::sqrt2;
  return -b * (u < 0.0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
}

double spatial_frequency(double angle_deg, int n, bool snap) {
  const double psi = 0.5 * std::sin(angle_deg * std::numbers::pi / 180.0);
  return snap ? std::round(psi * n) / n : psi;
}

ComplexVector unit_noise(Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  ComplexVector w(m);
  for (Index i = 0; i < m; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    w[i] = Complex(re, im);
  }
  return w;
}

}  // namespace

void ChannelConfig::validate() const {
  if (n_t < 1 || n_r < 1 || taps < 1 || clusters < 1 || paths_per_cluster < 1 || training_length < 1)
    throw Error(ErrorCode::InvalidParams, "channel counts must be at least 1");
  if (training_length < taps) throw Error(ErrorCode::InvalidParams, "training length must be at least the tap count");
  if (!(angle_spread_deg >= 0.0)) throw Error(ErrorCode::InvalidParams, "angle spread must be nonnegative");
}

ComplexVector AngleChannel::vectorized() const {
  if (x.empty()) return {};
  const Index block = x.front().size();
  ComplexVector v(block * static_cast<Index>(x.size()));
  for (std::size_t l = 0; l < x.size(); ++l)
    v.segment(static_cast<Index>(l) * block, block) = x[l].reshaped();
  return v;
}

ComplexMatrix steering_dft(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidParams, "steering_dft needs n >= 1");
  ComplexMatrix b(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      // Reduce the exponent first so large n keeps full phase accuracy.
      const long long jk = (static_cast<long long>(j) * k) % n;
      b(j, k) = std::polar(scale, -2.0 * std::numbers::pi * static_cast<double>(jk) / n);
    }
  return b;
}

ComplexVector array_response(int n, double psi) {
  ComplexVector a(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < n; ++j) {
    const double cycles = psi * j - std::floor(psi * j);
    a[j] = std::polar(scale, -2.0 * std::numbers::pi * cycles);
  }
  return a;
}

AngleChannel generate_channel(const ChannelConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> angle(-90.0, 90.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> tap(0, cfg.taps - 1);

  const int total_paths = cfg.clusters * cfg.paths_per_cluster;
  const double gain_sd = std::sqrt(0.5 / total_paths);

  AngleChannel ch;
  ch.h.assign(cfg.taps, ComplexMatrix::Zero(cfg.n_r, cfg.n_t));
  for (int c = 0; c < cfg.clusters; ++c) {
    const double center_rx = angle(rng);
    const double center_tx = angle(rng);
    for (int p = 0; p < cfg.paths_per_cluster; ++p) {
      const double psi_r = spatial_frequency(center_rx + laplace(rng, cfg.angle_spread_deg), cfg.n_r, cfg.snap_to_grid);
      const double psi_t = spatial_frequency(center_tx + laplace(rng, cfg.angle_spread_deg), cfg.n_t, cfg.snap_to_grid);
      const double g_re = gauss(rng);
      const double g_im = gauss(rng);
      const Complex gain(gain_sd * g_re, gain_sd * g_im);
      const int l = tap(rng);
      ch.h[l] += gain * array_response(cfg.n_r, psi_r) * array_response(cfg.n_t, psi_t).adjoint();
    }
  }

  double energy = 0.0;
  for (const auto& h : ch.h) energy += h.squaredNorm();
  const double target = static_cast<double>(cfg.n_t) * cfg.n_r;
  const double scale = energy > 0.0 ? std::sqrt(target / energy) : 1.0;

  const ComplexMatrix b_r = steering_dft(cfg.n_r);
  const ComplexMatrix b_t = steering_dft(cfg.n_t);
  ch.x.reserve(cfg.taps);
  for (auto& h : ch.h) {
    h *= scale;
    ch.x.push_back(b_r.adjoint() * h * b_t);
  }
  ch.energy = 0.0;
  for (const auto& h : ch.h) ch.energy += h.squaredNorm();
  return ch;
}

TrainingBlock generate_training(int n_t, int n_p, std::uint64_t seed) {
  if (n_t < 1 || n_p < 1) throw Error(ErrorCode::InvalidParams, "training dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  const double a = 1.0 / std::sqrt(2.0 * n_t);
  TrainingBlock tb;
  tb.seed = seed;
  tb.s.resize(n_t, n_p);
  for (int k = 0; k < n_p; ++k)
    for (int t = 0; t < n_t; ++t) {
      const double re = coin(rng) ? a : -a;
      const double im = coin(rng) ? a : -a;
      tb.s(t, k) = Complex(re, im);
    }
  return tb;
}

MimoOperator::MimoOperator(const TrainingBlock& training, int n_r, int taps)
    : n_t_(static_cast<int>(training.s.rows())),
      n_r_(n_r),
      taps_(taps),
      n_p_(static_cast<int>(training.s.cols())),
      b_r_(steering_dft(n_r)),
      b_t_(steering_dft(n_t_)) {
  if (n_r < 1 || taps < 1 || n_p_ < taps)
    throw Error(ErrorCode::DimensionMismatch, "training block too short for the tap count");
  shifted_.resize(static_cast<Index>(n_t_) * taps_, n_p_);
  for (int l = 0; l < taps_; ++l)
    for (int k = 0; k < n_p_; ++k)
      shifted_.block(static_cast<Index>(l) * n_t_, k, n_t_, 1) = training.s.col(((k - l) % n_p_ + n_p_) % n_p_);
  norm_fro2_ = static_cast<double>(n_r_) * taps_ * training.s.squaredNorm();
}

ComplexVector MimoOperator::forward(const ComplexVector& x) const {
  if (x.size() != cols()) throw Error(ErrorCode::DimensionMismatch, "MimoOperator::forward input length");
  const Eigen::Map<const ComplexMatrix> xs(x.data(), n_r_, static_cast<Index>(n_t_) * taps_);
  ComplexMatrix h = b_r_ * xs;
  const ComplexMatrix b_t_h = b_t_.adjoint();
  for (int l = 0; l < taps_; ++l) {
    auto blk = h.middleCols(static_cast<Index>(l) * n_t_, n_t_);
    blk = (blk * b_t_h).eval();
  }
  ComplexVector y(rows());
  Eigen::Map<ComplexMatrix>(y.data(), n_r_, n_p_).noalias() = h * shifted_;
  return y;
}

ComplexVector MimoOperator::adjoint(const ComplexVector& y) const {
  if (y.size() != rows()) throw Error(ErrorCode::DimensionMismatch, "MimoOperator::adjoint input length");
  const Eigen::Map<const ComplexMatrix> ys(y.data(), n_r_, n_p_);
  ComplexMatrix g = ys * shifted_.adjoint();
  for (int l = 0; l < taps_; ++l) {
    auto blk = g.middleCols(static_cast<Index>(l) * n_t_, n_t_);
    blk = (blk * b_t_).eval();
  }
  ComplexVector x(cols());
  Eigen::Map<ComplexMatrix>(x.data(), n_r_, static_cast<Index>(n_t_) * taps_).noalias() = b_r_.adjoint() * g;
  return x;
}

std::shared_ptr<const MimoOperator> assemble_operator(const TrainingBlock& training, const ChannelConfig& cfg) {
  if (training.s.rows() != cfg.n_t || training.s.cols() != cfg.training_length)
    throw Error(ErrorCode::DimensionMismatch, "training block does not match the channel configuration");
  return std::make_shared<const MimoOperator>(training, cfg.n_r, cfg.taps);
}

ComplexMatrix dense_mimo_matrix(const TrainingBlock& training, int n_r, int taps) {
  const int n_t = static_cast<int>(training.s.rows());
  const int n_p = static_cast<int>(training.s.cols());
  const ComplexMatrix b_r = steering_dft(n_r);
  const ComplexMatrix b_t = steering_dft(n_t);
  ComplexMatrix a = ComplexMatrix::Zero(static_cast<Index>(n_r) * n_p, static_cast<Index>(n_r) * n_t * taps);
  for (int k = 0; k < n_p; ++k)
    for (int r = 0; r < n_r; ++r)
      for (int l = 0; l < taps; ++l)
        for (int j = 0; j < n_t; ++j)
          for (int i = 0; i < n_r; ++i) {
            Complex acc = 0.0;
            const int kl = ((k - l) % n_p + n_p) % n_p;
            for (int t = 0; t < n_t; ++t) acc += std::conj(b_t(t, j)) * training.s(t, kl);
            a(static_cast<Index>(k) * n_r + r, (static_cast<Index>(l) * n_t + j) * n_r + i) = b_r(r, i) * acc;
          }
  return a;
}

Measurement simulate_measurements(const ComplexVector& x, const LinearOperator& op, double snr_db,
                                  const QuantizerSpec& spec, std::uint64_t seed) {
  if (std::isnan(snr_db)) throw Error(ErrorCode::InvalidParams, "snr_db must not be NaN");
  if (x.size() != op.cols()) throw Error(ErrorCode::DimensionMismatch, "signal length vs operator columns");
  const ComplexVector z = op.forward(x);
  const double power = z.squaredNorm() / static_cast<double>(z.size());
  if (!(power > 0.0)) throw Error(ErrorCode::DegenerateSignal, "noiseless measurements are identically zero");

  Measurement out;
  out.signal_power = power;
  out.tau_w = power / std::pow(10.0, std::min(snr_db, kMaxSnrDb) / 10.0);
  out.r = z + std::sqrt(out.tau_w) * unit_noise(z.size(), seed);
  out.y = quantize(out.r, spec);
  return out;
}

Measurement simulate_measurements(const ComplexVector& x, const LinearOperator& op, double snr_db, int bits,
                                  std::uint64_t seed) {
  if (std::isnan(snr_db)) throw Error(ErrorCode::InvalidParams, "snr_db must not be NaN");
  const ComplexVector z = op.forward(x);
  const double power = z.squaredNorm() / static_cast<double>(z.size());
  if (!(power > 0.0)) throw Error(ErrorCode::DegenerateSignal, "noiseless measurements are identically zero");
  const double tau_w = power / std::pow(10.0, std::min(snr_db, kMaxSnrDb) / 10.0);
  return simulate_measurements(x, op, snr_db, default_quantizer(bits, std::sqrt(power + tau_w)), seed);
}

double nmse_db(const ComplexVector& x_hat, const ComplexVector& x_true) {
  if (x_hat.size() != x_true.size()) throw Error(ErrorCode::DimensionMismatch, "nmse_db: length mismatch");
  const double ref = x_true.squaredNorm();
  if (!(ref > 0.0)) throw Error(ErrorCode::ZeroReference, "nmse_db: reference signal is zero");
  const double ratio = (x_hat - x_true).squaredNorm() / ref;
  if (!(ratio > 0.0)) return -300.0;
  return std::max(10.0 * std::log10(ratio), -300.0);
}

void write_tensor_artifact(const std::string& path, const std::array<std::uint32_t, 4>& dims,
                           const ComplexVector& data) {
  std::uint64_t count = 1;
  for (auto d : dims) count *= d;
  if (count != static_cast<std::uint64_t>(data.size()))
    throw Error(ErrorCode::DimensionMismatch, "artifact dims do not match the data length");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path);
  for (auto d : dims) {
    const std::uint32_t le = to_little_endian(d);
    out.write(reinterpret_cast<const char*>(&le), sizeof le);
  }
  for (Index i = 0; i < data.size(); ++i) {
    const float parts[2] = {to_little_endian(static_cast<float>(data[i].real())),
                            to_little_endian(static_cast<float>(data[i].imag()))};
    out.write(reinterpret_cast<const char*>(parts), sizeof parts);
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

ComplexVector read_tensor_artifact(const std::string& path, std::array<std::uint32_t, 4>& dims) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::uint64_t count = 1;
  for (auto& d : dims) {
    std::uint32_t le = 0;
    in.read(reinterpret_cast<char*>(&le), sizeof le);
    d = to_little_endian(le);
    count *= d;
  }
  ComplexVector data(static_cast<Index>(count));
  for (Index i = 0; i < data.size(); ++i) {
    float parts[2];
    in.read(reinterpret_cast<char*>(parts), sizeof parts);
    data[i] = Complex(to_little_endian(parts[0]), to_little_endian(parts[1]));
  }
  if (!in) throw Error(ErrorCode::IoError, "truncated artifact " + path);
  return data;
}

}  // namespace chanest
