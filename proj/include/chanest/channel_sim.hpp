#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "chanest/linear_operator.hpp"
#include "chanest/quantizer.hpp"
#include "chanest/types.hpp"

namespace chanest {

struct ChannelConfig {
  int n_t = 16;
  int n_r = 16;
  int taps = 8;
  int clusters = 4;
  int paths_per_cluster = 10;
  double angle_spread_deg = 7.5;
  int training_length = 512;
  std::uint64_t seed = 1;
  /// Round every path direction to the nearest DFT bin.
  bool snap_to_grid = false;

  void validate() const;
  Index unknowns() const { return static_cast<Index>(n_t) * n_r * taps; }
  Index measurements() const { return static_cast<Index>(n_r) * training_length; }
};

/// Per-tap channel matrices in the antenna domain (h) and angle domain (x),
/// related by h[l] = B_r x[l] B_t^H.
struct AngleChannel {
  std::vector<ComplexMatrix> x;
  std::vector<ComplexMatrix> h;
  double energy = 0.0;

  /// Stacks x[0..L-1], each column-major, into one vector.
  ComplexVector vectorized() const;
};

/// QPSK training symbols, one column per time step.
struct TrainingBlock {
  ComplexMatrix s;
  std::uint64_t seed = 0;
};

/// Unitary DFT matrix, entry (j, k) = exp(-2 pi i j k / n) / sqrt(n).
ComplexMatrix steering_dft(int n);

/// Unit-norm uniform-linear-array response at spatial frequency psi (cycles
/// per element); psi = k / n reproduces column k of steering_dft(n).
ComplexVector array_response(int n, double psi);

AngleChannel generate_channel(const ChannelConfig& cfg);

/// Entries (+-1 +-i) / sqrt(2 n_t), so each time step carries unit power.
TrainingBlock generate_training(int n_t, int n_p, std::uint64_t seed);

/// Measurement map x = vec(X[0..L-1]) -> vec(Y), Y[:, k] = sum_l B_r X[l] B_t^H s[(k - l) mod N_p].
/// Applied matrix-free: two small DFT products per tap and one product with
/// the stacked, circularly shifted training block.
class MimoOperator final : public LinearOperator {
 public:
  MimoOperator(const TrainingBlock& training, int n_r, int taps);

  Index rows() const override { return static_cast<Index>(n_r_) * n_p_; }
  Index cols() const override { return static_cast<Index>(n_r_) * n_t_ * taps_; }
  ComplexVector forward(const ComplexVector& x) const override;
  ComplexVector adjoint(const ComplexVector& y) const override;
  double squared_norm_fro() const override { return norm_fro2_; }

 private:
  int n_t_, n_r_, taps_, n_p_;
  ComplexMatrix b_r_;
  ComplexMatrix b_t_;
  ComplexMatrix shifted_;  // (n_t * taps) x n_p, block l holds s[(k - l) mod n_p]
  double norm_fro2_;
};

std::shared_ptr<const MimoOperator> assemble_operator(const TrainingBlock& training, const ChannelConfig& cfg);

/// Entry-by-entry construction of the same map; only for small sizes.
ComplexMatrix dense_mimo_matrix(const TrainingBlock& training, int n_r, int taps);

struct Measurement {
  QuantizedVector y;
  ComplexVector r;
  double tau_w = 0.0;
  double signal_power = 0.0;
};

/// r = A x + w with w ~ CN(0, tau_w) at the requested SNR (capped at 300 dB),
/// quantized with the given spec.
Measurement simulate_measurements(const ComplexVector& x, const LinearOperator& op, double snr_db,
                                  const QuantizerSpec& spec, std::uint64_t seed);

/// Same, with the default quantizer calibrated to the exact RMS of r.
Measurement simulate_measurements(const ComplexVector& x, const LinearOperator& op, double snr_db, int bits,
                                  std::uint64_t seed);

/// 10 log10(||x_hat - x||^2 / ||x||^2), floored at -300 dB.
double nmse_db(const ComplexVector& x_hat, const ComplexVector& x_true);

/// Binary tensor artifact: 16-byte header of four little-endian uint32 dims
/// followed by little-endian complex64 values, first dim fastest.
void write_tensor_artifact(const std::string& path, const std::array<std::uint32_t, 4>& dims,
                           const ComplexVector& data);
ComplexVector read_tensor_artifact(const std::string& path, std::array<std::uint32_t, 4>& dims);

}  // namespace chanest
