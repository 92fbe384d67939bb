#pragma once

#include <cstdint>
#include <memory>

#include "chanest/types.hpp"

namespace chanest {

/// Linear map A : C^N -> C^M with an explicit adjoint.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  /// y = A x
  virtual ComplexVector forward(const ComplexVector& x) const = 0;
  /// x = A^H y
  virtual ComplexVector adjoint(const ComplexVector& y) const = 0;

  /// ||A||_F^2. Implementations with a closed form override this; the default
  /// is a fixed-seed stochastic probe (see probe_squared_norm_fro).
  virtual double squared_norm_fro() const;
};

/// Hutchinson-style estimate of ||A||_F^2 from E||A g||^2 with g ~ CN(0, I).
double probe_squared_norm_fro(const LinearOperator& op, int probes, std::uint64_t seed);

/// max |<A u, v> - <u, A^H v>| / (||A u|| ||v||) over random trials.
double adjoint_mismatch(const LinearOperator& op, int trials, std::uint64_t seed);

/// Materializes the operator column by column. Intended for tests and small
/// problems only.
ComplexMatrix to_dense(const LinearOperator& op);

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(ComplexMatrix a);

  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  ComplexVector forward(const ComplexVector& x) const override;
  ComplexVector adjoint(const ComplexVector& y) const override;
  double squared_norm_fro() const override { return norm_fro2_; }

  const ComplexMatrix& matrix() const { return a_; }

 private:
  ComplexMatrix a_;
  double norm_fro2_;
};

/// Mean-removed augmentation of an operator.
///
/// With row means r = A 1 / N, column means c^T = 1^T A / M and grand mean g,
/// the doubly centered block C = A - r 1^T - 1 c^T + g 1 1^T satisfies
///   A x = C x + (r - g 1)(1^T x) + 1 (c^T x).
/// The wrapped operator acts on [x; u1; u2] and returns [y; e1; e2]:
///   y  = C x + s1 (r - g 1) u1 + s2 1 u2
///   e1 = d1 (1^T x - s1 u1)
///   e2 = d2 (c^T x - s2 u2)
/// so whenever e1 = e2 = 0 the first M outputs equal A x. The scales s and d
/// bring the two extra columns and rows to the average column and row norm.
class MeanRemovedOperator final : public LinearOperator {
 public:
  explicit MeanRemovedOperator(std::shared_ptr<const LinearOperator> base);

  Index rows() const override { return base_->rows() + 2; }
  Index cols() const override { return base_->cols() + 2; }
  ComplexVector forward(const ComplexVector& x) const override;
  ComplexVector adjoint(const ComplexVector& y) const override;
  double squared_norm_fro() const override { return norm_fro2_; }

  const LinearOperator& base() const { return *base_; }
  /// Row-mean vector r (length M) and column-mean vector c (length N).
  const ComplexVector& row_means() const { return row_means_; }
  const ComplexVector& col_means() const { return col_means_; }

 private:
  std::shared_ptr<const LinearOperator> base_;
  ComplexVector row_means_;
  ComplexVector col_means_;
  Complex grand_mean_;
  double s1_ = 1.0, s2_ = 1.0, d1_ = 1.0, d2_ = 1.0;
  double norm_fro2_ = 0.0;
};

/// Convenience wrapper matching the mean-removal construction above.
std::shared_ptr<const MeanRemovedOperator> mean_removal_wrap(
    std::shared_ptr<const LinearOperator> op);

}  // namespace chanest
