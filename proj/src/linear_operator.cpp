#include "chanest/linear_operator.hpp"

#include <cmath>
#include <random>
#include <utility>

#include "chanest/error.hpp"

namespace chanest {
namespace {

ComplexVector random_cn(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v[i] = Complex(re, im);
  }
  return v;
}

}  // namespace

double LinearOperator::squared_norm_fro() const {
  return probe_squared_norm_fro(*this, 64, 0x5eedULL);
}

double probe_squared_norm_fro(const LinearOperator& op, int probes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double acc = 0.0;
  for (int p = 0; p < probes; ++p) acc += op.forward(random_cn(op.cols(), rng)).squaredNorm();
  return acc / probes;
}

double adjoint_mismatch(const LinearOperator& op, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const ComplexVector u = random_cn(op.cols(), rng);
    const ComplexVector v = random_cn(op.rows(), rng);
    const ComplexVector au = op.forward(u);
    const Complex lhs = au.dot(v);
    const Complex rhs = u.dot(op.adjoint(v));
    const double scale = au.norm() * v.norm();
    worst = std::max(worst, std::abs(lhs - rhs) / (scale > 0.0 ? scale : 1.0));
  }
  return worst;
}

ComplexMatrix to_dense(const LinearOperator& op) {
  ComplexMatrix a(op.rows(), op.cols());
  ComplexVector e = ComplexVector::Zero(op.cols());
  for (Index j = 0; j < op.cols(); ++j) {
    e[j] = 1.0;
    a.col(j) = op.forward(e);
    e[j] = 0.0;
  }
  return a;
}

DenseOperator::DenseOperator(ComplexMatrix a) : a_(std::move(a)), norm_fro2_(a_.squaredNorm()) {}

ComplexVector DenseOperator::forward(const ComplexVector& x) const {
  if (x.size() != a_.cols()) throw Error(ErrorCode::DimensionMismatch, "forward: input length");
  return a_ * x;
}

ComplexVector DenseOperator::adjoint(const ComplexVector& y) const {
  if (y.size() != a_.rows()) throw Error(ErrorCode::DimensionMismatch, "adjoint: input length");
  return a_.adjoint() * y;
}

MeanRemovedOperator::MeanRemovedOperator(std::shared_ptr<const LinearOperator> base)
    : base_(std::move(base)) {
  const Index m = base_->rows();
  const Index n = base_->cols();
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);

  row_means_ = base_->forward(ComplexVector::Ones(n)) / nd;
  col_means_ = base_->adjoint(ComplexVector::Ones(m)).conjugate() / md;
  grand_mean_ = row_means_.sum() / md;

  const double a2 = base_->squared_norm_fro();
  const double avg_row = a2 / md;
  const double avg_col = a2 / nd;
  const double r_centered2 = (row_means_.array() - grand_mean_).matrix().squaredNorm();
  const double c2 = col_means_.squaredNorm();

  d1_ = std::sqrt(avg_row / nd);
  d2_ = std::sqrt(avg_row / (c2 > 0.0 ? c2 : nd));
  s1_ = std::sqrt(avg_col / (r_centered2 + d1_ * d1_));
  s2_ = std::sqrt(avg_col / (md + d2_ * d2_));

  const double centered2 = a2 - nd * row_means_.squaredNorm() - md * c2 + md * nd * std::norm(grand_mean_);
  norm_fro2_ = std::max(centered2, 0.0) + s1_ * s1_ * r_centered2 + s2_ * s2_ * md + d1_ * d1_ * nd +
               d1_ * d1_ * s1_ * s1_ + d2_ * d2_ * c2 + d2_ * d2_ * s2_ * s2_;
}

ComplexVector MeanRemovedOperator::forward(const ComplexVector& xa) const {
  const Index m = base_->rows();
  const Index n = base_->cols();
  if (xa.size() != n + 2) throw Error(ErrorCode::DimensionMismatch, "mean-removed forward: input length");
  const auto x = xa.head(n);
  const Complex u1 = xa[n];
  const Complex u2 = xa[n + 1];

  const Complex sx = x.sum();
  const Complex cx = (col_means_.array() * x.array()).sum();

  ComplexVector out(m + 2);
  out.head(m) = base_->forward(x) - row_means_ * sx;
  out.head(m).array() += grand_mean_ * sx - cx;
  out.head(m) += s1_ * u1 * (row_means_.array() - grand_mean_).matrix();
  out.head(m).array() += s2_ * u2;
  out[m] = d1_ * (sx - s1_ * u1);
  out[m + 1] = d2_ * (cx - s2_ * u2);
  return out;
}

ComplexVector MeanRemovedOperator::adjoint(const ComplexVector& ya) const {
  const Index m = base_->rows();
  const Index n = base_->cols();
  if (ya.size() != m + 2) throw Error(ErrorCode::DimensionMismatch, "mean-removed adjoint: input length");
  const auto y = ya.head(m);
  const Complex e1 = ya[m];
  const Complex e2 = ya[m + 1];

  const Complex sum_y = y.sum();
  const Complex r_y = row_means_.dot(y);

  ComplexVector out(n + 2);
  out.head(n) = base_->adjoint(y) - col_means_.conjugate() * sum_y + d2_ * e2 * col_means_.conjugate();
  out.head(n).array() += std::conj(grand_mean_) * sum_y - r_y + d1_ * e1;
  out[n] = s1_ * (r_y - std::conj(grand_mean_) * sum_y) - d1_ * s1_ * e1;
  out[n + 1] = s2_ * sum_y - d2_ * s2_ * e2;
  return out;
}

std::shared_ptr<const MeanRemovedOperator> mean_removal_wrap(std::shared_ptr<const LinearOperator> op) {
  return std::make_shared<const MeanRemovedOperator>(std::move(op));
}

}  // namespace chanest
