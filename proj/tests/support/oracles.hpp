#pragma once

// Reference computations written with plain index loops, independent of
// the library routines they are used to check.

#include <cmath>
#include <complex>
#include <vector>

#include "qfals/linalg.hpp"
#include "qfals/model.hpp"
#include "qfals/rng.hpp"

namespace oracle {

using qfals::Complex;
using qfals::ComplexMatrix;
using qfals::ComplexVector;

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

/// Tr over the second factor of a (da*db)-dimensional operator.
inline ComplexMatrix trace_second(const ComplexMatrix& x, Eigen::Index da, Eigen::Index db) {
  ComplexMatrix out = ComplexMatrix::Zero(da, da);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j)
      for (Eigen::Index k = 0; k < db; ++k) out(i, j) += x(i * db + k, j * db + k);
  return out;
}

/// Tr over the first factor.
inline ComplexMatrix trace_first(const ComplexMatrix& x, Eigen::Index da, Eigen::Index db) {
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (Eigen::Index i = 0; i < db; ++i)
    for (Eigen::Index j = 0; j < db; ++j)
      for (Eigen::Index k = 0; k < da; ++k) out(i, j) += x(k * db + i, k * db + j);
  return out;
}

inline Complex trace_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  Complex s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += std::conj(a(i, j)) * b(i, j);
  return s;
}

/// Choi (output (x) input) applied to rho: Tr_in[C (I_out (x) rho^T)].
inline ComplexMatrix choi_apply(const ComplexMatrix& choi, const ComplexMatrix& rho,
                                Eigen::Index din, Eigen::Index dout) {
  ComplexMatrix out = ComplexMatrix::Zero(dout, dout);
  for (Eigen::Index b = 0; b < dout; ++b)
    for (Eigen::Index bp = 0; bp < dout; ++bp)
      for (Eigen::Index a = 0; a < din; ++a)
        for (Eigen::Index ap = 0; ap < din; ++ap)
          out(b, bp) += choi(b * din + a, bp * din + ap) * rho(a, ap);
  return out;
}

/// sum_k |K_k>><<K_k| from the definition, row-major double kets.
inline ComplexMatrix choi_of(const std::vector<ComplexMatrix>& kraus) {
  const auto r = kraus.front().rows(), c = kraus.front().cols();
  ComplexMatrix out = ComplexMatrix::Zero(r * c, r * c);
  for (const auto& k : kraus)
    for (Eigen::Index i = 0; i < r * c; ++i)
      for (Eigen::Index j = 0; j < r * c; ++j)
        out(i, j) += k(i / c, i % c) * std::conj(k(j / c, j % c));
  return out;
}

inline ComplexMatrix random_hermitian(Eigen::Index d, qfals::Rng& rng) {
  ComplexMatrix x(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = Complex(rng.normal(), rng.normal());
  return (x + x.adjoint()) / 2.0;
}

inline ComplexMatrix random_density(Eigen::Index d, qfals::Rng& rng) {
  ComplexMatrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  ComplexMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

/// Trace non-increasing Kraus set A -> B with n operators: blocks of an
/// isometry, each scaled by a common factor <= 1.
inline std::vector<ComplexMatrix> random_kraus(std::size_t din, std::size_t dout, std::size_t n,
                                               qfals::Rng& rng, double scale = 1.0) {
  std::size_t rows = dout * n;
  while (rows < din) rows += dout;
  const ComplexMatrix v = qfals::haar_isometry(rows, din, rng);
  std::vector<ComplexMatrix> out;
  for (std::size_t k = 0; k * dout < rows; ++k) {
    out.push_back(std::sqrt(scale) * v.middleRows(static_cast<Eigen::Index>(k * dout),
                                                  static_cast<Eigen::Index>(dout)));
  }
  return out;
}

inline ComplexMatrix bell_projector() {
  ComplexMatrix p = ComplexMatrix::Zero(4, 4);
  p(0, 0) = p(0, 3) = p(3, 0) = p(3, 3) = 0.5;
  return p;
}

inline ComplexMatrix singlet_projector() {
  ComplexMatrix p = ComplexMatrix::Zero(4, 4);
  p(1, 1) = p(2, 2) = 0.5;
  p(1, 2) = p(2, 1) = -0.5;
  return p;
}

inline double max_abs(const ComplexMatrix& x) { return x.cwiseAbs().maxCoeff(); }

}  // namespace oracle
