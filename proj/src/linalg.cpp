#include "qfals/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qfals/error.hpp"

namespace qfals {

namespace {

// Gram-Schmidt with one re-orthogonalization pass. Returns false when v is
// (numerically) in the span of the accepted columns.
bool orthogonalize_against(const ComplexMatrix& basis, Eigen::Index used,
                           ComplexVector& v, double tol) {
  const double norm0 = v.norm();
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < used; ++j) {
      const Complex c = basis.col(j).dot(v);
      v -= c * basis.col(j);
    }
  }
  const double n = v.norm();
  if (n <= tol * std::max(norm0, 1.0)) return false;
  v /= n;
  return true;
}

std::vector<std::size_t> digits_of(std::size_t index,
                                   std::span<const std::size_t> dims) {
  std::vector<std::size_t> out(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    out[k] = index % dims[k];
    index /= dims[k];
  }
  return out;
}

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

ComplexMatrix Subspace::projector() const {
  if (basis.cols() == 0) {
    return ComplexMatrix::Zero(static_cast<Eigen::Index>(ambient_dim),
                               static_cast<Eigen::Index>(ambient_dim));
  }
  return basis * basis.adjoint();
}

Subspace Subspace::complement() const {
  const auto n = static_cast<Eigen::Index>(ambient_dim);
  ComplexMatrix work(n, n);
  Eigen::Index used = basis.cols();
  work.leftCols(used) = basis;
  for (Eigen::Index i = 0; i < n && used < n; ++i) {
    ComplexVector e = ComplexVector::Zero(n);
    e(i) = 1.0;
    if (orthogonalize_against(work, used, e, 1e-10)) work.col(used++) = e;
  }
  return Subspace{ambient_dim, work.middleCols(basis.cols(), used - basis.cols())};
}

Subspace make_subspace(const ComplexMatrix& columns, double tol) {
  const auto n = columns.rows();
  ComplexMatrix work(n, std::min(n, columns.cols()));
  Eigen::Index used = 0;
  for (Eigen::Index j = 0; j < columns.cols() && used < n; ++j) {
    ComplexVector v = columns.col(j);
    if (v.norm() <= tol) continue;
    if (orthogonalize_against(work, used, v, tol)) work.col(used++) = v;
  }
  return Subspace{static_cast<std::size_t>(n), work.leftCols(used)};
}

ComplexMatrix identity(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return ComplexMatrix::Identity(n, n);
}

ComplexVector basis_ket(std::size_t d, std::size_t i) {
  if (i >= d) fail(ErrorKind::InvalidArgument, "basis_ket: index out of range");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d));
  v(static_cast<Eigen::Index>(i)) = 1.0;
  return v;
}

ComplexMatrix ket_bra(const ComplexVector& ket, const ComplexVector& bra) {
  return ket * bra.adjoint();
}

ComplexMatrix projector_onto(const ComplexVector& v) { return v * v.adjoint(); }

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

bool all_finite(const ComplexMatrix& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Complex z = x.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

void require_finite(const ComplexMatrix& x, const char* what) {
  if (!all_finite(x)) {
    fail(ErrorKind::NonFinite, std::string(what) + ": matrix has NaN/Inf entries");
  }
}

void require_square(const ComplexMatrix& x, const char* what) {
  if (x.rows() != x.cols()) {
    fail(ErrorKind::DimensionMismatch,
         std::string(what) + ": expected a square matrix, got " +
             std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
}

double hs_norm(const ComplexMatrix& x) { return x.norm(); }

double hs_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::DimensionMismatch, "hs_distance: shape mismatch");
  }
  return (a - b).norm();
}

double max_abs_entry(const ComplexMatrix& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

bool is_hermitian(const ComplexMatrix& x, double tol) {
  if (x.rows() != x.cols()) return false;
  return (x - x.adjoint()).norm() <= tol * std::max(x.norm(), 1.0);
}

ComplexMatrix hermitian_part(const ComplexMatrix& x) {
  return 0.5 * (x + x.adjoint());
}

void canonicalize_phase(ComplexVector& v, double threshold) {
  const double scale = v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > threshold * std::max(scale, 1.0)) {
      v *= std::conj(v(i)) / a;
      v(i) = a;
      return;
    }
  }
}

void canonicalize_phase(ComplexMatrix& m, double threshold) {
  // Row-major scan so the convention matches double-ket ordering.
  const double scale = max_abs_entry(m);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double a = std::abs(m(r, c));
      if (a > threshold * std::max(scale, 1.0)) {
        m *= std::conj(m(r, c)) / a;
        m(r, c) = a;
        return;
      }
    }
  }
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_finite(a, "kron");
  require_finite(b, "kron");
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix kron_all(std::span<const ComplexMatrix> factors) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& x,
                            std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep) {
  require_square(x, "partial_trace");
  const std::size_t total = product(dims);
  if (total != static_cast<std::size_t>(x.rows())) {
    fail(ErrorKind::DimensionMismatch,
         "partial_trace: product of dims (" + std::to_string(total) +
             ") != matrix side (" + std::to_string(x.rows()) + ")");
  }
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t k : keep) {
    if (k >= dims.size()) {
      fail(ErrorKind::DimensionMismatch, "partial_trace: keep index out of range");
    }
    kept[k] = true;
  }
  std::vector<std::size_t> kept_dims;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (kept[k]) kept_dims.push_back(dims[k]);
  }
  const auto out_dim = static_cast<Eigen::Index>(product(kept_dims));
  ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);

  // Precompute per-index kept position and traced signature.
  std::vector<std::size_t> kept_index(total), traced_index(total);
  for (std::size_t r = 0; r < total; ++r) {
    const auto dig = digits_of(r, dims);
    std::size_t ki = 0, ti = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (kept[k]) {
        ki = ki * dims[k] + dig[k];
      } else {
        ti = ti * dims[k] + dig[k];
      }
    }
    kept_index[r] = ki;
    traced_index[r] = ti;
  }
  for (std::size_t r = 0; r < total; ++r) {
    for (std::size_t c = 0; c < total; ++c) {
      if (traced_index[r] != traced_index[c]) continue;
      out(static_cast<Eigen::Index>(kept_index[r]),
          static_cast<Eigen::Index>(kept_index[c])) +=
          x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

ComplexMatrix tensor_permutation(std::size_t d,
                                 std::span<const std::size_t> perm) {
  const std::size_t n = perm.size();
  std::vector<std::size_t> dims(n, d);
  const std::size_t total = product(dims);
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(total),
                                          static_cast<Eigen::Index>(total));
  for (std::size_t c = 0; c < total; ++c) {
    const auto dig = digits_of(c, dims);
    std::vector<std::size_t> moved(n);
    for (std::size_t k = 0; k < n; ++k) moved[perm[k]] = dig[k];
    std::size_t r = 0;
    for (std::size_t k = 0; k < n; ++k) r = r * d + moved[k];
    out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 1.0;
  }
  return out;
}

ComplexMatrix symmetric_projector(std::size_t d, std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t side = 1;
  for (std::size_t k = 0; k < n; ++k) side *= d;
  ComplexMatrix acc = ComplexMatrix::Zero(static_cast<Eigen::Index>(side),
                                          static_cast<Eigen::Index>(side));
  std::size_t count = 0;
  do {
    acc += tensor_permutation(d, perm);
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc / static_cast<double>(count);
}

ComplexMatrix embed_factor(const ComplexMatrix& op,
                           std::span<const std::size_t> dims,
                           std::size_t index) {
  if (index >= dims.size()) {
    fail(ErrorKind::DimensionMismatch, "embed_factor: factor index out of range");
  }
  if (op.rows() != op.cols() ||
      static_cast<std::size_t>(op.rows()) != dims[index]) {
    fail(ErrorKind::DimensionMismatch, "embed_factor: operator does not match factor");
  }
  std::size_t before = 1, after = 1;
  for (std::size_t k = 0; k < index; ++k) before *= dims[k];
  for (std::size_t k = index + 1; k < dims.size(); ++k) after *= dims[k];
  return kron(kron(identity(before), op), identity(after));
}

EigenDecomposition eig_hermitian(const ComplexMatrix& x, double herm_tol) {
  require_square(x, "eig_hermitian");
  require_finite(x, "eig_hermitian");
  if (!is_hermitian(x, herm_tol)) {
    fail(ErrorKind::NotHermitian, "eig_hermitian: input is not Hermitian");
  }
  const auto n = x.rows();
  EigenDecomposition out;
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(x));
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::InvalidArgument, "eig_hermitian: solver did not converge");
  }
  // Eigen returns ascending order.
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = n - 1 - k;
    out.values[static_cast<std::size_t>(k)] = solver.eigenvalues()(src);
    ComplexVector v = solver.eigenvectors().col(src);
    canonicalize_phase(v);
    out.vectors.col(k) = v;
  }
  return out;
}

double lambda_min(const ComplexMatrix& x, double herm_tol) {
  const auto e = eig_hermitian(x, herm_tol);
  return e.values.empty() ? 0.0 : e.values.back();
}

double lambda_max(const ComplexMatrix& x, double herm_tol) {
  const auto e = eig_hermitian(x, herm_tol);
  return e.values.empty() ? 0.0 : e.values.front();
}

ComplexMatrix sqrt_psd(const ComplexMatrix& x, double tol) {
  const auto e = eig_hermitian(x);
  const auto n = x.rows();
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lam = e.values[static_cast<std::size_t>(k)];
    if (lam < -tol) {
      fail(ErrorKind::NotPsd, "sqrt_psd: eigenvalue " + std::to_string(lam) +
                                  " below -tol");
    }
    if (lam <= 0.0) continue;
    out += std::sqrt(lam) * e.vectors.col(k) * e.vectors.col(k).adjoint();
  }
  return out;
}

Subspace support_projector(const ComplexMatrix& x, double tol) {
  const auto e = eig_hermitian(x);
  Eigen::Index count = 0;
  for (double v : e.values) {
    if (v > tol) ++count;
  }
  return Subspace{static_cast<std::size_t>(x.rows()), e.vectors.leftCols(count)};
}

std::size_t numerical_rank(const ComplexMatrix& x, double rel_tol) {
  if (x.size() == 0) return 0;
  Eigen::JacobiSVD<ComplexMatrix> svd(x);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

ComplexMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  ComplexMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const double s = std::sqrt(0.5);
  // Row-major fill keeps the draw order independent of storage order.
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = Complex(s * re, s * im);
    }
  }
  return g;
}

ComplexMatrix haar_unitary(std::size_t d, Rng& rng) {
  if (d == 0) fail(ErrorKind::InvalidArgument, "haar_unitary: d must be >= 1");
  const ComplexMatrix z = gaussian_matrix(d, d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  const auto n = static_cast<Eigen::Index>(d);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix& r = qr.matrixQR();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex rkk = r(k, k);
    const double a = std::abs(rkk);
    q.col(k) *= (a > 0.0) ? rkk / a : Complex(1.0);
  }
  return q;
}

ComplexMatrix haar_isometry(std::size_t rows, std::size_t cols, Rng& rng) {
  if (cols > rows) {
    fail(ErrorKind::InvalidArgument, "haar_isometry: cols must not exceed rows");
  }
  return haar_unitary(rows, rng).leftCols(static_cast<Eigen::Index>(cols));
}

ComplexVector random_pure(std::size_t d, Rng& rng) {
  if (d == 0) fail(ErrorKind::InvalidArgument, "random_pure: d must be >= 1");
  ComplexVector v = gaussian_matrix(d, 1, rng).col(0);
  return v / v.norm();
}

ComplexMatrix random_density(std::size_t d, Rng& rng) {
  if (d == 0) fail(ErrorKind::InvalidArgument, "random_density: d must be >= 1");
  const ComplexMatrix g = gaussian_matrix(d, d, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho = hermitian_part(rho);
  return rho / rho.trace().real();
}

}  // namespace qfals
