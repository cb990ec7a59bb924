#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qfals/rng.hpp"

namespace qfals {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;

/// Orthonormal basis (as matrix columns) of a subspace of C^ambient_dim.
struct Subspace {
  std::size_t ambient_dim = 0;
  ComplexMatrix basis;  // ambient_dim x dim()

  std::size_t dim() const { return static_cast<std::size_t>(basis.cols()); }
  ComplexMatrix projector() const;
  Subspace complement() const;
};

Subspace make_subspace(const ComplexMatrix& columns, double tol = 1e-12);

struct EigenDecomposition {
  std::vector<double> values;  // descending
  ComplexMatrix vectors;       // orthonormal columns, matching order
};

// --- construction helpers --------------------------------------------------

ComplexMatrix identity(std::size_t d);
ComplexVector basis_ket(std::size_t d, std::size_t i);
ComplexMatrix ket_bra(const ComplexVector& ket, const ComplexVector& bra);
ComplexMatrix projector_onto(const ComplexVector& v);

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

// --- checks and norms -------------------------------------------------------

bool all_finite(const ComplexMatrix& x);
void require_finite(const ComplexMatrix& x, const char* what);
void require_square(const ComplexMatrix& x, const char* what);

double hs_norm(const ComplexMatrix& x);
double hs_distance(const ComplexMatrix& a, const ComplexMatrix& b);
double max_abs_entry(const ComplexMatrix& x);

/// ||x - x^dagger|| <= tol * max(||x||, 1)
bool is_hermitian(const ComplexMatrix& x, double tol = kHermitianTol);
ComplexMatrix hermitian_part(const ComplexMatrix& x);

/// Multiplies v by the phase making its first non-negligible entry real
/// positive.
void canonicalize_phase(ComplexVector& v, double threshold = 1e-12);
void canonicalize_phase(ComplexMatrix& m, double threshold = 1e-12);

// --- tensor structure --------------------------------------------------------

/// Kronecker product; entry (i*rb + k, j*cb + l) = a(i,j) * b(k,l).
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_all(std::span<const ComplexMatrix> factors);

/// Trace over every factor not listed in `keep`. Kept factors stay in their
/// original relative order.
ComplexMatrix partial_trace(const ComplexMatrix& x,
                            std::span<const std::size_t> dims,
                            std::span<const std::size_t> keep);

/// Operator on (C^d)^{\otimes n} that sends factor k to position perm[k].
ComplexMatrix tensor_permutation(std::size_t d,
                                 std::span<const std::size_t> perm);

/// Orthogonal projector onto the symmetric subspace of (C^d)^{\otimes n}.
ComplexMatrix symmetric_projector(std::size_t d, std::size_t n);

/// Embeds op acting on factor `index` into the full tensor space.
ComplexMatrix embed_factor(const ComplexMatrix& op,
                           std::span<const std::size_t> dims,
                           std::size_t index);

// --- spectral -----------------------------------------------------------------

EigenDecomposition eig_hermitian(const ComplexMatrix& x,
                                 double herm_tol = kHermitianTol);
double lambda_min(const ComplexMatrix& x, double herm_tol = kHermitianTol);
double lambda_max(const ComplexMatrix& x, double herm_tol = kHermitianTol);

ComplexMatrix sqrt_psd(const ComplexMatrix& x, double tol = kPsdTol);
Subspace support_projector(const ComplexMatrix& x, double tol = kPsdTol);

/// Numerical rank: count of singular values above tol * largest.
std::size_t numerical_rank(const ComplexMatrix& x, double rel_tol = 1e-10);

// --- random sampling ----------------------------------------------------------

ComplexMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);
ComplexMatrix haar_unitary(std::size_t d, Rng& rng);
/// First `cols` columns of a Haar unitary on C^rows.
ComplexMatrix haar_isometry(std::size_t rows, std::size_t cols, Rng& rng);
ComplexVector random_pure(std::size_t d, Rng& rng);
ComplexMatrix random_density(std::size_t d, Rng& rng);

}  // namespace qfals
