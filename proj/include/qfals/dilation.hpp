#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "qfals/model.hpp"

namespace qfals {

/// |M>> = sum_{n,m} M(n,m) |n> (x) |m>; the row index labels the first
/// factor.
ComplexVector double_ket(const ComplexMatrix& m);
/// Inverse of double_ket for a rows x cols matrix.
ComplexMatrix from_double_ket(const ComplexVector& v, std::size_t rows,
                              std::size_t cols);

/// Unit-trace state |V>><<V| / d_B on A (x) B for an isometry V: B -> A.
State max_entangled_from_isometry(const ComplexMatrix& v, double tol = 1e-10);

/// Inverse of max_entangled_from_isometry, with the global phase fixed so
/// the first non-negligible entry of V (row-major) is real positive.
ComplexMatrix isometry_from_max_entangled(const State& s, std::size_t dim_a,
                                          std::size_t dim_b, double tol = 1e-9);

struct PurificationResult {
  State pure_state;  // on A (x) E
  System environment;
  ComplexMatrix isometry_used;  // d_E x d_A
  std::vector<double> schmidt_coefficients;  // descending, length rank(rho)
};

/// Purification (I (x) W)|rho^{1/2}>>. With d_E >= d_A the default W is the
/// canonical embedding of C^{d_A} into C^{d_E}; with rank(rho) <= d_E < d_A
/// it maps the conjugated eigenbasis of Supp rho onto the first E basis
/// vectors (isometric on the support only). A caller-supplied W must be an
/// isometry.
PurificationResult purify(const State& rho,
                          std::optional<std::size_t> env_dim = std::nullopt,
                          std::optional<ComplexMatrix> isometry = std::nullopt,
                          Tolerance tol = {});

struct DilationResult {
  ComplexMatrix unitary;  // (A (x) F) -> (B (x) E)
  System input;           // A
  System output;          // B
  System ancilla;         // F
  System environment;     // E
  State ancilla_state;    // |0><0| on F
  std::vector<Effect> pvm;  // one projector on E per outcome
  /// For each basis vector of E: (outcome, kraus index), kraus index -1 for
  /// padding vectors that no Kraus operator reaches.
  std::vector<std::pair<std::size_t, long>> block_map;
};

/// Unitary interaction + pure ancilla + PVM on the environment realizing the
/// instrument.
DilationResult stinespring_dilate(const Instrument& inst);

/// T_i rho = Tr_E[U (rho (x) sigma) U^dagger (I_B (x) Z_i)], evaluated on a
/// basis of input operators.
Instrument instrument_from_dilation(const DilationResult& d, const System& input);

/// Choi matrix of T_i computed directly from the dilation formula.
ComplexMatrix dilation_outcome_choi(const DilationResult& d, std::size_t outcome);

}  // namespace qfals
