#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "qfals/linalg.hpp"

namespace qfals {

/// Validation slack shared by the operational objects. Carried as a value so
/// callers working at larger dimensions can loosen it.
struct Tolerance {
  double value = 1e-9;
};

/// A physical system: a label and the dimension of its Hilbert space.
/// dim == 1 is the trivial system.
struct System {
  std::string label;
  std::size_t dim = 1;

  bool is_trivial() const { return dim == 1; }
  bool operator==(const System&) const = default;
};

System trivial_system();
/// Tensor composition. The trivial system is a unit: I.A = A.I = A.
System compose(const System& a, const System& b);

/// Positive sub-normalized operator, 0 <= Tr <= 1.
class State {
 public:
  State(System system, ComplexMatrix matrix, Tolerance tol = {});

  const System& system() const { return system_; }
  const ComplexMatrix& matrix() const { return matrix_; }
  double trace() const { return matrix_.trace().real(); }
  bool is_deterministic(Tolerance tol = {}) const;

 private:
  System system_;
  ComplexMatrix matrix_;
};

/// Operator E with 0 <= E <= I.
class Effect {
 public:
  Effect(System system, ComplexMatrix matrix, Tolerance tol = {});

  static Effect deterministic(const System& system);

  const System& system() const { return system_; }
  const ComplexMatrix& matrix() const { return matrix_; }
  bool is_deterministic(Tolerance tol = {}) const;

 private:
  System system_;
  ComplexMatrix matrix_;
};

using KrausSet = std::vector<ComplexMatrix>;

/// Completely positive trace-non-increasing map, stored as a Kraus set.
/// The Choi matrix (on output (x) input) is computed on first use and
/// shared between copies.
class QuantumOperation {
 public:
  QuantumOperation(System input, System output, KrausSet kraus,
                   Tolerance tol = {});

  static QuantumOperation from_choi(System input, System output,
                                    const ComplexMatrix& choi,
                                    Tolerance tol = {});
  static QuantumOperation identity(const System& system);
  static QuantumOperation unitary(const System& system, const ComplexMatrix& u,
                                  Tolerance tol = {});

  const System& input() const { return input_; }
  const System& output() const { return output_; }
  const KrausSet& kraus() const { return kraus_; }
  const ComplexMatrix& choi() const;

  /// sum_k K_k^dagger K_k, the effect reached by discarding the output.
  ComplexMatrix effect_operator() const;
  bool is_deterministic(Tolerance tol = {}) const;

 private:
  struct ChoiCache;

  System input_;
  System output_;
  KrausSet kraus_;
  std::shared_ptr<ChoiCache> cache_;
};

/// Outcome-labelled family of operations whose sum is trace preserving.
class Instrument {
 public:
  Instrument(std::vector<std::string> labels,
             std::vector<QuantumOperation> operations, Tolerance tol = {});

  const System& input() const { return operations_.front().input(); }
  const System& output() const { return operations_.front().output(); }
  std::size_t size() const { return operations_.size(); }
  const QuantumOperation& operation(std::size_t i) const { return operations_.at(i); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<QuantumOperation>& operations() const { return operations_; }

  /// The outcome-erased (deterministic) operation.
  QuantumOperation coarse_grained() const;

 private:
  std::vector<std::string> labels_;
  std::vector<QuantumOperation> operations_;
};

State apply(const QuantumOperation& op, const State& rho);
double born_probability(const State& rho, Tolerance tol = {});

/// t2 after t1 (t1 applied first).
QuantumOperation compose_seq(const QuantumOperation& t2, const QuantumOperation& t1);
QuantumOperation compose_par(const QuantumOperation& t1, const QuantumOperation& t2);

/// sum_k |K_k>><<K_k| on output (x) input, unnormalized.
ComplexMatrix kraus_to_choi(const QuantumOperation& op);
KrausSet choi_to_kraus(const ComplexMatrix& choi, std::size_t dim_in,
                       std::size_t dim_out, double tol = 1e-12);

/// Rank-one Choi test: eigenvalues past the first are <= tol * lambda_max.
bool is_atomic(const QuantumOperation& op, double tol = 1e-10);

// States and effects as transformations from / to the trivial system.
QuantumOperation state_as_operation(const State& rho);
State operation_as_state(const QuantumOperation& op);
QuantumOperation effect_as_operation(const Effect& e);
Effect operation_as_effect(const QuantumOperation& op);

/// Kraus set of the completely depolarizing channel rho -> Tr(rho) I/d,
/// built from the d^2 Weyl (clock-shift) operators.
KrausSet depolarizing_kraus(std::size_t d);

/// Random instrument with the given outcome count and Kraus operators per
/// outcome, from a Haar isometry C^din -> C^dout (x) C^n.
Instrument random_instrument(const System& input, const System& output,
                             std::size_t outcomes, std::size_t kraus_per_outcome,
                             Rng& rng);

}  // namespace qfals
