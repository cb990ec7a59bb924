#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qfals/model.hpp"

namespace qfals {

/// Binary observation test {F, I - F}. F must be positive and nonzero; the
/// label names the hypothesis the test targets.
class FalsificationTest {
 public:
  FalsificationTest(Effect falsifier, std::string label = {}, Tolerance tol = {});

  const Effect& falsifier() const { return falsifier_; }
  Effect inconclusive() const;
  const std::string& label() const { return label_; }

 private:
  Effect falsifier_;
  std::string label_;
};

// --- hypothesis families --------------------------------------------------------

struct StateSupport {
  Subspace support;
};
struct Purity {
  std::size_t dim;
};
struct PurityNCopies {
  std::size_t dim;
  std::size_t copies;
};
/// Pure states on A (x) B with maximally mixed marginal on B; d_A >= d_B.
struct MaxEntangled {
  std::size_t dim_a;
  std::size_t dim_b;
};
/// Pure states on A (x) E whose marginal on A is rho; d_E >= d_A.
struct MarginalOfPure {
  ComplexMatrix rho;
  std::size_t env_dim;
};
/// Atomic transformations A -> B, reduced to their normalized Choi states.
struct AtomicTransformation {
  std::size_t dim_in;
  std::size_t dim_out;
};
/// Isometric transformations B -> A (dim_in = d_B <= dim_out = d_A),
/// reduced to their normalized Choi states.
struct IsometricTransformation {
  std::size_t dim_in;
  std::size_t dim_out;
};

using FamilyTag = std::variant<StateSupport, Purity, PurityNCopies, MaxEntangled,
                               MarginalOfPure, AtomicTransformation,
                               IsometricTransformation>;

/// A set of states singled out by a hypothesis. Every sample and spanning
/// member satisfies the hypothesis by construction.
class HypothesisFamily {
 public:
  explicit HypothesisFamily(FamilyTag tag);

  const FamilyTag& tag() const { return tag_; }
  std::string name() const;
  const System& system() const { return system_; }
  std::size_t dim() const { return system_.dim; }
  /// Tensor factor dimensions of the state space.
  std::vector<std::size_t> factor_dims() const;

  State sample(Rng& rng) const;
  /// Finite analytically known members; empty when no closed form is used.
  std::vector<State> spanning_set() const;
  std::optional<State> analytic_average() const;
  /// For transformation families, the state family their Choi states form.
  std::optional<HypothesisFamily> choi_reduction() const;

 private:
  FamilyTag tag_;
  System system_;
};

enum class AverageMethod { Analytic, MonteCarlo };

struct WitnessVerdict {
  State average_state;
  double lambda_min = 0.0;
  bool unfalsifiable = false;
  AverageMethod method = AverageMethod::Analytic;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  /// MarginalOfPure with rank-deficient rho: Tr_E of the kernel projector of
  /// the average, a falsifier of Supp rho on A.
  std::optional<FalsificationTest> residual_support_falsifier;
};

struct SearchOptions {
  std::size_t span_samples = 16;
  double tol = 1e-8;
  std::size_t max_iter = 5000;
  std::size_t verify_samples = 1000;
  std::size_t max_batches = 400;
};

struct SearchReport {
  std::optional<FalsificationTest> falsifier;  // set only when verified
  ComplexMatrix candidate;  // last PSD iterate scaled to lambda_max = 1
  bool converged = false;
  bool verified = false;
  double residual = 0.0;
  std::size_t iterations = 0;
  std::size_t span_dim = 0;
  std::size_t hermitian_dim = 0;
  double max_violation = 0.0;  // max Tr[F sigma] over fresh samples
  /// MarginalOfPure only: Tr_E F scaled to lambda_max = 1.
  std::optional<ComplexMatrix> reduced_effect;
};

FalsificationTest support_falsifier(const Subspace& k);
double falsification_chance(const FalsificationTest& t, const State& sigma);
FalsificationTest coarse_grain(const std::vector<Effect>& falsifiers,
                               const std::vector<Effect>& inconclusives,
                               Tolerance tol = {});
/// By modus tollens a falsifier of Hyp2 falsifies any Hyp1 implying it. The
/// implication is the caller's claim; the effect is returned unchanged.
FalsificationTest modus_tollens_transfer(const FalsificationTest& f,
                                         std::string new_label);

/// Exact Haar average of (U (x) I) X (U^dagger (x) I) over U on one factor:
/// I/d on that factor times the partial trace over it.
ComplexMatrix twirl_analytic(const ComplexMatrix& x,
                             std::span<const std::size_t> dims,
                             std::size_t twirled_factor);
ComplexMatrix twirl_monte_carlo(const ComplexMatrix& x,
                                std::span<const std::size_t> dims,
                                std::size_t twirled_factor, std::size_t n,
                                Rng& rng, std::size_t threads = 1);

State family_average(const HypothesisFamily& h, AverageMethod method,
                     std::size_t n, Rng& rng, std::size_t threads = 1);
WitnessVerdict witness_unfalsifiable(const HypothesisFamily& h,
                                     AverageMethod method, std::size_t n,
                                     Rng& rng, double tol = 1e-9,
                                     std::size_t threads = 1);

/// Real dimension of the Hilbert-Schmidt span of the given states.
std::size_t span_dimension(const std::vector<State>& states, double tol = 1e-10);

SearchReport falsifier_search(const HypothesisFamily& h, Rng& rng,
                              const SearchOptions& opts = {});

struct TrialCounts {
  std::size_t falsified = 0;
  std::size_t inconclusive = 0;
};
TrialCounts simulate_trials(const FalsificationTest& t, const State& truth,
                            std::size_t n, Rng& rng);

const char* to_string(AverageMethod m);

}  // namespace qfals
