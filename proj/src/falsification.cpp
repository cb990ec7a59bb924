#include "qfals/falsification.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qfals/dilation.hpp"
#include "qfals/error.hpp"
#include "qfals/parallel.hpp"

namespace qfals {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t k = 0; k < exp; ++k) r *= base;
  return r;
}

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return r;
}

/// The d^2 vectors |j>, (|j>+|k>)/sqrt2, (|j>+i|k>)/sqrt2 (j < k) whose
/// projectors span the Hermitian operators on C^d.
std::vector<ComplexVector> canonical_spanning_vectors(std::size_t d) {
  std::vector<ComplexVector> out;
  const double s = 1.0 / std::sqrt(2.0);
  for (std::size_t j = 0; j < d; ++j) out.push_back(basis_ket(d, j));
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t k = j + 1; k < d; ++k) {
      out.push_back(s * (basis_ket(d, j) + basis_ket(d, k)));
      out.push_back(s * (basis_ket(d, j) + Complex(0.0, 1.0) * basis_ket(d, k)));
    }
  }
  return out;
}

ComplexVector tensor_power(const ComplexVector& v, std::size_t n) {
  ComplexMatrix out = ComplexMatrix::Ones(1, 1);
  for (std::size_t k = 0; k < n; ++k) out = kron(out, v);
  return out.col(0);
}

// Isometry between (Herm(D), HS) and R^{D^2}.
Eigen::VectorXd to_real(const ComplexMatrix& x) {
  const auto d = x.rows();
  Eigen::VectorXd v(d * d);
  Eigen::Index idx = 0;
  const double r2 = std::sqrt(2.0);
  for (Eigen::Index i = 0; i < d; ++i) v(idx++) = x(i, i).real();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      v(idx++) = r2 * x(i, j).real();
      v(idx++) = r2 * x(i, j).imag();
    }
  }
  return v;
}

ComplexMatrix from_real(const Eigen::VectorXd& v, Eigen::Index d) {
  ComplexMatrix x(d, d);
  Eigen::Index idx = 0;
  const double r2 = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < d; ++i) x(i, i) = v(idx++);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const double re = r2 * v(idx++);
      const double im = r2 * v(idx++);
      x(i, j) = Complex(re, im);
      x(j, i) = Complex(re, -im);
    }
  }
  return x;
}

class SpanBuilder {
 public:
  SpanBuilder(Eigen::Index n, double tol) : basis_(n, n), tol_(tol) {}

  void add(const ComplexMatrix& member) {
    if (dim_ == basis_.cols()) return;
    Eigen::VectorXd v = to_real(member);
    const double n0 = v.norm();
    if (n0 == 0.0) return;
    for (int pass = 0; pass < 2; ++pass) {
      v -= basis_.leftCols(dim_) * (basis_.leftCols(dim_).transpose() * v);
    }
    const double n1 = v.norm();
    if (n1 <= tol_ * n0) return;
    basis_.col(dim_++) = v / n1;
  }

  Eigen::Index dim() const { return dim_; }
  Eigen::Index full() const { return basis_.rows(); }
  Eigen::MatrixXd basis() const { return basis_.leftCols(dim_); }

 private:
  Eigen::MatrixXd basis_;
  Eigen::Index dim_ = 0;
  double tol_;
};

/// Euclidean projection onto {lambda >= 0, sum lambda = 1}.
std::vector<double> project_simplex(std::vector<double> values) {
  std::vector<double> u = values;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (double& v : values) v = std::max(v - theta, 0.0);
  return values;
}

/// Projection onto the density matrices {X >= 0, Tr X = 1}.
ComplexMatrix project_density(const ComplexMatrix& x) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(x));
  const auto& ev = solver.eigenvalues();
  std::vector<double> vals(ev.data(), ev.data() + ev.size());
  vals = project_simplex(std::move(vals));
  const auto& vec = solver.eigenvectors();
  ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    const double lam = vals[static_cast<std::size_t>(k)];
    if (lam > 0.0) out += lam * vec.col(k) * vec.col(k).adjoint();
  }
  return out;
}

double trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.adjoint().cwiseProduct(b)).sum().real();
}

State choi_state(const QuantumOperation& op) {
  ComplexMatrix c = op.choi() / static_cast<double>(op.input().dim);
  const double tr = c.trace().real();
  if (tr > 0.0) c /= tr;
  return State(compose(op.output(), op.input()), c);
}

}  // namespace

const char* to_string(AverageMethod m) {
  return m == AverageMethod::Analytic ? "analytic" : "monte-carlo";
}

// --- FalsificationTest -------------------------------------------------------------

FalsificationTest::FalsificationTest(Effect falsifier, std::string label, Tolerance tol)
    : falsifier_(std::move(falsifier)), label_(std::move(label)) {
  if (hs_norm(falsifier_.matrix()) <= tol.value) {
    fail(ErrorKind::NoEffectiveFalsifier, "FalsificationTest: F = 0 is the inconclusive test");
  }
}

Effect FalsificationTest::inconclusive() const {
  const auto& s = falsifier_.system();
  return Effect(s, identity(s.dim) - falsifier_.matrix());
}

// --- HypothesisFamily --------------------------------------------------------------

HypothesisFamily::HypothesisFamily(FamilyTag tag) : tag_(std::move(tag)) {
  auto positive = [](std::size_t d, const char* what) {
    if (d == 0) fail(ErrorKind::InvalidArgument, std::string(what) + ": dimension must be >= 1");
  };
  system_ = std::visit(
      overloaded{
          [&](const StateSupport& s) {
            positive(s.support.ambient_dim, "StateSupport");
            const auto k = static_cast<Eigen::Index>(s.support.dim());
            if (k == 0) fail(ErrorKind::InvalidArgument, "StateSupport: empty support");
            if ((s.support.basis.adjoint() * s.support.basis -
                 ComplexMatrix::Identity(k, k)).norm() > 1e-12) {
              fail(ErrorKind::InvalidArgument, "StateSupport: basis not orthonormal");
            }
            return System{"A", s.support.ambient_dim};
          },
          [&](const Purity& p) {
            positive(p.dim, "Purity");
            return System{"A", p.dim};
          },
          [&](const PurityNCopies& p) {
            positive(p.dim, "PurityNCopies");
            positive(p.copies, "PurityNCopies copies");
            return System{"A^" + std::to_string(p.copies), ipow(p.dim, p.copies)};
          },
          [&](const MaxEntangled& m) {
            positive(m.dim_b, "MaxEntangled");
            if (m.dim_a < m.dim_b) fail(ErrorKind::InvalidArgument, "MaxEntangled: need d_A >= d_B");
            return System{"AB", m.dim_a * m.dim_b};
          },
          [&](const MarginalOfPure& m) {
            require_square(m.rho, "MarginalOfPure");
            const State rho(System{"A", static_cast<std::size_t>(m.rho.rows())}, m.rho);
            if (!rho.is_deterministic()) {
              fail(ErrorKind::InvalidArgument, "MarginalOfPure: rho must have unit trace");
            }
            if (m.env_dim < rho.system().dim) {
              fail(ErrorKind::InvalidArgument, "MarginalOfPure: need d_E >= d_A");
            }
            return System{"AE", rho.system().dim * m.env_dim};
          },
          [&](const AtomicTransformation& t) {
            positive(t.dim_in, "AtomicTransformation");
            positive(t.dim_out, "AtomicTransformation");
            return System{"BA", t.dim_out * t.dim_in};
          },
          [&](const IsometricTransformation& t) {
            positive(t.dim_in, "IsometricTransformation");
            if (t.dim_out < t.dim_in) {
              fail(ErrorKind::InvalidArgument, "IsometricTransformation: need d_out >= d_in");
            }
            return System{"AB", t.dim_out * t.dim_in};
          },
      },
      tag_);
}

std::string HypothesisFamily::name() const {
  return std::visit(
      overloaded{
          [](const StateSupport& s) {
            return "state-support(d=" + std::to_string(s.support.ambient_dim) +
                   ",k=" + std::to_string(s.support.dim()) + ")";
          },
          [](const Purity& p) { return "purity(d=" + std::to_string(p.dim) + ")"; },
          [](const PurityNCopies& p) {
            return "purity-ncopies(d=" + std::to_string(p.dim) +
                   ",N=" + std::to_string(p.copies) + ")";
          },
          [](const MaxEntangled& m) {
            return "max-entangled(dA=" + std::to_string(m.dim_a) +
                   ",dB=" + std::to_string(m.dim_b) + ")";
          },
          [](const MarginalOfPure& m) {
            return "marginal-of-pure(dA=" + std::to_string(m.rho.rows()) +
                   ",dE=" + std::to_string(m.env_dim) + ")";
          },
          [](const AtomicTransformation& t) {
            return "atomic-transformation(din=" + std::to_string(t.dim_in) +
                   ",dout=" + std::to_string(t.dim_out) + ")";
          },
          [](const IsometricTransformation& t) {
            return "isometric-transformation(din=" + std::to_string(t.dim_in) +
                   ",dout=" + std::to_string(t.dim_out) + ")";
          },
      },
      tag_);
}

std::vector<std::size_t> HypothesisFamily::factor_dims() const {
  return std::visit(
      overloaded{
          [](const StateSupport& s) { return std::vector<std::size_t>{s.support.ambient_dim}; },
          [](const Purity& p) { return std::vector<std::size_t>{p.dim}; },
          [](const PurityNCopies& p) { return std::vector<std::size_t>(p.copies, p.dim); },
          [](const MaxEntangled& m) { return std::vector<std::size_t>{m.dim_a, m.dim_b}; },
          [](const MarginalOfPure& m) {
            return std::vector<std::size_t>{static_cast<std::size_t>(m.rho.rows()), m.env_dim};
          },
          [](const AtomicTransformation& t) { return std::vector<std::size_t>{t.dim_out, t.dim_in}; },
          [](const IsometricTransformation& t) {
            return std::vector<std::size_t>{t.dim_out, t.dim_in};
          },
      },
      tag_);
}

State HypothesisFamily::sample(Rng& rng) const {
  return std::visit(
      overloaded{
          [&](const StateSupport& s) {
            const ComplexMatrix& b = s.support.basis;
            const ComplexMatrix inner = random_density(s.support.dim(), rng);
            return State(system_, hermitian_part(b * inner * b.adjoint()));
          },
          [&](const Purity& p) {
            return State(system_, projector_onto(random_pure(p.dim, rng)));
          },
          [&](const PurityNCopies& p) {
            return State(system_, projector_onto(tensor_power(random_pure(p.dim, rng), p.copies)));
          },
          [&](const MaxEntangled& m) {
            return max_entangled_from_isometry(haar_isometry(m.dim_a, m.dim_b, rng));
          },
          [&](const MarginalOfPure& m) {
            const auto da = static_cast<std::size_t>(m.rho.rows());
            const State rho(System{"A", da}, m.rho);
            return purify(rho, m.env_dim, haar_isometry(m.env_dim, da, rng)).pure_state;
          },
          [&](const AtomicTransformation& t) {
            const ComplexVector psi = random_pure(t.dim_out * t.dim_in, rng);
            const QuantumOperation op(System{"A", t.dim_in}, System{"B", t.dim_out},
                                      {from_double_ket(psi, t.dim_out, t.dim_in)});
            return choi_state(op);
          },
          [&](const IsometricTransformation& t) {
            const QuantumOperation op(System{"B", t.dim_in}, System{"A", t.dim_out},
                                      {haar_isometry(t.dim_out, t.dim_in, rng)});
            return choi_state(op);
          },
      },
      tag_);
}

std::vector<State> HypothesisFamily::spanning_set() const {
  std::vector<State> out;
  std::visit(
      overloaded{
          [&](const StateSupport& s) {
            const ComplexMatrix& b = s.support.basis;
            for (const auto& v : canonical_spanning_vectors(s.support.dim())) {
              out.emplace_back(system_, projector_onto(b * v));
            }
          },
          [&](const Purity& p) {
            for (const auto& v : canonical_spanning_vectors(p.dim)) {
              out.emplace_back(system_, projector_onto(v));
            }
          },
          [&](const PurityNCopies& p) {
            for (const auto& v : canonical_spanning_vectors(p.dim)) {
              out.emplace_back(system_, projector_onto(tensor_power(v, p.copies)));
            }
          },
          [&](const AtomicTransformation& t) {
            // Each unit vector is the Choi state of the atomic map K = unvec(v).
            for (const auto& v : canonical_spanning_vectors(t.dim_in * t.dim_out)) {
              const QuantumOperation op(System{"A", t.dim_in}, System{"B", t.dim_out},
                                        {from_double_ket(v, t.dim_out, t.dim_in)});
              out.push_back(choi_state(op));
            }
          },
          [](const auto&) {},
      },
      tag_);
  return out;
}

std::optional<State> HypothesisFamily::analytic_average() const {
  const double d = static_cast<double>(system_.dim);
  return std::visit(
      overloaded{
          [&](const StateSupport& s) -> std::optional<State> {
            return State(system_, s.support.projector() / static_cast<double>(s.support.dim()));
          },
          [&](const PurityNCopies& p) -> std::optional<State> {
            return State(system_, symmetric_projector(p.dim, p.copies) /
                                      binomial(p.dim + p.copies - 1, p.copies));
          },
          [&](const MarginalOfPure& m) -> std::optional<State> {
            return State(system_, kron(m.rho, identity(m.env_dim) /
                                                  static_cast<double>(m.env_dim)));
          },
          // Purity, MaxEntangled and both transformation families: I / dim.
          [&](const auto&) -> std::optional<State> {
            return State(system_, identity(system_.dim) / d);
          },
      },
      tag_);
}

std::optional<HypothesisFamily> HypothesisFamily::choi_reduction() const {
  if (const auto* a = std::get_if<AtomicTransformation>(&tag_)) {
    return HypothesisFamily(Purity{a->dim_in * a->dim_out});
  }
  if (const auto* i = std::get_if<IsometricTransformation>(&tag_)) {
    return HypothesisFamily(MaxEntangled{i->dim_out, i->dim_in});
  }
  return std::nullopt;
}

// --- tests on single hypotheses -------------------------------------------------------

FalsificationTest support_falsifier(const Subspace& k) {
  if (k.dim() >= k.ambient_dim) {
    fail(ErrorKind::NoEffectiveFalsifier,
         "support_falsifier: K is the full space, only F = 0 is compatible");
  }
  const System a{"A", k.ambient_dim};
  return FalsificationTest(Effect(a, k.complement().projector()),
                           "support(k=" + std::to_string(k.dim()) + ")");
}

double falsification_chance(const FalsificationTest& t, const State& sigma) {
  if (!(t.falsifier().system().dim == sigma.system().dim)) {
    fail(ErrorKind::SystemMismatch, "falsification_chance: dimension mismatch");
  }
  const double p = trace_product(t.falsifier().matrix(), sigma.matrix());
  return std::clamp(p, 0.0, 1.0);
}

FalsificationTest coarse_grain(const std::vector<Effect>& falsifiers,
                               const std::vector<Effect>& inconclusives, Tolerance tol) {
  if (falsifiers.empty()) fail(ErrorKind::NoEffectiveFalsifier, "coarse_grain: no falsifiers");
  const System& sys = falsifiers.front().system();
  const auto d = static_cast<Eigen::Index>(sys.dim);
  ComplexMatrix f = ComplexMatrix::Zero(d, d);
  ComplexMatrix total = ComplexMatrix::Zero(d, d);
  for (const auto& e : falsifiers) {
    if (!(e.system().dim == sys.dim)) fail(ErrorKind::SystemMismatch, "coarse_grain: mixed systems");
    f += e.matrix();
  }
  total = f;
  for (const auto& e : inconclusives) {
    if (!(e.system().dim == sys.dim)) fail(ErrorKind::SystemMismatch, "coarse_grain: mixed systems");
    total += e.matrix();
  }
  if ((total - identity(sys.dim)).norm() > tol.value) {
    fail(ErrorKind::SumNotIdentity, "coarse_grain: effects do not sum to the identity");
  }
  return FalsificationTest(Effect(sys, hermitian_part(f), tol), "coarse-grained", tol);
}

FalsificationTest modus_tollens_transfer(const FalsificationTest& f, std::string new_label) {
  return FalsificationTest(f.falsifier(), std::move(new_label));
}

// --- twirls and averages -------------------------------------------------------------

ComplexMatrix twirl_analytic(const ComplexMatrix& x, std::span<const std::size_t> dims,
                             std::size_t twirled_factor) {
  require_square(x, "twirl_analytic");
  if (twirled_factor >= dims.size()) {
    fail(ErrorKind::DimensionMismatch, "twirl_analytic: factor index out of range");
  }
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (k != twirled_factor) keep.push_back(k);
  }
  const ComplexMatrix reduced = partial_trace(x, dims, keep);  // validates dims
  const std::size_t total = static_cast<std::size_t>(x.rows());
  const double dk = static_cast<double>(dims[twirled_factor]);

  // Split a full index into (twirled digit, index over the remaining factors).
  std::vector<std::size_t> digit(total), rest(total);
  for (std::size_t r = 0; r < total; ++r) {
    std::size_t idx = r, rest_index = 0, mult = 1;
    for (std::size_t k = dims.size(); k-- > 0;) {
      const std::size_t dig = idx % dims[k];
      idx /= dims[k];
      if (k == twirled_factor) {
        digit[r] = dig;
      } else {
        rest_index += dig * mult;
        mult *= dims[k];
      }
    }
    rest[r] = rest_index;
  }
  ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
  for (std::size_t r = 0; r < total; ++r) {
    for (std::size_t c = 0; c < total; ++c) {
      if (digit[r] != digit[c]) continue;
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          reduced(static_cast<Eigen::Index>(rest[r]), static_cast<Eigen::Index>(rest[c])) / dk;
    }
  }
  return out;
}

ComplexMatrix twirl_monte_carlo(const ComplexMatrix& x, std::span<const std::size_t> dims,
                                std::size_t twirled_factor, std::size_t n, Rng& rng,
                                std::size_t threads) {
  require_square(x, "twirl_monte_carlo");
  if (n == 0) fail(ErrorKind::InvalidArgument, "twirl_monte_carlo: n must be >= 1");
  if (twirled_factor >= dims.size()) {
    fail(ErrorKind::DimensionMismatch, "twirl_monte_carlo: factor index out of range");
  }
  const std::size_t total =
      std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
  if (total != static_cast<std::size_t>(x.rows())) {
    fail(ErrorKind::DimensionMismatch, "twirl_monte_carlo: dims do not match matrix");
  }
  const Rng base(rng.next_u64());
  const std::size_t dk = dims[twirled_factor];
  return parallel_mean(n, threads, base, x.rows(), x.cols(), [&](Rng& r) {
    const ComplexMatrix u = embed_factor(haar_unitary(dk, r), dims, twirled_factor);
    return ComplexMatrix(u * x * u.adjoint());
  });
}

State family_average(const HypothesisFamily& h, AverageMethod method, std::size_t n,
                     Rng& rng, std::size_t threads) {
  if (method == AverageMethod::Analytic) {
    auto avg = h.analytic_average();
    if (!avg) fail(ErrorKind::NoAnalyticForm, "family_average: no analytic form for " + h.name());
    return *avg;
  }
  if (n == 0) fail(ErrorKind::InvalidArgument, "family_average: n must be >= 1");
  const Rng base(rng.next_u64());
  const auto d = static_cast<Eigen::Index>(h.dim());
  ComplexMatrix mean = parallel_mean(n, threads, base, d, d,
                                     [&](Rng& r) { return h.sample(r).matrix(); });
  return State(h.system(), hermitian_part(mean));
}

WitnessVerdict witness_unfalsifiable(const HypothesisFamily& h, AverageMethod method,
                                     std::size_t n, Rng& rng, double tol,
                                     std::size_t threads) {
  const std::uint64_t seed = rng.seed();
  State avg = family_average(h, method, n, rng, threads);
  const auto eig = eig_hermitian(avg.matrix());
  WitnessVerdict v{avg, eig.values.back(), eig.values.back() > tol, method,
                   method == AverageMethod::Analytic ? 0 : n, seed, std::nullopt};

  if (const auto* m = std::get_if<MarginalOfPure>(&h.tag())) {
    const auto da = static_cast<std::size_t>(m->rho.rows());
    if (support_projector(m->rho, tol).dim() < da) {
      const auto d = static_cast<Eigen::Index>(h.dim());
      ComplexMatrix kernel = ComplexMatrix::Zero(d, d);
      for (std::size_t k = 0; k < eig.values.size(); ++k) {
        if (eig.values[k] <= tol) {
          const auto col = eig.vectors.col(static_cast<Eigen::Index>(k));
          kernel += col * col.adjoint();
        }
      }
      const std::size_t dims[] = {da, m->env_dim};
      const std::size_t keep_a[] = {0};
      ComplexMatrix fa = hermitian_part(partial_trace(kernel, dims, keep_a));
      fa /= lambda_max(fa);
      v.residual_support_falsifier =
          FalsificationTest(Effect(System{"A", da}, fa, Tolerance{1e-8}), "support of rho");
    }
  }
  return v;
}

std::size_t span_dimension(const std::vector<State>& states, double tol) {
  if (states.empty()) return 0;
  const auto d = states.front().matrix().rows();
  SpanBuilder span(d * d, tol);
  for (const auto& s : states) span.add(s.matrix());
  return static_cast<std::size_t>(span.dim());
}

SearchReport falsifier_search(const HypothesisFamily& h, Rng& rng, const SearchOptions& opts) {
  if (opts.span_samples == 0) fail(ErrorKind::InvalidArgument, "falsifier_search: span_samples must be >= 1");
  const auto d = static_cast<Eigen::Index>(h.dim());
  SpanBuilder span(d * d, 1e-10);
  for (const auto& s : h.spanning_set()) span.add(s.matrix());

  // Grow with random members until the span stops growing for 3 batches.
  Eigen::Index previous = span.dim();
  std::size_t stable = 0;
  std::size_t batch = 0;
  while (span.dim() < span.full() && stable < 3) {
    if (batch++ >= opts.max_batches) {
      fail(ErrorKind::SpanConstruction, "falsifier_search: span of " + h.name() +
                                            " did not stabilize");
    }
    for (std::size_t i = 0; i < opts.span_samples; ++i) span.add(h.sample(rng).matrix());
    stable = (span.dim() == previous) ? stable + 1 : 0;
    previous = span.dim();
  }
  if (span.dim() == 0) {
    fail(ErrorKind::SpanConstruction, "falsifier_search: degenerate family " + h.name());
  }

  SearchReport report;
  report.span_dim = static_cast<std::size_t>(span.dim());
  report.hermitian_dim = static_cast<std::size_t>(span.full());
  const Eigen::MatrixXd q = span.basis();

  auto project_orthogonal = [&](const ComplexMatrix& x) {
    Eigen::VectorXd v = to_real(hermitian_part(x));
    v -= q * (q.transpose() * v);
    return from_real(v, d);
  };

  // Dykstra between the subspace orthogonal to the family and the density
  // matrices. For a subspace the first correction term vanishes, so only
  // the correction for the convex set is carried.
  ComplexMatrix x = identity(h.dim()) / static_cast<double>(d);
  ComplexMatrix correction = ComplexMatrix::Zero(d, d);
  report.residual = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    const ComplexMatrix y = project_orthogonal(x);
    const ComplexMatrix shifted = y + correction;
    x = project_density(shifted);
    correction = shifted - x;
    report.residual = (y - x).norm();
    report.iterations = it;
    // Once under tol, keep iterating to two more digits so the scaled
    // candidate sits well inside the verification bound.
    if (report.residual < opts.tol) report.converged = true;
    if (report.residual < 1e-2 * opts.tol) break;
  }

  const double top = lambda_max(x, 1e-8);
  report.candidate = top > 0.0 ? ComplexMatrix(x / top) : x;

  if (const auto* m = std::get_if<MarginalOfPure>(&h.tag())) {
    const std::size_t dims[] = {static_cast<std::size_t>(m->rho.rows()), m->env_dim};
    const std::size_t keep_a[] = {0};
    ComplexMatrix fa = hermitian_part(partial_trace(report.candidate, dims, keep_a));
    const double fa_top = lambda_max(fa, 1e-8);
    if (fa_top > 0.0) fa /= fa_top;
    report.reduced_effect = fa;
  }

  if (report.converged) {
    for (std::size_t i = 0; i < opts.verify_samples; ++i) {
      const State s = h.sample(rng);
      report.max_violation =
          std::max(report.max_violation, trace_product(report.candidate, s.matrix()));
    }
    report.verified = report.max_violation <= 10.0 * opts.tol;
    if (report.verified) {
      report.falsifier = FalsificationTest(
          Effect(h.system(), hermitian_part(report.candidate), Tolerance{1e-8}), h.name());
    }
  }
  return report;
}

TrialCounts simulate_trials(const FalsificationTest& t, const State& truth, std::size_t n,
                            Rng& rng) {
  const double p = falsification_chance(t, truth);
  TrialCounts counts;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform() < p) {
      ++counts.falsified;
    } else {
      ++counts.inconclusive;
    }
  }
  return counts;
}

}  // namespace qfals
