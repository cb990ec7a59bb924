#include "qfals/model.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "qfals/dilation.hpp"
#include "qfals/error.hpp"

namespace qfals {

namespace {

std::string dim_str(const ComplexMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_system(const ComplexMatrix& m, const System& s, const char* what) {
  if (s.dim == 0) fail(ErrorKind::InvalidArgument, std::string(what) + ": dim must be >= 1");
  const auto d = static_cast<Eigen::Index>(s.dim);
  if (m.rows() != d || m.cols() != d) {
    fail(ErrorKind::DimensionMismatch, std::string(what) + ": matrix is " +
                                           dim_str(m) + " but system " + s.label +
                                           " has dim " + std::to_string(s.dim));
  }
}

void require_same(const System& a, const System& b, const char* what) {
  if (!(a == b)) {
    fail(ErrorKind::SystemMismatch, std::string(what) + ": system " + a.label + "(" +
                                        std::to_string(a.dim) + ") vs " + b.label +
                                        "(" + std::to_string(b.dim) + ")");
  }
}

}  // namespace

System trivial_system() { return System{"I", 1}; }

System compose(const System& a, const System& b) {
  if (a.is_trivial()) return b;
  if (b.is_trivial()) return a;
  return System{a.label + b.label, a.dim * b.dim};
}

// --- State / Effect -----------------------------------------------------------

State::State(System system, ComplexMatrix matrix, Tolerance tol)
    : system_(std::move(system)), matrix_(std::move(matrix)) {
  require_system(matrix_, system_, "State");
  require_finite(matrix_, "State");
  if (!is_hermitian(matrix_, tol.value)) fail(ErrorKind::NotHermitian, "State: not Hermitian");
  const double lmin = lambda_min(matrix_, tol.value);
  if (lmin < -tol.value) {
    fail(ErrorKind::NotPsd, "State: not positive (lambda_min = " + std::to_string(lmin) + ")");
  }
  const double tr = trace();
  if (tr > 1.0 + tol.value) {
    fail(ErrorKind::NotTraceNonIncreasing,
         "State: trace " + std::to_string(tr) + " exceeds 1");
  }
}

bool State::is_deterministic(Tolerance tol) const {
  return std::abs(trace() - 1.0) <= tol.value;
}

Effect::Effect(System system, ComplexMatrix matrix, Tolerance tol)
    : system_(std::move(system)), matrix_(std::move(matrix)) {
  require_system(matrix_, system_, "Effect");
  require_finite(matrix_, "Effect");
  if (!is_hermitian(matrix_, tol.value)) fail(ErrorKind::NotHermitian, "Effect: not Hermitian");
  const auto e = eig_hermitian(matrix_, tol.value);
  if (e.values.back() < -tol.value || e.values.front() > 1.0 + tol.value) {
    fail(ErrorKind::NotEffect, "Effect: spectrum outside [0, 1]");
  }
}

Effect Effect::deterministic(const System& system) {
  return Effect(system, qfals::identity(system.dim));
}

bool Effect::is_deterministic(Tolerance tol) const {
  return (matrix_ - qfals::identity(system_.dim)).norm() <= tol.value;
}

// --- QuantumOperation ---------------------------------------------------------

struct QuantumOperation::ChoiCache {
  std::once_flag once;
  ComplexMatrix choi;
};

QuantumOperation::QuantumOperation(System input, System output, KrausSet kraus,
                                   Tolerance tol)
    : input_(std::move(input)),
      output_(std::move(output)),
      kraus_(std::move(kraus)),
      cache_(std::make_shared<ChoiCache>()) {
  if (kraus_.empty()) {
    // The zero map; represented by a single zero Kraus operator.
    kraus_.push_back(ComplexMatrix::Zero(static_cast<Eigen::Index>(output_.dim),
                                         static_cast<Eigen::Index>(input_.dim)));
  }
  for (const auto& k : kraus_) {
    if (k.rows() != static_cast<Eigen::Index>(output_.dim) ||
        k.cols() != static_cast<Eigen::Index>(input_.dim)) {
      fail(ErrorKind::DimensionMismatch, "QuantumOperation: Kraus operator is " +
                                             dim_str(k) + ", expected " +
                                             std::to_string(output_.dim) + "x" +
                                             std::to_string(input_.dim));
    }
    require_finite(k, "QuantumOperation");
  }
  const ComplexMatrix e = effect_operator();
  if (lambda_max(e, 1e-8) > 1.0 + tol.value) {
    fail(ErrorKind::NotTraceNonIncreasing,
         "QuantumOperation: sum K^dagger K exceeds identity");
  }
}

QuantumOperation QuantumOperation::from_choi(System input, System output,
                                             const ComplexMatrix& choi,
                                             Tolerance tol) {
  auto kraus = choi_to_kraus(choi, input.dim, output.dim, 1e-12);
  return QuantumOperation(std::move(input), std::move(output), std::move(kraus), tol);
}

QuantumOperation QuantumOperation::identity(const System& system) {
  return QuantumOperation(system, system, {qfals::identity(system.dim)});
}

QuantumOperation QuantumOperation::unitary(const System& system,
                                           const ComplexMatrix& u, Tolerance tol) {
  require_system(u, system, "QuantumOperation::unitary");
  if ((u.adjoint() * u - qfals::identity(system.dim)).norm() > tol.value) {
    fail(ErrorKind::NotIsometry, "QuantumOperation::unitary: matrix is not unitary");
  }
  return QuantumOperation(system, system, {u}, tol);
}

const ComplexMatrix& QuantumOperation::choi() const {
  std::call_once(cache_->once, [this] { cache_->choi = kraus_to_choi(*this); });
  return cache_->choi;
}

ComplexMatrix QuantumOperation::effect_operator() const {
  const auto d = static_cast<Eigen::Index>(input_.dim);
  ComplexMatrix e = ComplexMatrix::Zero(d, d);
  for (const auto& k : kraus_) e += k.adjoint() * k;
  return hermitian_part(e);
}

bool QuantumOperation::is_deterministic(Tolerance tol) const {
  return (effect_operator() - qfals::identity(input_.dim)).norm() <= tol.value;
}

// --- Instrument ---------------------------------------------------------------

Instrument::Instrument(std::vector<std::string> labels,
                       std::vector<QuantumOperation> operations, Tolerance tol)
    : labels_(std::move(labels)), operations_(std::move(operations)) {
  if (operations_.empty()) fail(ErrorKind::InvalidArgument, "Instrument: no outcomes");
  if (labels_.size() != operations_.size()) {
    fail(ErrorKind::InvalidArgument, "Instrument: label count != outcome count");
  }
  for (const auto& op : operations_) {
    require_same(op.input(), operations_.front().input(), "Instrument input");
    require_same(op.output(), operations_.front().output(), "Instrument output");
  }
  if (!coarse_grained().is_deterministic(tol)) {
    fail(ErrorKind::NotTracePreserving, "Instrument: outcomes do not sum to a trace-preserving map");
  }
}

QuantumOperation Instrument::coarse_grained() const {
  KrausSet all;
  for (const auto& op : operations_) {
    all.insert(all.end(), op.kraus().begin(), op.kraus().end());
  }
  return QuantumOperation(input(), output(), std::move(all));
}

// --- operations ---------------------------------------------------------------

State apply(const QuantumOperation& op, const State& rho) {
  require_same(op.input(), rho.system(), "apply");
  const auto d = static_cast<Eigen::Index>(op.output().dim);
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (const auto& k : op.kraus()) out += k * rho.matrix() * k.adjoint();
  return State(op.output(), hermitian_part(out));
}

double born_probability(const State& rho, Tolerance tol) {
  const double p = rho.trace();
  if (p < 0.0 && p >= -tol.value) return 0.0;
  if (p > 1.0 && p <= 1.0 + tol.value) return 1.0;
  return p;
}

QuantumOperation compose_seq(const QuantumOperation& t2, const QuantumOperation& t1) {
  require_same(t1.output(), t2.input(), "compose_seq");
  KrausSet out;
  out.reserve(t1.kraus().size() * t2.kraus().size());
  for (const auto& k2 : t2.kraus()) {
    for (const auto& k1 : t1.kraus()) out.push_back(k2 * k1);
  }
  return QuantumOperation(t1.input(), t2.output(), std::move(out), Tolerance{1e-8});
}

QuantumOperation compose_par(const QuantumOperation& t1, const QuantumOperation& t2) {
  KrausSet out;
  out.reserve(t1.kraus().size() * t2.kraus().size());
  for (const auto& k1 : t1.kraus()) {
    for (const auto& k2 : t2.kraus()) out.push_back(kron(k1, k2));
  }
  return QuantumOperation(compose(t1.input(), t2.input()),
                          compose(t1.output(), t2.output()), std::move(out),
                          Tolerance{1e-8});
}

ComplexMatrix kraus_to_choi(const QuantumOperation& op) {
  const auto n = static_cast<Eigen::Index>(op.input().dim * op.output().dim);
  ComplexMatrix choi = ComplexMatrix::Zero(n, n);
  for (const auto& k : op.kraus()) {
    const ComplexVector v = double_ket(k);
    choi += v * v.adjoint();
  }
  return hermitian_part(choi);
}

KrausSet choi_to_kraus(const ComplexMatrix& choi, std::size_t dim_in,
                       std::size_t dim_out, double tol) {
  const auto n = static_cast<Eigen::Index>(dim_in * dim_out);
  if (choi.rows() != n || choi.cols() != n) {
    fail(ErrorKind::DimensionMismatch, "choi_to_kraus: Choi matrix is " + dim_str(choi));
  }
  const auto e = eig_hermitian(choi, 1e-8);
  const double scale = std::max(e.values.front(), 0.0);
  if (e.values.back() < -std::max(1e-9, 1e-9 * scale)) {
    fail(ErrorKind::NotPsd, "choi_to_kraus: Choi matrix is not positive");
  }
  KrausSet out;
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    const double lam = e.values[k];
    if (lam <= tol * std::max(scale, 1.0)) break;
    out.push_back(std::sqrt(lam) *
                  from_double_ket(e.vectors.col(static_cast<Eigen::Index>(k)),
                                  dim_out, dim_in));
  }
  if (out.empty()) {
    out.push_back(ComplexMatrix::Zero(static_cast<Eigen::Index>(dim_out),
                                      static_cast<Eigen::Index>(dim_in)));
  }
  return out;
}

bool is_atomic(const QuantumOperation& op, double tol) {
  const auto e = eig_hermitian(op.choi(), 1e-8);
  const double top = e.values.front();
  if (top <= 0.0) return true;  // zero map: a single zero Kraus operator
  return e.values.size() < 2 || e.values[1] <= tol * top;
}

QuantumOperation state_as_operation(const State& rho) {
  const auto e = eig_hermitian(rho.matrix());
  KrausSet kraus;
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    if (e.values[k] <= 0.0) break;
    kraus.push_back(std::sqrt(e.values[k]) * e.vectors.col(static_cast<Eigen::Index>(k)));
  }
  return QuantumOperation(trivial_system(), rho.system(), std::move(kraus));
}

State operation_as_state(const QuantumOperation& op) {
  if (!op.input().is_trivial()) {
    fail(ErrorKind::SystemMismatch, "operation_as_state: input is not the trivial system");
  }
  return apply(op, State(op.input(), ComplexMatrix::Identity(1, 1)));
}

QuantumOperation effect_as_operation(const Effect& e) {
  const auto eig = eig_hermitian(e.matrix());
  KrausSet kraus;
  for (std::size_t k = 0; k < eig.values.size(); ++k) {
    if (eig.values[k] <= 0.0) break;
    kraus.push_back(std::sqrt(eig.values[k]) *
                    eig.vectors.col(static_cast<Eigen::Index>(k)).adjoint());
  }
  return QuantumOperation(e.system(), trivial_system(), std::move(kraus));
}

Effect operation_as_effect(const QuantumOperation& op) {
  if (!op.output().is_trivial()) {
    fail(ErrorKind::SystemMismatch, "operation_as_effect: output is not the trivial system");
  }
  return Effect(op.input(), op.effect_operator());
}

KrausSet depolarizing_kraus(std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  const Complex omega = std::polar(1.0, 2.0 * M_PI / static_cast<double>(d));
  KrausSet out;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      ComplexMatrix w = ComplexMatrix::Zero(n, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        // shift^a clock^b |j> = omega^{b j} |j + a>
        w((j + a) % n, j) = std::pow(omega, static_cast<double>(b * j));
      }
      out.push_back(w / static_cast<double>(d));
    }
  }
  return out;
}

Instrument random_instrument(const System& input, const System& output,
                             std::size_t outcomes, std::size_t kraus_per_outcome,
                             Rng& rng) {
  if (outcomes == 0) fail(ErrorKind::InvalidArgument, "random_instrument: no outcomes");
  std::size_t k = std::max<std::size_t>(kraus_per_outcome, 1);
  // The stacked Kraus operators form an isometry, so dout * n >= din.
  while (output.dim * outcomes * k < input.dim) ++k;
  const std::size_t n = outcomes * k;
  const ComplexMatrix w = haar_isometry(output.dim * n, input.dim, rng);
  std::vector<QuantumOperation> ops;
  std::vector<std::string> labels;
  const auto dout = static_cast<Eigen::Index>(output.dim);
  for (std::size_t i = 0; i < outcomes; ++i) {
    KrausSet kraus;
    for (std::size_t j = 0; j < k; ++j) {
      const auto block = static_cast<Eigen::Index>(i * k + j);
      kraus.push_back(w.middleRows(block * dout, dout));
    }
    ops.emplace_back(input, output, std::move(kraus));
    labels.push_back(std::to_string(i));
  }
  return Instrument(std::move(labels), std::move(ops));
}

}  // namespace qfals
