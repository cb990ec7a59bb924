// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "qfals/circuit.hpp"
#include "qfals/dilation.hpp"
#include "qfals/falsification.hpp"
#include "qfals/io.hpp"

using namespace qfals;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<void(Outcome&)> body;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

ComplexMatrix canonical_max_entangled(std::size_t da, std::size_t db) {
  ComplexMatrix v = ComplexMatrix::Zero(static_cast<Eigen::Index>(da), static_cast<Eigen::Index>(db));
  for (std::size_t i = 0; i < db; ++i) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
  return max_entangled_from_isometry(v).matrix();
}

// max_ij |x_ij - c delta_ij|
double dist_to_scalar(const ComplexMatrix& x, double c) {
  return oracle::max_abs(x - c * ComplexMatrix::Identity(x.rows(), x.cols()));
}

void purity(Outcome& o) {
  for (std::size_t d : {2u, 3u, 4u}) {
    const HypothesisFamily h(Purity{d});
    Rng rng(0);
    const auto w = witness_unfalsifiable(h, AverageMethod::Analytic, 0, rng);
    const double avg_err = dist_to_scalar(w.average_state.matrix(), 1.0 / static_cast<double>(d));
    const double lam_err = std::abs(w.lambda_min - 1.0 / static_cast<double>(d));
    const std::size_t span = span_dimension(h.spanning_set());
    const auto r = falsifier_search(h, rng);
    o.detail << " d=" << d << ": lambda_min err " << fmt(lam_err) << ", span " << span
             << ", residual " << fmt(r.residual) << ";";
    o.require(avg_err <= 1e-12 && lam_err <= 1e-12, "average is I/d");
    o.require(span == d * d, "span is d^2");
    o.require(!r.falsifier && !r.converged && r.residual >= 1e-8 && r.iterations == 5000,
              "search finds nothing");
  }
}

void max_entanglement(Outcome& o) {
  const std::pair<std::size_t, std::size_t> dims[] = {{2, 2}, {3, 2}, {3, 3}};
  for (const auto& [da, db] : dims) {
    const ComplexMatrix phi = canonical_max_entangled(da, db);
    const std::size_t fd[] = {da, db};
    const double total = static_cast<double>(da * db);
    const double analytic = dist_to_scalar(twirl_analytic(phi, fd, 0), 1.0 / total);
    Rng mc(0);
    const double monte = dist_to_scalar(twirl_monte_carlo(phi, fd, 0, 2000, mc), 1.0 / total);
    const HypothesisFamily h(MaxEntangled{da, db});
    Rng rng(0);
    const auto r = falsifier_search(h, rng);
    o.detail << " (" << da << "," << db << "): analytic " << fmt(analytic) << ", mc " << fmt(monte) << ";";
    o.require(analytic <= 1e-12, "analytic twirl");
    o.require(monte <= 0.05, "monte-carlo twirl");
    o.require(!r.falsifier, "search finds nothing");
  }
}

void reductions(Outcome& o) {
  auto lam = [](const HypothesisFamily& h) {
    Rng rng(0);
    return witness_unfalsifiable(h, AverageMethod::Analytic, 0, rng).lambda_min;
  };
  // Atomic A->B with d_A d_B = d against Purity(d).
  const std::pair<std::size_t, std::size_t> atomic[] = {{1, 2}, {2, 1}, {1, 3}, {2, 2}};
  for (const auto& [din, dout] : atomic) {
    const HypothesisFamily a(AtomicTransformation{din, dout});
    const double diff = std::abs(lam(a) - lam(HypothesisFamily(Purity{din * dout})));
    o.detail << " atomic(" << din << "," << dout << ") " << fmt(diff) << ";";
    o.require(diff <= 1e-12, "atomic lambda_min matches purity");
    o.require(a.choi_reduction() && std::holds_alternative<Purity>(a.choi_reduction()->tag()),
              "atomic reduces to purity");
  }
  // Isometric B->A against MaxEntangled(d_A, d_B).
  const std::pair<std::size_t, std::size_t> iso[] = {{2, 2}, {2, 3}, {3, 3}};
  for (const auto& [din, dout] : iso) {
    const HypothesisFamily v(IsometricTransformation{din, dout});
    const double diff = std::abs(lam(v) - lam(HypothesisFamily(MaxEntangled{dout, din})));
    o.detail << " isometric(" << din << "," << dout << ") " << fmt(diff) << ";";
    o.require(diff <= 1e-12, "isometric lambda_min matches max-entangled");
    o.require(v.choi_reduction() && std::holds_alternative<MaxEntangled>(v.choi_reduction()->tag()),
              "isometric reduces to max-entangled");
  }
  Rng rng(0);
  o.require(!falsifier_search(HypothesisFamily(AtomicTransformation{2, 2}), rng).falsifier,
            "atomic search finds nothing");
  o.require(!falsifier_search(HypothesisFamily(IsometricTransformation{2, 3}), rng).falsifier,
            "isometric search finds nothing");
}

void marginal_of_pure(Outcome& o) {
  Rng gen(4);
  for (std::size_t d : {2u, 3u}) {
    const ComplexMatrix rho = oracle::random_density(static_cast<Eigen::Index>(d), gen);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
    const double expected = es.eigenvalues().minCoeff() / static_cast<double>(d);
    const HypothesisFamily h(MarginalOfPure{rho, d});
    Rng rng(0);
    const auto w = witness_unfalsifiable(h, AverageMethod::Analytic, 0, rng);
    const auto r = falsifier_search(h, rng);
    o.detail << " d=" << d << ": lambda_min err " << fmt(std::abs(w.lambda_min - expected)) << ";";
    o.require(std::abs(w.lambda_min - expected) <= 1e-10, "witness lambda_min");
    o.require(!r.falsifier, "full-rank search finds nothing");
  }
  ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  ComplexMatrix kernel = ComplexMatrix::Zero(2, 2);
  kernel(1, 1) = 1.0;
  const HypothesisFamily h(MarginalOfPure{zero, 2});
  Rng rng(0);
  const auto w = witness_unfalsifiable(h, AverageMethod::Analytic, 0, rng);
  o.require(w.residual_support_falsifier.has_value(), "residual support falsifier reported");
  if (w.residual_support_falsifier) {
    const double err = oracle::max_abs(w.residual_support_falsifier->falsifier().matrix() - kernel);
    o.detail << " rank-deficient witness err " << fmt(err) << ";";
    o.require(err <= 1e-8, "witness falsifier is P_K-perp");
  }
  const auto r = falsifier_search(h, rng);
  o.require(r.reduced_effect.has_value(), "search reports Tr_E F");
  if (r.reduced_effect) {
    const double err = oracle::max_abs(*r.reduced_effect - kernel);
    o.detail << " search Tr_E F err " << fmt(err) << ";";
    o.require(err <= 1e-8, "search Tr_E F is P_K-perp");
  }
}

void n_copies(Outcome& o) {
  const HypothesisFamily h(PurityNCopies{2, 2});
  Rng rng(0);
  const auto r = falsifier_search(h, rng);
  o.require(r.falsifier.has_value(), "search converges");
  if (!r.falsifier) return;
  const ComplexMatrix& f = r.falsifier->falsifier().matrix();
  const double hs = hs_distance(f, oracle::singlet_projector());
  Rng fresh(1000);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const ComplexVector psi = random_pure(2, fresh);
    const ComplexMatrix p = psi * psi.adjoint();
    worst = std::max(worst, std::abs(oracle::trace_inner(f, oracle::kron(p, p))));
  }
  const double mixed = oracle::trace_inner(f, identity(4) / 4.0).real();
  o.detail << " HS to singlet " << fmt(hs) << ", max on products " << fmt(worst) << ", on (I/2)^2 "
           << mixed << ";";
  o.require(hs <= 1e-6, "singlet within 1e-6");
  o.require(worst <= 1e-8, "never fires on psi^(x)2");
  o.require(std::abs(mixed - 0.25) <= 1e-10, "0.25 on maximally mixed");

  const fs::path report = fs::temp_directory_path() / "qfals_acceptance_ncopy.json";
  std::ostringstream out, err;
  const int code = cli::run({"verify", "purity-ncopies", "--json", report.string()}, out, err);
  const Json j = read_json_file(report);
  fs::remove(report);
  o.require(code == 0 && j["notes"].size() == 1 &&
                j["notes"][0].get<std::string>().find("N-copy") != std::string::npos,
            "report carries discrepancy note");
}

void dilation(Outcome& o) {
  Rng rng(6);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t din = 1 + rng.next_u64() % 3, dout = 1 + rng.next_u64() % 3;
    const std::size_t outcomes = 1 + rng.next_u64() % 3, kraus = 1 + rng.next_u64() % 2;
    const Instrument inst = random_instrument(System{"A", din}, System{"B", dout}, outcomes, kraus, rng);
    const Instrument back = instrument_from_dilation(stinespring_dilate(inst), inst.input());
    for (std::size_t i = 0; i < inst.size(); ++i) {
      worst = std::max(worst, hs_distance(oracle::choi_of(inst.operation(i).kraus()),
                                          oracle::choi_of(back.operation(i).kraus())));
    }
  }
  o.detail << " worst per-outcome Choi distance " << fmt(worst) << ";";
  o.require(worst <= 1e-10, "round trip");
}

void purification(Outcome& o) {
  Rng rng(7);
  double marginal = 0.0, second = 0.0;
  for (int t = 0; t < 200; ++t) {
    const auto d = static_cast<Eigen::Index>(2 + t % 3);
    const ComplexMatrix rho = oracle::random_density(d, rng);
    const auto r = purify(State(System{"A", static_cast<std::size_t>(d)}, rho));
    marginal = std::max(marginal, oracle::max_abs(oracle::trace_second(r.pure_state.matrix(), d, d) - rho));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(r.pure_state.matrix());
    second = std::max(second, std::abs(es.eigenvalues()(es.eigenvalues().size() - 2)));
  }
  const auto bell = purify(State(System{"A", 2}, identity(2) / 2.0), 2, identity(2));
  const double bell_err = oracle::max_abs(bell.pure_state.matrix() - oracle::bell_projector());
  o.detail << " marginal " << fmt(marginal) << ", second eigenvalue " << fmt(second) << ", Bell "
           << fmt(bell_err) << ";";
  o.require(marginal <= 1e-12, "marginal");
  o.require(second <= 1e-12, "purity");
  o.require(bell_err <= 1e-14, "I/2 gives Phi+");
}

void representations(Outcome& o) {
  Rng rng(8);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t din = 1 + t % 3, dout = 1 + (t / 3) % 3, n = 1 + t % 4;
    const auto ks = oracle::random_kraus(din, dout, n, rng, 0.5 + 0.5 * rng.uniform());
    const ComplexMatrix choi = QuantumOperation(System{"A", din}, System{"B", dout}, ks).choi();
    const auto back = QuantumOperation::from_choi(System{"A", din}, System{"B", dout}, choi);
    worst = std::max(worst, hs_distance(oracle::choi_of(back.kraus()), oracle::choi_of(ks)));
  }
  const System q{"A", 3};
  const std::size_t unitary_rank = numerical_rank(QuantumOperation::unitary(q, haar_unitary(3, rng)).choi());
  // Generalized Paulis X^a Z^b / d make the fully depolarizing channel.
  double depol = 0.0;
  for (std::size_t d : {2u, 3u}) {
    const auto dd = static_cast<Eigen::Index>(d);
    ComplexMatrix shift = ComplexMatrix::Zero(dd, dd), clock = ComplexMatrix::Zero(dd, dd);
    for (Eigen::Index i = 0; i < dd; ++i) {
      shift((i + 1) % dd, i) = 1.0;
      clock(i, i) = std::polar(1.0, 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(d));
    }
    std::vector<ComplexMatrix> ks;
    ComplexMatrix xa = ComplexMatrix::Identity(dd, dd);
    for (std::size_t a = 0; a < d; ++a, xa = shift * xa) {
      ComplexMatrix zb = ComplexMatrix::Identity(dd, dd);
      for (std::size_t b = 0; b < d; ++b, zb = clock * zb) ks.push_back(xa * zb / static_cast<double>(d));
    }
    const System s{"A", d};
    depol = std::max(depol, dist_to_scalar(QuantumOperation(s, s, ks).choi(), 1.0 / static_cast<double>(d)));
  }
  o.detail << " Kraus->Choi->Kraus " << fmt(worst) << ", unitary Choi rank " << unitary_rank
           << ", depolarizing " << fmt(depol) << ";";
  o.require(worst <= 1e-10, "round trip");
  o.require(unitary_rank == 1, "unitary Choi rank 1");
  o.require(depol <= 1e-12, "depolarizing Choi is I/d");
}

void monte_carlo(Outcome& o) {
  const ComplexMatrix phi = canonical_max_entangled(2, 2);
  const std::size_t fd[] = {2, 2};
  const ComplexMatrix exact = twirl_analytic(phi, fd, 0);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t n : {250u, 1000u, 4000u}) {
    std::vector<double> errors;
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      Rng rng(trial);
      errors.push_back(hs_distance(twirl_monte_carlo(phi, fd, 0, n, rng), exact));
    }
    std::nth_element(errors.begin(), errors.begin() + 10, errors.end());
    const double upper = errors[10];
    const double lower = *std::max_element(errors.begin(), errors.begin() + 10);
    const double median = 0.5 * (lower + upper);
    o.detail << " n=" << n << " median " << fmt(median) << ";";
    o.require(median < previous, "median decreases");
    previous = median;
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dsl(Outcome& o) {
  const fs::path qc = fs::path(QFALS_FIXTURES) / "qc";
  const double s = 1.0 / std::sqrt(2.0);
  // Closed-form values of every probability run in the valid corpus.
  const std::vector<std::tuple<const char*, const char*, double>> expected = {
      {"minimal.qc", "p", 1.0},
      {"scheme.qc", "p", 0.25},
      {"purification.qc", "p0", 0.8 * 0.8},
      {"bell_projective.qc", "p", 0.5},
      {"bell_projective.qc", "anti", 0.0},
      {"instrument.qc", "p0", 0.9 * 0.5},
      {"instrument.qc", "p1", 0.9 * 0.5},
      {"instrument.qc", "erased", 0.9},
      {"amplitude_damping.qc", "decay", 0.6 * 0.6},
      {"reassociation.qc", "left", 0.8 * 0.8 * s * s},
      {"reassociation.qc", "right", 0.8 * 0.8 * s * s},
      {"reassociation.qc", "middle", 0.8 * 0.8 * s * s},
      {"parallel.qc", "joint", 1.0 / 3.0},
      {"parallel.qc", "grouped", 1.0 / 3.0},
      {"measure_and_prepare.qc", "p0", 0.5},
      {"measure_and_prepare.qc", "p1", 0.5},
      {"measure_and_prepare.qc", "fidelity", 0.5},
  };
  std::size_t programs = 0, runs = 0;
  double worst = 0.0;
  for (const auto& entry : fs::directory_iterator(qc)) {
    if (entry.path().extension() != ".qc") continue;
    ++programs;
    try {
      auto tc = circuit::typecheck(circuit::parse(slurp(entry.path())), qc);
      o.require(tc.errors.empty(), entry.path().filename().string() + " typechecks");
      if (!tc.typed) continue;
      for (const auto& run : tc.typed->runs) {
        const auto r = circuit::evaluate(*tc.typed, run.name);
        if (!r.probability) continue;
        const auto it = std::find_if(expected.begin(), expected.end(), [&](const auto& e) {
          return entry.path().filename() == std::get<0>(e) && run.name == std::get<1>(e);
        });
        o.require(it != expected.end(), "oracle value for " + run.name);
        if (it == expected.end()) continue;
        ++runs;
        worst = std::max(worst, std::abs(*r.probability - std::get<2>(*it)));
      }
    } catch (const Error& e) {
      o.require(false, entry.path().filename().string() + ": " + e.what());
    }
  }
  o.require(programs >= 8, ">= 8 programs");
  o.require(runs == expected.size(), "every oracle value checked");
  o.require(worst <= 1e-10, "values within 1e-10");

  const fs::path neg = qc / "negative";
  const Json want = read_json_file(neg / "expected.json");
  std::size_t negatives = 0;
  for (const auto& [file, w] : want.items()) {
    ++negatives;
    std::ostringstream out, err;
    const int code = cli::run({"run", (neg / file).string()}, out, err);
    const std::string tag = "error[" + w["kind"].get<std::string>() + "]";
    const std::string where = "line " + std::to_string(w["line"].get<int>()) + ", column " +
                              std::to_string(w["column"].get<int>());
    o.require(code == w["exit"].get<int>() && err.str().find(tag) != std::string::npos &&
                  err.str().find(where) != std::string::npos,
              file + " reports " + tag + " at " + where);
  }
  o.require(negatives >= 5, ">= 5 negative programs");
  o.detail << " " << programs << " programs, " << runs << " runs, worst " << fmt(worst) << "; "
           << negatives << " negative programs;";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "purity unfalsifiability", 10, purity},
      {2, "max-entanglement unfalsifiability", 30, max_entanglement},
      {3, "atomicity and isometricity reductions", 10, reductions},
      {4, "marginal-of-pure unfalsifiability", 20, marginal_of_pure},
      {5, "N-copy probe", 30, n_copies},
      {6, "dilation round trip", 20, dilation},
      {7, "purification", 5, purification},
      {8, "representation round trips", 5, representations},
      {9, "Monte-Carlo convergence", 60, monte_carlo},
      {10, "circuit DSL corpus", 5, dsl},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < c.budget_seconds, "runtime under " + fmt(c.budget_seconds) + " s");
    failures += !o.pass;
    std::printf("%s criterion %d: %s (%.2f s)%s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, secs,
                o.detail.str().c_str());
  }
  return failures == 0 ? 0 : 1;
}
