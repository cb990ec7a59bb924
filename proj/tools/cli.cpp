#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qfals/circuit.hpp"
#include "qfals/dilation.hpp"
#include "qfals/error.hpp"
#include "qfals/falsification.hpp"
#include "qfals/io.hpp"

namespace qfals::cli {

namespace {

constexpr std::size_t kMaxTotalDim = 64;
constexpr double kSearchTol = 1e-8;
constexpr double kRoundTripTol = 1e-10;
constexpr double kMonteCarloTol = 0.05;
// The search on a Choi state of dimension D works in D^2 real dimensions;
// beyond D = 16 unitary realization only runs the witness.
constexpr std::size_t kMaxSearchChoiDim = 16;

const char* kNCopyNote =
    "N-copy purity: the unfalsifiability of purity is sometimes claimed to extend "
    "unchanged to N > 1 copies. The computed cone contradicts this for N >= 2: the "
    "antisymmetric projector has zero chance on every product psi^(x)N yet positive "
    "chance on the maximally mixed average. The cone is reported, the claim is not "
    "asserted.";

const char* kTwirlNote =
    "Twirl convention: values are the normalized Haar average, I/d_k (x) Tr_k X. "
    "The convention with an unnormalized maximally entangled vector is larger by "
    "the factor d_k reported as unnormalized_factor.";

struct Options {
  std::size_t dim = 2;
  std::size_t copies = 2;
  std::size_t din = 2;
  std::size_t dout = 2;
  std::size_t outcomes = 2;
  std::size_t env_dim = 0;  // 0: same as the system
  double tol = Tolerance{}.value;
  std::uint64_t seed = 0;
  std::size_t samples = 2000;
  std::size_t threads = 1;
  std::size_t max_iter = 5000;
  std::string json_out;
  std::string state_file;
  std::string effect_file;
  std::string instrument_file;
  std::string family;
  std::string theorem;
  std::string circuit_file;
  std::string run_name;
  std::optional<double> expect;
  std::vector<std::size_t> dims;
  std::size_t factor = 0;
  std::size_t mc = 0;
  bool analytic_only = false;
  double max_error = kMonteCarloTol;
};

class Report {
 public:
  Report(const std::vector<std::string>& args, const Options& o) {
    j_["command"] = args;
    j_["seed"] = o.seed;
    j_["threads"] = o.threads;
    j_["tolerances"] = Json{{"tol", o.tol},
                            {"hermitian", kHermitianTol},
                            {"psd", kPsdTol},
                            {"search", kSearchTol},
                            {"round_trip", kRoundTripTol}};
    j_["timing"] = Json{{"wall_seconds", 0.0}};
    j_["checks"] = Json::array();
    j_["payload"] = Json::object();
    j_["notes"] = Json::array();
  }

  void check(const std::string& name, bool pass, std::optional<double> residual = {},
             std::optional<double> threshold = {}) {
    Json c{{"name", name}, {"pass", pass}, {"residual", nullptr}, {"threshold", nullptr}};
    if (residual) c["residual"] = *residual;
    if (threshold) c["threshold"] = *threshold;
    j_["checks"].push_back(std::move(c));
  }

  void note(const std::string& text) { j_["notes"].push_back(text); }
  Json& payload() { return j_["payload"]; }

  bool passed() const {
    return std::all_of(j_["checks"].begin(), j_["checks"].end(),
                       [](const Json& c) { return c["pass"].get<bool>(); });
  }

  Json finish(double seconds) {
    j_["timing"]["wall_seconds"] = seconds;
    j_["status"] = passed() ? "pass" : "fail";
    return j_;
  }

 private:
  Json j_;
};

void summarize(const Json& report, const std::string& title, std::ostream& out) {
  out << title << '\n';
  for (const auto& c : report["checks"]) {
    out << "  " << (c["pass"].get<bool>() ? "PASS" : "FAIL") << "  " << c["name"].get<std::string>();
    if (!c["residual"].is_null()) {
      out << "  residual=" << std::setprecision(6) << c["residual"].get<double>();
    }
    if (!c["threshold"].is_null()) out << " (<= " << c["threshold"].get<double>() << ")";
    out << '\n';
  }
  for (const auto& n : report["notes"]) out << "  note: " << n.get<std::string>() << '\n';
  out << "status: " << report["status"].get<std::string>() << '\n';
}

void require_total_dim(std::size_t total) {
  if (total == 0 || total > kMaxTotalDim) {
    fail(ErrorKind::InvalidArgument, "total dimension " + std::to_string(total) +
                                         " outside the supported range 1.." +
                                         std::to_string(kMaxTotalDim));
  }
}

State load_state(const std::string& path) { return state_from_json(read_json_file(path)); }

/// The state used for marginal-of-pure: from --state, else a seeded random
/// full-rank density matrix.
ComplexMatrix marginal_rho(const Options& o) {
  if (!o.state_file.empty()) return load_state(o.state_file).matrix();
  Rng rng = Rng(o.seed).split(3);
  return random_density(o.dim, rng);
}

HypothesisFamily make_family(const std::string& name, const Options& o) {
  if (name == "purity") return HypothesisFamily(Purity{o.dim});
  if (name == "purity-ncopies") return HypothesisFamily(PurityNCopies{o.dim, o.copies});
  if (name == "atomicity") return HypothesisFamily(AtomicTransformation{o.din, o.dout});
  if (name == "max-entanglement") return HypothesisFamily(MaxEntangled{o.din, o.dout});
  if (name == "isometricity") return HypothesisFamily(IsometricTransformation{o.din, o.dout});
  if (name == "marginal-of-pure") {
    const ComplexMatrix rho = marginal_rho(o);
    const auto d = static_cast<std::size_t>(rho.rows());
    return HypothesisFamily(MarginalOfPure{rho, o.env_dim == 0 ? d : o.env_dim});
  }
  if (name == "state-support") {
    if (o.state_file.empty()) fail(ErrorKind::InvalidArgument, "state-support needs --state");
    const State s = load_state(o.state_file);
    return HypothesisFamily(StateSupport{support_projector(s.matrix(), o.tol)});
  }
  fail(ErrorKind::InvalidArgument, "unknown family '" + name + "'");
}

SearchOptions search_options(const Options& o) {
  SearchOptions s;
  s.tol = kSearchTol;
  s.max_iter = o.max_iter;
  return s;
}

Json search_json(const SearchReport& r) {
  Json j{{"converged", r.converged},
         {"verified", r.verified},
         {"residual", r.residual},
         {"iterations", r.iterations},
         {"span_dim", r.span_dim},
         {"hermitian_dim", r.hermitian_dim},
         {"max_violation", r.converged ? Json(r.max_violation) : Json(nullptr)},
         {"result", r.falsifier ? "falsifier found"
                                : "no falsifier found up to residual " + std::to_string(r.residual)}};
  if (r.reduced_effect) j["reduced_effect"] = to_json(*r.reduced_effect);
  return j;
}

/// Witness (analytic and Monte-Carlo), search, and the family-specific checks.
void verify_family(const std::string& theorem, const HypothesisFamily& h, const Options& o,
                   Report& rep) {
  require_total_dim(h.dim());
  Rng analytic_rng(o.seed);
  const WitnessVerdict w = witness_unfalsifiable(h, AverageMethod::Analytic, 0, analytic_rng, o.tol);
  Rng mc_rng(o.seed);
  const State mc = family_average(h, AverageMethod::MonteCarlo, o.samples, mc_rng, o.threads);
  const double mc_err = max_abs_entry(mc.matrix() - w.average_state.matrix());
  rep.check("monte-carlo-average-agrees", mc_err <= kMonteCarloTol, mc_err, kMonteCarloTol);

  Rng search_rng = Rng(o.seed).split(1);
  const SearchReport s = falsifier_search(h, search_rng, search_options(o));
  const bool consistent = w.unfalsifiable ? !s.falsifier.has_value() : s.falsifier.has_value();
  rep.check("witness-and-search-agree", consistent);

  Json& p = rep.payload();
  p["verdict"] = verdict_json(h, w, &s);
  p["monte_carlo"] = Json{{"samples", o.samples},
                          {"seed", o.seed},
                          {"threads", o.threads},
                          {"lambda_min", lambda_min(mc.matrix())},
                          {"max_abs_error", mc_err}};
  p["search"] = search_json(s);

  if (s.falsifier) {
    // Zero on the family average by construction; the maximally mixed state
    // lies outside the family and must be caught with positive chance.
    const double on_mixed = s.falsifier->falsifier().matrix().trace().real() /
                            static_cast<double>(h.dim());
    rep.check("falsifier-fires-on-maximally-mixed", on_mixed > o.tol, on_mixed);
    p["chance_on_maximally_mixed"] = on_mixed;
  }

  if (theorem == "purity-ncopies" && o.copies > 1) rep.note(kNCopyNote);

  if (const auto reduced = h.choi_reduction()) {
    Rng r(o.seed);
    const WitnessVerdict wr = witness_unfalsifiable(*reduced, AverageMethod::Analytic, 0, r, o.tol);
    const double diff = std::abs(wr.lambda_min - w.lambda_min);
    rep.check("choi-reduction-agrees", diff <= 1e-12, diff, 1e-12);
    p["choi_reduction"] = Json{{"family", reduced->name()}, {"lambda_min", wr.lambda_min}};
  }

  if (const auto* m = std::get_if<MaxEntangled>(&h.tag())) {
    ComplexMatrix v = ComplexMatrix::Identity(static_cast<Eigen::Index>(m->dim_a),
                                              static_cast<Eigen::Index>(m->dim_b));
    const State phi = max_entangled_from_isometry(v);
    const std::size_t dims[] = {m->dim_a, m->dim_b};
    const double err = max_abs_entry(twirl_analytic(phi.matrix(), dims, 0) -
                                     identity(h.dim()) / static_cast<double>(h.dim()));
    rep.check("twirl-of-max-entangled-is-maximally-mixed", err <= 1e-12, err, 1e-12);
  }

  if (const auto* m = std::get_if<MarginalOfPure>(&h.tag())) {
    const double expected = lambda_min(m->rho) / static_cast<double>(m->env_dim);
    const double diff = std::abs(w.lambda_min - std::max(expected, 0.0));
    rep.check("witness-matches-spectrum", diff <= 1e-10, diff, 1e-10);
    p["rho"] = to_json(m->rho);
    if (w.residual_support_falsifier) {
      const Subspace k = support_projector(m->rho, o.tol);
      const double err = hs_distance(w.residual_support_falsifier->falsifier().matrix(),
                                     k.complement().projector());
      rep.check("residual-support-falsifier", err <= 1e-8, err, 1e-8);
      p["residual_support_falsifier"] = to_json(w.residual_support_falsifier->falsifier().matrix());
    }
  }
}

void verify_unitary_realization(const Options& o, Report& rep) {
  require_total_dim(o.din * o.dout * o.outcomes);
  Rng rng = Rng(o.seed).split(2);
  const Instrument inst = random_instrument(System{"A", o.din}, System{"B", o.dout}, o.outcomes, 1, rng);
  const DilationResult d = stinespring_dilate(inst);
  const Instrument back = instrument_from_dilation(d, inst.input());
  double worst = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    worst = std::max(worst, hs_distance(inst.operation(i).choi(), back.operation(i).choi()));
  }
  rep.check("dilation-round-trip", worst <= kRoundTripTol, worst, kRoundTripTol);
  const auto n = d.unitary.rows();
  const double unitarity = (d.unitary.adjoint() * d.unitary - ComplexMatrix::Identity(n, n)).norm();
  rep.check("interaction-is-unitary", unitarity <= kRoundTripTol, unitarity, kRoundTripTol);

  Json& p = rep.payload();
  p["instrument"] = to_json(inst);
  p["dilation"] = to_json(d);

  // Unitarity of the interaction is unfalsifiable: witness on its Choi family.
  const auto total = static_cast<std::size_t>(n);
  const HypothesisFamily h(IsometricTransformation{total, total});
  Rng wr(o.seed);
  const WitnessVerdict w = witness_unfalsifiable(h, AverageMethod::Analytic, 0, wr, o.tol);
  rep.check("unitarity-witness", w.unfalsifiable, w.lambda_min);
  if (total * total <= kMaxSearchChoiDim) {
    Rng sr = Rng(o.seed).split(1);
    const SearchReport s = falsifier_search(h, sr, search_options(o));
    rep.check("witness-and-search-agree", !s.falsifier.has_value());
    p["verdict"] = verdict_json(h, w, &s);
    p["search"] = search_json(s);
  } else {
    p["verdict"] = verdict_json(h, w, nullptr);
    rep.note("search skipped: Choi dimension " + std::to_string(total * total) + " exceeds " +
             std::to_string(kMaxSearchChoiDim) + "; the witness alone decides");
  }
}

void cmd_verify(const Options& o, Report& rep) {
  if (o.theorem == "unitary-realization") {
    verify_unitary_realization(o, rep);
  } else {
    verify_family(o.theorem, make_family(o.theorem, o), o, rep);
  }
}

void cmd_purify(const Options& o, Report& rep) {
  if (o.state_file.empty()) fail(ErrorKind::InvalidArgument, "purify needs --state FILE");
  const State rho = load_state(o.state_file);
  const auto res = purify(rho, o.env_dim == 0 ? std::nullopt : std::optional<std::size_t>(o.env_dim));
  const std::size_t dims[] = {rho.system().dim, res.environment.dim};
  const std::size_t keep_a[] = {0};
  const double marginal_err =
      hs_distance(partial_trace(res.pure_state.matrix(), dims, keep_a), rho.matrix());
  const auto eig = eig_hermitian(res.pure_state.matrix());
  const double second = eig.values.size() > 1 ? std::abs(eig.values[1]) : 0.0;
  rep.check("marginal-reproduces-state", marginal_err <= 1e-12, marginal_err, 1e-12);
  rep.check("output-is-pure", second <= 1e-12, second, 1e-12);
  Json& p = rep.payload();
  p["pure_state"] = to_json(res.pure_state);
  p["environment_dim"] = res.environment.dim;
  p["isometry"] = to_json(res.isometry_used);
  p["schmidt_coefficients"] = res.schmidt_coefficients;
}

void cmd_dilate(const Options& o, Report& rep) {
  std::optional<Instrument> inst;
  if (!o.instrument_file.empty()) {
    inst = instrument_from_json(read_json_file(o.instrument_file));
  } else {
    require_total_dim(o.din * o.dout * o.outcomes);
    Rng rng = Rng(o.seed).split(2);
    inst = random_instrument(System{"A", o.din}, System{"B", o.dout}, o.outcomes, 1, rng);
  }
  const DilationResult d = stinespring_dilate(*inst);
  const Instrument back = instrument_from_dilation(d, inst->input());
  double worst = 0.0;
  for (std::size_t i = 0; i < inst->size(); ++i) {
    worst = std::max(worst, hs_distance(inst->operation(i).choi(), back.operation(i).choi()));
  }
  const auto n = d.unitary.rows();
  const double unitarity = (d.unitary.adjoint() * d.unitary - ComplexMatrix::Identity(n, n)).norm();
  rep.check("dilation-round-trip", worst <= kRoundTripTol, worst, kRoundTripTol);
  rep.check("interaction-is-unitary", unitarity <= kRoundTripTol, unitarity, kRoundTripTol);
  rep.payload()["instrument"] = to_json(*inst);
  rep.payload()["dilation"] = to_json(d);
}

void cmd_twirl(const Options& o, Report& rep) {
  std::vector<std::size_t> dims = o.dims.empty() ? std::vector<std::size_t>{o.din, o.dout} : o.dims;
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  require_total_dim(total);
  ComplexMatrix x;
  if (!o.state_file.empty()) {
    x = load_state(o.state_file).matrix();
  } else {
    if (dims.size() != 2 || dims[0] < dims[1]) {
      fail(ErrorKind::InvalidArgument, "twirl without --state needs two dims with d_A >= d_B");
    }
    x = max_entangled_from_isometry(ComplexMatrix::Identity(static_cast<Eigen::Index>(dims[0]),
                                                            static_cast<Eigen::Index>(dims[1])))
            .matrix();
  }
  if (o.factor >= dims.size()) fail(ErrorKind::InvalidArgument, "--factor out of range");
  const ComplexMatrix analytic = twirl_analytic(x, dims, o.factor);
  Json& p = rep.payload();
  p["dims"] = dims;
  p["factor"] = o.factor;
  p["input"] = to_json(x);
  p["analytic"] = to_json(analytic);
  p["unnormalized_factor"] = dims[o.factor];
  rep.note(kTwirlNote);
  if (o.mc > 0 && !o.analytic_only) {
    Rng rng(o.seed);
    const ComplexMatrix mc = twirl_monte_carlo(x, dims, o.factor, o.mc, rng, o.threads);
    const double err = hs_distance(mc, analytic);
    p["monte_carlo"] = to_json(mc);
    p["samples"] = o.mc;
    p["hs_error"] = err;
    rep.check("monte-carlo-twirl-agrees", err <= o.max_error, err, o.max_error);
  }
  const double tr_err = std::abs((analytic - x).trace());
  rep.check("twirl-preserves-trace", tr_err <= 1e-12, tr_err, 1e-12);
}

void cmd_falsify(const Options& o, Report& rep) {
  const HypothesisFamily h = make_family(o.family, o);
  require_total_dim(h.dim());
  Json& p = rep.payload();
  if (!o.effect_file.empty()) {
    const Effect f = effect_from_json(read_json_file(o.effect_file));
    if (f.system().dim != h.dim()) {
      fail(ErrorKind::DimensionMismatch, "effect dimension " + std::to_string(f.system().dim) +
                                             " != family dimension " + std::to_string(h.dim()));
    }
    const FalsificationTest t(f, h.name());
    Rng rng(o.seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < o.samples; ++i) {
      worst = std::max(worst, falsification_chance(t, h.sample(rng)));
    }
    for (const auto& s : h.spanning_set()) worst = std::max(worst, falsification_chance(t, s));
    rep.check("effect-never-fires-on-family", worst <= 10.0 * kSearchTol, worst, 10.0 * kSearchTol);
    p["family"] = h.name();
    p["effect"] = to_json(f.matrix());
    p["max_chance_on_family"] = worst;
    p["samples"] = o.samples;
    return;
  }
  Rng wr(o.seed);
  const WitnessVerdict w = witness_unfalsifiable(h, AverageMethod::Analytic, 0, wr, o.tol);
  Rng sr = Rng(o.seed).split(1);
  const SearchReport s = falsifier_search(h, sr, search_options(o));
  if (s.falsifier) {
    rep.check("falsifier-verified", s.verified, s.max_violation, 10.0 * kSearchTol);
  }
  p["verdict"] = verdict_json(h, w, &s);
  p["search"] = search_json(s);
  if (o.family == "purity-ncopies" && o.copies > 1) rep.note(kNCopyNote);
}

void cmd_run(const Options& o, Report& rep, std::ostream& err, bool& input_invalid) {
  std::ifstream in(o.circuit_file);
  if (!in) fail(ErrorKind::FileIo, "cannot open " + o.circuit_file);
  std::stringstream buf;
  buf << in.rdbuf();
  circuit::Program prog = circuit::parse(buf.str());
  auto checked = circuit::typecheck(std::move(prog),
                                    std::filesystem::path(o.circuit_file).parent_path());
  if (!checked.typed) {
    for (const auto& d : checked.errors) {
      err << o.circuit_file << ": " << circuit::format_span(d.span) << ": error["
          << to_string(d.kind) << "]: " << d.message << '\n';
    }
    rep.payload()["errors"] = Json::array();
    for (const auto& d : checked.errors) {
      rep.payload()["errors"].push_back(Json{{"kind", std::string(to_string(d.kind))},
                                             {"line", d.span.line},
                                             {"column", d.span.column},
                                             {"message", d.message}});
    }
    input_invalid = true;
    return;
  }
  const auto& typed = *checked.typed;
  Json results = Json::array();
  std::optional<double> first_probability;
  bool found = o.run_name.empty();
  for (const auto& r : typed.runs) {
    if (!o.run_name.empty() && r.name != o.run_name) continue;
    found = true;
    const auto res = circuit::evaluate(typed, r.name);
    if (res.probability) {
      if (!first_probability) first_probability = *res.probability;
      results.push_back(Json{{"run", r.name}, {"kind", "probability"}, {"value", *res.probability}});
    } else {
      results.push_back(Json{{"run", r.name}, {"kind", "state"}, {"value", to_json(*res.state)}});
    }
  }
  if (!found) fail(ErrorKind::UnknownIdentifier, "no run named '" + o.run_name + "'");
  rep.payload()["results"] = results;
  if (o.expect) {
    const double diff = first_probability ? std::abs(*first_probability - *o.expect)
                                          : std::numeric_limits<double>::infinity();
    rep.check("probability-matches-expectation", diff <= 1e-10, diff, 1e-10);
  }
}

double default_tol() {
  if (const char* env = std::getenv("QFALS_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && *end == '\0' && std::isfinite(v) && v > 0.0) return v;
  }
  return Tolerance{}.value;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Falsifiability checks for quantum hypotheses", "qfals"};
  app.require_subcommand(1);
  Options o;
  o.tol = default_tol();

  auto common = [&](CLI::App* sub) {
    sub->add_option("--tol", o.tol, "Witness tolerance (default 1e-9 or $QFALS_TOL)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "Random seed (default 0)");
    sub->add_option("--samples", o.samples, "Monte-Carlo samples")->check(CLI::PositiveNumber);
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--json", o.json_out, "Write the report to this file");
  };
  auto dims = [&](CLI::App* sub) {
    sub->add_option("--dim", o.dim, "System dimension")->check(CLI::PositiveNumber);
    sub->add_option("--copies", o.copies, "Number of copies")->check(CLI::PositiveNumber);
    sub->add_option("--din", o.din, "Input dimension")->check(CLI::PositiveNumber);
    sub->add_option("--dout", o.dout, "Output dimension")->check(CLI::PositiveNumber);
    sub->add_option("--env-dim", o.env_dim, "Environment dimension");
    sub->add_option("--state", o.state_file, "State JSON file");
    sub->add_option("--max-iter", o.max_iter, "Search iteration cap")->check(CLI::PositiveNumber);
  };
  const std::vector<std::string> theorems{"purity", "purity-ncopies", "atomicity",
                                          "max-entanglement", "isometricity",
                                          "marginal-of-pure", "unitary-realization"};
  std::vector<std::string> families(theorems.begin(), theorems.end() - 1);
  families.push_back("state-support");

  auto* verify = app.add_subcommand("verify", "Witness + search for one unfalsifiability theorem");
  verify->add_option("theorem", o.theorem, "Theorem name")->required()->check(CLI::IsMember(theorems));
  dims(verify);
  verify->add_option("--outcomes", o.outcomes, "Instrument outcomes")->check(CLI::PositiveNumber);
  common(verify);

  auto* purify_cmd = app.add_subcommand("purify", "Purify a state");
  purify_cmd->add_option("--state", o.state_file, "State JSON file")->required();
  purify_cmd->add_option("--env-dim", o.env_dim, "Environment dimension");
  common(purify_cmd);

  auto* dilate = app.add_subcommand("dilate", "Unitary dilation of an instrument");
  dilate->add_option("--instrument", o.instrument_file, "Instrument JSON file");
  dilate->add_option("--din", o.din, "Input dimension (random instrument)")->check(CLI::PositiveNumber);
  dilate->add_option("--dout", o.dout, "Output dimension (random instrument)")->check(CLI::PositiveNumber);
  dilate->add_option("--outcomes", o.outcomes, "Outcomes (random instrument)")->check(CLI::PositiveNumber);
  common(dilate);

  auto* twirl = app.add_subcommand("twirl", "Haar twirl on one tensor factor");
  twirl->add_option("--state", o.state_file, "State JSON file");
  twirl->add_option("--dims", o.dims, "Factor dimensions")->delimiter(',');
  twirl->add_option("--din", o.din, "First factor dimension")->check(CLI::PositiveNumber);
  twirl->add_option("--dout", o.dout, "Second factor dimension")->check(CLI::PositiveNumber);
  twirl->add_option("--factor", o.factor, "Index of the twirled factor");
  twirl->add_option("--mc", o.mc, "Monte-Carlo samples to compare against the exact twirl");
  twirl->add_flag("--analytic", o.analytic_only, "Exact twirl only");
  twirl->add_option("--max-error", o.max_error, "Allowed HS error of the Monte-Carlo twirl");
  common(twirl);

  auto* falsify = app.add_subcommand("falsify", "Search for, or check, a falsifier of a family");
  falsify->add_option("family", o.family, "Family name")->required()->check(CLI::IsMember(families));
  dims(falsify);
  falsify->add_option("--effect", o.effect_file, "Check this effect instead of searching");
  common(falsify);

  auto* run_cmd = app.add_subcommand("run", "Evaluate a circuit program");
  run_cmd->add_option("file", o.circuit_file, "Program (.qc)")->required();
  run_cmd->add_option("--run", o.run_name, "Only this run");
  run_cmd->add_option("--expect", o.expect, "Expected probability of the (first) run");
  common(run_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  Report rep(args, o);
  const auto start = std::chrono::steady_clock::now();
  bool input_invalid = false;
  try {
    const std::string& name = active->get_name();
    if (name == "verify") cmd_verify(o, rep);
    if (name == "purify") cmd_purify(o, rep);
    if (name == "dilate") cmd_dilate(o, rep);
    if (name == "twirl") cmd_twirl(o, rep);
    if (name == "falsify") cmd_falsify(o, rep);
    if (name == "run") cmd_run(o, rep, err, input_invalid);
  } catch (const circuit::SourceError& e) {
    err << o.circuit_file << ": " << circuit::format_span(e.span()) << ": error["
        << to_string(e.kind()) << "]: " << e.message() << '\n';
    return kInputInvalid;
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return kInputInvalid;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const Json report = rep.finish(seconds);
  try {
    if (!o.json_out.empty()) write_json_file(o.json_out, report);
  } catch (const Error& e) {
    err << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return kInputInvalid;
  }
  if (input_invalid) return kInputInvalid;
  std::string title = "qfals";
  for (const auto& a : args) title += " " + a;
  summarize(report, title, out);
  return rep.passed() ? kOk : kCheckFailed;
}

}  // namespace qfals::cli
