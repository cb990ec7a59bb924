#include "qfals/io.hpp"

#include <fstream>
#include <sstream>

#include "qfals/error.hpp"

namespace qfals {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorKind::BadJson, std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

std::size_t as_size(const Json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    fail(ErrorKind::BadJson, std::string(what) + " must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

/// Matrix carried either directly or under a "matrix" key.
const Json& matrix_node(const Json& j) {
  return (j.is_object() && j.contains("matrix")) ? j.at("matrix") : j;
}

System system_for(const Json& j, const ComplexMatrix& m, const char* fallback) {
  if (j.is_object() && j.contains("system")) {
    return system_from_json(j.at("system"), static_cast<std::size_t>(m.rows()));
  }
  return System{fallback, static_cast<std::size_t>(m.rows())};
}

KrausSet kraus_from_json(const Json& j) {
  const Json& list = j.is_array() ? j : field(j, "kraus");
  if (!list.is_array()) fail(ErrorKind::BadJson, "kraus must be an array of matrices");
  KrausSet out;
  for (const auto& k : list) out.push_back(matrix_from_json(k));
  return out;
}

}  // namespace

Json to_json(const ComplexMatrix& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      data.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    }
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

ComplexMatrix matrix_from_json(const Json& j) {
  const auto rows = static_cast<Eigen::Index>(as_size(field(j, "rows"), "rows"));
  const auto cols = static_cast<Eigen::Index>(as_size(field(j, "cols"), "cols"));
  const Json& data = field(j, "data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    fail(ErrorKind::BadJson, "matrix data must hold rows*cols entries");
  }
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows * cols; ++i) {
    const Json& e = data[static_cast<std::size_t>(i)];
    if (e.is_number()) {
      m(i / cols, i % cols) = Complex(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      m(i / cols, i % cols) = Complex(e[0].get<double>(), e[1].get<double>());
    } else {
      fail(ErrorKind::BadJson, "matrix entry must be [re, im]");
    }
  }
  require_finite(m, "matrix");
  return m;
}

Json to_json(const System& s) { return Json{{"label", s.label}, {"dim", s.dim}}; }

System system_from_json(const Json& j, std::optional<std::size_t> dim_hint) {
  if (j.is_string()) {
    if (!dim_hint) fail(ErrorKind::BadJson, "system label without dimension");
    return System{j.get<std::string>(), *dim_hint};
  }
  const Json& label = field(j, "label");
  if (!label.is_string()) fail(ErrorKind::BadJson, "system label must be a string");
  return System{label.get<std::string>(), as_size(field(j, "dim"), "dim")};
}

Json to_json(const State& s) {
  return Json{{"system", to_json(s.system())}, {"matrix", to_json(s.matrix())}};
}

Json to_json(const Effect& e) {
  return Json{{"system", to_json(e.system())}, {"matrix", to_json(e.matrix())}};
}

Json to_json(const QuantumOperation& op) {
  Json kraus = Json::array();
  for (const auto& k : op.kraus()) kraus.push_back(to_json(k));
  return Json{{"input", to_json(op.input())},
              {"output", to_json(op.output())},
              {"kraus", std::move(kraus)}};
}

Json to_json(const Instrument& inst) {
  Json outcomes = Json::array();
  for (std::size_t i = 0; i < inst.size(); ++i) {
    Json kraus = Json::array();
    for (const auto& k : inst.operation(i).kraus()) kraus.push_back(to_json(k));
    outcomes.push_back(Json{{"label", inst.label(i)}, {"kraus", std::move(kraus)}});
  }
  return Json{{"input", to_json(inst.input())},
              {"output", to_json(inst.output())},
              {"outcomes", std::move(outcomes)}};
}

Json to_json(const DilationResult& d) {
  Json pvm = Json::array();
  for (const auto& z : d.pvm) pvm.push_back(to_json(z.matrix()));
  Json blocks = Json::array();
  for (const auto& [outcome, k] : d.block_map) blocks.push_back(Json::array({outcome, k}));
  return Json{{"unitary", to_json(d.unitary)},
              {"ancilla_dim", d.ancilla.dim},
              {"ancilla_state", to_json(d.ancilla_state.matrix())},
              {"pvm", std::move(pvm)},
              {"block_map", std::move(blocks)}};
}

State state_from_json(const Json& j) {
  const ComplexMatrix m = matrix_from_json(matrix_node(j));
  return State(system_for(j, m, "A"), m);
}

Effect effect_from_json(const Json& j) {
  const ComplexMatrix m = matrix_from_json(matrix_node(j));
  return Effect(system_for(j, m, "A"), m);
}

QuantumOperation operation_from_json(const Json& j) {
  KrausSet kraus = kraus_from_json(j);
  if (kraus.empty()) fail(ErrorKind::BadJson, "operation needs at least one Kraus operator");
  const auto din = static_cast<std::size_t>(kraus.front().cols());
  const auto dout = static_cast<std::size_t>(kraus.front().rows());
  const System in = j.is_object() && j.contains("input") ? system_from_json(j.at("input"), din)
                                                           : System{"A", din};
  const System out = j.is_object() && j.contains("output")
                         ? system_from_json(j.at("output"), dout)
                         : System{"B", dout};
  return QuantumOperation(in, out, std::move(kraus));
}

Instrument instrument_from_json(const Json& j) {
  const Json& outcomes = field(j, "outcomes");
  if (!outcomes.is_array() || outcomes.empty()) {
    fail(ErrorKind::BadJson, "instrument needs a non-empty outcomes array");
  }
  std::vector<std::string> labels;
  std::vector<QuantumOperation> ops;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const Json& o = outcomes[i];
    KrausSet kraus = kraus_from_json(o);
    if (kraus.empty()) fail(ErrorKind::BadJson, "instrument outcome without Kraus operators");
    const auto din = static_cast<std::size_t>(kraus.front().cols());
    const auto dout = static_cast<std::size_t>(kraus.front().rows());
    const System in = j.contains("input") ? system_from_json(j.at("input"), din) : System{"A", din};
    const System out =
        j.contains("output") ? system_from_json(j.at("output"), dout) : System{"B", dout};
    labels.push_back(o.is_object() && o.contains("label") && o.at("label").is_string()
                         ? o.at("label").get<std::string>()
                         : std::to_string(i));
    ops.emplace_back(in, out, std::move(kraus));
  }
  return Instrument(std::move(labels), std::move(ops));
}

Json verdict_json(const HypothesisFamily& h, const WitnessVerdict& w, const SearchReport* search) {
  Json j{{"family", h.name()},
         {"method", to_string(w.method)},
         {"samples", w.samples},
         {"seed", w.seed},
         {"lambda_min", w.lambda_min},
         {"unfalsifiable", w.unfalsifiable},
         {"falsifier", nullptr},
         {"search_residual", nullptr},
         {"max_violation_on_fresh_samples", nullptr}};
  if (search) {
    if (search->falsifier) j["falsifier"] = to_json(search->falsifier->falsifier().matrix());
    j["search_residual"] = search->residual;
    if (search->converged) j["max_violation_on_fresh_samples"] = search->max_violation;
  }
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::FileIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return Json::parse(buf.str());
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::BadJson, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::FileIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::FileIo, "write failed for " + path.string());
}

}  // namespace qfals
