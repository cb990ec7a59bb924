#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "qfals/dilation.hpp"
#include "qfals/falsification.hpp"
#include "qfals/model.hpp"

namespace qfals {

using Json = nlohmann::ordered_json;

// Matrices travel as {"rows": n, "cols": m, "data": [[re, im], ...]} in
// row-major order. Doubles are printed shortest-round-trip, so a dump and
// reload reproduces every bit.
Json to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);

Json to_json(const System& s);
/// Accepts {"label", "dim"} or a bare label string (then dim_hint is used).
System system_from_json(const Json& j, std::optional<std::size_t> dim_hint = std::nullopt);

Json to_json(const State& s);
Json to_json(const Effect& e);
Json to_json(const QuantumOperation& op);
Json to_json(const Instrument& inst);
Json to_json(const DilationResult& d);

State state_from_json(const Json& j);
Effect effect_from_json(const Json& j);
QuantumOperation operation_from_json(const Json& j);
/// {"input", "output", "outcomes": [{"label", "kraus": [...]}, ...]}
Instrument instrument_from_json(const Json& j);

/// Verdict record: family, method, samples, seed, lambda_min,
/// unfalsifiable, falsifier (matrix or null), search_residual and
/// max_violation_on_fresh_samples (null when no search ran).
Json verdict_json(const HypothesisFamily& h, const WitnessVerdict& w,
                  const SearchReport* search);

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace qfals
