#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qfals/error.hpp"
#include "qfals/model.hpp"

namespace qfals::circuit {

/// Source position, 1-based. Positions never take part in AST equality, so
/// a reparsed pretty-print compares equal to the original.
struct Span {
  std::size_t line = 1;
  std::size_t column = 1;
  friend bool operator==(const Span&, const Span&) { return true; }
};

std::string format_span(const Span& s);

/// Error tied to a source position: syntax errors, and numerical validation
/// failures reported against the declaration that caused them.
class SourceError : public Error {
 public:
  SourceError(ErrorKind kind, Span span, const std::string& message)
      : Error(kind, format_span(span) + ": " + message), span_(span), message_(message) {}

  const Span& span() const noexcept { return span_; }
  const std::string& message() const noexcept { return message_; }

 private:
  Span span_;
  std::string message_;
};

struct SystemDecl {
  std::string name;
  std::size_t dim = 1;
  Span span;
  bool operator==(const SystemDecl&) const = default;
};

enum class BoxKind { State, Channel, Effect, Instrument };

enum class InitKind {
  MaxMix,     // state
  Pure,       // state, amplitudes in `vector`
  File,       // state / effect / instrument
  Identity,   // channel
  KrausFile,  // channel
  Total,      // effect
  Projector,  // effect, projector onto span of `vector`
};

struct Initializer {
  InitKind kind = InitKind::MaxMix;
  std::vector<std::complex<double>> vector;
  std::string path;
  bool operator==(const Initializer&) const = default;
};

struct BoxDecl {
  BoxKind kind = BoxKind::State;
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  Initializer init;
  Span span;
  bool operator==(const BoxDecl&) const = default;
};

struct Expr {
  enum class Kind { Ref, Seq, Par };
  Kind kind = Kind::Ref;
  std::string name;                    // Ref
  std::optional<std::size_t> outcome;  // Ref on an instrument
  std::shared_ptr<const Expr> lhs;     // Seq: applied first / Par: top
  std::shared_ptr<const Expr> rhs;
  Span span;

  friend bool operator==(const Expr& a, const Expr& b);
};

struct RunDecl {
  std::string name;
  Expr expr;
  Span span;
  bool operator==(const RunDecl&) const = default;
};

using Statement = std::variant<SystemDecl, BoxDecl, RunDecl>;

struct Program {
  std::vector<Statement> statements;
  bool operator==(const Program&) const = default;

  std::size_t count_systems() const;
  std::size_t count_boxes(BoxKind k) const;
  std::size_t count_runs() const;
};

/// Throws Error(Syntax | UnknownKeyword | DuplicateIdentifier) with the
/// offending position in the message.
Program parse(std::string_view source);
std::string pretty_print(const Program& p);

struct Diagnostic {
  ErrorKind kind;
  Span span;
  std::string message;
};

/// Wire-level type of an expression: ordered input and output system lists.
struct WireType {
  std::vector<System> inputs;
  std::vector<System> outputs;
};

struct TypedRun {
  std::string name;
  Expr expr;
  WireType type;
  bool is_probability() const { return type.outputs.empty(); }
};

struct TypedProgram {
  Program program;
  std::filesystem::path base_dir;  // resolves relative file paths
  std::vector<TypedRun> runs;
};

struct TypecheckResult {
  std::optional<TypedProgram> typed;
  std::vector<Diagnostic> errors;
};

TypecheckResult typecheck(Program p, std::filesystem::path base_dir = {});

struct RunResult {
  std::string run;
  std::optional<double> probability;
  std::optional<State> state;
};

/// Folds the run into one operation out of the trivial system and applies
/// the Born rule. Numerical validation errors carry the declaration span.
RunResult evaluate(const TypedProgram& p, const std::string& run);
/// The operation a run folds to (input is the trivial system).
QuantumOperation fold(const TypedProgram& p, const std::string& run);

/// Number of outcomes of a declared instrument (loads its file).
std::size_t instrument_outcomes(const TypedProgram& p, const std::string& name);

}  // namespace qfals::circuit
