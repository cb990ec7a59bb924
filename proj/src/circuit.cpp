#include "qfals/circuit.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "qfals/io.hpp"

namespace qfals::circuit {

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Expr::Kind::Ref) return a.name == b.name && a.outcome == b.outcome;
  return *a.lhs == *b.lhs && *a.rhs == *b.rhs;
}

std::string format_span(const Span& s) {
  return "line " + std::to_string(s.line) + ", column " + std::to_string(s.column);
}

std::size_t Program::count_systems() const {
  std::size_t n = 0;
  for (const auto& s : statements) n += std::holds_alternative<SystemDecl>(s);
  return n;
}

std::size_t Program::count_boxes(BoxKind k) const {
  std::size_t n = 0;
  for (const auto& s : statements) {
    if (const auto* b = std::get_if<BoxDecl>(&s)) n += b->kind == k;
  }
  return n;
}

std::size_t Program::count_runs() const {
  std::size_t n = 0;
  for (const auto& s : statements) n += std::holds_alternative<RunDecl>(s);
  return n;
}

namespace {

[[noreturn]] void fail_at(ErrorKind kind, const Span& at, const std::string& msg) {
  throw SourceError(kind, at, msg);
}

// --- lexer ---------------------------------------------------------------------

enum class Tok {
  Ident, Number, String, Colon, Comma, Equals, Arrow, Semi, Pipes,
  LParen, RParen, LBracket, RBracket, Newline, End
};

const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::String: return "string";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::Equals: return "'='";
    case Tok::Arrow: return "'->'";
    case Tok::Semi: return "';'";
    case Tok::Pipes: return "'||'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Newline: return "end of line";
    case Tok::End: return "end of input";
  }
  return "token";
}

struct Token {
  Tok kind;
  std::string text;
  Span span;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  int depth = 0;  // newlines inside () and [] are whitespace
  auto push = [&](Tok k, std::string text, Span s) { out.push_back({k, std::move(text), s}); };
  auto advance = [&](std::size_t n) {
    i += n;
    col += n;
  };
  while (i < src.size()) {
    const char c = src[i];
    const Span here{line, col};
    if (static_cast<unsigned char>(c) >= 0x80) fail_at(ErrorKind::Syntax, here, "non-ASCII character");
    if (c == '\n') {
      if (depth == 0) push(Tok::Newline, "\n", here);
      ++i;
      ++line;
      col = 1;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      advance(1);
    } else if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
    } else if (ident_start(c)) {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      push(Tok::Ident, std::string(src.substr(i, j - i)), here);
      advance(j - i);
    } else if (digit(c) || ((c == '-' || c == '+' || c == '.') && i + 1 < src.size() &&
                            (digit(src[i + 1]) || src[i + 1] == '.'))) {
      std::size_t j = i;
      if (src[j] == '-' || src[j] == '+') ++j;
      while (j < src.size() && (digit(src[j]) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        ++j;
        if (j < src.size() && (src[j] == '-' || src[j] == '+')) ++j;
        while (j < src.size() && digit(src[j])) ++j;
      }
      push(Tok::Number, std::string(src.substr(i, j - i)), here);
      advance(j - i);
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"') fail_at(ErrorKind::Syntax, here, "unterminated string");
      push(Tok::String, std::string(src.substr(i + 1, j - i - 1)), here);
      advance(j + 1 - i);
    } else if (c == '-' && i + 1 < src.size() && src[i + 1] == '>') {
      push(Tok::Arrow, "->", here);
      advance(2);
    } else if (c == '|' && i + 1 < src.size() && src[i + 1] == '|') {
      push(Tok::Pipes, "||", here);
      advance(2);
    } else {
      Tok k;
      switch (c) {
        case ':': k = Tok::Colon; break;
        case ',': k = Tok::Comma; break;
        case '=': k = Tok::Equals; break;
        case ';': k = Tok::Semi; break;
        case '(': k = Tok::LParen; ++depth; break;
        case ')': k = Tok::RParen; --depth; break;
        case '[': k = Tok::LBracket; ++depth; break;
        case ']': k = Tok::RBracket; --depth; break;
        default: fail_at(ErrorKind::Syntax, here, std::string("unexpected character '") + c + "'");
      }
      if (depth < 0) depth = 0;
      push(k, std::string(1, c), here);
      advance(1);
    }
  }
  push(Tok::End, "", Span{line, col});
  return out;
}

// --- parser --------------------------------------------------------------------

double to_double(const Token& t) {
  double v = 0.0;
  const char* first = t.text.data();
  const char* last = first + t.text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    fail_at(ErrorKind::Syntax, t.span, "malformed number '" + t.text + "'");
  }
  return v;
}

std::size_t to_count(const Token& t, const char* what) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
    fail_at(ErrorKind::Syntax, t.span, std::string(what) + " must be a non-negative integer");
  }
  return v;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program program() {
    Program p;
    for (;;) {
      while (peek().kind == Tok::Newline) ++pos_;
      if (peek().kind == Tok::End) break;
      p.statements.push_back(statement());
      const Token& t = peek();
      if (t.kind != Tok::Newline && t.kind != Tok::End) {
        fail_at(ErrorKind::Syntax, t.span,
                std::string("expected end of line, found ") + describe(t.kind));
      }
    }
    return p;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }

  const Token& expect(Tok k, const char* context) {
    const Token& t = peek();
    if (t.kind != k) {
      fail_at(ErrorKind::Syntax, t.span,
              std::string("expected ") + describe(k) + " " + context + ", found " +
                  (t.kind == Tok::Ident || t.kind == Tok::Number ? "'" + t.text + "'"
                                                                 : std::string(describe(t.kind))));
    }
    ++pos_;
    return t;
  }

  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }

  std::string declare(const Token& name) {
    if (!names_.insert(name.text).second) {
      fail_at(ErrorKind::DuplicateIdentifier, name.span, "duplicate identifier '" + name.text + "'");
    }
    return name.text;
  }

  Statement statement() {
    const Token& kw = expect(Tok::Ident, "at start of statement");
    if (kw.text == "system") {
      SystemDecl d;
      d.span = kw.span;
      d.name = declare(expect(Tok::Ident, "after 'system'"));
      const Token& dim = expect(Tok::Number, "for the system dimension");
      d.dim = to_count(dim, "dimension");
      if (d.dim == 0) fail_at(ErrorKind::Syntax, dim.span, "dimension must be at least 1");
      return d;
    }
    if (kw.text == "state" || kw.text == "channel" || kw.text == "effect" ||
        kw.text == "instrument") {
      return box(kw);
    }
    if (kw.text == "run") {
      RunDecl r;
      r.span = kw.span;
      r.name = declare(expect(Tok::Ident, "after 'run'"));
      expect(Tok::Equals, "after run name");
      r.expr = seq();
      return r;
    }
    fail_at(ErrorKind::UnknownKeyword, kw.span, "unknown keyword '" + kw.text + "'");
  }

  std::vector<std::string> system_list() {
    std::vector<std::string> out{expect(Tok::Ident, "in system list").text};
    for (;;) {
      if (accept(Tok::Comma)) {
        out.push_back(expect(Tok::Ident, "in system list").text);
      } else if (peek().kind == Tok::Ident) {
        out.push_back(toks_[pos_++].text);
      } else {
        return out;
      }
    }
  }

  std::vector<std::complex<double>> vector_literal() {
    expect(Tok::LBracket, "to open a vector");
    std::vector<std::complex<double>> out;
    do {
      const double re = to_double(expect(Tok::Number, "in vector entry"));
      double im = 0.0;
      if (accept(Tok::Comma)) im = to_double(expect(Tok::Number, "for imaginary part"));
      out.emplace_back(re, im);
    } while (accept(Tok::Semi));
    expect(Tok::RBracket, "to close a vector");
    return out;
  }

  std::string file_path() { return expect(Tok::String, "after 'file'").text; }

  Statement box(const Token& kw) {
    BoxDecl b;
    b.span = kw.span;
    b.kind = kw.text == "state"     ? BoxKind::State
             : kw.text == "channel" ? BoxKind::Channel
             : kw.text == "effect"  ? BoxKind::Effect
                                    : BoxKind::Instrument;
    b.name = declare(expect(Tok::Ident, ("after '" + kw.text + "'").c_str()));
    expect(Tok::Colon, "after declaration name");
    if (b.kind == BoxKind::State) {
      b.outputs = system_list();
    } else if (b.kind == BoxKind::Effect) {
      b.inputs = system_list();
    } else {
      b.inputs = system_list();
      expect(Tok::Arrow, "between input and output systems");
      b.outputs = system_list();
    }
    expect(Tok::Equals, "before initializer");
    const Token& init = expect(Tok::Ident, "as initializer");
    const std::string& w = init.text;
    auto unknown = [&]() -> Statement {
      fail_at(ErrorKind::UnknownKeyword, init.span,
              "unknown initializer '" + w + "' for " + kw.text);
    };
    switch (b.kind) {
      case BoxKind::State:
        if (w == "maxmix") {
          b.init.kind = InitKind::MaxMix;
        } else if (w == "pure") {
          b.init.kind = InitKind::Pure;
          b.init.vector = vector_literal();
        } else if (w == "file") {
          b.init.kind = InitKind::File;
          b.init.path = file_path();
        } else {
          return unknown();
        }
        break;
      case BoxKind::Channel:
        if (w == "id") {
          b.init.kind = InitKind::Identity;
        } else if (w == "kraus") {
          const Token& f = expect(Tok::Ident, "after 'kraus'");
          if (f.text != "file") fail_at(ErrorKind::Syntax, f.span, "expected 'file' after 'kraus'");
          b.init.kind = InitKind::KrausFile;
          b.init.path = file_path();
        } else {
          return unknown();
        }
        break;
      case BoxKind::Effect:
        if (w == "total") {
          b.init.kind = InitKind::Total;
        } else if (w == "proj") {
          b.init.kind = InitKind::Projector;
          b.init.vector = vector_literal();
        } else if (w == "file") {
          b.init.kind = InitKind::File;
          b.init.path = file_path();
        } else {
          return unknown();
        }
        break;
      case BoxKind::Instrument:
        if (w != "file") return unknown();
        b.init.kind = InitKind::File;
        b.init.path = file_path();
        break;
    }
    return b;
  }

  Expr seq() {
    Expr lhs = par();
    while (peek().kind == Tok::Semi) {
      const Span at = toks_[pos_++].span;
      Expr rhs = par();
      lhs = node(Expr::Kind::Seq, std::move(lhs), std::move(rhs), at);
    }
    return lhs;
  }

  Expr par() {
    Expr lhs = primary();
    while (peek().kind == Tok::Pipes) {
      const Span at = toks_[pos_++].span;
      Expr rhs = primary();
      lhs = node(Expr::Kind::Par, std::move(lhs), std::move(rhs), at);
    }
    return lhs;
  }

  Expr primary() {
    if (peek().kind == Tok::LParen) {
      ++pos_;
      Expr e = seq();
      expect(Tok::RParen, "to close '('");
      return e;
    }
    const Token& name = expect(Tok::Ident, "in expression");
    Expr e;
    e.kind = Expr::Kind::Ref;
    e.name = name.text;
    e.span = name.span;
    if (accept(Tok::LBracket)) {
      e.outcome = to_count(expect(Tok::Number, "as outcome index"), "outcome");
      expect(Tok::RBracket, "after outcome index");
    }
    return e;
  }

  static Expr node(Expr::Kind k, Expr lhs, Expr rhs, Span at) {
    Expr e;
    e.kind = k;
    e.lhs = std::make_shared<const Expr>(std::move(lhs));
    e.rhs = std::make_shared<const Expr>(std::move(rhs));
    e.span = at;
    return e;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::set<std::string> names_;
};

// --- pretty printer ------------------------------------------------------------

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + xs[i];
  return out;
}

std::string vector_text(const std::vector<std::complex<double>>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += "; ";
    out += number(v[i].real()) + "," + number(v[i].imag());
  }
  return out + "]";
}

std::string expr_text(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Ref:
      return e.outcome ? e.name + "[" + std::to_string(*e.outcome) + "]" : e.name;
    case Expr::Kind::Seq: {
      const std::string r = expr_text(*e.rhs);
      return expr_text(*e.lhs) + " ; " + (e.rhs->kind == Expr::Kind::Seq ? "(" + r + ")" : r);
    }
    case Expr::Kind::Par: {
      const std::string l = expr_text(*e.lhs);
      const std::string r = expr_text(*e.rhs);
      return (e.lhs->kind == Expr::Kind::Seq ? "(" + l + ")" : l) + " || " +
             (e.rhs->kind != Expr::Kind::Ref ? "(" + r + ")" : r);
    }
  }
  return {};
}

std::string system_text(const std::vector<System>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += (i ? ", " : "") + xs[i].label + ":" + std::to_string(xs[i].dim);
  }
  return out + "]";
}

System composite(const std::vector<System>& xs) {
  System s = trivial_system();
  for (const auto& x : xs) s = compose(s, x);
  return s;
}

const char* kind_name(BoxKind k) {
  switch (k) {
    case BoxKind::State: return "state";
    case BoxKind::Channel: return "channel";
    case BoxKind::Effect: return "effect";
    case BoxKind::Instrument: return "instrument";
  }
  return "";
}

// --- typechecker ---------------------------------------------------------------

struct BoxInfo {
  const BoxDecl* decl;
  WireType type;
};

class Checker {
 public:
  explicit Checker(const Program& p) : program_(p) {}

  std::vector<Diagnostic> errors;
  std::map<std::string, System> systems;
  std::map<std::string, BoxInfo> boxes;

  std::optional<std::vector<System>> resolve(const std::vector<std::string>& names,
                                             const Span& at) {
    std::vector<System> out;
    for (const auto& n : names) {
      const auto it = systems.find(n);
      if (it == systems.end()) {
        errors.push_back({ErrorKind::UnknownIdentifier, at, "unknown system '" + n + "'"});
        return std::nullopt;
      }
      out.push_back(it->second);
    }
    return out;
  }

  std::optional<WireType> type_of(const Expr& e) {
    if (e.kind == Expr::Kind::Ref) {
      const auto it = boxes.find(e.name);
      if (it == boxes.end()) {
        errors.push_back({ErrorKind::UnknownIdentifier, e.span,
                          systems.count(e.name) ? "'" + e.name + "' is a system, not a box"
                                                : "unknown identifier '" + e.name + "'"});
        return std::nullopt;
      }
      if (e.outcome && it->second.decl->kind != BoxKind::Instrument) {
        errors.push_back({ErrorKind::BadOutcome, e.span,
                          "outcome index on '" + e.name + "', which is not an instrument"});
        return std::nullopt;
      }
      return it->second.type;
    }
    auto l = type_of(*e.lhs);
    auto r = type_of(*e.rhs);
    if (!l || !r) return std::nullopt;
    if (e.kind == Expr::Kind::Par) {
      WireType t = *l;
      t.inputs.insert(t.inputs.end(), r->inputs.begin(), r->inputs.end());
      t.outputs.insert(t.outputs.end(), r->outputs.begin(), r->outputs.end());
      return t;
    }
    if (l->outputs != r->inputs) {
      errors.push_back({ErrorKind::WireMismatch, e.span,
                        "wire mismatch: expected " + system_text(r->inputs) + " found " +
                            system_text(l->outputs)});
      return std::nullopt;
    }
    return WireType{l->inputs, r->outputs};
  }

 private:
  const Program& program_;
};

// --- evaluation ----------------------------------------------------------------

QuantumOperation compress(QuantumOperation op) {
  if (op.kraus().size() > op.input().dim * op.output().dim) {
    return QuantumOperation::from_choi(op.input(), op.output(), op.choi(), Tolerance{1e-8});
  }
  return op;
}

class Evaluator {
 public:
  explicit Evaluator(const TypedProgram& p) : p_(p) {
    for (const auto& s : p.program.statements) {
      if (const auto* b = std::get_if<BoxDecl>(&s)) decls_[b->name] = b;
      if (const auto* d = std::get_if<SystemDecl>(&s)) systems_[d->name] = System{d->name, d->dim};
    }
  }

  QuantumOperation fold(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Ref: return leaf(e);
      case Expr::Kind::Seq: return compress(compose_seq(fold(*e.rhs), fold(*e.lhs)));
      case Expr::Kind::Par: return compress(compose_par(fold(*e.lhs), fold(*e.rhs)));
    }
    fail(ErrorKind::InvalidArgument, "bad expression");
  }

  Instrument instrument(const BoxDecl& d) {
    return guarded(d, [&] {
      const Instrument raw = instrument_from_json(read_json_file(path(d)));
      const System in = composite(resolve(d.inputs));
      const System out = composite(resolve(d.outputs));
      std::vector<std::string> labels;
      std::vector<QuantumOperation> ops;
      for (std::size_t i = 0; i < raw.size(); ++i) {
        labels.push_back(raw.label(i));
        ops.emplace_back(in, out, raw.operation(i).kraus());
      }
      return Instrument(std::move(labels), std::move(ops));
    });
  }

  const BoxDecl& decl(const std::string& name) const { return *decls_.at(name); }

 private:
  template <class F>
  static auto guarded(const BoxDecl& d, F&& f) -> decltype(f()) {
    try {
      return f();
    } catch (const SourceError&) {
      throw;
    } catch (const Error& e) {
      throw SourceError(e.kind(), d.span,
                        std::string("in ") + kind_name(d.kind) + " '" + d.name + "': " + e.what());
    }
  }

  std::vector<System> resolve(const std::vector<std::string>& names) const {
    std::vector<System> out;
    for (const auto& n : names) out.push_back(systems_.at(n));
    return out;
  }

  std::filesystem::path path(const BoxDecl& d) const {
    const std::filesystem::path rel(d.init.path);
    return rel.is_absolute() ? rel : p_.base_dir / rel;
  }

  static ComplexVector amplitudes(const std::vector<std::complex<double>>& v, std::size_t dim) {
    if (v.size() != dim) {
      fail(ErrorKind::DimensionMismatch, "vector has " + std::to_string(v.size()) +
                                             " entries, system dimension is " +
                                             std::to_string(dim));
    }
    ComplexVector out(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
  }

  static ComplexMatrix sized(ComplexMatrix m, std::size_t dim) {
    if (static_cast<std::size_t>(m.rows()) != dim || m.rows() != m.cols()) {
      fail(ErrorKind::DimensionMismatch,
           "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
               ", declared systems need " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    return m;
  }

  QuantumOperation leaf(const Expr& e) {
    const BoxDecl& d = *decls_.at(e.name);
    if (d.kind == BoxKind::Instrument) {
      const Instrument inst = instrument(d);
      if (!e.outcome) return inst.coarse_grained();
      if (*e.outcome >= inst.size()) {
        fail_at(ErrorKind::BadOutcome, e.span,
                "outcome " + std::to_string(*e.outcome) + " of '" + d.name + "' out of range (" +
                    std::to_string(inst.size()) + " outcomes)");
      }
      return inst.operation(*e.outcome);
    }
    return guarded(d, [&]() -> QuantumOperation {
      const System in = composite(resolve(d.inputs));
      const System out = composite(resolve(d.outputs));
      switch (d.init.kind) {
        case InitKind::MaxMix:
          return state_as_operation(State(out, identity(out.dim) / static_cast<double>(out.dim)));
        case InitKind::Pure:
          return state_as_operation(State(out, projector_onto(amplitudes(d.init.vector, out.dim))));
        case InitKind::File: {
          const Json j = read_json_file(path(d));
          if (d.kind == BoxKind::State) {
            return state_as_operation(State(out, sized(state_from_json(j).matrix(), out.dim)));
          }
          return effect_as_operation(Effect(in, sized(effect_from_json(j).matrix(), in.dim)));
        }
        case InitKind::Identity:
          return QuantumOperation::identity(in);
        case InitKind::KrausFile:
          return QuantumOperation(in, out, operation_from_json(read_json_file(path(d))).kraus());
        case InitKind::Total:
          return effect_as_operation(Effect::deterministic(in));
        case InitKind::Projector: {
          ComplexVector v = amplitudes(d.init.vector, in.dim);
          if (v.norm() == 0.0) fail(ErrorKind::InvalidArgument, "projector onto the zero vector");
          v.normalize();
          return effect_as_operation(Effect(in, projector_onto(v)));
        }
      }
      fail(ErrorKind::InvalidArgument, "bad initializer");
    });
  }

  const TypedProgram& p_;
  std::map<std::string, const BoxDecl*> decls_;
  std::map<std::string, System> systems_;
};

const TypedRun& find_run(const TypedProgram& p, const std::string& run) {
  for (const auto& r : p.runs) {
    if (r.name == run) return r;
  }
  fail(ErrorKind::UnknownIdentifier, "no run named '" + run + "'");
}

}  // namespace

Program parse(std::string_view source) { return Parser(lex(source)).program(); }

std::string pretty_print(const Program& p) {
  std::ostringstream out;
  for (const auto& s : p.statements) {
    if (const auto* d = std::get_if<SystemDecl>(&s)) {
      out << "system " << d->name << ' ' << d->dim << '\n';
    } else if (const auto* b = std::get_if<BoxDecl>(&s)) {
      out << kind_name(b->kind) << ' ' << b->name << " : ";
      if (b->kind == BoxKind::State) {
        out << join(b->outputs);
      } else if (b->kind == BoxKind::Effect) {
        out << join(b->inputs);
      } else {
        out << join(b->inputs) << " -> " << join(b->outputs);
      }
      out << " = ";
      switch (b->init.kind) {
        case InitKind::MaxMix: out << "maxmix"; break;
        case InitKind::Pure: out << "pure " << vector_text(b->init.vector); break;
        case InitKind::File: out << "file \"" << b->init.path << '"'; break;
        case InitKind::Identity: out << "id"; break;
        case InitKind::KrausFile: out << "kraus file \"" << b->init.path << '"'; break;
        case InitKind::Total: out << "total"; break;
        case InitKind::Projector: out << "proj " << vector_text(b->init.vector); break;
      }
      out << '\n';
    } else {
      const auto& r = std::get<RunDecl>(s);
      out << "run " << r.name << " = " << expr_text(r.expr) << '\n';
    }
  }
  return out.str();
}

TypecheckResult typecheck(Program p, std::filesystem::path base_dir) {
  Checker c(p);
  std::vector<TypedRun> runs;
  for (const auto& s : p.statements) {
    if (const auto* d = std::get_if<SystemDecl>(&s)) {
      c.systems[d->name] = System{d->name, d->dim};
    } else if (const auto* b = std::get_if<BoxDecl>(&s)) {
      auto in = c.resolve(b->inputs, b->span);
      auto out = c.resolve(b->outputs, b->span);
      if (!in || !out) continue;
      if (b->init.kind == InitKind::Identity && *in != *out) {
        c.errors.push_back({ErrorKind::WireMismatch, b->span,
                            "identity channel '" + b->name + "' maps " + system_text(*in) +
                                " to " + system_text(*out)});
        continue;
      }
      c.boxes[b->name] = BoxInfo{b, WireType{*in, *out}};
    } else {
      const auto& r = std::get<RunDecl>(s);
      auto t = c.type_of(r.expr);
      if (!t) continue;
      if (!t->inputs.empty()) {
        c.errors.push_back({ErrorKind::DanglingSystem, r.span,
                            "run '" + r.name + "' leaves input wires " + system_text(t->inputs) +
                                " unprepared"});
        continue;
      }
      runs.push_back(TypedRun{r.name, r.expr, *t});
    }
  }
  TypecheckResult result;
  result.errors = std::move(c.errors);
  if (result.errors.empty()) {
    result.typed = TypedProgram{std::move(p), std::move(base_dir), std::move(runs)};
  }
  return result;
}

QuantumOperation fold(const TypedProgram& p, const std::string& run) {
  return Evaluator(p).fold(find_run(p, run).expr);
}

RunResult evaluate(const TypedProgram& p, const std::string& run) {
  const TypedRun& r = find_run(p, run);
  const QuantumOperation op = Evaluator(p).fold(r.expr);
  ComplexMatrix one = ComplexMatrix::Ones(1, 1);
  const State out = apply(op, State(trivial_system(), one));
  RunResult result{run, std::nullopt, std::nullopt};
  if (r.is_probability()) {
    result.probability = born_probability(out);
  } else {
    result.state = out;
  }
  return result;
}

std::size_t instrument_outcomes(const TypedProgram& p, const std::string& name) {
  Evaluator ev(p);
  const BoxDecl& d = ev.decl(name);
  if (d.kind != BoxKind::Instrument) {
    fail(ErrorKind::BadOutcome, "'" + name + "' is not an instrument");
  }
  return ev.instrument(d).size();
}

}  // namespace qfals::circuit
