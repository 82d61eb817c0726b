#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace mtop {

// Immutable scalar expression trees over chart coordinates and named
// parameters. Construction folds constants and the 0/1 identities; there is
// deliberately no general simplifier (equality is decided by evaluation).

enum class ExprOp : std::uint8_t {
  Const, Sym,
  Neg, Exp, Ln, Sin, Cos, Sqrt, Abs,
  Add, Sub, Mul, Div, Pow,
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprOp op;
  double value = 0.0;  // Const
  std::string name;    // Sym
  Expr a, b;
};

struct ParseError : std::runtime_error {
  std::size_t offset;
  ParseError(const std::string& msg, std::size_t off)
      : std::runtime_error(msg), offset(off) {}
};

// Division by zero, ln of a non-positive value, sqrt of a negative value,
// unbound symbols, and non-finite results all surface as EvalError; a scalar
// expression never evaluates to a silent inf/nan.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Expr constant(double v);
Expr symbol(std::string name);

Expr neg(const Expr& e);
Expr exp(const Expr& e);
Expr ln(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr sqrt(const Expr& e);
Expr abs(const Expr& e);

Expr add(const Expr& a, const Expr& b);
Expr sub(const Expr& a, const Expr& b);
Expr mul(const Expr& a, const Expr& b);
Expr div(const Expr& a, const Expr& b);
Expr pow(const Expr& a, const Expr& b);

inline Expr operator+(const Expr& a, const Expr& b) { return add(a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return sub(a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return mul(a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return div(a, b); }
inline Expr operator-(const Expr& a) { return neg(a); }
inline Expr operator+(double a, const Expr& b) { return add(constant(a), b); }
inline Expr operator+(const Expr& a, double b) { return add(a, constant(b)); }
inline Expr operator-(double a, const Expr& b) { return sub(constant(a), b); }
inline Expr operator-(const Expr& a, double b) { return sub(a, constant(b)); }
inline Expr operator*(double a, const Expr& b) { return mul(constant(a), b); }
inline Expr operator*(const Expr& a, double b) { return mul(a, constant(b)); }
inline Expr operator/(double a, const Expr& b) { return div(constant(a), b); }
inline Expr operator/(const Expr& a, double b) { return div(a, constant(b)); }

bool is_zero(const Expr& e);
bool is_const(const Expr& e, double* out = nullptr);

/// Structural equality (constants compared by value).
bool tree_equal(const Expr& a, const Expr& b);

/// Minimal-parentheses printing; parse(to_string(e)) reproduces e.
std::string to_string(const Expr& e);

/// Infix grammar: ^ > unary minus > * / > + -, with ^ right-associative.
/// Unknown identifiers are not an error here; they resolve at binding time.
Expr parse_expr(const std::string& text);

/// Exact structural derivative with respect to a chart coordinate.
Expr differentiate(const Expr& e, const std::string& coord);

/// Simultaneous substitution of coordinates by expressions.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& map);

void free_symbols(const Expr& e, std::set<std::string>& out);

/// Slow-path evaluation against a name -> value environment.
double evaluate(const Expr& e, const std::map<std::string, double>& env);

// --- compiled form -----------------------------------------------------
//
// Scans evaluate the same component expressions at hundreds of thousands of
// points, so expressions compile to a flat postfix program over a fixed slot
// layout (coordinates first, then parameters). Programs are immutable and
// safe to evaluate concurrently.

struct SlotLayout {
  std::vector<std::string> names;
  std::unordered_map<std::string, int> index;

  static SlotLayout make(std::vector<std::string> names);
  int slot(const std::string& name) const;  // -1 when absent
};

struct Program {
  struct Ins {
    ExprOp op;
    int slot = -1;
    double c = 0.0;
  };
  std::vector<Ins> code;
  int max_stack = 0;

  double eval(const double* slots) const;
  bool constant_zero() const {
    return code.size() == 1 && code[0].op == ExprOp::Const && code[0].c == 0.0;
  }
};

/// Binds symbols to slots; throws EvalError on a symbol missing from the layout.
Program compile(const Expr& e, const SlotLayout& layout);

}  // namespace mtop
