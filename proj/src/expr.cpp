#include "mtop/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>

namespace mtop {

namespace {

Expr node(ExprOp op, Expr a = nullptr, Expr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool const_val(const Expr& e, double& out) {
  if (e->op == ExprOp::Const) {
    out = e->value;
    return true;
  }
  return false;
}

// Folding helper: apply a unary function if the domain allows, else keep the node.
std::optional<double> try_unary(ExprOp op, double x) {
  switch (op) {
    case ExprOp::Neg: return -x;
    case ExprOp::Exp: {
      double v = std::exp(x);
      if (!std::isfinite(v)) return std::nullopt;
      return v;
    }
    case ExprOp::Ln: return x > 0.0 ? std::optional<double>(std::log(x)) : std::nullopt;
    case ExprOp::Sin: return std::sin(x);
    case ExprOp::Cos: return std::cos(x);
    case ExprOp::Sqrt: return x >= 0.0 ? std::optional<double>(std::sqrt(x)) : std::nullopt;
    case ExprOp::Abs: return std::fabs(x);
    default: return std::nullopt;
  }
}

bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e9; }

std::optional<double> try_binary(ExprOp op, double x, double y) {
  double v;
  switch (op) {
    case ExprOp::Add: v = x + y; break;
    case ExprOp::Sub: v = x - y; break;
    case ExprOp::Mul: v = x * y; break;
    case ExprOp::Div:
      if (y == 0.0) return std::nullopt;
      v = x / y;
      break;
    case ExprOp::Pow:
      if (x < 0.0 && !is_integral(y)) return std::nullopt;
      if (x == 0.0 && y < 0.0) return std::nullopt;
      v = std::pow(x, y);
      break;
    default: return std::nullopt;
  }
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

Expr constant(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::Const;
  n->value = v;
  return n;
}

Expr symbol(std::string name) {
  auto n = std::make_shared<ExprNode>();
  n->op = ExprOp::Sym;
  n->name = std::move(name);
  return n;
}

bool is_zero(const Expr& e) { return e->op == ExprOp::Const && e->value == 0.0; }

bool is_const(const Expr& e, double* out) {
  if (e->op != ExprOp::Const) return false;
  if (out) *out = e->value;
  return true;
}

static bool is_one(const Expr& e) { return e->op == ExprOp::Const && e->value == 1.0; }

static Expr unary(ExprOp op, Expr e) {
  double c;
  if (const_val(e, c)) {
    if (auto v = try_unary(op, c)) return constant(*v);
  }
  if (op == ExprOp::Neg && e->op == ExprOp::Neg) return e->a;
  return node(op, std::move(e));
}

Expr neg(const Expr& e) { return unary(ExprOp::Neg, e); }
Expr exp(const Expr& e) { return unary(ExprOp::Exp, e); }
Expr ln(const Expr& e) { return unary(ExprOp::Ln, e); }
Expr sin(const Expr& e) { return unary(ExprOp::Sin, e); }
Expr cos(const Expr& e) { return unary(ExprOp::Cos, e); }
Expr sqrt(const Expr& e) { return unary(ExprOp::Sqrt, e); }
Expr abs(const Expr& e) { return unary(ExprOp::Abs, e); }

Expr add(const Expr& a, const Expr& b) {
  double x, y;
  if (const_val(a, x) && const_val(b, y)) {
    if (auto v = try_binary(ExprOp::Add, x, y)) return constant(*v);
  }
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  return node(ExprOp::Add, a, b);
}

Expr sub(const Expr& a, const Expr& b) {
  double x, y;
  if (const_val(a, x) && const_val(b, y)) {
    if (auto v = try_binary(ExprOp::Sub, x, y)) return constant(*v);
  }
  if (is_zero(b)) return a;
  if (is_zero(a)) return neg(b);
  if (a == b) return constant(0.0);  // shared subtree, exact cancellation
  return node(ExprOp::Sub, a, b);
}

Expr mul(const Expr& a, const Expr& b) {
  double x, y;
  if (const_val(a, x) && const_val(b, y)) {
    if (auto v = try_binary(ExprOp::Mul, x, y)) return constant(*v);
  }
  if (is_zero(a) || is_zero(b)) return constant(0.0);
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  return node(ExprOp::Mul, a, b);
}

Expr div(const Expr& a, const Expr& b) {
  double x, y;
  if (const_val(a, x) && const_val(b, y)) {
    if (auto v = try_binary(ExprOp::Div, x, y)) return constant(*v);
  }
  if (is_zero(a)) return constant(0.0);
  if (is_one(b)) return a;
  return node(ExprOp::Div, a, b);
}

Expr pow(const Expr& a, const Expr& b) {
  double x, y;
  if (const_val(a, x) && const_val(b, y)) {
    if (auto v = try_binary(ExprOp::Pow, x, y)) return constant(*v);
  }
  if (is_const(b)) {
    if (is_one(b)) return a;
    if (is_zero(b)) return constant(1.0);
  }
  return node(ExprOp::Pow, a, b);
}

bool tree_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (a->op != b->op) return false;
  switch (a->op) {
    case ExprOp::Const: return a->value == b->value;
    case ExprOp::Sym: return a->name == b->name;
    default:
      if (!!a->a != !!b->a || !!a->b != !!b->b) return false;
      if (a->a && !tree_equal(a->a, b->a)) return false;
      if (a->b && !tree_equal(a->b, b->b)) return false;
      return true;
  }
}

// --- printing -----------------------------------------------------------

namespace {

// precedence: add/sub 1, mul/div 2, unary minus 3, pow 4, atom 5
int prec_of(const Expr& e) {
  switch (e->op) {
    case ExprOp::Add:
    case ExprOp::Sub: return 1;
    case ExprOp::Mul:
    case ExprOp::Div: return 2;
    case ExprOp::Neg: return 3;
    case ExprOp::Pow: return 4;
    case ExprOp::Const: return e->value < 0.0 ? 3 : 5;
    default: return 5;
  }
}

std::string fmt_const(double v) {
  char buf[40];
  if (v == std::floor(v) && std::fabs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", v);
  }
  return buf;
}

void print(const Expr& e, int ctx, std::string& out) {
  int p = prec_of(e);
  bool wrap = p < ctx;
  if (wrap) out += '(';
  switch (e->op) {
    case ExprOp::Const: out += fmt_const(e->value); break;
    case ExprOp::Sym: out += e->name; break;
    case ExprOp::Neg:
      out += '-';
      print(e->a, 4, out);  // binds tighter than * but looser than ^
      break;
    case ExprOp::Exp: out += "exp("; print(e->a, 0, out); out += ')'; break;
    case ExprOp::Ln: out += "ln("; print(e->a, 0, out); out += ')'; break;
    case ExprOp::Sin: out += "sin("; print(e->a, 0, out); out += ')'; break;
    case ExprOp::Cos: out += "cos("; print(e->a, 0, out); out += ')'; break;
    case ExprOp::Sqrt: out += "sqrt("; print(e->a, 0, out); out += ')'; break;
    case ExprOp::Abs: out += "abs("; print(e->a, 0, out); out += ')'; break;
    case ExprOp::Add: print(e->a, 1, out); out += " + "; print(e->b, 2, out); break;
    case ExprOp::Sub: print(e->a, 1, out); out += " - "; print(e->b, 2, out); break;
    case ExprOp::Mul: print(e->a, 2, out); out += '*'; print(e->b, 3, out); break;
    case ExprOp::Div: print(e->a, 2, out); out += '/'; print(e->b, 3, out); break;
    case ExprOp::Pow: print(e->a, 5, out); out += '^'; print(e->b, 4, out); break;
  }
  if (wrap) out += ')';
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, 0, out);
  return out;
}

// --- parsing ------------------------------------------------------------

namespace {

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  explicit Parser(const std::string& text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos); }

  Expr parse() {
    Expr e = expr();
    skip_ws();
    if (pos != s.size()) fail("unexpected trailing input");
    return e;
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      char c = peek();
      if (c == '+' || c == '-') {
        ++pos;
        Expr rhs = term();
        lhs = c == '+' ? node(ExprOp::Add, lhs, rhs) : node(ExprOp::Sub, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      char c = peek();
      if (c == '*' || c == '/') {
        ++pos;
        Expr rhs = factor();
        lhs = c == '*' ? node(ExprOp::Mul, lhs, rhs) : node(ExprOp::Div, lhs, rhs);
      } else {
        return lhs;
      }
    }
  }

  Expr factor() {
    if (peek() == '-') {
      ++pos;
      Expr inner = factor();
      if (inner->op == ExprOp::Const) return constant(-inner->value);
      return node(ExprOp::Neg, inner);
    }
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (peek() == '^') {
      ++pos;
      Expr exponent = factor();  // right-associative; allows x^-2
      return node(ExprOp::Pow, base, exponent);
    }
    return base;
  }

  Expr atom() {
    char c = peek();
    if (c == '(') {
      ++pos;
      Expr e = expr();
      if (peek() != ')') fail("expected ')'");
      ++pos;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
    fail("expected a number, identifier, or '('");
  }

  Expr number() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
      std::size_t mark = pos;
      ++pos;
      if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
      if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      } else {
        pos = mark;  // "2e" is "2" followed by symbol e
      }
    }
    if (pos == start) fail("malformed number");
    return constant(std::stod(s.substr(start, pos - start)));
  }

  Expr ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    std::string name = s.substr(start, pos - start);
    if (peek() == '(') {
      ExprOp op;
      if (name == "exp") op = ExprOp::Exp;
      else if (name == "ln" || name == "log") op = ExprOp::Ln;
      else if (name == "sin") op = ExprOp::Sin;
      else if (name == "cos") op = ExprOp::Cos;
      else if (name == "sqrt") op = ExprOp::Sqrt;
      else if (name == "abs") op = ExprOp::Abs;
      else {
        pos = start;
        fail("unknown function '" + name + "'");
      }
      ++pos;  // '('
      Expr arg = expr();
      if (peek() != ')') fail("expected ')'");
      ++pos;
      return node(op, arg);
    }
    return symbol(name);
  }
};

}  // namespace

Expr parse_expr(const std::string& text) {
  Parser p(text);
  return p.parse();
}

// --- calculus -----------------------------------------------------------

Expr differentiate(const Expr& e, const std::string& coord) {
  switch (e->op) {
    case ExprOp::Const: return constant(0.0);
    case ExprOp::Sym: return constant(e->name == coord ? 1.0 : 0.0);
    case ExprOp::Neg: return neg(differentiate(e->a, coord));
    case ExprOp::Exp: return mul(e, differentiate(e->a, coord));
    case ExprOp::Ln: return div(differentiate(e->a, coord), e->a);
    case ExprOp::Sin: return mul(cos(e->a), differentiate(e->a, coord));
    case ExprOp::Cos: return neg(mul(sin(e->a), differentiate(e->a, coord)));
    case ExprOp::Sqrt:
      return div(differentiate(e->a, coord), mul(constant(2.0), sqrt(e->a)));
    case ExprOp::Abs:
      // d|u| = u/|u| * du; evaluating at u = 0 is a domain error, as it should be
      return mul(div(e->a, abs(e->a)), differentiate(e->a, coord));
    case ExprOp::Add:
      return add(differentiate(e->a, coord), differentiate(e->b, coord));
    case ExprOp::Sub:
      return sub(differentiate(e->a, coord), differentiate(e->b, coord));
    case ExprOp::Mul:
      return add(mul(differentiate(e->a, coord), e->b),
                 mul(e->a, differentiate(e->b, coord)));
    case ExprOp::Div:
      return div(sub(mul(differentiate(e->a, coord), e->b),
                     mul(e->a, differentiate(e->b, coord))),
                 mul(e->b, e->b));
    case ExprOp::Pow: {
      double c;
      if (const_val(e->b, c)) {
        // power rule; exact for integer exponents (no logarithm involved)
        return mul(mul(e->b, pow(e->a, constant(c - 1.0))),
                   differentiate(e->a, coord));
      }
      Expr da = differentiate(e->a, coord);
      Expr db = differentiate(e->b, coord);
      return mul(e, add(mul(db, ln(e->a)), mul(e->b, div(da, e->a))));
    }
  }
  throw EvalError("unsupported node in differentiate");
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& map) {
  switch (e->op) {
    case ExprOp::Const: return e;
    case ExprOp::Sym: {
      auto it = map.find(e->name);
      return it == map.end() ? e : it->second;
    }
    default: {
      Expr a = e->a ? substitute(e->a, map) : nullptr;
      Expr b = e->b ? substitute(e->b, map) : nullptr;
      switch (e->op) {
        case ExprOp::Neg: return neg(a);
        case ExprOp::Exp: return exp(a);
        case ExprOp::Ln: return ln(a);
        case ExprOp::Sin: return sin(a);
        case ExprOp::Cos: return cos(a);
        case ExprOp::Sqrt: return sqrt(a);
        case ExprOp::Abs: return abs(a);
        case ExprOp::Add: return add(a, b);
        case ExprOp::Sub: return sub(a, b);
        case ExprOp::Mul: return mul(a, b);
        case ExprOp::Div: return div(a, b);
        case ExprOp::Pow: return pow(a, b);
        default: throw EvalError("unsupported node in substitute");
      }
    }
  }
}

void free_symbols(const Expr& e, std::set<std::string>& out) {
  if (e->op == ExprOp::Sym) {
    out.insert(e->name);
    return;
  }
  if (e->a) free_symbols(e->a, out);
  if (e->b) free_symbols(e->b, out);
}

// --- evaluation ---------------------------------------------------------

namespace {

double apply_unary(ExprOp op, double x) {
  switch (op) {
    case ExprOp::Neg: return -x;
    case ExprOp::Exp: {
      double v = std::exp(x);
      if (!std::isfinite(v)) throw EvalError("overflow in exp");
      return v;
    }
    case ExprOp::Ln:
      if (x <= 0.0) throw EvalError("ln of a non-positive value");
      return std::log(x);
    case ExprOp::Sin: return std::sin(x);
    case ExprOp::Cos: return std::cos(x);
    case ExprOp::Sqrt:
      if (x < 0.0) throw EvalError("sqrt of a negative value");
      return std::sqrt(x);
    case ExprOp::Abs: return std::fabs(x);
    default: throw EvalError("bad unary op");
  }
}

double apply_binary(ExprOp op, double x, double y) {
  switch (op) {
    case ExprOp::Add: return x + y;
    case ExprOp::Sub: return x - y;
    case ExprOp::Mul: return x * y;
    case ExprOp::Div:
      if (y == 0.0) throw EvalError("division by zero");
      return x / y;
    case ExprOp::Pow:
      if (x < 0.0 && !is_integral(y)) throw EvalError("negative base with non-integer exponent");
      if (x == 0.0 && y < 0.0) throw EvalError("zero base with negative exponent");
      return std::pow(x, y);
    default: throw EvalError("bad binary op");
  }
}

double eval_rec(const Expr& e, const std::map<std::string, double>& env) {
  switch (e->op) {
    case ExprOp::Const: return e->value;
    case ExprOp::Sym: {
      auto it = env.find(e->name);
      if (it == env.end()) throw EvalError("unbound symbol '" + e->name + "'");
      return it->second;
    }
    default:
      if (e->b) return apply_binary(e->op, eval_rec(e->a, env), eval_rec(e->b, env));
      return apply_unary(e->op, eval_rec(e->a, env));
  }
}

}  // namespace

double evaluate(const Expr& e, const std::map<std::string, double>& env) {
  double v = eval_rec(e, env);
  if (!std::isfinite(v)) throw EvalError("non-finite result");
  return v;
}

// --- compiled form ------------------------------------------------------

SlotLayout SlotLayout::make(std::vector<std::string> names) {
  SlotLayout l;
  l.names = std::move(names);
  for (std::size_t i = 0; i < l.names.size(); ++i)
    l.index.emplace(l.names[i], static_cast<int>(i));
  return l;
}

int SlotLayout::slot(const std::string& name) const {
  auto it = index.find(name);
  return it == index.end() ? -1 : it->second;
}

namespace {

int emit(const Expr& e, const SlotLayout& layout, std::vector<Program::Ins>& code) {
  switch (e->op) {
    case ExprOp::Const:
      code.push_back({ExprOp::Const, -1, e->value});
      return 1;
    case ExprOp::Sym: {
      int s = layout.slot(e->name);
      if (s < 0) throw EvalError("unbound symbol '" + e->name + "'");
      code.push_back({ExprOp::Sym, s, 0.0});
      return 1;
    }
    default: {
      int da = emit(e->a, layout, code);
      int d = da;
      if (e->b) {
        int db = emit(e->b, layout, code);
        d = std::max(da, 1 + db);
      }
      code.push_back({e->op, -1, 0.0});
      return d;
    }
  }
}

}  // namespace

Program compile(const Expr& e, const SlotLayout& layout) {
  Program p;
  p.max_stack = emit(e, layout, p.code);
  return p;
}

double Program::eval(const double* slots) const {
  double local[64];
  std::vector<double> heap;
  double* st = local;
  if (max_stack > 64) {
    heap.resize(max_stack);
    st = heap.data();
  }
  int top = -1;
  for (const Ins& ins : code) {
    switch (ins.op) {
      case ExprOp::Const: st[++top] = ins.c; break;
      case ExprOp::Sym: st[++top] = slots[ins.slot]; break;
      case ExprOp::Add: --top; st[top] = st[top] + st[top + 1]; break;
      case ExprOp::Sub: --top; st[top] = st[top] - st[top + 1]; break;
      case ExprOp::Mul: --top; st[top] = st[top] * st[top + 1]; break;
      case ExprOp::Div:
        --top;
        if (st[top + 1] == 0.0) throw EvalError("division by zero");
        st[top] = st[top] / st[top + 1];
        break;
      case ExprOp::Pow:
        --top;
        st[top] = apply_binary(ExprOp::Pow, st[top], st[top + 1]);
        break;
      default: st[top] = apply_unary(ins.op, st[top]); break;
    }
  }
  double v = st[0];
  if (!std::isfinite(v)) throw EvalError("non-finite result");
  return v;
}

}  // namespace mtop
