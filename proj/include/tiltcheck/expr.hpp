#pragma once

// Expression trees for twice continuously differentiable scalar functions:
// constants, variables, +, -, *, /, integer powers and unary negation.
// Trees are immutable after construction and safe to share between threads.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace tiltcheck::expr {

enum class NodeKind { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind;
    double value = 0.0;      // Constant
    int index = -1;          // Variable
    int exponent = 0;        // Pow, always >= 0
    Expr left;               // binary ops, Pow base, Neg child
    Expr right;              // binary ops only
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Division with |denominator| < 1e-12 at the evaluation point.
struct DivisionNearZero : EvalError {
    DivisionNearZero() : EvalError("division by near-zero denominator") {}
};

struct ParseError : std::runtime_error {
    std::size_t offset;  // byte offset into the input text
    ParseError(const std::string& msg, std::size_t off)
        : std::runtime_error(msg + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};
struct SyntaxError : ParseError {
    SyntaxError(const std::string& expected, std::size_t off)
        : ParseError("syntax error, expected " + expected, off) {}
};
struct UnknownIdentifier : ParseError {
    std::string name;
    UnknownIdentifier(std::string n, std::size_t off)
        : ParseError("unknown identifier '" + n + "'", off), name(std::move(n)) {}
};
struct NonIntegerExponent : ParseError {
    explicit NonIntegerExponent(std::size_t off)
        : ParseError("exponent must be a nonnegative integer", off) {}
};

// Constructors fold constant subtrees (and nothing else).
Expr constant(double v);
Expr variable(int index);
Expr add(Expr l, Expr r);
Expr sub(Expr l, Expr r);
Expr mul(Expr l, Expr r);
Expr div(Expr l, Expr r);
Expr pow(Expr base, int exponent);
Expr neg(Expr child);

// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | primary ('^' nonneg-integer)?
//   primary:= number | identifier | '(' expr ')'
// '^' binds tighter than unary minus; '+','-','*','/' are left-associative.
Expr parse_expr(const std::string& text, const std::vector<std::string>& vars);

double eval(const Expr& e, const std::vector<double>& x);

// Largest variable index used, or -1 for pure constants.
int max_var_index(const Expr& e);

// Symbolic partial derivative with respect to variable i.
Expr differentiate(const Expr& e, int i);

// Component i is d(e)/dx_i; n must cover every variable used in e.
std::vector<Expr> grad(const Expr& e, int n);

// Row-major n*n matrix of second partials. Entry (i,j) with i<=j is computed
// once and shared with (j,i), so the evaluated matrix is bitwise symmetric.
std::vector<Expr> hessian(const Expr& e, int n);

// Fully parenthesized form that re-parses to a structurally identical tree.
std::string to_string(const Expr& e, const std::vector<std::string>& vars);

bool structurally_equal(const Expr& a, const Expr& b);

}  // namespace tiltcheck::expr
