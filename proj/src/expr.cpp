#include "tiltcheck/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace tiltcheck::expr {

namespace {

Expr make(NodeKind k) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    return n;
}

bool is_const(const Expr& e) { return e->kind == NodeKind::Constant; }

// Evaluation of a constant-only subtree; nullptr when folding would divide
// by a near-zero constant (the unfolded node keeps the runtime guard).
bool try_fold(NodeKind k, const Expr& l, const Expr& r, int exponent, double& out) {
    switch (k) {
        case NodeKind::Add: out = l->value + r->value; return true;
        case NodeKind::Sub: out = l->value - r->value; return true;
        case NodeKind::Mul: out = l->value * r->value; return true;
        case NodeKind::Div:
            if (std::fabs(r->value) < 1e-12) return false;
            out = l->value / r->value;
            return true;
        case NodeKind::Pow: out = std::pow(l->value, exponent); return true;
        case NodeKind::Neg: out = -l->value; return true;
        default: return false;
    }
}

}  // namespace

Expr constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Constant;
    n->value = v;
    return n;
}

Expr variable(int index) {
    if (index < 0) throw std::invalid_argument("variable index must be nonnegative");
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Variable;
    n->index = index;
    return n;
}

static Expr binary(NodeKind k, Expr l, Expr r) {
    if (is_const(l) && is_const(r)) {
        double v;
        if (try_fold(k, l, r, 0, v)) return constant(v);
    }
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->left = std::move(l);
    n->right = std::move(r);
    return n;
}

Expr add(Expr l, Expr r) { return binary(NodeKind::Add, std::move(l), std::move(r)); }
Expr sub(Expr l, Expr r) { return binary(NodeKind::Sub, std::move(l), std::move(r)); }
Expr mul(Expr l, Expr r) { return binary(NodeKind::Mul, std::move(l), std::move(r)); }
Expr div(Expr l, Expr r) { return binary(NodeKind::Div, std::move(l), std::move(r)); }

Expr pow(Expr base, int exponent) {
    if (exponent < 0) throw std::invalid_argument("pow exponent must be nonnegative");
    if (is_const(base)) return constant(std::pow(base->value, exponent));
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Pow;
    n->left = std::move(base);
    n->exponent = exponent;
    return n;
}

Expr neg(Expr child) {
    if (is_const(child)) return constant(-child->value);
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Neg;
    n->left = std::move(child);
    return n;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
public:
    Parser(const std::string& text, const std::vector<std::string>& vars)
        : text_(text), vars_(vars) {}

    Expr run() {
        skip_ws();
        if (pos_ >= text_.size()) throw SyntaxError("an expression", pos_);
        Expr e = parse_sum();
        skip_ws();
        if (pos_ < text_.size()) throw SyntaxError("end of input", pos_);
        return e;
    }

private:
    const std::string& text_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Expr parse_sum() {
        Expr e = parse_term();
        for (;;) {
            char c = peek();
            if (c == '+') {
                ++pos_;
                e = add(e, parse_term());
            } else if (c == '-') {
                ++pos_;
                e = sub(e, parse_term());
            } else {
                return e;
            }
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            char c = peek();
            if (c == '*') {
                ++pos_;
                e = mul(e, parse_factor());
            } else if (c == '/') {
                ++pos_;
                e = div(e, parse_factor());
            } else {
                return e;
            }
        }
    }

    Expr parse_factor() {
        if (peek() == '-') {
            ++pos_;
            return neg(parse_factor());
        }
        Expr base = parse_primary();
        if (peek() == '^') {
            ++pos_;
            return pow(std::move(base), parse_exponent());
        }
        return base;
    }

    int parse_exponent() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
            throw NonIntegerExponent(pos_);
        long v = 0;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            v = v * 10 + (text_[pos_] - '0');
            if (v > 1000) throw ParseError("exponent too large", start);
            ++pos_;
        }
        // a fractional literal like 2.5 must be rejected, not split
        if (pos_ < text_.size() && text_[pos_] == '.') throw NonIntegerExponent(start);
        return static_cast<int>(v);
    }

    Expr parse_primary() {
        char c = peek();
        if (c == '(') {
            ++pos_;
            Expr e = parse_sum();
            if (peek() != ')') throw SyntaxError("')'", pos_);
            ++pos_;
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw SyntaxError("a number, identifier or '('", pos_);
    }

    Expr parse_number() {
        skip_ws();
        std::size_t start = pos_;
        const char* begin = text_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) throw SyntaxError("a number", start);
        // strtod accepts leading signs and inf/nan; those never reach here
        // because parse_primary dispatches on a digit or '.' only.
        pos_ += static_cast<std::size_t>(end - begin);
        return constant(v);
    }

    Expr parse_identifier() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == name) return variable(static_cast<int>(i));
        throw UnknownIdentifier(name, start);
    }
};

}  // namespace

Expr parse_expr(const std::string& text, const std::vector<std::string>& vars) {
    return Parser(text, vars).run();
}

// ---------------------------------------------------------------------------
// Evaluation and differentiation

double eval(const Expr& e, const std::vector<double>& x) {
    switch (e->kind) {
        case NodeKind::Constant: return e->value;
        case NodeKind::Variable:
            if (e->index >= static_cast<int>(x.size()))
                throw EvalError("point dimension smaller than variable index");
            return x[static_cast<std::size_t>(e->index)];
        case NodeKind::Add: return eval(e->left, x) + eval(e->right, x);
        case NodeKind::Sub: return eval(e->left, x) - eval(e->right, x);
        case NodeKind::Mul: return eval(e->left, x) * eval(e->right, x);
        case NodeKind::Div: {
            double den = eval(e->right, x);
            if (std::fabs(den) < 1e-12) throw DivisionNearZero();
            return eval(e->left, x) / den;
        }
        case NodeKind::Pow: {
            double b = eval(e->left, x);
            double r = 1.0;
            for (int k = 0; k < e->exponent; ++k) r *= b;
            return r;
        }
        case NodeKind::Neg: return -eval(e->left, x);
    }
    throw EvalError("corrupt expression node");
}

int max_var_index(const Expr& e) {
    switch (e->kind) {
        case NodeKind::Constant: return -1;
        case NodeKind::Variable: return e->index;
        case NodeKind::Pow:
        case NodeKind::Neg: return max_var_index(e->left);
        default:
            return std::max(max_var_index(e->left), max_var_index(e->right));
    }
}

Expr differentiate(const Expr& e, int i) {
    switch (e->kind) {
        case NodeKind::Constant: return constant(0.0);
        case NodeKind::Variable: return constant(e->index == i ? 1.0 : 0.0);
        case NodeKind::Add: return add(differentiate(e->left, i), differentiate(e->right, i));
        case NodeKind::Sub: return sub(differentiate(e->left, i), differentiate(e->right, i));
        case NodeKind::Mul:
            return add(mul(differentiate(e->left, i), e->right),
                       mul(e->left, differentiate(e->right, i)));
        case NodeKind::Div:
            // (l/r)' = (l'r - l r') / r^2
            return div(sub(mul(differentiate(e->left, i), e->right),
                           mul(e->left, differentiate(e->right, i))),
                       pow(e->right, 2));
        case NodeKind::Pow: {
            if (e->exponent == 0) return constant(0.0);
            Expr inner = differentiate(e->left, i);
            if (e->exponent == 1) return inner;
            return mul(mul(constant(static_cast<double>(e->exponent)),
                           pow(e->left, e->exponent - 1)),
                       inner);
        }
        case NodeKind::Neg: return neg(differentiate(e->left, i));
    }
    throw EvalError("corrupt expression node");
}

std::vector<Expr> grad(const Expr& e, int n) {
    if (n < max_var_index(e) + 1)
        throw std::invalid_argument("gradient dimension smaller than variable count");
    std::vector<Expr> g;
    g.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g.push_back(differentiate(e, i));
    return g;
}

std::vector<Expr> hessian(const Expr& e, int n) {
    std::vector<Expr> g = grad(e, n);
    std::vector<Expr> h(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Expr hij = differentiate(g[static_cast<std::size_t>(i)], j);
            h[static_cast<std::size_t>(i) * n + j] = hij;
            h[static_cast<std::size_t>(j) * n + i] = hij;
        }
    return h;
}

std::string to_string(const Expr& e, const std::vector<std::string>& vars) {
    switch (e->kind) {
        case NodeKind::Constant: {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", e->value);
            std::string s = buf;
            if (e->value < 0.0) return "(" + s + ")";  // keep it a single primary
            return s;
        }
        case NodeKind::Variable:
            return vars[static_cast<std::size_t>(e->index)];
        case NodeKind::Add:
            return "(" + to_string(e->left, vars) + "+" + to_string(e->right, vars) + ")";
        case NodeKind::Sub:
            return "(" + to_string(e->left, vars) + "-" + to_string(e->right, vars) + ")";
        case NodeKind::Mul:
            return "(" + to_string(e->left, vars) + "*" + to_string(e->right, vars) + ")";
        case NodeKind::Div:
            return "(" + to_string(e->left, vars) + "/" + to_string(e->right, vars) + ")";
        case NodeKind::Pow:
            return "(" + to_string(e->left, vars) + "^" + std::to_string(e->exponent) + ")";
        case NodeKind::Neg:
            return "(-" + to_string(e->left, vars) + ")";
    }
    return "?";
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.get() == b.get()) return true;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case NodeKind::Constant: return a->value == b->value;
        case NodeKind::Variable: return a->index == b->index;
        case NodeKind::Pow:
            return a->exponent == b->exponent && structurally_equal(a->left, b->left);
        case NodeKind::Neg: return structurally_equal(a->left, b->left);
        default:
            return structurally_equal(a->left, b->left) &&
                   structurally_equal(a->right, b->right);
    }
}

}  // namespace tiltcheck::expr
