#include "tiltcheck/nlp.hpp"

#include <algorithm>
#include <cmath>

namespace tiltcheck::nlp {

Problem::Problem(int n_, std::vector<std::string> names, Expr obj, std::vector<Expr> cons,
                 Vec point)
    : n(n_),
      m(static_cast<int>(cons.size())),
      var_names(std::move(names)),
      objective(std::move(obj)),
      constraints(std::move(cons)),
      candidate(std::move(point)) {
    if (static_cast<int>(candidate.size()) != n)
        throw std::invalid_argument("candidate point arity does not match variable count");
    if (expr::max_var_index(objective) >= n)
        throw std::invalid_argument("objective references an undeclared variable");
    obj_grad = expr::grad(objective, n);
    obj_hess = expr::hessian(objective, n);
    con_grad.reserve(constraints.size());
    con_hess.reserve(constraints.size());
    for (const Expr& c : constraints) {
        if (expr::max_var_index(c) >= n)
            throw std::invalid_argument("constraint references an undeclared variable");
        con_grad.push_back(expr::grad(c, n));
        con_hess.push_back(expr::hessian(c, n));
    }
}

PointEvaluation evaluate(const Problem& p, const Vec& x) {
    PointEvaluation ev;
    ev.x = x;
    ev.g = expr::eval(p.objective, x);
    ev.grad_g.resize(static_cast<std::size_t>(p.n));
    ev.hess_g = Mat(p.n, p.n);
    for (int i = 0; i < p.n; ++i) {
        ev.grad_g[static_cast<std::size_t>(i)] = expr::eval(p.obj_grad[static_cast<std::size_t>(i)], x);
        for (int j = 0; j < p.n; ++j)
            ev.hess_g(i, j) = expr::eval(p.obj_hess[static_cast<std::size_t>(i) * p.n + j], x);
    }
    ev.q.resize(static_cast<std::size_t>(p.m));
    ev.jac_q = Mat(p.m, p.n);
    ev.hess_q.reserve(static_cast<std::size_t>(p.m));
    double worst = 0.0;
    for (int i = 0; i < p.m; ++i) {
        ev.q[static_cast<std::size_t>(i)] = expr::eval(p.constraints[static_cast<std::size_t>(i)], x);
        worst = std::max(worst, ev.q[static_cast<std::size_t>(i)]);
        for (int j = 0; j < p.n; ++j)
            ev.jac_q(i, j) = expr::eval(p.con_grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], x);
        Mat h(p.n, p.n);
        for (int a = 0; a < p.n; ++a)
            for (int b = 0; b < p.n; ++b)
                h(a, b) = expr::eval(p.con_hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(a) * p.n + b], x);
        ev.hess_q.push_back(std::move(h));
        if (ev.q[static_cast<std::size_t>(i)] >= -kActiveTol)
            ev.active.push_back(i);
    }
    ev.feasible = (worst <= kActiveTol);
    return ev;
}

bool is_feasible_point(const Problem& p, const Vec& x, double tol) {
    try {
        for (const auto& c : p.constraints)
            if (expr::eval(c, x) > tol) return false;
    } catch (const expr::EvalError&) {
        return false;
    }
    return true;
}

bool ConeRep::member(const Vec& w, double tol) const {
    if (b.rows() > 0) {
        Vec bw = b.apply(w);
        for (double v : bw)
            if (v > tol) return false;
    }
    if (c.rows() > 0) {
        Vec cw = c.apply(w);
        if (la::norm_inf(cw) > tol) return false;
    }
    return true;
}

MultiplierSet multiplier_set(const Problem& p, const Vec& x, const Vec& xstar) {
    PointEvaluation ev = evaluate(p, x);
    if (!ev.feasible) throw InfeasiblePoint();

    std::vector<int> inactive;
    {
        std::size_t a = 0;
        for (int i = 0; i < p.m; ++i) {
            if (a < ev.active.size() && ev.active[a] == i)
                ++a;
            else
                inactive.push_back(i);
        }
    }
    int k = p.n + static_cast<int>(inactive.size());
    Mat a(k, p.m);
    Vec b(static_cast<std::size_t>(k), 0.0);
    for (int j = 0; j < p.n; ++j) {
        for (int i = 0; i < p.m; ++i) a(j, i) = ev.jac_q(i, j);
        b[static_cast<std::size_t>(j)] = xstar[static_cast<std::size_t>(j)];
    }
    for (std::size_t r = 0; r < inactive.size(); ++r)
        a(p.n + static_cast<int>(r), inactive[r]) = 1.0;

    MultiplierSet out;
    out.polyhedron = {std::move(a), std::move(b)};
    out.x = x;
    out.xstar = xstar;
    try {
        out.decomposition = poly::enumerate_vertices_rays(out.polyhedron);
    } catch (const poly::EmptyPolyhedron&) {
        // empty multiplier set is a legitimate outcome
    }
    return out;
}

StationarityResult stationarity_residual(const Problem& p, const Vec& x) {
    PointEvaluation ev = evaluate(p, x);
    if (!ev.feasible) throw InfeasiblePoint();

    // minimize t subject to |grad g + grad q^T lambda|_j <= t, lambda >= 0
    // supported on the active set. Standard form columns: lambda (m), t,
    // then 2n slacks; rows: 2n epigraph rows plus one pin per inactive index.
    int m = p.m, n = p.n;
    std::vector<int> inactive;
    {
        std::size_t a = 0;
        for (int i = 0; i < m; ++i) {
            if (a < ev.active.size() && ev.active[a] == i)
                ++a;
            else
                inactive.push_back(i);
        }
    }
    int cols = m + 1 + 2 * n;
    int rows = 2 * n + static_cast<int>(inactive.size());
    Mat a(rows, cols);
    Vec b(static_cast<std::size_t>(rows), 0.0);
    for (int j = 0; j < n; ++j) {
        // (grad q^T lambda)_j - t + s_j = -grad g_j
        for (int i = 0; i < m; ++i) a(j, i) = ev.jac_q(i, j);
        a(j, m) = -1.0;
        a(j, m + 1 + j) = 1.0;
        b[static_cast<std::size_t>(j)] = -ev.grad_g[static_cast<std::size_t>(j)];
        // -(grad q^T lambda)_j - t + s'_j = grad g_j
        for (int i = 0; i < m; ++i) a(n + j, i) = -ev.jac_q(i, j);
        a(n + j, m) = -1.0;
        a(n + j, m + 1 + n + j) = 1.0;
        b[static_cast<std::size_t>(n + j)] = ev.grad_g[static_cast<std::size_t>(j)];
    }
    for (std::size_t r = 0; r < inactive.size(); ++r)
        a(2 * n + static_cast<int>(r), inactive[r]) = 1.0;

    Vec c(static_cast<std::size_t>(cols), 0.0);
    c[static_cast<std::size_t>(m)] = 1.0;
    poly::SimplexResult sr = poly::simplex_solve({a, b}, c);

    StationarityResult out;
    if (sr.status != poly::LPStatus::Optimal) {
        // the epigraph program is always feasible and bounded below by zero
        throw std::runtime_error("stationarity LP did not solve");
    }
    out.residual = sr.value;
    out.multiplier.assign(sr.x.begin(), sr.x.begin() + m);
    return out;
}

ConeRep tangent_cone(const PointEvaluation& ev) {
    ConeRep cone;
    cone.b = gradient_rows(ev, ev.active);
    cone.c = Mat(0, static_cast<int>(ev.x.size()));
    return cone;
}

std::vector<int> positive_support(const Vec& lambda, double tol) {
    std::vector<int> s;
    for (std::size_t i = 0; i < lambda.size(); ++i)
        if (lambda[i] > tol) s.push_back(static_cast<int>(i));
    return s;
}

ConeRep critical_cone(const PointEvaluation& ev, const Vec& xstar, const Vec& lambda_ref) {
    Vec reached = ev.jac_q.apply_transposed(lambda_ref);
    for (std::size_t j = 0; j < reached.size(); ++j) reached[j] -= xstar[j];
    if (la::norm_inf(reached) > 1e-8) throw NotAMultiplier();
    for (double v : lambda_ref)
        if (v < -1e-8) throw NotAMultiplier();

    std::vector<int> plus = positive_support(lambda_ref);
    std::vector<int> rest;
    for (int i : ev.active)
        if (std::find(plus.begin(), plus.end(), i) == plus.end()) rest.push_back(i);

    ConeRep cone;
    cone.c = gradient_rows(ev, plus);
    cone.b = gradient_rows(ev, rest);
    return cone;
}

poly::LPOutcome directional_multipliers(const Problem& p, const PointEvaluation& ev,
                                        const MultiplierSet& lambda, const Vec& v) {
    if (lambda.empty()) throw EmptyMultiplierSet();
    Vec c(static_cast<std::size_t>(p.m), 0.0);
    for (int i : ev.active) {
        Vec hv = ev.hess_q[static_cast<std::size_t>(i)].apply(v);
        c[static_cast<std::size_t>(i)] = -la::dot(v, hv);
    }
    return poly::lp_solve(lambda.polyhedron, c);
}

Mat lagrangian_hessian(const PointEvaluation& ev, const Vec& lambda) {
    Mat h = ev.hess_g;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        double li = lambda[i];
        if (li == 0.0) continue;
        const Mat& hq = ev.hess_q[i];
        for (int a = 0; a < h.rows(); ++a)
            for (int b = 0; b < h.cols(); ++b) h(a, b) += li * hq(a, b);
    }
    return h;
}

Mat gradient_rows(const PointEvaluation& ev, const std::vector<int>& indices) {
    int n = static_cast<int>(ev.x.size());
    Mat rows(static_cast<int>(indices.size()), n);
    for (std::size_t r = 0; r < indices.size(); ++r)
        for (int j = 0; j < n; ++j) rows(static_cast<int>(r), j) = ev.jac_q(indices[r], j);
    return rows;
}

}  // namespace tiltcheck::nlp
