#pragma once

// The inequality-constrained program "minimize g(x) s.t. q_i(x) <= 0" with a
// candidate point: pointwise derivative data, active sets, stationarity,
// KKT multiplier polyhedra, tangent and critical cones, and the directional
// multiplier sets that solve LP(v).

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tiltcheck/expr.hpp"
#include "tiltcheck/linalg.hpp"
#include "tiltcheck/polyhedra.hpp"

namespace tiltcheck::nlp {

using expr::Expr;
using la::Mat;
using la::Vec;

constexpr double kActiveTol = 1e-8;    // |q_i(x)| window counted as active
constexpr double kSupportTol = 1e-8;   // lambda_i above this is strictly positive
constexpr double kConeTol = 1e-9;      // cone membership slack

struct InfeasiblePoint : std::runtime_error {
    InfeasiblePoint() : std::runtime_error("point is not feasible") {}
};
struct NotAMultiplier : std::runtime_error {
    NotAMultiplier() : std::runtime_error("reference vector is not a KKT multiplier") {}
};
struct EmptyMultiplierSet : std::runtime_error {
    EmptyMultiplierSet() : std::runtime_error("multiplier set is empty") {}
};
struct NotStationary : std::runtime_error {
    explicit NotStationary(double residual)
        : std::runtime_error("point is not stationary (residual " +
                             std::to_string(residual) + ")"),
          residual(residual) {}
    double residual;
};

struct Problem {
    int n = 0;
    int m = 0;
    std::vector<std::string> var_names;
    Expr objective;
    std::vector<Expr> constraints;
    Vec candidate;  // the point the analysis centers on

    // precompiled symbolic derivatives
    std::vector<Expr> obj_grad;
    std::vector<Expr> obj_hess;
    std::vector<std::vector<Expr>> con_grad;
    std::vector<std::vector<Expr>> con_hess;

    Problem() = default;
    Problem(int n_, std::vector<std::string> names, Expr obj, std::vector<Expr> cons,
            Vec point);
};

struct PointEvaluation {
    Vec x;
    double g = 0.0;
    Vec grad_g;          // n
    Mat hess_g;          // n x n
    Vec q;               // m
    Mat jac_q;           // m x n, row i = grad q_i
    std::vector<Mat> hess_q;
    std::vector<int> active;  // I(x), ascending
    bool feasible = false;
};

PointEvaluation evaluate(const Problem& p, const Vec& x);

// max_i q_i(x) <= tol; evaluation failures (near-zero denominators) count as
// infeasible rather than erroring, so samplers can probe freely.
bool is_feasible_point(const Problem& p, const Vec& x, double tol = kActiveTol);

// {w : Bw <= 0, Cw = 0}
struct ConeRep {
    Mat b;  // inequality normals as rows
    Mat c;  // equality normals as rows

    bool member(const Vec& w, double tol = kConeTol) const;
};

struct MultiplierSet {
    poly::StdPolyhedron polyhedron;             // lambda >= 0, A lambda = b
    poly::VertexRayDecomposition decomposition; // empty when the set is empty
    Vec x;
    Vec xstar;

    bool empty() const { return decomposition.vertices.empty(); }
};

// Lambda(x, xstar) = {lambda >= 0 : grad q(x)^T lambda = xstar, lambda_i = 0
// off the active set}. Inactive indices are pinned with explicit rows so the
// coordinate layout never shifts.
MultiplierSet multiplier_set(const Problem& p, const Vec& x, const Vec& xstar);

// Minimal KKT residual min_{lambda} ||grad g + grad q^T lambda||_inf over
// lambda >= 0 supported on the active set. Zero (<= 1e-8) iff stationary.
struct StationarityResult {
    double residual = 0.0;
    Vec multiplier;  // attaining lambda
};
StationarityResult stationarity_residual(const Problem& p, const Vec& x);

// T_Gamma(x) under metric subregularity: active gradient half-spaces.
ConeRep tangent_cone(const PointEvaluation& ev);

// K(x, xstar): equalities on I+(lambda_ref), inequalities on the rest of I(x).
ConeRep critical_cone(const PointEvaluation& ev, const Vec& xstar, const Vec& lambda_ref);

std::vector<int> positive_support(const Vec& lambda, double tol = kSupportTol);

// LP(v): minimize -v^T grad^2(lambda^T q)(x) v over Lambda(x, xstar).
// The optimal face is the directional multiplier set; Unbounded means that
// set is empty.
poly::LPOutcome directional_multipliers(const Problem& p, const PointEvaluation& ev,
                                        const MultiplierSet& lambda, const Vec& v);

// Hessian of the Lagrangian grad^2 g + sum_i lambda_i grad^2 q_i at ev.x.
Mat lagrangian_hessian(const PointEvaluation& ev, const Vec& lambda);

// Rows grad q_i(x) for i in the given index set (n columns, may be 0 rows).
Mat gradient_rows(const PointEvaluation& ev, const std::vector<int>& indices);

}  // namespace tiltcheck::nlp
