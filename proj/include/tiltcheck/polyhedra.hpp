#pragma once

// Standard-form polyhedra {x >= 0, Ax = b}: a two-phase primal simplex with
// Bland's rule, exhaustive basic-feasible-solution enumeration of vertices
// and extreme rays, and box truncation. Column counts stay small here (the
// multiplier polyhedra of the analysis), so combinatorial enumeration is the
// honest tool.

#include <stdexcept>
#include <string>
#include <vector>

#include "tiltcheck/linalg.hpp"

namespace tiltcheck::poly {

using la::Mat;
using la::Vec;

struct TooManyColumns : std::runtime_error {
    explicit TooManyColumns(int m)
        : std::runtime_error("polyhedron has too many columns for enumeration: " +
                             std::to_string(m)) {}
};
struct EmptyPolyhedron : std::runtime_error {
    EmptyPolyhedron() : std::runtime_error("polyhedron is empty") {}
};
struct NegativeRadius : std::runtime_error {
    NegativeRadius() : std::runtime_error("truncation radius must be nonnegative") {}
};

// {x in R^m : x >= 0, Ax = b}
struct StdPolyhedron {
    Mat a;  // k x m
    Vec b;  // k

    int dim() const { return a.cols(); }
    int num_rows() const { return a.rows(); }
};

// Direct feasibility test: Ax = b within tol, x >= -tol.
bool contains(const StdPolyhedron& p, const Vec& x, double tol = 1e-8);

struct VertexRayDecomposition {
    std::vector<Vec> vertices;           // each satisfies Ax=b, x >= -1e-9
    std::vector<Vec> rays;               // each satisfies Ax=0, x >= -1e-9, ||.||_inf = 1
    bool norm_approximation = false;     // set when a 2-norm ball was approximated

    bool empty() const { return vertices.empty(); }
};

enum class BallNorm { Inf, Two };

// All basic feasible solutions plus the extreme rays of the recession cone.
// Throws TooManyColumns for m > 16 and EmptyPolyhedron when no vertex exists.
VertexRayDecomposition enumerate_vertices_rays(const StdPolyhedron& p);

// Decomposition of P intersected with {||x|| <= radius}. The infinity-norm
// ball is exact (slack rows); a 2-norm request is the infinity-norm result
// post-filtered by ||v||_2 <= radius and flagged as an approximation.
// Returns an empty decomposition when the intersection is empty.
VertexRayDecomposition truncate_ball(const StdPolyhedron& p, double radius,
                                     BallNorm norm = BallNorm::Inf);

// Membership in conv(vertices) + cone(rays), decided by a phase-1 LP.
bool decomposition_contains(const VertexRayDecomposition& d, const Vec& x, double tol = 1e-7);

// Extreme rays of the cone {x >= 0, Ax = 0} (b is ignored), normalized to
// unit infinity norm. Allows slack-augmented systems somewhat wider than the
// public enumeration limit.
std::vector<Vec> extreme_rays(const StdPolyhedron& cone);

enum class LPStatus { Optimal, Unbounded, Infeasible };

struct LPOutcome {
    LPStatus status = LPStatus::Infeasible;
    double value = 0.0;
    Vec optimal_vertex;                     // a basic optimal solution
    std::vector<Vec> optimal_face_vertices; // all vertices of P attaining value
};

// minimize c^T x over P. Two-phase primal simplex, Bland's rule throughout.
// On Optimal the full optimal face vertex list is attached (vertices of P
// whose objective is within 1e-8*(1+|value|) of the optimum).
LPOutcome lp_solve(const StdPolyhedron& p, const Vec& c);

struct SimplexResult {
    LPStatus status = LPStatus::Infeasible;
    double value = 0.0;
    Vec x;
};

// The bare simplex without face enumeration, for callers that only need one
// optimal point (or just feasibility/boundedness).
SimplexResult simplex_solve(const StdPolyhedron& p, const Vec& c);

}  // namespace tiltcheck::poly
