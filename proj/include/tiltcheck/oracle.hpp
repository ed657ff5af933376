#pragma once

// Brute-force ground truth for tilt stability: solve the tilted problems
// argmin{g(x) - <v,x> : q(x) <= 0, x in B_gamma(xbar)} on a dense grid with
// pattern-search refinement, test single-valuedness of the argmin map and
// estimate its Lipschitz modulus, and check the uniform quadratic growth
// inequality directly. Everything is deterministic.

#include <optional>
#include <stdexcept>
#include <vector>

#include "tiltcheck/nlp.hpp"

namespace tiltcheck::oracle {

using la::Vec;
using nlp::Problem;

struct DimensionTooHigh : std::runtime_error {
    explicit DimensionTooHigh(int n)
        : std::runtime_error("oracle grid limited to 3 variables, got " + std::to_string(n)) {}
};
struct NoFeasibleGridPoint : std::runtime_error {
    NoFeasibleGridPoint() : std::runtime_error("no feasible grid point in the oracle ball") {}
};

struct OracleConfig {
    double gamma = 0.5;        // ball radius around xbar
    double tilt_radius = 0.05; // tilts sampled with ||v||_inf <= this
    int tilt_grid = 5;         // grid values per tilt axis (odd keeps v = 0)
    int resolution = 33;       // spatial grid points per axis, >= 32
    int refine_iters = 50;
    double cluster_tol = 0.0;  // 0 = auto (1e-3 * gamma)

    double effective_cluster_tol() const {
        return cluster_tol > 0.0 ? cluster_tol : 1e-3 * gamma;
    }
};

struct MinimizerCluster {
    Vec point;       // best-objective member
    double value;    // tilted objective there
    double diameter; // max member distance to the representative
};

// Clusters of near-optimal refined grid points, sorted by objective.
std::vector<MinimizerCluster> solve_tilted(const Problem& p, const Vec& xbar, const Vec& v,
                                           const OracleConfig& cfg);

struct TiltSolution {
    Vec tilt;
    std::vector<MinimizerCluster> clusters;
};

struct OracleReport {
    std::vector<TiltSolution> tilts;   // tilt-grid order
    bool single_valued = false;
    double lipschitz_hat = 0.0;        // +inf when not single-valued
    std::optional<Vec> multivalued_tilt;
    bool argmin_at_zero_matches = false;  // M(0) contains xbar
    double min_intercluster_distance = 0.0;  // audit aid for borderline clusters
};

OracleReport verify_tilt_stability(const Problem& p, const Vec& xbar, const OracleConfig& cfg);

struct GrowthResult {
    bool holds = false;
    double kappa = 0.0;
    // witness (v, u, x) violating the growth inequality
    std::optional<Vec> witness_tilt;
    std::optional<Vec> witness_minimizer;
    std::optional<Vec> witness_point;
};

// f(x) >= f(u) + <v, x-u> + ||x-u||^2/(2 kappa) over feasible grid points of
// the ball, for every solved tilt (v, u = M(v)); slack 1e-7.
GrowthResult verify_growth(const Problem& p, const Vec& xbar, double kappa,
                           const OracleConfig& cfg);

struct ConsistencyRecord {
    double lipschitz_hat = 0.0;
    double bound = 0.0;
    bool pass = false;  // lipschitz_hat <= bound * 1.15 + 0.02
};

ConsistencyRecord empirical_modulus_consistency(double lipschitz_hat, double bound);

}  // namespace tiltcheck::oracle
