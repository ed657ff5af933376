#pragma once

// Constraint-qualification probes (LICQ, MFCQ, CRCQ, metric subregularity,
// bounded extreme points) and the second-order machinery for tilt stability:
// the strong second-order sufficient condition, the pointbased condition over
// the truncated directional multiplier union Delta, its kappa-free variant,
// the extreme-point variant under MFCQ, the subgradient graphical derivative,
// and a sampled probe of the relaxed uniform second-order condition.
//
// Verdict vocabulary distinguishes certified polyhedral computation (Holds /
// Fails) from sampled estimation (HoldsOnSamples / FailsWithWitness); every
// Fails carries a witness that can be re-checked from the stored data.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tiltcheck/nlp.hpp"
#include "tiltcheck/polyhedra.hpp"

namespace tiltcheck::stab {

using la::Mat;
using la::Vec;
using nlp::PointEvaluation;
using nlp::Problem;

struct ActiveSetTooLarge : std::runtime_error {
    explicit ActiveSetTooLarge(int size)
        : std::runtime_error("active set too large for subset enumeration: " +
                             std::to_string(size)) {}
};

// --------------------------------------------------------------------------
// Constraint qualifications

struct LicqResult {
    bool holds = false;
    int active_count = 0;
    int gradient_rank = 0;
};
LicqResult check_licq(const PointEvaluation& ev);

struct MfcqResult {
    bool holds = false;
    double margin = 0.0;  // optimal t of the interiority LP
    Vec direction;        // attaining d when holds
};
MfcqResult check_mfcq(const PointEvaluation& ev);

struct CrcqResult {
    bool holds_on_samples = false;
    std::vector<int> witness_subset;  // J with rank drift, when failing
    Vec witness_point;
    int samples_used = 0;
    double radius = 0.0;
};
CrcqResult check_crcq(const Problem& p, const Vec& xbar, double radius = 1e-2,
                      int samples = 200);

struct MscqResult {
    double kappa_hat = 0.0;          // max sampled distance ratio over all radii
    bool diverging = false;
    double radius = 0.0;
    std::vector<double> per_radius;  // kappa estimates at radius * 2^-j
    int samples = 0;
};
MscqResult estimate_mscq(const Problem& p, const Vec& xbar, double radius = 0.1,
                         int samples = 2000);

struct BeppScaleRecord {
    double scale = 0.0;  // distance shell ||x - xbar||
    Vec x;
    Vec xstar;
    Vec lambda;          // extreme point with the largest norm at this scale
    double norm = 0.0;
};
struct BeppResult {
    bool bounded_on_samples = false;
    double kappa_hat = 0.0;  // max vertex norm / ||xstar||
    std::vector<BeppScaleRecord> scales;  // outermost shell first
    std::optional<BeppScaleRecord> witness;  // largest ratio found when failing
    double radius = 0.0;
    int x_samples = 0;
    int dir_samples = 0;
};
BeppResult estimate_bepp(const Problem& p, const Vec& xbar, double radius = 0.5,
                         int x_samples = 100, int dir_samples = 50);

// Upper estimate of the distance from x to the feasible set: nearest feasible
// grid point refined by pattern search restricted to feasible moves.
double feasible_set_distance(const Problem& p, const Vec& x, const Vec& grid_center,
                             double grid_halfwidth, int resolution = 33);

// Feasible points of Gamma near xbar, deterministic: xbar itself, feasible
// grid points, and coordinate-axis points at dyadic distances.
std::vector<Vec> feasible_samples(const Problem& p, const Vec& xbar, double radius,
                                  int budget);

// --------------------------------------------------------------------------
// Delta(xbar): union over critical directions of LP(v) optimal faces, cut by
// the gamma * ||grad g(xbar)|| ball (infinity norm, recorded).

struct DeltaSet {
    std::vector<Vec> vertices;   // vertices of each truncated optimal face
    bool exact = false;          // extreme-ray enumeration of K supplemented the grid
    bool degenerate_ball = false;  // grad g(xbar) = 0, so Delta is {0} or empty
    double gamma = 0.0;
    double ball_radius = 0.0;
    std::string ball_norm = "inf";
    int directions_used = 0;
};
DeltaSet build_delta(const Problem& p, const Vec& xbar, double gamma, int directions = 500);

// --------------------------------------------------------------------------
// Second-order conditions

enum class Verdict { Holds, Fails, NotApplicable };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "Holds";
        case Verdict::Fails: return "Fails";
        default: return "NotApplicable";
    }
}

struct SecondOrderResult {
    Verdict verdict = Verdict::NotApplicable;
    Vec witness_lambda;      // when Fails
    Vec witness_w;
    double min_reduced_eig = std::numeric_limits<double>::infinity();
    bool vacuous = false;    // empty Delta or trivial nullspaces everywhere
    bool sampled = false;    // Delta built from sampled directions only
    std::string note;
};

// Positive definiteness of the reduced Lagrangian Hessian for every
// multiplier, certified facewise: vertex blocks positive definite, ray blocks
// positive semidefinite, and vertex blocks positive definite on ray kernels.
SecondOrderResult check_ssosc(const Problem& p, const Vec& xbar);

// Reduced min-eigenvalue > 1/kappa over all Delta vertices.
SecondOrderResult check_pointbased(const Problem& p, const Vec& xbar, const DeltaSet& delta,
                                   double kappa);

// Same with threshold zero; min_reduced_eig is the inferred uniform ell.
SecondOrderResult check_kappa_free(const Problem& p, const Vec& xbar, const DeltaSet& delta);

// Delta replaced by untruncated optimal-face vertex sets; requires MFCQ.
SecondOrderResult check_extreme_point_variant(const Problem& p, const Vec& xbar, double kappa,
                                              int directions = 500);

// sup over Delta vertices of 1 / min reduced eigenvalue; +inf when some
// reduced Hessian fails positivity, 0 for empty Delta or all-trivial spaces.
double tilt_bound(const Problem& p, const Vec& xbar, const DeltaSet& delta);

// --------------------------------------------------------------------------
// Subgradient graphical derivative at (x, v) in direction w

struct GraphDerivSet {
    bool empty = true;              // w outside the critical cone, or no multipliers
    std::vector<Vec> base_vectors;  // grad^2 g w + grad^2(lambda^T q) w per face vertex
    std::vector<Vec> cone_generators;  // generators of the regular normal cone to K at w
    double quad_value = 0.0;        // common <z, w> over the base vectors
    std::string note;
};
GraphDerivSet graphical_derivative(const Problem& p, const Vec& x, const Vec& v, const Vec& w);

// --------------------------------------------------------------------------
// Sampled probe of the relaxed uniform second-order condition. A failure
// witness refutes tilt stability with modulus 1/ell; sampling cannot certify
// the converse.

struct RusoscWitness {
    Vec x;
    Vec v;
    Vec lambda;
    Vec w;
    double form_value = 0.0;
};
struct RusoscResult {
    bool holds_on_samples = false;
    std::optional<RusoscWitness> witness;
    double eta = 0.0;
    double ell = 0.0;
    int points = 0;
    int directions = 0;
    bool enforce_multiplier_ball = true;
    double gamma = 0.0;
};
RusoscResult check_rusosc_sampled(const Problem& p, const Vec& xbar, double eta, double ell,
                                  int point_budget = 200, int direction_budget = 100,
                                  bool enforce_multiplier_ball = true, double gamma = 2.0);

}  // namespace tiltcheck::stab
