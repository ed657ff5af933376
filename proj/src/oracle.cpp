#include "tiltcheck/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tiltcheck::oracle {

namespace {

double dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double tilted_objective(const Problem& p, const Vec& v, const Vec& x) {
    double f = expr::eval(p.objective, x);
    for (std::size_t j = 0; j < v.size(); ++j) f -= v[j] * x[j];
    return f;
}

// {-1,0,1}^n \ {0}; diagonal moves keep progress on thin feasible sets where
// single-coordinate steps are always rejected.
std::vector<Vec> pattern_directions(int n) {
    std::vector<Vec> dirs;
    std::vector<int> ofs(static_cast<std::size_t>(n), -1);
    for (;;) {
        bool all_zero = true;
        for (int o : ofs)
            if (o != 0) all_zero = false;
        if (!all_zero) {
            Vec d(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) d[static_cast<std::size_t>(j)] = ofs[static_cast<std::size_t>(j)];
            dirs.push_back(std::move(d));
        }
        int j = 0;
        while (j < n && ofs[static_cast<std::size_t>(j)] == 1) ofs[static_cast<std::size_t>(j++)] = -1;
        if (j == n) break;
        ++ofs[static_cast<std::size_t>(j)];
    }
    return dirs;
}

bool admissible(const Problem& p, const Vec& xbar, double gamma, const Vec& x) {
    if (dist(x, xbar) > gamma) return false;
    return nlp::is_feasible_point(p, x);
}

}  // namespace

std::vector<MinimizerCluster> solve_tilted(const Problem& p, const Vec& xbar, const Vec& v,
                                           const OracleConfig& cfg) {
    if (p.n > 3) throw DimensionTooHigh(p.n);
    int res = cfg.resolution;
    double spacing = 2.0 * cfg.gamma / (res - 1);

    // dense feasible grid over the ball
    std::vector<Vec> kept;
    std::vector<double> kept_val;
    double best = std::numeric_limits<double>::infinity();
    {
        std::vector<Vec> grid_best_pts;
        std::vector<double> grid_best_vals;
        std::vector<int> idx(static_cast<std::size_t>(p.n), 0);
        Vec x(static_cast<std::size_t>(p.n));
        bool any_feasible = false;
        for (;;) {
            for (int j = 0; j < p.n; ++j)
                x[static_cast<std::size_t>(j)] =
                    xbar[static_cast<std::size_t>(j)] - cfg.gamma + spacing * idx[static_cast<std::size_t>(j)];
            if (admissible(p, xbar, cfg.gamma, x)) {
                any_feasible = true;
                double f = tilted_objective(p, v, x);
                if (f < best) best = f;
                grid_best_pts.push_back(x);
                grid_best_vals.push_back(f);
            }
            int j = 0;
            while (j < p.n && idx[static_cast<std::size_t>(j)] == res - 1)
                idx[static_cast<std::size_t>(j++)] = 0;
            if (j == p.n) break;
            ++idx[static_cast<std::size_t>(j)];
        }
        if (!any_feasible) throw NoFeasibleGridPoint();
        double keep_tol = 1e-6 * (1.0 + std::fabs(best));
        for (std::size_t i = 0; i < grid_best_pts.size(); ++i) {
            if (grid_best_vals[i] > best + keep_tol) continue;
            if (kept.size() >= 256) break;  // flat-objective guard
            kept.push_back(grid_best_pts[i]);
            kept_val.push_back(grid_best_vals[i]);
        }
    }

    // pattern-search refinement, feasibility preserved by rejection
    std::vector<Vec> dirs = pattern_directions(p.n);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        Vec y = kept[i];
        double fy = kept_val[i];
        double step = spacing;
        Vec cand(y.size());
        for (int iter = 0; iter < cfg.refine_iters && step > 1e-10; ++iter) {
            bool improved = false;
            for (const Vec& d : dirs) {
                for (std::size_t j = 0; j < y.size(); ++j) cand[j] = y[j] + step * d[j];
                if (!admissible(p, xbar, cfg.gamma, cand)) continue;
                double fc = tilted_objective(p, v, cand);
                if (fc < fy - 1e-15) {
                    y = cand;
                    fy = fc;
                    improved = true;
                }
            }
            if (!improved) step *= 0.5;
        }
        kept[i] = y;
        kept_val[i] = fy;
    }

    // greedy clustering, best objective first
    std::vector<std::size_t> order(kept.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return kept_val[a] < kept_val[b]; });
    double ctol = cfg.effective_cluster_tol();
    std::vector<MinimizerCluster> clusters;
    for (std::size_t oi : order) {
        bool merged = false;
        for (MinimizerCluster& c : clusters) {
            double d = dist(c.point, kept[oi]);
            if (d <= ctol) {
                c.diameter = std::max(c.diameter, d);
                merged = true;
                break;
            }
        }
        if (!merged) clusters.push_back({kept[oi], kept_val[oi], 0.0});
    }
    return clusters;
}

namespace {

std::vector<Vec> tilt_set(int n, const OracleConfig& cfg) {
    std::vector<Vec> tilts;
    double rho = cfg.tilt_radius;
    int g = cfg.tilt_grid;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (;;) {
        Vec v(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            v[static_cast<std::size_t>(j)] =
                -rho + 2.0 * rho * idx[static_cast<std::size_t>(j)] / (g - 1);
        tilts.push_back(std::move(v));
        int j = 0;
        while (j < n && idx[static_cast<std::size_t>(j)] == g - 1) idx[static_cast<std::size_t>(j++)] = 0;
        if (j == n) break;
        ++idx[static_cast<std::size_t>(j)];
    }
    for (int j = 0; j < n; ++j)
        for (double s : {1.0, -1.0}) {
            Vec v(static_cast<std::size_t>(n), 0.0);
            v[static_cast<std::size_t>(j)] = s * rho;
            tilts.push_back(std::move(v));
        }
    return tilts;
}

}  // namespace

OracleReport verify_tilt_stability(const Problem& p, const Vec& xbar, const OracleConfig& cfg) {
    OracleReport rep;
    rep.single_valued = true;
    rep.min_intercluster_distance = std::numeric_limits<double>::infinity();

    for (const Vec& v : tilt_set(p.n, cfg)) {
        TiltSolution ts;
        ts.tilt = v;
        ts.clusters = solve_tilted(p, xbar, v, cfg);
        if (ts.clusters.size() > 1) {
            if (rep.single_valued) rep.multivalued_tilt = v;
            rep.single_valued = false;
            for (std::size_t a = 0; a < ts.clusters.size(); ++a)
                for (std::size_t b = a + 1; b < ts.clusters.size(); ++b)
                    rep.min_intercluster_distance =
                        std::min(rep.min_intercluster_distance,
                                 dist(ts.clusters[a].point, ts.clusters[b].point));
        }
        rep.tilts.push_back(std::move(ts));
    }

    if (rep.single_valued) {
        double lhat = 0.0;
        double min_sep = cfg.tilt_radius / 10.0;
        for (std::size_t a = 0; a < rep.tilts.size(); ++a)
            for (std::size_t b = a + 1; b < rep.tilts.size(); ++b) {
                double dv = dist(rep.tilts[a].tilt, rep.tilts[b].tilt);
                if (dv < min_sep) continue;
                double dm = dist(rep.tilts[a].clusters.front().point,
                                 rep.tilts[b].clusters.front().point);
                lhat = std::max(lhat, dm / dv);
            }
        rep.lipschitz_hat = lhat;
    } else {
        rep.lipschitz_hat = std::numeric_limits<double>::infinity();
    }

    // M(0) must recover xbar
    for (const TiltSolution& ts : rep.tilts) {
        if (la::norm_inf(ts.tilt) > 1e-15) continue;
        for (const MinimizerCluster& c : ts.clusters)
            if (dist(c.point, xbar) <= cfg.effective_cluster_tol())
                rep.argmin_at_zero_matches = true;
        break;
    }
    return rep;
}

GrowthResult verify_growth(const Problem& p, const Vec& xbar, double kappa,
                           const OracleConfig& cfg) {
    if (p.n > 3) throw DimensionTooHigh(p.n);
    GrowthResult res;
    res.kappa = kappa;
    res.holds = true;

    // feasible grid of the ball, reused across tilts
    std::vector<Vec> grid;
    {
        int r = cfg.resolution;
        double spacing = 2.0 * cfg.gamma / (r - 1);
        std::vector<int> idx(static_cast<std::size_t>(p.n), 0);
        Vec x(static_cast<std::size_t>(p.n));
        for (;;) {
            for (int j = 0; j < p.n; ++j)
                x[static_cast<std::size_t>(j)] =
                    xbar[static_cast<std::size_t>(j)] - cfg.gamma + spacing * idx[static_cast<std::size_t>(j)];
            if (admissible(p, xbar, cfg.gamma, x)) grid.push_back(x);
            int j = 0;
            while (j < p.n && idx[static_cast<std::size_t>(j)] == r - 1)
                idx[static_cast<std::size_t>(j++)] = 0;
            if (j == p.n) break;
            ++idx[static_cast<std::size_t>(j)];
        }
        if (grid.empty()) throw NoFeasibleGridPoint();
    }

    for (const Vec& v : tilt_set(p.n, cfg)) {
        std::vector<MinimizerCluster> clusters = solve_tilted(p, xbar, v, cfg);
        const Vec& u = clusters.front().point;
        double fu = expr::eval(p.objective, u);
        for (const Vec& x : grid) {
            double fx = expr::eval(p.objective, x);
            double inner = 0.0, sq = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                inner += v[j] * (x[j] - u[j]);
                sq += (x[j] - u[j]) * (x[j] - u[j]);
            }
            if (fx < fu + inner + sq / (2.0 * kappa) - 1e-7) {
                res.holds = false;
                res.witness_tilt = v;
                res.witness_minimizer = u;
                res.witness_point = x;
                return res;
            }
        }
    }
    return res;
}

ConsistencyRecord empirical_modulus_consistency(double lipschitz_hat, double bound) {
    ConsistencyRecord rec;
    rec.lipschitz_hat = lipschitz_hat;
    rec.bound = bound;
    rec.pass = lipschitz_hat <= bound * 1.15 + 0.02;
    return rec;
}

}  // namespace tiltcheck::oracle
