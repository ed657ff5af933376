#include "tiltcheck/stability.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "tiltcheck/sampling.hpp"

namespace tiltcheck::stab {

namespace {

bool is_feasible(const Problem& p, const Vec& x, double tol = nlp::kActiveTol) {
    return nlp::is_feasible_point(p, x, tol);
}

double point_dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Offsets {-1,0,1}^n \ {0}; single-coordinate moves stall on feasible sets of
// lower dimension (an active equality-like pair), diagonal moves do not.
std::vector<Vec> pattern_directions(int n) {
    std::vector<Vec> dirs;
    std::vector<int> ofs(static_cast<std::size_t>(n), -1);
    for (;;) {
        bool all_zero = true;
        for (int v : ofs)
            if (v != 0) all_zero = false;
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

// Feasible grid over an axis-aligned cube, cached per probe radius.
struct FeasibleGrid {
    std::vector<Vec> points;
    double spacing = 0.0;

    FeasibleGrid(const Problem& p, const Vec& center, double halfwidth, int resolution) {
        int n = p.n;
        spacing = 2.0 * halfwidth / (resolution - 1);
        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        Vec y(static_cast<std::size_t>(n));
        for (;;) {
            for (int j = 0; j < n; ++j)
                y[static_cast<std::size_t>(j)] =
                    center[static_cast<std::size_t>(j)] - halfwidth +
                    spacing * idx[static_cast<std::size_t>(j)];
            if (is_feasible(p, y)) points.push_back(y);
            int j = 0;
            while (j < n && idx[static_cast<std::size_t>(j)] == resolution - 1)
                idx[static_cast<std::size_t>(j++)] = 0;
            if (j == n) break;
            ++idx[static_cast<std::size_t>(j)];
        }
    }

    // nearest feasible grid point to x, or nothing
    const Vec* nearest(const Vec& x) const {
        const Vec* best = nullptr;
        double bd = 0.0;
        for (const Vec& g : points) {
            double d = point_dist(g, x);
            if (!best || d < bd) {
                best = &g;
                bd = d;
            }
        }
        return best;
    }
};

// Pattern-search refinement of the distance d(x; Gamma) from a feasible start.
double refine_distance(const Problem& p, const Vec& x, Vec y, double step0,
                       const std::vector<Vec>& dirs) {
    double best = point_dist(y, x);
    double step = step0;
    Vec cand(y.size());
    for (int iter = 0; iter < 80 && step > 1e-9; ++iter) {
        bool improved = false;
        for (const Vec& d : dirs) {
            for (std::size_t j = 0; j < y.size(); ++j) cand[j] = y[j] + step * d[j];
            double dist = point_dist(cand, x);
            if (dist < best - 1e-15 && is_feasible(p, cand)) {
                y = cand;
                best = dist;
                improved = true;
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

// sum_i weight_i grad^2 q_i(x)
Mat constraint_hessian_combo(const PointEvaluation& ev, const Vec& weights) {
    int n = static_cast<int>(ev.x.size());
    Mat h(n, n);
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double wi = weights[i];
        if (wi == 0.0) continue;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) h(a, b) += wi * ev.hess_q[i](a, b);
    }
    return h;
}

void push_unique_vec(std::vector<Vec>& out, const Vec& v, double tol = 1e-7) {
    for (const Vec& w : out) {
        bool close = true;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (std::fabs(w[i] - v[i]) > tol) {
                close = false;
                break;
            }
        if (close) return;
    }
    out.push_back(v);
}

void sort_vectors(std::vector<Vec>& vs) {
    std::sort(vs.begin(), vs.end(), [](const Vec& a, const Vec& b) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] < b[i] - 1e-12) return true;
            if (a[i] > b[i] + 1e-12) return false;
        }
        return false;
    });
}

constexpr double kDivergenceFactor = 1.8;  // "ratio doubles" with sampling slack

}  // namespace

// ---------------------------------------------------------------------------
// Constraint qualifications

LicqResult check_licq(const PointEvaluation& ev) {
    LicqResult r;
    r.active_count = static_cast<int>(ev.active.size());
    Mat g = nlp::gradient_rows(ev, ev.active);
    r.gradient_rank = la::rank(g);
    r.holds = (r.gradient_rank == r.active_count);
    return r;
}

MfcqResult check_mfcq(const PointEvaluation& ev) {
    int n = static_cast<int>(ev.x.size());
    int na = static_cast<int>(ev.active.size());
    // max t s.t. <grad q_i, d> + t <= 0 (active i), -1 <= d <= 1, t <= 1,
    // in standard form with d = dp - dm and slacks everywhere.
    int cols = 2 * n + 1 + na + 2 * n + 1;
    int rows = na + 2 * n + 1;
    Mat a(rows, cols);
    Vec b(static_cast<std::size_t>(rows), 0.0);
    int t_col = 2 * n;
    for (int r = 0; r < na; ++r) {
        int i = ev.active[static_cast<std::size_t>(r)];
        for (int j = 0; j < n; ++j) {
            a(r, j) = ev.jac_q(i, j);
            a(r, n + j) = -ev.jac_q(i, j);
        }
        a(r, t_col) = 1.0;
        a(r, 2 * n + 1 + r) = 1.0;  // slack
    }
    for (int j = 0; j < n; ++j) {
        a(na + j, j) = 1.0;
        a(na + j, 2 * n + 1 + na + j) = 1.0;
        b[static_cast<std::size_t>(na + j)] = 1.0;
        a(na + n + j, n + j) = 1.0;
        a(na + n + j, 2 * n + 1 + na + n + j) = 1.0;
        b[static_cast<std::size_t>(na + n + j)] = 1.0;
    }
    a(na + 2 * n, t_col) = 1.0;
    a(na + 2 * n, cols - 1) = 1.0;
    b[static_cast<std::size_t>(na + 2 * n)] = 1.0;

    Vec c(static_cast<std::size_t>(cols), 0.0);
    c[static_cast<std::size_t>(t_col)] = -1.0;
    poly::SimplexResult sr = poly::simplex_solve({a, b}, c);

    MfcqResult out;
    if (sr.status != poly::LPStatus::Optimal) return out;  // cannot happen: 0 is feasible
    out.margin = -sr.value;
    out.holds = out.margin > 1e-9;
    out.direction.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        out.direction[static_cast<std::size_t>(j)] =
            sr.x[static_cast<std::size_t>(j)] - sr.x[static_cast<std::size_t>(n + j)];
    return out;
}

CrcqResult check_crcq(const Problem& p, const Vec& xbar, double radius, int samples) {
    PointEvaluation ev0 = evaluate(p, xbar);
    if (static_cast<int>(ev0.active.size()) > 12)
        throw ActiveSetTooLarge(static_cast<int>(ev0.active.size()));

    CrcqResult out;
    out.radius = radius;
    std::vector<Vec> pts = sampling::ball_points(xbar, radius, samples);
    out.samples_used = static_cast<int>(pts.size());

    int na = static_cast<int>(ev0.active.size());
    std::vector<std::vector<int>> subsets;
    for (unsigned long mask = 1; mask < (1ul << na); ++mask) {
        std::vector<int> J;
        for (int r = 0; r < na; ++r)
            if (mask & (1ul << r)) J.push_back(ev0.active[static_cast<std::size_t>(r)]);
        subsets.push_back(std::move(J));
    }
    std::vector<int> base_rank(subsets.size());
    for (std::size_t s = 0; s < subsets.size(); ++s)
        base_rank[s] = la::rank(nlp::gradient_rows(ev0, subsets[s]));

    for (const Vec& x : pts) {
        PointEvaluation ev = evaluate(p, x);
        for (std::size_t s = 0; s < subsets.size(); ++s) {
            int r = la::rank(nlp::gradient_rows(ev, subsets[s]));
            if (r != base_rank[s]) {
                out.holds_on_samples = false;
                out.witness_subset = subsets[s];
                out.witness_point = x;
                return out;
            }
        }
    }
    out.holds_on_samples = true;
    return out;
}

double feasible_set_distance(const Problem& p, const Vec& x, const Vec& grid_center,
                             double grid_halfwidth, int resolution) {
    FeasibleGrid grid(p, grid_center, grid_halfwidth, resolution);
    const Vec* start = grid.nearest(x);
    if (!start) return std::numeric_limits<double>::infinity();
    return refine_distance(p, x, *start, grid.spacing, pattern_directions(p.n));
}

MscqResult estimate_mscq(const Problem& p, const Vec& xbar, double radius, int samples) {
    MscqResult out;
    out.radius = radius;
    out.samples = samples;
    std::vector<Vec> dirs = pattern_directions(p.n);

    const int levels = 4;
    for (int j = 0; j < levels; ++j) {
        double r = radius * std::pow(0.5, j);
        FeasibleGrid grid(p, xbar, 2.0 * r, 33);
        double kappa = 0.0;
        for (const Vec& x : sampling::ball_points(xbar, r, samples)) {
            double dq = 0.0;
            bool eval_ok = true;
            try {
                for (const auto& c : p.constraints) {
                    double qi = expr::eval(c, x);
                    if (qi > 0.0) dq += qi * qi;
                }
            } catch (const expr::EvalError&) {
                eval_ok = false;
            }
            if (!eval_ok) continue;
            dq = std::sqrt(dq);
            if (dq <= 1e-12) continue;
            const Vec* start = grid.nearest(x);
            if (!start) continue;
            double dist = refine_distance(p, x, *start, grid.spacing, dirs);
            kappa = std::max(kappa, dist / dq);
        }
        out.per_radius.push_back(kappa);
        out.kappa_hat = std::max(out.kappa_hat, kappa);
    }
    out.diverging = true;
    for (int j = 0; j + 1 < levels; ++j)
        if (!(out.per_radius[static_cast<std::size_t>(j)] > 0.0 &&
              out.per_radius[static_cast<std::size_t>(j + 1)] >=
                  kDivergenceFactor * out.per_radius[static_cast<std::size_t>(j)]))
            out.diverging = false;
    return out;
}

std::vector<Vec> feasible_samples(const Problem& p, const Vec& xbar, double radius,
                                  int budget) {
    std::vector<Vec> out;
    if (is_feasible(p, xbar)) out.push_back(xbar);
    for (int k = 0; k <= 5; ++k) {
        double d = radius * std::pow(0.5, k);
        for (int j = 0; j < p.n; ++j)
            for (double s : {1.0, -1.0}) {
                Vec y = xbar;
                y[static_cast<std::size_t>(j)] += s * d;
                if (is_feasible(p, y)) push_unique_vec(out, y, 1e-12);
            }
    }
    FeasibleGrid grid(p, xbar, radius, 21);
    for (const Vec& g : grid.points) {
        if (static_cast<int>(out.size()) >= budget) break;
        if (point_dist(g, xbar) > radius + 1e-12) continue;
        push_unique_vec(out, g, 1e-12);
    }
    return out;
}

BeppResult estimate_bepp(const Problem& p, const Vec& xbar, double radius, int x_samples,
                         int dir_samples) {
    BeppResult out;
    out.radius = radius;

    std::vector<Vec> xs = feasible_samples(p, xbar, radius, x_samples);
    out.x_samples = static_cast<int>(xs.size());

    std::vector<Vec> dirs = sampling::sphere_directions(dir_samples, p.n);
    PointEvaluation ev0 = evaluate(p, xbar);
    double gn = la::norm2(ev0.grad_g);
    if (gn > 1e-12) {
        Vec d = ev0.grad_g;
        for (double& v : d) v /= -gn;
        dirs.insert(dirs.begin(), std::move(d));
    }
    if (static_cast<int>(dirs.size()) > dir_samples + 2 * p.n + 1)
        dirs.resize(static_cast<std::size_t>(dir_samples + 2 * p.n + 1));
    out.dir_samples = static_cast<int>(dirs.size());

    const int shells = 6;
    std::vector<std::optional<BeppScaleRecord>> shell_best(shells);
    std::optional<BeppScaleRecord> overall;

    for (const Vec& x : xs) {
        double dist = point_dist(x, xbar);
        int shell = -1;
        for (int k = 0; k < shells; ++k) {
            double s = radius * std::pow(0.5, k);
            if (dist <= s + 1e-12 && dist > 0.5 * s + 1e-12) {
                shell = k;
                break;
            }
        }
        for (const Vec& d : dirs) {
            nlp::MultiplierSet ms;
            try {
                ms = nlp::multiplier_set(p, x, d);
            } catch (const nlp::InfeasiblePoint&) {
                continue;
            }
            if (ms.empty()) continue;
            double vmax = 0.0;
            const Vec* argmax = nullptr;
            for (const Vec& v : ms.decomposition.vertices) {
                double nv = la::norm2(v);
                if (nv > vmax) {
                    vmax = nv;
                    argmax = &v;
                }
            }
            if (!argmax) continue;
            double ratio = vmax / la::norm2(d);
            out.kappa_hat = std::max(out.kappa_hat, ratio);
            BeppScaleRecord rec{dist, x, d, *argmax, vmax};
            if (!overall || ratio > overall->norm) overall = rec;
            if (shell >= 0) {
                auto& sb = shell_best[static_cast<std::size_t>(shell)];
                if (!sb || vmax > sb->norm) sb = rec;
            }
        }
    }

    for (const auto& sb : shell_best)
        if (sb) out.scales.push_back(*sb);

    // divergence along the shell ladder, outermost to innermost
    bool diverging = false;
    int consecutive = 0;
    for (std::size_t k = 0; k + 1 < out.scales.size(); ++k) {
        if (out.scales[k].norm > 0.0 &&
            out.scales[k + 1].norm >= kDivergenceFactor * out.scales[k].norm)
            ++consecutive;
        else
            consecutive = 0;
        if (consecutive >= 2) diverging = true;
    }
    out.bounded_on_samples = !diverging;
    if (diverging) out.witness = overall;
    return out;
}

// ---------------------------------------------------------------------------
// Delta construction and second-order checks

namespace {

// critical-cone directions: coarse sphere grid filtered by membership, plus
// the exact extreme rays of K in low dimension
std::vector<Vec> critical_directions(const nlp::ConeRep& k, int n, int count, bool* exact) {
    std::vector<Vec> dirs;
    for (const Vec& d : sampling::sphere_directions(count, n))
        if (k.member(d)) push_unique_vec(dirs, d, 1e-9);
    *exact = false;
    if (n <= 3) {
        // lift {Bw <= 0, Cw = 0} to standard form in (w+, w-, s)
        int nb = k.b.rows(), nc = k.c.rows();
        Mat a(nb + nc, 2 * n + nb);
        for (int i = 0; i < nb; ++i) {
            for (int j = 0; j < n; ++j) {
                a(i, j) = k.b(i, j);
                a(i, n + j) = -k.b(i, j);
            }
            a(i, 2 * n + i) = 1.0;
        }
        for (int i = 0; i < nc; ++i)
            for (int j = 0; j < n; ++j) {
                a(nb + i, j) = k.c(i, j);
                a(nb + i, n + j) = -k.c(i, j);
            }
        poly::StdPolyhedron cone{a, Vec(static_cast<std::size_t>(nb + nc), 0.0)};
        try {
            for (const Vec& r : poly::extreme_rays(cone)) {
                Vec w(static_cast<std::size_t>(n));
                for (int j = 0; j < n; ++j)
                    w[static_cast<std::size_t>(j)] =
                        r[static_cast<std::size_t>(j)] - r[static_cast<std::size_t>(n + j)];
                double nrm = la::norm2(w);
                if (nrm < 1e-9) continue;
                for (double& v : w) v /= nrm;
                if (k.member(w)) push_unique_vec(dirs, w, 1e-9);
            }
            *exact = true;
        } catch (const poly::TooManyColumns&) {
            // grid sampling only
        }
    }
    return dirs;
}

struct ReducedEig {
    double min_eig = std::numeric_limits<double>::infinity();  // +inf when Z is trivial
    Mat z;          // nullspace basis used
    Vec eigvec;     // unit direction attaining min_eig, original coordinates
    bool trivial = true;
};

ReducedEig reduced_min_eig(const PointEvaluation& ev, const Vec& lambda) {
    ReducedEig out;
    std::vector<int> iplus = nlp::positive_support(lambda);
    out.z = la::nullspace(nlp::gradient_rows(ev, iplus));
    if (out.z.cols() == 0) return out;
    out.trivial = false;
    Mat red = la::reduced_hessian(nlp::lagrangian_hessian(ev, lambda), out.z);
    la::EigenResult eg = la::sym_eigs(red);
    out.min_eig = eg.values.front();
    Vec zc(static_cast<std::size_t>(out.z.cols()));
    for (int i = 0; i < out.z.cols(); ++i) zc[static_cast<std::size_t>(i)] = eg.vectors(i, 0);
    out.eigvec.assign(static_cast<std::size_t>(out.z.rows()), 0.0);
    for (int r = 0; r < out.z.rows(); ++r)
        for (int c = 0; c < out.z.cols(); ++c)
            out.eigvec[static_cast<std::size_t>(r)] += out.z(r, c) * zc[static_cast<std::size_t>(c)];
    return out;
}

}  // namespace

DeltaSet build_delta(const Problem& p, const Vec& xbar, double gamma, int directions) {
    nlp::StationarityResult st = nlp::stationarity_residual(p, xbar);
    if (st.residual > 1e-8) throw nlp::NotStationary(st.residual);

    PointEvaluation ev = evaluate(p, xbar);
    Vec xstar(static_cast<std::size_t>(p.n));
    for (int j = 0; j < p.n; ++j) xstar[static_cast<std::size_t>(j)] = -ev.grad_g[static_cast<std::size_t>(j)];

    DeltaSet out;
    out.gamma = gamma;
    double gn = la::norm2(ev.grad_g);
    out.ball_radius = gamma * gn;
    out.degenerate_ball = (gn <= 1e-12);

    nlp::MultiplierSet ms = nlp::multiplier_set(p, xbar, xstar);
    if (ms.empty()) throw nlp::NotStationary(st.residual);

    nlp::ConeRep k = nlp::critical_cone(ev, xstar, ms.decomposition.vertices.front());
    std::vector<Vec> dirs = critical_directions(k, p.n, directions, &out.exact);
    out.directions_used = static_cast<int>(dirs.size());
    if (dirs.empty()) return out;  // K = {0}: empty union

    for (const Vec& v : dirs) {
        Vec c(static_cast<std::size_t>(p.m), 0.0);
        for (int i : ev.active) {
            Vec hv = ev.hess_q[static_cast<std::size_t>(i)].apply(v);
            c[static_cast<std::size_t>(i)] = -la::dot(v, hv);
        }
        poly::SimplexResult sr = poly::simplex_solve(ms.polyhedron, c);
        if (sr.status != poly::LPStatus::Optimal) continue;  // empty directional set

        // optimal face as a polyhedron: one extra equality row c^T lambda = value
        Mat a2(ms.polyhedron.num_rows() + 1, p.m);
        for (int i = 0; i < ms.polyhedron.num_rows(); ++i)
            for (int j = 0; j < p.m; ++j) a2(i, j) = ms.polyhedron.a(i, j);
        for (int j = 0; j < p.m; ++j) a2(ms.polyhedron.num_rows(), j) = c[static_cast<std::size_t>(j)];
        Vec b2 = ms.polyhedron.b;
        b2.push_back(sr.value);

        poly::VertexRayDecomposition trunc =
            poly::truncate_ball({a2, b2}, out.ball_radius, poly::BallNorm::Inf);
        for (const Vec& vert : trunc.vertices) push_unique_vec(out.vertices, vert);
    }
    sort_vectors(out.vertices);
    return out;
}

SecondOrderResult check_ssosc(const Problem& p, const Vec& xbar) {
    nlp::StationarityResult st = nlp::stationarity_residual(p, xbar);
    if (st.residual > 1e-8) throw nlp::NotStationary(st.residual);
    PointEvaluation ev = evaluate(p, xbar);
    Vec xstar(static_cast<std::size_t>(p.n));
    for (int j = 0; j < p.n; ++j) xstar[static_cast<std::size_t>(j)] = -ev.grad_g[static_cast<std::size_t>(j)];
    nlp::MultiplierSet ms = nlp::multiplier_set(p, xbar, xstar);
    if (ms.empty()) throw nlp::NotStationary(st.residual);
    const auto& dec = ms.decomposition;

    // support universe across vertices and rays
    std::set<int> universe_set;
    for (const Vec& v : dec.vertices)
        for (int i : nlp::positive_support(v)) universe_set.insert(i);
    for (const Vec& r : dec.rays)
        for (int i : nlp::positive_support(r)) universe_set.insert(i);
    std::vector<int> universe(universe_set.begin(), universe_set.end());
    if (static_cast<int>(universe.size()) > 16)
        throw ActiveSetTooLarge(static_cast<int>(universe.size()));

    SecondOrderResult out;
    out.verdict = Verdict::Holds;
    out.vacuous = true;

    auto supp_mask = [&](const Vec& v) {
        unsigned long mask = 0;
        for (int i : nlp::positive_support(v)) {
            auto it = std::find(universe.begin(), universe.end(), i);
            mask |= 1ul << (it - universe.begin());
        }
        return mask;
    };
    std::vector<unsigned long> vmask, rmask;
    for (const Vec& v : dec.vertices) vmask.push_back(supp_mask(v));
    for (const Vec& r : dec.rays) rmask.push_back(supp_mask(r));

    std::set<std::pair<std::vector<int>, std::vector<int>>> seen;
    for (unsigned long s = 0; s < (1ul << universe.size()); ++s) {
        std::vector<int> vs, rs;
        for (std::size_t i = 0; i < dec.vertices.size(); ++i)
            if ((vmask[i] & ~s) == 0) vs.push_back(static_cast<int>(i));
        for (std::size_t i = 0; i < dec.rays.size(); ++i)
            if ((rmask[i] & ~s) == 0) rs.push_back(static_cast<int>(i));
        if (vs.empty()) continue;
        if (!seen.insert({vs, rs}).second) continue;

        // relative-interior representative: vertex barycenter + small ray step
        Vec rep(static_cast<std::size_t>(p.m), 0.0);
        for (int vi : vs)
            for (int i = 0; i < p.m; ++i)
                rep[static_cast<std::size_t>(i)] +=
                    dec.vertices[static_cast<std::size_t>(vi)][static_cast<std::size_t>(i)] / vs.size();
        double eps = 1e-2 * (1.0 + la::norm_inf(rep));
        for (int ri : rs)
            for (int i = 0; i < p.m; ++i)
                rep[static_cast<std::size_t>(i)] += eps * dec.rays[static_cast<std::size_t>(ri)][static_cast<std::size_t>(i)];

        std::vector<int> iplus = nlp::positive_support(rep);
        Mat z = la::nullspace(nlp::gradient_rows(ev, iplus));
        if (z.cols() == 0) continue;  // vacuously positive on this face
        out.vacuous = false;

        auto lift = [&](const la::EigenResult& eg, const Mat& basis) {
            Vec w(static_cast<std::size_t>(basis.rows()), 0.0);
            for (int r = 0; r < basis.rows(); ++r)
                for (int c = 0; c < basis.cols(); ++c)
                    w[static_cast<std::size_t>(r)] += basis(r, c) * eg.vectors(c, 0);
            return w;
        };

        // vertex blocks positive definite
        for (int vi : vs) {
            const Vec& lam = dec.vertices[static_cast<std::size_t>(vi)];
            Mat red = la::reduced_hessian(nlp::lagrangian_hessian(ev, lam), z);
            la::EigenResult eg = la::sym_eigs(red);
            out.min_reduced_eig = std::min(out.min_reduced_eig, eg.values.front());
            if (eg.values.front() <= 1e-9) {
                out.verdict = Verdict::Fails;
                out.witness_lambda = lam;
                out.witness_w = lift(eg, z);
                return out;
            }
        }
        // ray blocks positive semidefinite; vertex blocks positive definite
        // on every ray kernel
        for (int ri : rs) {
            const Vec& ray = dec.rays[static_cast<std::size_t>(ri)];
            Mat mr = la::reduced_hessian(constraint_hessian_combo(ev, ray), z);
            la::EigenResult eg = la::sym_eigs(mr);
            if (eg.values.front() < -1e-9) {
                // the face escapes to -infinity along this ray
                Vec w = lift(eg, z);
                double base = 0.0;
                {
                    Mat lrep = nlp::lagrangian_hessian(ev, rep);
                    Vec hw = lrep.apply(w);
                    base = la::dot(w, hw);
                }
                double rayform = eg.values.front();
                double t = (std::fabs(base) + 1.0) / (-rayform);
                Vec lam = rep;
                for (int i = 0; i < p.m; ++i)
                    lam[static_cast<std::size_t>(i)] += t * ray[static_cast<std::size_t>(i)];
                out.verdict = Verdict::Fails;
                out.witness_lambda = lam;
                out.witness_w = w;
                return out;
            }
            // kernel of the ray block inside Z coordinates
            std::vector<int> kernel_cols;
            for (int c = 0; c < mr.rows(); ++c)
                if (std::fabs(eg.values[static_cast<std::size_t>(c)]) <= 1e-9) kernel_cols.push_back(c);
            if (kernel_cols.empty()) continue;
            Mat kr(mr.rows(), static_cast<int>(kernel_cols.size()));
            for (std::size_t c = 0; c < kernel_cols.size(); ++c)
                for (int r = 0; r < mr.rows(); ++r)
                    kr(r, static_cast<int>(c)) = eg.vectors(r, kernel_cols[c]);
            Mat zk = z.multiply(kr);
            for (int vi : vs) {
                const Vec& lam = dec.vertices[static_cast<std::size_t>(vi)];
                Mat red = la::reduced_hessian(nlp::lagrangian_hessian(ev, lam), zk);
                la::EigenResult egk = la::sym_eigs(red);
                if (egk.values.front() <= 1e-9) {
                    out.verdict = Verdict::Fails;
                    out.witness_lambda = lam;
                    out.witness_w = lift(egk, zk);
                    return out;
                }
            }
        }
    }
    return out;
}

SecondOrderResult check_pointbased(const Problem& p, const Vec& xbar, const DeltaSet& delta,
                                   double kappa) {
    PointEvaluation ev = evaluate(p, xbar);
    SecondOrderResult out;
    out.verdict = Verdict::Holds;
    out.vacuous = true;
    out.sampled = !delta.exact;
    for (const Vec& lam : delta.vertices) {
        ReducedEig re = reduced_min_eig(ev, lam);
        if (re.trivial) continue;
        out.vacuous = false;
        out.min_reduced_eig = std::min(out.min_reduced_eig, re.min_eig);
        if (!(re.min_eig > 1.0 / kappa + 1e-9)) {
            out.verdict = Verdict::Fails;
            out.witness_lambda = lam;
            out.witness_w = re.eigvec;
            return out;
        }
    }
    return out;
}

SecondOrderResult check_kappa_free(const Problem& p, const Vec& xbar, const DeltaSet& delta) {
    PointEvaluation ev = evaluate(p, xbar);
    SecondOrderResult out;
    out.verdict = Verdict::Holds;
    out.vacuous = true;
    out.sampled = !delta.exact;
    for (const Vec& lam : delta.vertices) {
        ReducedEig re = reduced_min_eig(ev, lam);
        if (re.trivial) continue;
        out.vacuous = false;
        out.min_reduced_eig = std::min(out.min_reduced_eig, re.min_eig);
        if (!(re.min_eig > 1e-9)) {
            out.verdict = Verdict::Fails;
            out.witness_lambda = lam;
            out.witness_w = re.eigvec;
            return out;
        }
    }
    if (out.vacuous) out.note = "no nontrivial reduced space over Delta";
    return out;
}

SecondOrderResult check_extreme_point_variant(const Problem& p, const Vec& xbar, double kappa,
                                              int directions) {
    PointEvaluation ev = evaluate(p, xbar);
    MfcqResult mfcq = check_mfcq(ev);
    SecondOrderResult out;
    if (!mfcq.holds) {
        out.verdict = Verdict::NotApplicable;
        out.note = "MFCQ fails";
        return out;
    }
    nlp::StationarityResult st = nlp::stationarity_residual(p, xbar);
    if (st.residual > 1e-8) throw nlp::NotStationary(st.residual);
    Vec xstar(static_cast<std::size_t>(p.n));
    for (int j = 0; j < p.n; ++j) xstar[static_cast<std::size_t>(j)] = -ev.grad_g[static_cast<std::size_t>(j)];
    nlp::MultiplierSet ms = nlp::multiplier_set(p, xbar, xstar);
    if (ms.empty()) throw nlp::NotStationary(st.residual);

    nlp::ConeRep k = nlp::critical_cone(ev, xstar, ms.decomposition.vertices.front());
    bool exact = false;
    std::vector<Vec> dirs = critical_directions(k, p.n, directions, &exact);
    out.sampled = !exact;
    out.verdict = Verdict::Holds;
    out.vacuous = true;

    std::vector<Vec> delta_e;
    for (const Vec& v : dirs) {
        poly::LPOutcome lp = nlp::directional_multipliers(p, ev, ms, v);
        if (lp.status != poly::LPStatus::Optimal) continue;
        for (const Vec& vert : lp.optimal_face_vertices) push_unique_vec(delta_e, vert);
    }
    for (const Vec& lam : delta_e) {
        ReducedEig re = reduced_min_eig(ev, lam);
        if (re.trivial) continue;
        out.vacuous = false;
        out.min_reduced_eig = std::min(out.min_reduced_eig, re.min_eig);
        if (!(re.min_eig > 1.0 / kappa + 1e-9)) {
            out.verdict = Verdict::Fails;
            out.witness_lambda = lam;
            out.witness_w = re.eigvec;
            return out;
        }
    }
    return out;
}

double tilt_bound(const Problem& p, const Vec& xbar, const DeltaSet& delta) {
    PointEvaluation ev = evaluate(p, xbar);
    double bound = 0.0;
    for (const Vec& lam : delta.vertices) {
        ReducedEig re = reduced_min_eig(ev, lam);
        if (re.trivial) continue;
        if (re.min_eig <= 1e-12) return std::numeric_limits<double>::infinity();
        bound = std::max(bound, 1.0 / re.min_eig);
    }
    return bound;
}

GraphDerivSet graphical_derivative(const Problem& p, const Vec& x, const Vec& v, const Vec& w) {
    PointEvaluation ev = evaluate(p, x);
    if (!ev.feasible) throw nlp::InfeasiblePoint();
    Vec xstar(static_cast<std::size_t>(p.n));
    for (int j = 0; j < p.n; ++j)
        xstar[static_cast<std::size_t>(j)] =
            v[static_cast<std::size_t>(j)] - ev.grad_g[static_cast<std::size_t>(j)];

    nlp::MultiplierSet ms = nlp::multiplier_set(p, x, xstar);
    if (ms.empty()) throw nlp::EmptyMultiplierSet();

    GraphDerivSet out;
    nlp::ConeRep k = nlp::critical_cone(ev, xstar, ms.decomposition.vertices.front());
    if (!k.member(w)) {
        out.note = "w outside the critical cone";
        return out;
    }
    poly::LPOutcome lp = nlp::directional_multipliers(p, ev, ms, w);
    if (lp.status != poly::LPStatus::Optimal) {
        out.note = "LP(w) unbounded; directional multiplier set empty";
        return out;
    }
    out.empty = false;
    Vec hgw = ev.hess_g.apply(w);
    for (const Vec& lam : lp.optimal_face_vertices) {
        Mat hq = constraint_hessian_combo(ev, lam);
        Vec z = hq.apply(w);
        for (std::size_t j = 0; j < z.size(); ++j) z[j] += hgw[j];
        out.base_vectors.push_back(std::move(z));
    }
    out.quad_value = la::dot(w, hgw) - lp.value;

    // generators of the regular normal cone to K at w
    Vec bw = k.b.rows() > 0 ? k.b.apply(w) : Vec{};
    for (int i = 0; i < k.b.rows(); ++i) {
        if (bw[static_cast<std::size_t>(i)] < -1e-9) continue;  // inactive inequality
        Vec g(static_cast<std::size_t>(p.n));
        for (int j = 0; j < p.n; ++j) g[static_cast<std::size_t>(j)] = k.b(i, j);
        out.cone_generators.push_back(std::move(g));
    }
    for (int i = 0; i < k.c.rows(); ++i) {
        Vec g(static_cast<std::size_t>(p.n)), gneg(static_cast<std::size_t>(p.n));
        for (int j = 0; j < p.n; ++j) {
            g[static_cast<std::size_t>(j)] = k.c(i, j);
            gneg[static_cast<std::size_t>(j)] = -k.c(i, j);
        }
        out.cone_generators.push_back(std::move(g));
        out.cone_generators.push_back(std::move(gneg));
    }
    return out;
}

RusoscResult check_rusosc_sampled(const Problem& p, const Vec& xbar, double eta, double ell,
                                  int point_budget, int direction_budget,
                                  bool enforce_multiplier_ball, double gamma) {
    RusoscResult out;
    out.eta = eta;
    out.ell = ell;
    out.directions = direction_budget;
    out.enforce_multiplier_ball = enforce_multiplier_ball;
    out.gamma = gamma;

    std::vector<Vec> xs = feasible_samples(p, xbar, 0.7 * eta, point_budget);
    out.points = static_cast<int>(xs.size());
    std::vector<Vec> dirs = sampling::sphere_directions(direction_budget, p.n);

    long pert_index = 0;
    for (const Vec& x : xs) {
        PointEvaluation ev = evaluate(p, x);
        nlp::StationarityResult st = nlp::stationarity_residual(p, x);

        // multiplier candidates: the minimal-residual multiplier and two
        // deterministic nonnegative perturbations supported on I(x)
        std::vector<Vec> lambda0s = {st.multiplier};
        for (int variant = 0; variant < 2; ++variant) {
            Vec lam = st.multiplier;
            Vec h = sampling::halton_point(pert_index++, std::max(p.m, 1));
            for (int i : ev.active)
                lam[static_cast<std::size_t>(i)] +=
                    0.5 * h[static_cast<std::size_t>(i % std::max(p.m, 1))];
            lambda0s.push_back(std::move(lam));
        }

        for (Vec lam0 : lambda0s) {
            // shrink the perturbation until (x, v) lands inside B_eta(xbar, 0)
            Vec v;
            bool ok = false;
            for (int halving = 0; halving < 40; ++halving) {
                Vec ql = ev.jac_q.apply_transposed(lam0);
                v = ev.grad_g;
                for (std::size_t j = 0; j < v.size(); ++j) v[j] += ql[j];
                double dist2 = 0.0;
                for (std::size_t j = 0; j < v.size(); ++j) {
                    double dx = x[j] - xbar[j];
                    dist2 += dx * dx + v[j] * v[j];
                }
                if (std::sqrt(dist2) <= eta) {
                    ok = true;
                    break;
                }
                for (std::size_t i = 0; i < lam0.size(); ++i)
                    lam0[i] = st.multiplier[i] + 0.5 * (lam0[i] - st.multiplier[i]);
            }
            if (!ok) continue;

            Vec xstar = ev.jac_q.apply_transposed(lam0);
            nlp::MultiplierSet ms;
            try {
                ms = nlp::multiplier_set(p, x, xstar);
            } catch (const nlp::InfeasiblePoint&) {
                continue;
            }
            if (ms.empty()) continue;

            for (const Vec& w : dirs) {
                poly::LPOutcome lp = nlp::directional_multipliers(p, ev, ms, w);
                if (lp.status != poly::LPStatus::Optimal) continue;
                for (const Vec& lam : lp.optimal_face_vertices) {
                    if (enforce_multiplier_ball &&
                        la::norm2(lam) > gamma * la::norm2(xstar) + 1e-12)
                        continue;
                    // (equality on I+, nonnegativity on the remaining actives)
                    bool admissible = true;
                    std::vector<int> iplus = nlp::positive_support(lam);
                    for (int i : iplus) {
                        double dp = 0.0;
                        for (int j = 0; j < p.n; ++j) dp += ev.jac_q(i, j) * w[static_cast<std::size_t>(j)];
                        if (std::fabs(dp) > 1e-9) {
                            admissible = false;
                            break;
                        }
                    }
                    if (admissible)
                        for (int i : ev.active) {
                            if (std::find(iplus.begin(), iplus.end(), i) != iplus.end()) continue;
                            double dp = 0.0;
                            for (int j = 0; j < p.n; ++j) dp += ev.jac_q(i, j) * w[static_cast<std::size_t>(j)];
                            if (dp < -1e-9) {
                                admissible = false;
                                break;
                            }
                        }
                    if (!admissible) continue;

                    Mat lh = nlp::lagrangian_hessian(ev, lam);
                    Vec hw = lh.apply(w);
                    double form = la::dot(w, hw);
                    if (form < ell * la::dot(w, w) - 1e-9) {
                        out.holds_on_samples = false;
                        out.witness = RusoscWitness{x, v, lam, w, form};
                        return out;
                    }
                }
            }
        }
    }
    out.holds_on_samples = true;
    return out;
}

}  // namespace tiltcheck::stab
