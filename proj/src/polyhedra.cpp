#include "tiltcheck/polyhedra.hpp"

#include <algorithm>
#include <cmath>

namespace tiltcheck::poly {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr double kDedupTol = 1e-7;
constexpr int kEnumColumnLimit = 16;      // public enumeration contract
constexpr int kInternalColumnLimit = 26;  // slack-augmented systems from truncation

// ---------------------------------------------------------------------------
// Two-phase tableau simplex with Bland's anti-cycling rule.

class Simplex {
public:
    Simplex(const Mat& a, const Vec& b) : m_(a.cols()), k_(a.rows()) {
        // rows with negative rhs are flipped so artificials start feasible
        int cols = m_ + k_ + 1;  // originals, artificials, rhs
        t_ = Mat(k_ + 1, cols);
        for (int i = 0; i < k_; ++i) {
            double sign = b[static_cast<std::size_t>(i)] < 0.0 ? -1.0 : 1.0;
            for (int j = 0; j < m_; ++j) t_(i, j) = sign * a(i, j);
            t_(i, m_ + i) = 1.0;
            t_(i, cols - 1) = sign * b[static_cast<std::size_t>(i)];
        }
        basis_.resize(static_cast<std::size_t>(k_));
        for (int i = 0; i < k_; ++i) basis_[static_cast<std::size_t>(i)] = m_ + i;
    }

    // Minimized sum of artificials; zero (within tolerance) iff feasible.
    double phase1_value() {
        Vec cost(static_cast<std::size_t>(m_ + k_), 0.0);
        for (int j = m_; j < m_ + k_; ++j) cost[static_cast<std::size_t>(j)] = 1.0;
        load_objective(cost);
        run(/*allow_cols=*/m_ + k_);
        return objective_value();
    }

    // Returns false when the problem is infeasible.
    bool phase1() {
        if (phase1_value() > 1e-9) return false;
        drive_out_artificials();
        return true;
    }

    // Phase 2 on the original columns; returns Unbounded or Optimal.
    LPStatus phase2(const Vec& c) {
        Vec cost(static_cast<std::size_t>(m_ + k_), 0.0);
        for (int j = 0; j < m_; ++j) cost[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)];
        load_objective(cost);
        return run(/*allow_cols=*/m_);
    }

    double objective_value() const { return -t_(k_, m_ + k_); }

    Vec solution() const {
        Vec x(static_cast<std::size_t>(m_), 0.0);
        for (int i = 0; i < k_; ++i) {
            int bj = basis_[static_cast<std::size_t>(i)];
            if (bj < m_) x[static_cast<std::size_t>(bj)] = t_(i, m_ + k_);
        }
        return x;
    }

private:
    int m_;  // structural columns
    int k_;  // rows
    Mat t_;  // tableau, last row = objective, last column = rhs
    std::vector<int> basis_;

    int rhs_col() const { return m_ + k_; }

    void load_objective(const Vec& cost) {
        for (int j = 0; j <= rhs_col(); ++j) t_(k_, j) = 0.0;
        for (int j = 0; j < m_ + k_; ++j) t_(k_, j) = cost[static_cast<std::size_t>(j)];
        // price out the current basis
        for (int i = 0; i < k_; ++i) {
            double cb = cost[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])];
            if (cb == 0.0) continue;
            for (int j = 0; j <= rhs_col(); ++j) t_(k_, j) -= cb * t_(i, j);
        }
    }

    void pivot(int row, int col) {
        double piv = t_(row, col);
        for (int j = 0; j <= rhs_col(); ++j) t_(row, j) /= piv;
        for (int i = 0; i <= k_; ++i) {
            if (i == row) continue;
            double f = t_(i, col);
            if (f == 0.0) continue;
            for (int j = 0; j <= rhs_col(); ++j) t_(i, j) -= f * t_(row, j);
        }
        basis_[static_cast<std::size_t>(row)] = col;
    }

    LPStatus run(int allow_cols) {
        for (long iter = 0;; ++iter) {
            if (iter > 200000) throw std::runtime_error("simplex iteration limit exceeded");
            // Bland: entering column = lowest index with negative reduced cost
            int enter = -1;
            for (int j = 0; j < allow_cols; ++j)
                if (t_(k_, j) < -kPivotTol) {
                    enter = j;
                    break;
                }
            if (enter < 0) return LPStatus::Optimal;
            // ratio test; ties broken by lowest basis index (Bland)
            int leave = -1;
            double best = 0.0;
            for (int i = 0; i < k_; ++i) {
                double aij = t_(i, enter);
                if (aij <= kPivotTol) continue;
                double ratio = t_(i, rhs_col()) / aij;
                if (leave < 0 || ratio < best - 1e-12 ||
                    (std::fabs(ratio - best) <= 1e-12 &&
                     basis_[static_cast<std::size_t>(i)] <
                         basis_[static_cast<std::size_t>(leave)])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave < 0) return LPStatus::Unbounded;
            pivot(leave, enter);
        }
    }

    void drive_out_artificials() {
        for (int i = 0; i < k_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] < m_) continue;
            int col = -1;
            for (int j = 0; j < m_; ++j)
                if (std::fabs(t_(i, j)) > kPivotTol) {
                    col = j;
                    break;
                }
            if (col >= 0) pivot(i, col);
            // otherwise the row is redundant; the artificial stays basic at zero
        }
    }
};

// ---------------------------------------------------------------------------
// Basic-feasible-solution enumeration.

bool vec_close(const Vec& a, const Vec& b, double tol) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::fabs(a[i] - b[i]) > tol) return false;
    return true;
}

void push_unique(std::vector<Vec>& out, const Vec& v, double tol) {
    for (const Vec& w : out)
        if (vec_close(w, v, tol)) return;
    out.push_back(v);
}

void sort_lex(std::vector<Vec>& vs) {
    std::sort(vs.begin(), vs.end(), [](const Vec& a, const Vec& b) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] < b[i] - 1e-12) return true;
            if (a[i] > b[i] + 1e-12) return false;
        }
        return false;
    });
}

// All basic feasible solutions of {x >= 0, Ax = b}: every column subset of
// size rank(A) whose submatrix has full column rank and whose unique solution
// is nonnegative and consistent with b.
std::vector<Vec> enumerate_bfs(const StdPolyhedron& p, int limit) {
    int m = p.dim();
    if (m > limit) throw TooManyColumns(m);
    int r = la::rank(p.a);
    std::vector<Vec> found;

    std::vector<int> subset(static_cast<std::size_t>(r));
    // iterate over size-r combinations of {0..m-1}
    std::vector<int> idx(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) idx[static_cast<std::size_t>(i)] = i;
    bool done = (r > m);

    auto consider = [&](const std::vector<int>& cols) {
        Mat sub(p.num_rows(), r);
        for (int i = 0; i < p.num_rows(); ++i)
            for (int j = 0; j < r; ++j) sub(i, j) = p.a(i, cols[static_cast<std::size_t>(j)]);
        if (r > 0 && la::rank(sub) < r) return;
        la::SolveResult sr = la::solve(sub, p.b);
        if (sr.residual_norm > 1e-8 * (1.0 + la::norm2(p.b))) return;
        Vec x(static_cast<std::size_t>(m), 0.0);
        for (int j = 0; j < r; ++j) {
            if (sr.x[static_cast<std::size_t>(j)] < -kFeasTol) return;
            x[static_cast<std::size_t>(cols[static_cast<std::size_t>(j)])] =
                std::max(sr.x[static_cast<std::size_t>(j)], 0.0);
        }
        push_unique(found, x, kDedupTol);
    };

    if (r == 0) {
        // the origin is the only candidate
        if (la::norm_inf(p.b) <= 1e-8) found.push_back(Vec(static_cast<std::size_t>(m), 0.0));
        return found;
    }
    while (!done) {
        consider(idx);
        // next combination
        int i = r - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - r + i) --i;
        if (i < 0) {
            done = true;
        } else {
            ++idx[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < r; ++j)
                idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    sort_lex(found);
    return found;
}

Vec normalize_inf(Vec v) {
    double m = la::norm_inf(v);
    if (m > 0.0)
        for (double& x : v) x /= m;
    return v;
}

// Extreme rays of {x >= 0, Ax = 0}: vertices of the slices {x_j = 1}, each
// normalized to unit infinity norm.
std::vector<Vec> enumerate_extreme_rays(const StdPolyhedron& p, int limit) {
    int m = p.dim();
    std::vector<Vec> rays;
    for (int j = 0; j < m; ++j) {
        Mat a2(p.num_rows() + 1, m);
        for (int i = 0; i < p.num_rows(); ++i)
            for (int c = 0; c < m; ++c) a2(i, c) = p.a(i, c);
        a2(p.num_rows(), j) = 1.0;
        Vec b2(static_cast<std::size_t>(p.num_rows() + 1), 0.0);
        b2.back() = 1.0;
        std::vector<Vec> slice = enumerate_bfs({a2, b2}, limit);
        for (Vec& v : slice) push_unique(rays, normalize_inf(std::move(v)), kDedupTol);
    }
    sort_lex(rays);
    return rays;
}

VertexRayDecomposition enumerate_impl(const StdPolyhedron& p, int limit) {
    VertexRayDecomposition d;
    d.vertices = enumerate_bfs(p, limit);
    if (d.vertices.empty()) throw EmptyPolyhedron();
    StdPolyhedron cone{p.a, Vec(static_cast<std::size_t>(p.num_rows()), 0.0)};
    d.rays = enumerate_extreme_rays(cone, limit);
    return d;
}

}  // namespace

bool contains(const StdPolyhedron& p, const Vec& x, double tol) {
    if (static_cast<int>(x.size()) != p.dim()) return false;
    for (double v : x)
        if (v < -tol) return false;
    Vec ax = p.a.apply(x);
    for (int i = 0; i < p.num_rows(); ++i)
        if (std::fabs(ax[static_cast<std::size_t>(i)] - p.b[static_cast<std::size_t>(i)]) > tol)
            return false;
    return true;
}

VertexRayDecomposition enumerate_vertices_rays(const StdPolyhedron& p) {
    return enumerate_impl(p, kEnumColumnLimit);
}

VertexRayDecomposition truncate_ball(const StdPolyhedron& p, double radius, BallNorm norm) {
    if (radius < 0.0) throw NegativeRadius();
    int m = p.dim();
    int k = p.num_rows();
    // x_i + s_i = radius achieves x_i <= radius; with x >= 0 this is the
    // infinity-norm ball.
    Mat a2(k + m, 2 * m);
    Vec b2(static_cast<std::size_t>(k + m), 0.0);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < m; ++j) a2(i, j) = p.a(i, j);
        b2[static_cast<std::size_t>(i)] = p.b[static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < m; ++j) {
        a2(k + j, j) = 1.0;
        a2(k + j, m + j) = 1.0;
        b2[static_cast<std::size_t>(k + j)] = radius;
    }

    VertexRayDecomposition out;
    std::vector<Vec> lifted;
    try {
        lifted = enumerate_bfs({a2, b2}, kInternalColumnLimit);
    } catch (const EmptyPolyhedron&) {
        return out;
    }
    if (lifted.empty()) return out;
    for (const Vec& v : lifted) {
        Vec x(v.begin(), v.begin() + m);
        if (norm == BallNorm::Two && la::norm2(x) > radius + 1e-9) continue;
        push_unique(out.vertices, x, kDedupTol);
    }
    out.norm_approximation = (norm == BallNorm::Two);
    sort_lex(out.vertices);
    // the truncated set is bounded, so there are no rays
    return out;
}

std::vector<Vec> extreme_rays(const StdPolyhedron& cone) {
    StdPolyhedron c0{cone.a, Vec(static_cast<std::size_t>(cone.num_rows()), 0.0)};
    return enumerate_extreme_rays(c0, kInternalColumnLimit);
}

bool decomposition_contains(const VertexRayDecomposition& d, const Vec& x, double tol) {
    // feasibility of V mu + R nu = x, sum(mu) = 1, mu,nu >= 0
    if (d.vertices.empty()) return false;
    int n = static_cast<int>(x.size());
    int nv = static_cast<int>(d.vertices.size());
    int nr = static_cast<int>(d.rays.size());
    Mat a(n + 1, nv + nr);
    Vec b(static_cast<std::size_t>(n + 1), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < nv; ++j) a(i, j) = d.vertices[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
        for (int j = 0; j < nr; ++j) a(i, nv + j) = d.rays[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
        b[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < nv; ++j) a(n, j) = 1.0;
    b.back() = 1.0;

    Simplex sx(a, b);
    // phase-1 optimum is the 1-norm infeasibility of the combination system
    return sx.phase1_value() <= tol;
}

SimplexResult simplex_solve(const StdPolyhedron& p, const Vec& c) {
    SimplexResult out;
    Simplex sx(p.a, p.b);
    if (!sx.phase1()) {
        out.status = LPStatus::Infeasible;
        return out;
    }
    out.status = sx.phase2(c);
    if (out.status == LPStatus::Optimal) {
        out.x = sx.solution();
        out.value = la::dot(c, out.x);
    }
    return out;
}

LPOutcome lp_solve(const StdPolyhedron& p, const Vec& c) {
    LPOutcome out;
    SimplexResult sr = simplex_solve(p, c);
    out.status = sr.status;
    if (sr.status != LPStatus::Optimal) return out;
    out.value = sr.value;
    out.optimal_vertex = sr.x;
    VertexRayDecomposition d = enumerate_impl(p, kEnumColumnLimit);
    double tol = 1e-8 * (1.0 + std::fabs(out.value));
    for (const Vec& v : d.vertices)
        if (la::dot(c, v) <= out.value + tol) out.optimal_face_vertices.push_back(v);
    return out;
}

}  // namespace tiltcheck::poly
