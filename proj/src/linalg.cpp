#include "tiltcheck/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tiltcheck::la {

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::from_rows(int rows, int cols, const Vec& data) {
    if (data.size() != static_cast<std::size_t>(rows) * cols)
        throw DimensionMismatch("from_rows: data length does not match shape");
    Mat m(rows, cols);
    m.data_ = data;
    return m;
}

Mat Mat::transposed() const {
    Mat t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Vec Mat::apply(const Vec& x) const {
    if (static_cast<int>(x.size()) != cols_)
        throw DimensionMismatch("apply: vector length does not match cols");
    Vec y(static_cast<std::size_t>(rows_), 0.0);
    for (int i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = s;
    }
    return y;
}

Vec Mat::apply_transposed(const Vec& x) const {
    if (static_cast<int>(x.size()) != rows_)
        throw DimensionMismatch("apply_transposed: vector length does not match rows");
    Vec y(static_cast<std::size_t>(cols_), 0.0);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            y[static_cast<std::size_t>(j)] += (*this)(i, j) * x[static_cast<std::size_t>(i)];
    return y;
}

Mat Mat::multiply(const Mat& other) const {
    if (cols_ != other.rows_) throw DimensionMismatch("multiply: inner dimensions differ");
    Mat c(rows_, other.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k) {
            double a = (*this)(i, k);
            if (a == 0.0) continue;
            for (int j = 0; j < other.cols_; ++j) c(i, j) += a * other(k, j);
        }
    return c;
}

double Mat::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::fabs(v));
    return m;
}

double Mat::frobenius() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vec& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::fabs(v));
    return m;
}

// ---------------------------------------------------------------------------
// Rank and nullspace share one complete-pivoting elimination so that
// rank + nullity = cols holds exactly for every input.

namespace {

struct Echelon {
    Mat u;                     // eliminated matrix, rows and cols permuted
    std::vector<int> col_perm; // u column j corresponds to original column col_perm[j]
    int rank = 0;
};

Echelon eliminate(const Mat& a, double tol) {
    Echelon e;
    e.u = a;
    e.col_perm.resize(static_cast<std::size_t>(a.cols()));
    std::iota(e.col_perm.begin(), e.col_perm.end(), 0);

    Mat& u = e.u;
    int r = a.rows(), c = a.cols();
    int steps = std::min(r, c);
    double threshold = -1.0;  // fixed after the first (largest) pivot is known

    for (int k = 0; k < steps; ++k) {
        int pi = k, pj = k;
        double pmax = 0.0;
        for (int i = k; i < r; ++i)
            for (int j = k; j < c; ++j)
                if (std::fabs(u(i, j)) > pmax) {
                    pmax = std::fabs(u(i, j));
                    pi = i;
                    pj = j;
                }
        if (threshold < 0.0) threshold = tol * std::max(1.0, pmax);
        if (pmax <= threshold) break;
        if (pi != k)
            for (int j = 0; j < c; ++j) std::swap(u(k, j), u(pi, j));
        if (pj != k) {
            for (int i = 0; i < r; ++i) std::swap(u(i, k), u(i, pj));
            std::swap(e.col_perm[static_cast<std::size_t>(k)],
                      e.col_perm[static_cast<std::size_t>(pj)]);
        }
        for (int i = k + 1; i < r; ++i) {
            double f = u(i, k) / u(k, k);
            if (f == 0.0) continue;
            u(i, k) = 0.0;
            for (int j = k + 1; j < c; ++j) u(i, j) -= f * u(k, j);
        }
        e.rank = k + 1;
    }
    return e;
}

void orthonormalize_columns(Mat& z) {
    // modified Gram-Schmidt, two passes
    for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j < z.cols(); ++j) {
            for (int p = 0; p < j; ++p) {
                double proj = 0.0;
                for (int i = 0; i < z.rows(); ++i) proj += z(i, p) * z(i, j);
                for (int i = 0; i < z.rows(); ++i) z(i, j) -= proj * z(i, p);
            }
            double nrm = 0.0;
            for (int i = 0; i < z.rows(); ++i) nrm += z(i, j) * z(i, j);
            nrm = std::sqrt(nrm);
            if (nrm > 0.0)
                for (int i = 0; i < z.rows(); ++i) z(i, j) /= nrm;
        }
}

}  // namespace

int rank(const Mat& a, double tol) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    return eliminate(a, tol).rank;
}

Mat nullspace(const Mat& a, double tol) {
    int n = a.cols();
    if (n == 0) return Mat(0, 0);
    if (a.rows() == 0) return Mat::identity(n);

    Echelon e = eliminate(a, tol);
    int r = e.rank;
    int k = n - r;
    Mat z(n, k);
    for (int f = 0; f < k; ++f) {
        // permuted solution vector: free column r+f set to one
        Vec xp(static_cast<std::size_t>(n), 0.0);
        xp[static_cast<std::size_t>(r + f)] = 1.0;
        for (int i = r - 1; i >= 0; --i) {
            double s = 0.0;
            for (int j = i + 1; j < n; ++j) s += e.u(i, j) * xp[static_cast<std::size_t>(j)];
            xp[static_cast<std::size_t>(i)] = -s / e.u(i, i);
        }
        for (int j = 0; j < n; ++j)
            z(e.col_perm[static_cast<std::size_t>(j)], f) = xp[static_cast<std::size_t>(j)];
    }
    orthonormalize_columns(z);
    return z;
}

EigenResult sym_eigs(const Mat& h) {
    if (h.rows() != h.cols()) throw NotSquare();
    int n = h.rows();
    Mat s(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s(i, j) = 0.5 * (h(i, j) + h(j, i));
    Mat v = Mat::identity(n);

    double off_target = 1e-12 * h.frobenius();
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::fabs(s(p, q)));
        if (off <= off_target) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                double apq = s(p, q);
                if (std::fabs(apq) <= off_target) continue;
                double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * c;
                double tau = sn / (1.0 + c);
                double app = s(p, p), aqq = s(q, q);
                s(p, p) = app - t * apq;
                s(q, q) = aqq + t * apq;
                s(p, q) = 0.0;
                s(q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        double arp = s(r, p), arq = s(r, q);
                        s(r, p) = s(p, r) = arp - sn * (arq + tau * arp);
                        s(r, q) = s(q, r) = arq + sn * (arp - tau * arq);
                    }
                    double vrp = v(r, p), vrq = v(r, q);
                    v(r, p) = vrp - sn * (vrq + tau * vrp);
                    v(r, q) = vrq + sn * (vrp - tau * vrq);
                }
            }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return s(a, a) < s(b, b); });

    EigenResult res;
    res.values.resize(static_cast<std::size_t>(n));
    res.vectors = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        int src = order[static_cast<std::size_t>(j)];
        res.values[static_cast<std::size_t>(j)] = s(src, src);
        for (int i = 0; i < n; ++i) res.vectors(i, j) = v(i, src);
    }
    return res;
}

SolveResult solve(const Mat& a, const Vec& b, double tol) {
    if (static_cast<int>(b.size()) != a.rows())
        throw DimensionMismatch("solve: rhs length does not match rows");
    int n = a.cols();
    SolveResult out;
    out.x.assign(static_cast<std::size_t>(n), 0.0);
    if (n == 0) {
        out.residual_norm = norm2(b);
        return out;
    }
    // minimum-norm least squares through the spectral decomposition of A^T A
    Mat ata = a.transposed().multiply(a);
    Vec atb = a.apply_transposed(b);
    EigenResult eg = sym_eigs(ata);
    double mu_max = 0.0;
    for (double mu : eg.values) mu_max = std::max(mu_max, std::fabs(mu));
    double thr = tol * tol * std::max(1.0, mu_max);
    for (int j = 0; j < n; ++j) {
        double mu = eg.values[static_cast<std::size_t>(j)];
        if (mu <= thr) continue;
        double coef = 0.0;
        for (int i = 0; i < n; ++i) coef += eg.vectors(i, j) * atb[static_cast<std::size_t>(i)];
        coef /= mu;
        for (int i = 0; i < n; ++i) out.x[static_cast<std::size_t>(i)] += coef * eg.vectors(i, j);
    }
    Vec r = a.apply(out.x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    out.residual_norm = norm2(r);
    return out;
}

Mat reduced_hessian(const Mat& h, const Mat& z) {
    if (z.rows() != h.rows()) throw DimensionMismatch("reduced_hessian: Z rows != H rows");
    if (h.rows() != h.cols()) throw NotSquare();
    Mat hz = h.multiply(z);
    Mat zhz = z.transposed().multiply(hz);
    for (int i = 0; i < zhz.rows(); ++i)
        for (int j = i + 1; j < zhz.cols(); ++j) {
            double m = 0.5 * (zhz(i, j) + zhz(j, i));
            zhz(i, j) = m;
            zhz(j, i) = m;
        }
    return zhz;
}

double min_eigenvalue(const Mat& h) {
    if (h.rows() == 0) return std::numeric_limits<double>::infinity();
    EigenResult eg = sym_eigs(h);
    return eg.values.front();
}

}  // namespace tiltcheck::la
