#pragma once

// Deterministic low-discrepancy sampling: Halton sequences, points in balls
// and unit-sphere direction grids. Everything here is a pure function of its
// arguments so repeated runs reproduce byte-identical reports.

#include <cmath>
#include <vector>

#include "tiltcheck/linalg.hpp"

namespace tiltcheck::sampling {

using la::Vec;

inline double halton(long index, int base) {
    double f = 1.0, r = 0.0;
    long i = index;
    while (i > 0) {
        f /= base;
        r += f * (i % base);
        i /= base;
    }
    return r;
}

inline int nth_prime(int k) {
    static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
    return primes[k % 20];
}

// Point i of the n-dimensional Halton sequence, coordinates in [0,1).
inline Vec halton_point(long index, int n) {
    Vec p(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) p[static_cast<std::size_t>(d)] = halton(index + 1, nth_prime(d));
    return p;
}

// count points inside the Euclidean ball B_radius(center).
inline std::vector<Vec> ball_points(const Vec& center, double radius, int count) {
    int n = static_cast<int>(center.size());
    std::vector<Vec> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (long i = 0; static_cast<int>(pts.size()) < count; ++i) {
        Vec h = halton_point(i, n);
        Vec u(static_cast<std::size_t>(n));
        double nrm2 = 0.0;
        for (int d = 0; d < n; ++d) {
            u[static_cast<std::size_t>(d)] = 2.0 * h[static_cast<std::size_t>(d)] - 1.0;
            nrm2 += u[static_cast<std::size_t>(d)] * u[static_cast<std::size_t>(d)];
        }
        if (nrm2 > 1.0) continue;  // cube-to-ball rejection keeps uniformity
        for (int d = 0; d < n; ++d)
            u[static_cast<std::size_t>(d)] =
                center[static_cast<std::size_t>(d)] + radius * u[static_cast<std::size_t>(d)];
        pts.push_back(std::move(u));
        if (i > 64L * count + 1024) break;  // degenerate dimensions
    }
    return pts;
}

// Deterministic unit direction grid: exact circle grid for n = 2, Fibonacci
// sphere for n = 3, normalized Halton offsets otherwise. Coordinate axes are
// always included first.
inline std::vector<Vec> sphere_directions(int count, int n) {
    std::vector<Vec> dirs;
    for (int d = 0; d < n; ++d)
        for (double s : {1.0, -1.0}) {
            Vec e(static_cast<std::size_t>(n), 0.0);
            e[static_cast<std::size_t>(d)] = s;
            dirs.push_back(std::move(e));
        }
    if (n == 1) return dirs;
    if (n == 2) {
        for (int k = 0; k < count; ++k) {
            double th = 2.0 * M_PI * k / count;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
        return dirs;
    }
    if (n == 3) {
        const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
        for (int k = 0; k < count; ++k) {
            double z = 1.0 - 2.0 * (k + 0.5) / count;
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double th = 2.0 * M_PI * k / golden;
            dirs.push_back({r * std::cos(th), r * std::sin(th), z});
        }
        return dirs;
    }
    for (long i = 0; static_cast<int>(dirs.size()) < 2 * n + count; ++i) {
        Vec h = halton_point(i, n);
        Vec u(static_cast<std::size_t>(n));
        for (int d = 0; d < n; ++d) u[static_cast<std::size_t>(d)] = 2.0 * h[static_cast<std::size_t>(d)] - 1.0;
        double nrm = la::norm2(u);
        if (nrm < 1e-3) continue;
        for (double& v : u) v /= nrm;
        dirs.push_back(std::move(u));
    }
    return dirs;
}

}  // namespace tiltcheck::sampling
