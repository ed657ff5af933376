#pragma once

// Small dense linear algebra: complete-pivoting rank, orthonormal nullspace
// bases, a cyclic Jacobi eigensolver and minimum-norm least squares. Sized
// for the dozens-of-rows matrices this analysis produces.

#include <stdexcept>
#include <vector>

namespace tiltcheck::la {

using Vec = std::vector<double>;

struct NotSquare : std::runtime_error {
    NotSquare() : std::runtime_error("matrix is not square") {}
};
struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}
    static Mat identity(int n);
    // Row-major initializer, data.size() == rows*cols.
    static Mat from_rows(int rows, int cols, const Vec& data);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    const Vec& data() const { return data_; }

    Mat transposed() const;
    Vec apply(const Vec& x) const;            // A x
    Vec apply_transposed(const Vec& x) const; // A^T x
    Mat multiply(const Mat& other) const;     // A B
    double max_abs() const;
    double frobenius() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    Vec data_;
};

constexpr double kDefaultTol = 1e-9;

// Pivots of complete-pivoting Gaussian elimination above tol*max(1, largest pivot).
int rank(const Mat& a, double tol = kDefaultTol);

// Orthonormal basis (n x k columns) of {x : Ax = 0}; k = cols(A) - rank(A, tol).
// A matrix with zero rows yields the identity basis.
Mat nullspace(const Mat& a, double tol = kDefaultTol);

struct EigenResult {
    Vec values;   // ascending
    Mat vectors;  // column i pairs with values[i]
};

// Cyclic Jacobi on (H + H^T)/2; rotations continue until every off-diagonal
// magnitude is below 1e-12 * ||H||_F.
EigenResult sym_eigs(const Mat& h);

struct SolveResult {
    Vec x;
    double residual_norm;  // ||Ax - b||_2
};

// Minimum-norm least-squares solution.
SolveResult solve(const Mat& a, const Vec& b, double tol = kDefaultTol);

// Z^T H Z, symmetrized. Z may have zero columns (0x0 result).
Mat reduced_hessian(const Mat& h, const Mat& z);

// Smallest eigenvalue of a symmetric matrix; +infinity for the 0x0 matrix,
// matching the convention that an empty reduced Hessian is vacuously positive.
double min_eigenvalue(const Mat& h);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm_inf(const Vec& a);

}  // namespace tiltcheck::la
