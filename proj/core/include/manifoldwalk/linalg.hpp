#pragma once

// Small dense linear algebra for chart/constraint sized problems.  Every
// matrix in this library is tiny (at most ambient_dim + codim on a side), so
// the solvers favor simplicity and determinism over performance tricks.

#include <vector>

namespace mwalk {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
Vec scale(const Vec& a, double s);
// y += s * x
void axpy(Vec& y, double s, const Vec& x);
double distance(const Vec& a, const Vec& b);
Vec normalized(const Vec& a);

// Row-major dense matrix.
class Mat {
public:
    Mat() = default;
    Mat(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {}

    static Mat identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    Vec col(int j) const;
    void set_col(int j, const Vec& v);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

Mat matmul(const Mat& a, const Mat& b);
Mat transpose(const Mat& a);
Vec matvec(const Mat& a, const Vec& x);
// aᵀ x without forming the transpose.
Vec matvec_t(const Mat& a, const Vec& x);
double frobenius_norm(const Mat& a);

// Eigendecomposition of a symmetric matrix, values ascending, eigenvectors in
// the corresponding columns.  Eigenvector signs are fixed so the entry of
// largest magnitude is positive, which keeps downstream sampling reproducible.
struct SymEig {
    Vec values;
    Mat vectors;
};

// Cyclic-by-row Jacobi rotations; converges quadratically for the tiny
// symmetric matrices used here.  Throws DimensionError on non-square input.
SymEig jacobi_eigensolve(Mat a, int max_sweeps = 64);

// Gaussian elimination with partial pivoting.  Throws Error on a singular
// system.
Vec solve(Mat a, Vec b);
Mat inverse(Mat a);

// Thin orthonormal basis for the column span via modified Gram-Schmidt.
// Throws RankDeficient when a column collapses below rel_tol * its input norm.
Mat orthonormal_columns(const Mat& a, double rel_tol = 1e-12);

// Singular values in descending order, computed from the eigenvalues of the
// smaller Gram matrix.
Vec singular_values(const Mat& a);
double smallest_singular_value(const Mat& a);

// Dense rank-3 array, indexed [i0][i1][i2]; used for dg and Christoffel data.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(int n0, int n1, int n2, double fill = 0.0)
        : n0_(n0), n1_(n1), n2_(n2),
          a_(static_cast<size_t>(n0) * n1 * n2, fill) {}

    int size0() const { return n0_; }
    int size1() const { return n1_; }
    int size2() const { return n2_; }
    double& operator()(int i, int j, int k) {
        return a_[(static_cast<size_t>(i) * n1_ + j) * n2_ + k];
    }
    double operator()(int i, int j, int k) const {
        return a_[(static_cast<size_t>(i) * n1_ + j) * n2_ + k];
    }

private:
    int n0_ = 0, n1_ = 0, n2_ = 0;
    std::vector<double> a_;
};

}  // namespace mwalk
