#include "manifoldwalk/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "manifoldwalk/errors.hpp"

namespace mwalk {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec add(const Vec& a, const Vec& b) {
    Vec r(a);
    for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

Vec sub(const Vec& a, const Vec& b) {
    Vec r(a);
    for (size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

Vec scale(const Vec& a, double s) {
    Vec r(a);
    for (double& x : r) x *= s;
    return r;
}

void axpy(Vec& y, double s, const Vec& x) {
    for (size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

double distance(const Vec& a, const Vec& b) { return norm(sub(a, b)); }

Vec normalized(const Vec& a) {
    double n = norm(a);
    if (n == 0.0) throw Error("normalized: zero vector");
    return scale(a, 1.0 / n);
}

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vec Mat::col(int j) const {
    Vec v(rows_);
    for (int i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

void Mat::set_col(int j, const Vec& v) {
    for (int i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    Mat r(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            for (int j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

Mat transpose(const Mat& a) {
    Mat r(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r(j, i) = a(i, j);
    return r;
}

Vec matvec(const Mat& a, const Vec& x) {
    if (static_cast<int>(x.size()) != a.cols())
        throw DimensionError("matvec: size mismatch");
    Vec r(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

Vec matvec_t(const Mat& a, const Vec& x) {
    if (static_cast<int>(x.size()) != a.rows())
        throw DimensionError("matvec_t: size mismatch");
    Vec r(a.cols(), 0.0);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) r[j] += a(i, j) * x[i];
    return r;
}

double frobenius_norm(const Mat& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
}

SymEig jacobi_eigensolve(Mat a, int max_sweeps) {
    if (a.rows() != a.cols()) throw DimensionError("jacobi_eigensolve: matrix not square");
    const int n = a.rows();
    Mat v = Mat::identity(n);
    if (n == 0) return {Vec{}, v};

    double off = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    double fro = frobenius_norm(a);
    const double tol = 1e-30 * std::max(1.0, fro * fro);

    for (int sweep = 0; sweep < max_sweeps && off > tol; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (apq == 0.0) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                // t = tan(rotation): smaller root for stability.
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Vec diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a(i, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return diag[x] < diag[y]; });

    SymEig out;
    out.values.resize(n);
    out.vectors = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        int src = order[j];
        out.values[j] = diag[src];
        Vec column = v.col(src);
        // Sign convention: largest-magnitude entry is positive.
        int imax = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(column[i]) > std::abs(column[imax])) imax = i;
        if (column[imax] < 0.0)
            for (double& x : column) x = -x;
        out.vectors.set_col(j, column);
    }
    return out;
}

Vec solve(Mat a, Vec b) {
    if (a.rows() != a.cols() || a.rows() != static_cast<int>(b.size()))
        throw DimensionError("solve: shape mismatch");
    const int n = a.rows();
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int i = col + 1; i < n; ++i)
            if (std::abs(a(i, col)) > std::abs(a(piv, col))) piv = i;
        if (a(piv, col) == 0.0) throw Error("solve: singular system");
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            std::swap(b[col], b[piv]);
        }
        double inv = 1.0 / a(col, col);
        for (int i = col + 1; i < n; ++i) {
            double f = a(i, col) * inv;
            if (f == 0.0) continue;
            for (int j = col; j < n; ++j) a(i, j) -= f * a(col, j);
            b[i] -= f * b[col];
        }
    }
    Vec x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

Mat inverse(Mat a) {
    const int n = a.rows();
    Mat out(n, n);
    for (int j = 0; j < n; ++j) {
        Vec e(n, 0.0);
        e[j] = 1.0;
        out.set_col(j, solve(a, e));
    }
    return out;
}

Mat orthonormal_columns(const Mat& a, double rel_tol) {
    const int n = a.rows(), k = a.cols();
    Mat q(n, k);
    for (int j = 0; j < k; ++j) {
        Vec v = a.col(j);
        double before = norm(v);
        for (int i = 0; i < j; ++i) {
            Vec qi = q.col(i);
            axpy(v, -dot(qi, v), qi);
        }
        // Second pass restores orthogonality lost to cancellation.
        for (int i = 0; i < j; ++i) {
            Vec qi = q.col(i);
            axpy(v, -dot(qi, v), qi);
        }
        double after = norm(v);
        if (before == 0.0 || after <= rel_tol * before)
            throw RankDeficient("orthonormal_columns: column " + std::to_string(j) +
                                " is linearly dependent");
        q.set_col(j, scale(v, 1.0 / after));
    }
    return q;
}

Vec singular_values(const Mat& a) {
    const bool wide = a.cols() > a.rows();
    Mat g = wide ? matmul(a, transpose(a)) : matmul(transpose(a), a);
    SymEig eig = jacobi_eigensolve(g);
    Vec s(eig.values.size());
    for (size_t i = 0; i < s.size(); ++i)
        s[i] = std::sqrt(std::max(0.0, eig.values[eig.values.size() - 1 - i]));
    return s;
}

double smallest_singular_value(const Mat& a) {
    Vec s = singular_values(a);
    if (s.empty()) throw DimensionError("smallest_singular_value: empty matrix");
    return s.back();
}

}  // namespace mwalk
