#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>

#include "fpk/errors.hpp"

namespace fpk {

/// Maximum spatial dimension handled by the fixed-capacity point type.
inline constexpr int kMaxDim = 4;

/// Small stack-allocated point in d-space, d <= kMaxDim.
///
/// Chains take ~1e9 steps in a long run, so points must not touch the heap.
struct Vec {
    std::array<double, kMaxDim> a{};
    int n = 1;

    Vec() = default;
    explicit Vec(int dim) : n(dim) {}
    Vec(std::initializer_list<double> xs) : n(static_cast<int>(xs.size())) {
        int i = 0;
        for (double x : xs) a[static_cast<std::size_t>(i++)] = x;
    }

    static Vec scalar(double x) {
        Vec v(1);
        v.a[0] = x;
        return v;
    }
    static Vec zero(int dim) { return Vec(dim); }

    int dim() const { return n; }
    double& operator[](int i) { return a[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return a[static_cast<std::size_t>(i)]; }
    double x() const { return a[0]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) a[i] += o.a[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n; ++i) a[i] -= o.a[i];
        return *this;
    }
    Vec& operator*=(double c) {
        for (int i = 0; i < n; ++i) a[i] *= c;
        return *this;
    }

    friend Vec operator+(Vec u, const Vec& v) { return u += v; }
    friend Vec operator-(Vec u, const Vec& v) { return u -= v; }
    friend Vec operator*(double c, Vec u) { return u *= c; }

    friend double dot(const Vec& u, const Vec& v) {
        double s = 0;
        for (int i = 0; i < u.n; ++i) s += u.a[i] * v.a[i];
        return s;
    }
    double norm2() const { return dot(*this, *this); }
    double norm() const { return std::sqrt(norm2()); }
};

inline std::string to_string(const Vec& v) {
    std::string s = "(";
    for (int i = 0; i < v.dim(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

/// Symmetric d x d matrix with just enough linear algebra for the kernels:
/// Cholesky factorization, determinant, and quadratic forms with the inverse.
struct SymMat {
    std::array<double, kMaxDim * kMaxDim> m{};
    int n = 1;

    SymMat() = default;
    explicit SymMat(int dim) : n(dim) {}

    static SymMat identity(int dim, double scale = 1.0) {
        SymMat s(dim);
        for (int i = 0; i < dim; ++i) s(i, i) = scale;
        return s;
    }
    static SymMat scalar1d(double a) { return identity(1, a); }

    double& operator()(int i, int j) { return m[static_cast<std::size_t>(i * kMaxDim + j)]; }
    double operator()(int i, int j) const { return m[static_cast<std::size_t>(i * kMaxDim + j)]; }
    int dim() const { return n; }

    SymMat& operator*=(double c) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) (*this)(i, j) *= c;
        return *this;
    }

    /// Largest relative asymmetry |m_ij - m_ji| / max diag; 0 for d=1.
    double asymmetry() const {
        double scale = 0, worst = 0;
        for (int i = 0; i < n; ++i) scale = std::max(scale, std::fabs((*this)(i, i)));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                worst = std::max(worst, std::fabs((*this)(i, j) - (*this)(j, i)));
        return scale > 0 ? worst / scale : worst;
    }
};

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
struct Chol {
    std::array<double, kMaxDim * kMaxDim> l{};
    int n = 1;

    double& L(int i, int j) { return l[static_cast<std::size_t>(i * kMaxDim + j)]; }
    double L(int i, int j) const { return l[static_cast<std::size_t>(i * kMaxDim + j)]; }

    /// Factor a; throws SingularMatrix if a is not positive definite.
    static Chol factor(const SymMat& a) {
        Chol c;
        c.n = a.dim();
        for (int i = 0; i < c.n; ++i) {
            for (int j = 0; j <= i; ++j) {
                double s = a(i, j);
                for (int k = 0; k < j; ++k) s -= c.L(i, k) * c.L(j, k);
                if (i == j) {
                    if (!(s > 0))
                        throw SingularMatrix("diffusion matrix not positive definite (pivot " +
                                             std::to_string(s) + " at " + std::to_string(i) + ")");
                    c.L(i, i) = std::sqrt(s);
                } else {
                    c.L(i, j) = s / c.L(j, j);
                }
            }
        }
        return c;
    }

    double det() const {
        double d = 1;
        for (int i = 0; i < n; ++i) d *= L(i, i);
        return d * d;
    }

    /// Solve A u = v given A = L L^T.
    Vec solve(const Vec& v) const {
        Vec y(n);
        for (int i = 0; i < n; ++i) {
            double s = v[i];
            for (int k = 0; k < i; ++k) s -= L(i, k) * y[k];
            y[i] = s / L(i, i);
        }
        Vec u(n);
        for (int i = n - 1; i >= 0; --i) {
            double s = y[i];
            for (int k = i + 1; k < n; ++k) s -= L(k, i) * u[k];
            u[i] = s / L(i, i);
        }
        return u;
    }

    /// v . A^{-1} v without forming the inverse.
    double inv_quadratic(const Vec& v) const {
        Vec y(n);
        for (int i = 0; i < n; ++i) {
            double s = v[i];
            for (int k = 0; k < i; ++k) s -= L(i, k) * y[k];
            y[i] = s / L(i, i);
        }
        return dot(y, y);
    }

    /// L v (maps standard normals to correlated ones).
    Vec apply_lower(const Vec& v) const {
        Vec u(n);
        for (int i = 0; i < n; ++i) {
            double s = 0;
            for (int k = 0; k <= i; ++k) s += L(i, k) * v[k];
            u[i] = s;
        }
        return u;
    }
};

}  // namespace fpk
