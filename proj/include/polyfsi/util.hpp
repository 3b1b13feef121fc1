#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace polyfsi {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double pi = 3.14159265358979323846264338327950288;

/// Quintic smoothstep: 0 for t<=0, 1 for t>=1, C^2 join at both ends.
inline double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

/// Derivative of smoothstep5.
inline double smoothstep5_d(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

/// Second derivative of smoothstep5.
inline double smoothstep5_dd(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
}

inline double sqr(double x) { return x * x; }

/// Relative gap (a-b)/max(|a|,|b|,floor); used by inequality checks.
inline double rel_gap(double a, double b, double floor_scale = 1.0) {
    double s = std::max(std::abs(a), std::abs(b));
    s = std::max(s, floor_scale);
    return (a - b) / s;
}

/// Gauss-Legendre nodes/weights on [-1,1], computed by Newton on Legendre polynomials.
/// Deterministic, accurate to ~1e-15 for n up to a few hundred.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

/// Gauss-Legendre on [a,b].
inline void gauss_legendre_ab(int n, double a, double b, std::vector<double>& x,
                              std::vector<double>& w) {
    gauss_legendre(n, x, w);
    for (int i = 0; i < n; ++i) {
        x[i] = 0.5 * (a + b) + 0.5 * (b - a) * x[i];
        w[i] *= 0.5 * (b - a);
    }
}

/// Adaptive Simpson quadrature for smooth 1-D integrands.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 40) {
    struct Rec {
        static double go(F& f, double a, double b, double fa, double fm, double fb, double whole,
                         double tol, int depth) {
            double m = 0.5 * (a + b);
            double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            double flm = f(lm), frm = f(rm);
            double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            double delta = left + right - whole;
            if (depth <= 0) return left + right + delta / 15.0;
            if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
            return go(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   go(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Rec::go(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

/// Format a double with full round-trip precision (used by the CSV/field writers).
std::string format_full(double v);

/// True if every entry is finite.
inline bool all_finite(const Vec& v) { return v.allFinite(); }
inline bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace polyfsi
