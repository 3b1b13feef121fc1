#include "polyfsi/polymer.hpp"

#include <Eigen/Eigenvalues>

namespace polyfsi {

PhysicalParams PhysicalParams::from_config(const RunConfig& cfg) {
    PhysicalParams p;
    p.mu = cfg.get_d("fluid.mu");
    p.eps = cfg.get_d("poly.eps");
    p.lambda = cfg.get_d("poly.lambda");
    p.kpoly = cfg.get_d("poly.kpoly");
    p.dh = cfg.get_d("poly.dh");
    const int K = cfg.get_i("poly.chains");
    p.rouse = Mat::Zero(K, K);
    p.rouse(0, 0) = cfg.get_d("poly.rouse_a11");
    Eigen::SelfAdjointEigenSolver<Mat> es(p.rouse);
    p.a0 = es.eigenvalues().minCoeff();
    if (p.a0 <= 0.0) throw ConfigError("chain coupling matrix must be positive definite");
    return p;
}

double SpringLaw::radius() const {
    switch (kind) {
        case SpringKind::fene: return std::sqrt(b);
        case SpringKind::tanner: return std::sqrt(2.0 * slock);
        case SpringKind::hookean: return 9.0;  // numeric truncation; tail mass < 1e-16
    }
    return 0.0;
}

double SpringLaw::U(double s) const {
    switch (kind) {
        case SpringKind::fene:
            if (2.0 * s >= b) throw OutOfDomain("spring potential evaluated outside B");
            return -(b / 2.0) * std::log(1.0 - 2.0 * s / b);
        case SpringKind::tanner:
            if (s >= slock) throw OutOfDomain("spring potential evaluated outside B");
            return s;
        case SpringKind::hookean: return s;
    }
    return 0.0;
}

double SpringLaw::Uprime(double s) const {
    switch (kind) {
        case SpringKind::fene:
            if (2.0 * s >= b) throw OutOfDomain("spring force evaluated outside B");
            return 1.0 / (1.0 - 2.0 * s / b);
        case SpringKind::tanner:
            if (s >= slock) throw OutOfDomain("spring force evaluated outside B");
            return 1.0;
        case SpringKind::hookean: return 1.0;
    }
    return 0.0;
}

Vec2 SpringLaw::force(const Vec2& q) const { return Uprime(0.5 * q.squaredNorm()) * q; }

double SpringLaw::weight_unnorm(double r) const {
    switch (kind) {
        case SpringKind::fene: {
            const double t = 1.0 - r * r / b;
            return t <= 0.0 ? 0.0 : std::pow(t, b / 2.0);
        }
        case SpringKind::tanner:
            return r * r >= 2.0 * slock ? 0.0 : std::exp(-0.5 * r * r);
        case SpringKind::hookean: return std::exp(-0.5 * r * r);
    }
    return 0.0;
}

double SpringLaw::weight_unnorm_dr(double r) const {
    switch (kind) {
        case SpringKind::fene: {
            const double t = 1.0 - r * r / b;
            if (t <= 0.0) return 0.0;
            return std::pow(t, b / 2.0 - 1.0) * (-r);
        }
        case SpringKind::tanner:
        case SpringKind::hookean: return -r * std::exp(-0.5 * r * r);
    }
    return 0.0;
}

double SpringLaw::partition() const {
    switch (kind) {
        case SpringKind::fene: return 2.0 * pi * b / (b + 2.0);
        case SpringKind::tanner: return 2.0 * pi * (1.0 - std::exp(-slock));
        case SpringKind::hookean: return 2.0 * pi * (1.0 - std::exp(-0.5 * sqr(radius())));
    }
    return 1.0;
}

SpringLaw SpringLaw::from_config(const RunConfig& cfg) {
    SpringLaw law;
    const std::string& k = cfg.get_s("poly.kind");
    law.kind = k == "hookean" ? SpringKind::hookean
                              : (k == "tanner" ? SpringKind::tanner : SpringKind::fene);
    law.b = cfg.get_d("poly.b");
    law.slock = cfg.get_d("poly.slock");
    law.chains = cfg.get_i("poly.chains");
    law.dim = cfg.get_i("poly.dim");
    return law;
}

QuadB QuadB::build(const SpringLaw& law, int nr, int nth) {
    QuadB q;
    q.nr = nr;
    q.nth = nth;
    q.n = nr * nth;
    q.ru.resize(nr);
    q.rw.resize(nr);

    if (law.kind == SpringKind::fene) {
        // u = r^2/b substitution: int f(r) r dr = (b/2) int_0^1 f(sqrt(b u)) du.
        std::vector<double> u, wu;
        gauss_legendre_ab(nr, 0.0, 1.0, u, wu);
        for (int i = 0; i < nr; ++i) {
            q.ru[i] = std::sqrt(law.b * u[i]);
            q.rw[i] = 0.5 * law.b * wu[i];
        }
    } else {
        // composite Gauss-Legendre panels in r; area element folded into the weight
        const double R = law.radius();
        const int panels = 3;
        std::vector<double> x, w;
        int base = nr / panels, rem = nr % panels;
        int at = 0;
        for (int p = 0; p < panels; ++p) {
            const int np = base + (p < rem ? 1 : 0);
            if (np == 0) continue;
            gauss_legendre_ab(np, R * p / panels, R * (p + 1) / panels, x, w);
            for (int i = 0; i < np; ++i) {
                q.ru[at + i] = x[i];
                q.rw[at + i] = w[i] * x[i];
            }
            at += np;
        }
    }

    q.r.resize(q.n);
    q.th.resize(q.n);
    q.q1.resize(q.n);
    q.q2.resize(q.n);
    q.w.resize(q.n);
    const double wth = 2.0 * pi / nth;
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < nth; ++j) {
            const int id = i * nth + j;
            const double th = wth * j;
            q.r[id] = q.ru[i];
            q.th[id] = th;
            q.q1[id] = q.ru[i] * std::cos(th);
            q.q2[id] = q.ru[i] * std::sin(th);
            q.w[id] = q.rw[i] * wth;
        }
    }
    return q;
}

MaxwellianTable MaxwellianTable::build(const SpringLaw& law, const QuadB& quad, double m_floor) {
    MaxwellianTable t;
    t.Z = law.partition();
    t.m_floor = m_floor;
    t.M.resize(quad.n);
    t.Mm.resize(quad.n);
    t.M_dr.resize(quad.n);
    for (int i = 0; i < quad.n; ++i) {
        const double m = law.weight_unnorm(quad.r[i]) / t.Z;
        t.M[i] = m;
        t.Mm[i] = std::max(m, 0.0) + 1.0 / m_floor;
        t.M_dr[i] = law.weight_unnorm_dr(quad.r[i]) / t.Z;
    }
    t.mass = 0.0;
    for (int i = 0; i < quad.n; ++i) t.mass += quad.w[i] * t.M[i];
    return t;
}

double cutoff_gamma(double s) {
    const double a = std::abs(s);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    return 1.0 - smoothstep5(a - 1.0);
}

double cutoff_gamma_d(double s) {
    const double a = std::abs(s);
    if (a <= 1.0 || a >= 2.0) return 0.0;
    const double d = -smoothstep5_d(a - 1.0);
    return s >= 0.0 ? d : -d;
}

namespace {
/// int_0^t smoothstep5 for t in [0,1].
double smoothstep5_int(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 0.5;
    const double t4 = t * t * t * t;
    return t4 * (2.5 + t * (-3.0 + t));
}
}  // namespace

double cutoff_T(double s, double ell) {
    if (s < 0.0) return -cutoff_T(-s, ell);
    if (s <= ell) return s;
    if (s >= 2.0 * ell) return 1.5 * ell;
    const double t = s / ell - 1.0;  // in (0,1)
    return ell + ell * (t - smoothstep5_int(t));
}

double cutoff_T_delta(double s, double ell, double delta) {
    if (s <= 0.0) return 0.0;
    if (delta == 0.0) return cutoff_T(s, ell);
    // plateau: integrand r/(r+delta), antiderivative r - delta log(1 + r/delta)
    auto plateau = [&](double a) { return a - delta * std::log1p(a / delta); };
    if (s <= ell) return plateau(s);
    double acc = plateau(ell);
    const double hi = std::min(s, 2.0 * ell);
    acc += adaptive_simpson(
        [&](double r) { return r * cutoff_gamma_ell(r, ell) / (r + delta); }, ell, hi, 1e-13);
    return acc;
}

double entropy_F(double s) {
    constexpr double inv_e = 0.36787944117144233;
    if (s <= 0.0) return inv_e;
    return s * std::log(s) + inv_e;
}

double entropy_F_delta(double s, double delta) {
    constexpr double inv_e = 0.36787944117144233;
    const double t = s + delta;
    if (t <= 0.0) return inv_e;
    return t * std::log(t) + inv_e;
}

}  // namespace polyfsi
