#include "polyfsi/geometry.hpp"

namespace polyfsi {

double ReferenceShell::h(double y1, double y2, int o1, int o2) const {
    const double w = 2.0 * pi;
    auto trig = [&](double y, int o) {
        switch (o % 4) {
            case 0: return std::cos(w * y);
            case 1: return -std::sin(w * y);
            case 2: return -std::cos(w * y);
            default: return std::sin(w * y);
        }
    };
    double scale = bump_amp;
    for (int r = 0; r < o1 + o2; ++r) scale *= w;
    return scale * trig(y1, o1) * trig(y2, o2);
}

Vec3 ReferenceShell::phi(double y1, double y2) const { return {y1, y2, 1.0 + h(y1, y2, 0, 0)}; }

Vec3 ReferenceShell::dphi(int i, double y1, double y2) const {
    if (i == 1) return {1.0, 0.0, h(y1, y2, 1, 0)};
    return {0.0, 1.0, h(y1, y2, 0, 1)};
}

Vec3 ReferenceShell::ddphi(int i, int j, double y1, double y2) const {
    const int o1 = (i == 1) + (j == 1), o2 = (i == 2) + (j == 2);
    return {0.0, 0.0, h(y1, y2, o1, o2)};
}

namespace {
/// g = d1 phi x d2 phi = (-h1, -h2, 1) for a graph; returns g and derivatives.
struct GraphNormal {
    Vec3 g, g1, g2, g11, g12, g22;
    void fill(const ReferenceShell& s, double y1, double y2) {
        g = {-s.h(y1, y2, 1, 0), -s.h(y1, y2, 0, 1), 1.0};
        g1 = {-s.h(y1, y2, 2, 0), -s.h(y1, y2, 1, 1), 0.0};
        g2 = {-s.h(y1, y2, 1, 1), -s.h(y1, y2, 0, 2), 0.0};
        g11 = {-s.h(y1, y2, 3, 0), -s.h(y1, y2, 2, 1), 0.0};
        g12 = {-s.h(y1, y2, 2, 1), -s.h(y1, y2, 1, 2), 0.0};
        g22 = {-s.h(y1, y2, 1, 2), -s.h(y1, y2, 0, 3), 0.0};
    }
    Vec3 dg(int i) const { return i == 1 ? g1 : g2; }
    Vec3 ddg(int i, int j) const { return (i == 1 && j == 1) ? g11 : ((i == 2 && j == 2) ? g22 : g12); }
};
}  // namespace

Vec3 ReferenceShell::nu(double y1, double y2) const {
    GraphNormal gn;
    gn.fill(*this, y1, y2);
    return gn.g / gn.g.norm();
}

Vec3 ReferenceShell::dnu(int i, double y1, double y2) const {
    GraphNormal gn;
    gn.fill(*this, y1, y2);
    const double n = gn.g.norm();
    const Vec3 gi = gn.dg(i);
    return gi / n - gn.g * (gn.g.dot(gi)) / (n * n * n);
}

Vec3 ReferenceShell::ddnu(int i, int j, double y1, double y2) const {
    GraphNormal gn;
    gn.fill(*this, y1, y2);
    const double n = gn.g.norm();
    const double n3 = n * n * n, n5 = n3 * n * n;
    const Vec3 gi = gn.dg(i), gj = gn.dg(j), gij = gn.ddg(i, j);
    const double gdgi = gn.g.dot(gi), gdgj = gn.g.dot(gj);
    return gij / n - gi * gdgj / n3 - gj * gdgi / n3 -
           gn.g * (gj.dot(gi) + gn.g.dot(gij)) / n3 + 3.0 * gn.g * gdgi * gdgj / n5;
}

double ReferenceShell::area_factor(double y1, double y2) const {
    GraphNormal gn;
    gn.fill(*this, y1, y2);
    return gn.g.norm();
}

void ReferenceShell::build_tables() {
    const int n = n1 * n2;
    auto& T = tables;
    T.d1.resize(n); T.d2.resize(n); T.dd11.resize(n); T.dd12.resize(n); T.dd22.resize(n);
    T.nu.resize(n); T.dnu1.resize(n); T.dnu2.resize(n);
    T.ddnu11.resize(n); T.ddnu12.resize(n); T.ddnu22.resize(n);
    T.n0.resize(n); T.A1.resize(n); T.A1b.resize(n); T.A2.resize(n); T.A2b.resize(n);
    T.C1.resize(n); T.C2.resize(n);
    T.s.resize(n);
    T.b11.resize(n); T.b12.resize(n); T.b22.resize(n);
    T.c11.resize(n); T.c12.resize(n); T.c22.resize(n);
    T.r11.resize(n); T.r12.resize(n); T.r22.resize(n);
    T.gC1.resize(n); T.gC2.resize(n);
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) {
            const double y1 = static_cast<double>(i) / n1, y2 = static_cast<double>(j) / n2;
            const int id = idx(i, j);
            T.d1[id] = dphi(1, y1, y2);
            T.d2[id] = dphi(2, y1, y2);
            T.dd11[id] = ddphi(1, 1, y1, y2);
            T.dd12[id] = ddphi(1, 2, y1, y2);
            T.dd22[id] = ddphi(2, 2, y1, y2);
            T.nu[id] = nu(y1, y2);
            T.dnu1[id] = dnu(1, y1, y2);
            T.dnu2[id] = dnu(2, y1, y2);
            T.ddnu11[id] = ddnu(1, 1, y1, y2);
            T.ddnu12[id] = ddnu(1, 2, y1, y2);
            T.ddnu22[id] = ddnu(2, 2, y1, y2);
            T.s[id] = area_factor(y1, y2);
            T.n0[id] = T.nu[id] * T.s[id];
            T.A2[id] = T.d1[id].cross(T.nu[id]);
            T.A2b[id] = T.dnu1[id].cross(T.nu[id]);
            T.A1[id] = T.nu[id].cross(T.d2[id]);
            T.A1b[id] = T.nu[id].cross(T.dnu2[id]);
            T.C1[id] = T.d1[id].cross(T.dnu2[id]) + T.dnu1[id].cross(T.d2[id]);
            T.C2[id] = T.dnu1[id].cross(T.dnu2[id]);
            T.b11[id] = 2.0 * T.d1[id].dot(T.dnu1[id]);
            T.b12[id] = T.d1[id].dot(T.dnu2[id]) + T.d2[id].dot(T.dnu1[id]);
            T.b22[id] = 2.0 * T.d2[id].dot(T.dnu2[id]);
            T.c11[id] = T.dnu1[id].dot(T.dnu1[id]);
            T.c12[id] = T.dnu1[id].dot(T.dnu2[id]);
            T.c22[id] = T.dnu2[id].dot(T.dnu2[id]);
            T.r11[id] = T.dd11[id].dot(T.nu[id]);
            T.r12[id] = T.dd12[id].dot(T.nu[id]);
            T.r22[id] = T.dd22[id].dot(T.nu[id]);
            T.gC1[id] = T.nu[id].dot(T.C1[id]);
            T.gC2[id] = T.nu[id].dot(T.C2[id]);
        }
    }
}

ReferenceShell ReferenceShell::from_config(const RunConfig& cfg) {
    ReferenceShell s;
    s.n1 = cfg.get_i("shell.n1");
    s.n2 = cfg.get_i("shell.n2");
    s.L = cfg.get_d("geom.L");
    s.Ltilde = cfg.get_d("geom.Ltilde");
    s.gamma_min = cfg.get_d("geom.gamma_min");
    s.bump_amp = cfg.get_d("geom.bump_amp");
    s.build_tables();
    return s;
}

std::vector<Vec3> ReferenceShell_deformed_normal_impl(const ReferenceShell& ref, const Mat& eta,
                                                      const Mat& p1, const Mat& p2) {
    const auto& T = ref.tables;
    std::vector<Vec3> out(ref.n1 * ref.n2);
    for (int i = 0; i < ref.n1; ++i) {
        for (int j = 0; j < ref.n2; ++j) {
            const int id = ref.idx(i, j);
            const double e = eta(i, j), a = p1(i, j), b = p2(i, j);
            out[id] = T.n0[id] + b * (T.A2[id] + e * T.A2b[id]) + a * (T.A1[id] + e * T.A1b[id]) +
                      e * T.C1[id] + e * e * T.C2[id];
        }
    }
    return out;
}

std::vector<Vec3> deformed_normal(const ReferenceShell& ref, const Mat& eta) {
    SpectralTorus sp(ref.n1, ref.n2);
    const Mat p1 = sp.deriv(eta, 1, 0);
    const Mat p2 = sp.deriv(eta, 0, 1);
    return ReferenceShell_deformed_normal_impl(ref, eta, p1, p2);
}

Mat geometric_factor(const ReferenceShell& ref, const Mat& eta) {
    const auto& T = ref.tables;
    Mat g(ref.n1, ref.n2);
    for (int i = 0; i < ref.n1; ++i) {
        for (int j = 0; j < ref.n2; ++j) {
            const int id = ref.idx(i, j);
            const double e = eta(i, j);
            g(i, j) = 1.0 + e * T.gC1[id] / T.s[id] + e * e * T.gC2[id] / T.s[id];
        }
    }
    return g;
}

AdmissibilityReport check_admissible(const ReferenceShell& ref, const Mat& eta,
                                     double corridor_margin) {
    AdmissibilityReport rep;
    rep.sup_eta = eta.cwiseAbs().maxCoeff();
    rep.min_gamma = geometric_factor(ref, eta).minCoeff();
    // max slope of the collar profile is 1.875 over a rise window of width L/2
    const double beta_slope_max = 3.75 / ref.L;
    rep.bound = 1.0 / beta_slope_max;  // = L / 3.75
    rep.margin = rep.bound * (1.0 - corridor_margin) - rep.sup_eta;
    rep.ok = rep.margin > 0.0 && rep.min_gamma >= ref.gamma_min;
    return rep;
}

Spectral1D::Spectral1D(const Vec& values) {
    const int n = static_cast<int>(values.size());
    coef_.assign(n, {});
    for (int i = 0; i < n; ++i) coef_[i] = values[i];
    fft_radix2(coef_, false);
    for (auto& c : coef_) c /= static_cast<double>(n);
}

double Spectral1D::eval(double x) const {
    const int n = static_cast<int>(coef_.size());
    std::complex<double> acc(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
        const int k = SpectralTorus::freq(i, n);
        const double ph = 2.0 * pi * k * x;
        acc += coef_[i] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return acc.real();
}

double Spectral1D::eval_d(double x) const {
    const int n = static_cast<int>(coef_.size());
    std::complex<double> acc(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
        const int k = SpectralTorus::freq(i, n);
        if (2 * std::abs(k) == n) continue;  // Nyquist dropped for odd derivative
        const double ph = 2.0 * pi * k * x;
        acc += coef_[i] * std::complex<double>(0.0, 2.0 * pi * k) *
               std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return acc.real();
}

double collar_beta(double s) {
    return smoothstep5((s + 0.75) / 0.5);
}

double collar_beta_d(double s) {
    return smoothstep5_d((s + 0.75) / 0.5) / 0.5;
}

DomainMap::DomainMap(const ReferenceShell& ref, const Vec& eta_line, const Vec& etadot_line,
                     double newton_tol, int newton_max_iter)
    : eta_(eta_line), etadot_(etadot_line), L_(ref.L), newton_tol_(newton_tol),
      newton_max_iter_(newton_max_iter) {}

double DomainMap::btilde(double z) const {
    const double s = (z - 1.0) / L_;
    if (s <= -1.0) return 0.0;
    if (s >= 0.0) return 1.0;
    return collar_beta(s);
}

double DomainMap::btilde_d(double z) const {
    const double s = (z - 1.0) / L_;
    if (s <= -1.0 || s >= 0.0) return 0.0;
    return collar_beta_d(s) / L_;
}

Vec2 DomainMap::forward(double x, double z) const { return {x, z + eta_.eval(x) * btilde(z)}; }

double DomainMap::jac_a(double x, double z) const { return eta_.eval_d(x) * btilde(z); }

double DomainMap::jac_c(double x, double z) const { return 1.0 + eta_.eval(x) * btilde_d(z); }

double DomainMap::mesh_velocity(double x, double z) const {
    return etadot_.eval(x) * btilde(z);
}

Vec2 DomainMap::inverse(double x, double Z) const {
    const double e = eta_.eval(x);
    double z = Z - e * btilde(Z);  // good initial guess
    for (int it = 0; it < newton_max_iter_; ++it) {
        const double f = z + e * btilde(z) - Z;
        if (std::abs(f) <= newton_tol_) return {x, z};
        const double fp = 1.0 + e * btilde_d(z);
        if (fp <= 0.0) throw AdmissibilityViolation("domain map not invertible at x=" + std::to_string(x));
        z -= f / fp;
    }
    throw SolverDiverged("inverse domain map Newton iteration did not converge");
}

DomainMap build_domain_map(const ReferenceShell& ref, const ShellState& state, const RunConfig& cfg) {
    const AdmissibilityReport rep = check_admissible(ref, state.eta, cfg.get_d("coupler.margin"));
    if (!rep.ok)
        throw AdmissibilityViolation("displacement outside the admissible corridor: sup|eta|=" +
                                     std::to_string(rep.sup_eta) + " bound=" + std::to_string(rep.bound) +
                                     " min gamma=" + std::to_string(rep.min_gamma));
    return DomainMap(ref, state.eta.col(0), state.etadot.col(0), cfg.get_d("geom.newton_tol"),
                     cfg.get_i("geom.newton_max_iter"));
}

}  // namespace polyfsi
