#include "polyfsi/shell.hpp"

#include "polyfsi/errors.hpp"

namespace polyfsi {

KoiterShell::KoiterShell(const ReferenceShell& ref, double eps0, double lame_lambda,
                         double lame_mu, bool weighted_measure)
    : ref_(&ref), sp_(ref.n1, ref.n2), eps0_(eps0), mu_(lame_mu), weighted_(weighted_measure) {
    c_vol_ = 2.0 * lame_lambda * lame_mu / (lame_lambda + 2.0 * lame_mu);
    const int n = ref.n1 * ref.n2;
    ainv_.resize(n);
    for (int id = 0; id < n; ++id) {
        const auto& T = ref.tables;
        Mat2 a;
        a(0, 0) = T.d1[id].dot(T.d1[id]);
        a(0, 1) = a(1, 0) = T.d1[id].dot(T.d2[id]);
        a(1, 1) = T.d2[id].dot(T.d2[id]);
        ainv_[id] = a.inverse();
    }
}

KoiterShell KoiterShell::from_config(const ReferenceShell& ref, const RunConfig& cfg) {
    return KoiterShell(ref, cfg.get_d("shell.eps0"), cfg.get_d("shell.lame_lambda"),
                       cfg.get_d("shell.lame_mu"), cfg.get_b("shell.weighted_measure"));
}

double KoiterShell::contract(int node, const Mat2& X, const Mat2& Y) const {
    const Mat2& ai = ainv_[node];
    const double trX = (ai * X).trace();
    const double trY = (ai * Y).trace();
    const double inner = (ai * X * ai * Y).trace();
    return c_vol_ * trX * trY + 2.0 * mu_ * inner;
}

void KoiterShell::point_strains(int node, const PointDerivs& s, Mat2& G, Mat2& R, Vec3& nu_eta,
                                Vec3 D[3]) const {
    const auto& T = ref_->tables;
    const double e = s.eta;
    G(0, 0) = s.p1 * s.p1 + e * T.b11[node] + e * e * T.c11[node];
    G(0, 1) = G(1, 0) = s.p1 * s.p2 + e * T.b12[node] + e * e * T.c12[node];
    G(1, 1) = s.p2 * s.p2 + e * T.b22[node] + e * e * T.c22[node];

    nu_eta = T.n0[node] + s.p2 * (T.A2[node] + e * T.A2b[node]) +
             s.p1 * (T.A1[node] + e * T.A1b[node]) + e * T.C1[node] + e * e * T.C2[node];

    D[0] = T.dd11[node] + s.P11 * T.nu[node] + 2.0 * s.p1 * T.dnu1[node] + e * T.ddnu11[node];
    D[1] = T.dd12[node] + s.P12 * T.nu[node] + s.p1 * T.dnu2[node] + s.p2 * T.dnu1[node] +
           e * T.ddnu12[node];
    D[2] = T.dd22[node] + s.P22 * T.nu[node] + 2.0 * s.p2 * T.dnu2[node] + e * T.ddnu22[node];

    const double is = 1.0 / T.s[node];
    R(0, 0) = D[0].dot(nu_eta) * is - T.r11[node];
    R(0, 1) = R(1, 0) = D[1].dot(nu_eta) * is - T.r12[node];
    R(1, 1) = D[2].dot(nu_eta) * is - T.r22[node];
}

double KoiterShell::point_density(int node, const PointDerivs& s) const {
    Mat2 G, R;
    Vec3 nu_eta, D[3];
    point_strains(node, s, G, R, nu_eta, D);
    double w = 0.5 * eps0_ * contract(node, G, G) +
               (eps0_ * eps0_ * eps0_ / 6.0) * contract(node, R, R);
    if (weighted_) {
        const auto& T = ref_->tables;
        const double e = s.eta;
        const double gam = 1.0 + (e * T.gC1[node] + e * e * T.gC2[node]) / T.s[node];
        w *= gam;
    }
    return w;
}

KoiterShell::PointGrad KoiterShell::point_density_grad(int node, const PointDerivs& s) const {
    const auto& T = ref_->tables;
    Mat2 G, R;
    Vec3 nu_eta, D[3];
    point_strains(node, s, G, R, nu_eta, D);
    const Mat2& ai = ainv_[node];
    const double e = s.eta;

    // dW/dG and dW/dR as symmetric matrices (trace pairing against variations)
    const Mat2 Tm = eps0_ * (c_vol_ * (ai * G).trace() * ai + 2.0 * mu_ * ai * G * ai);
    const double cb = eps0_ * eps0_ * eps0_ / 3.0;
    const Mat2 Tb = cb * (c_vol_ * (ai * R).trace() * ai + 2.0 * mu_ * ai * R * ai);

    PointGrad g;
    // membrane chain rule
    g.w_p1 += 2.0 * Tm(0, 0) * s.p1 + 2.0 * Tm(0, 1) * s.p2;
    g.w_p2 += 2.0 * Tm(0, 1) * s.p1 + 2.0 * Tm(1, 1) * s.p2;
    g.w_eta += Tm(0, 0) * (T.b11[node] + 2.0 * e * T.c11[node]) +
               2.0 * Tm(0, 1) * (T.b12[node] + 2.0 * e * T.c12[node]) +
               Tm(1, 1) * (T.b22[node] + 2.0 * e * T.c22[node]);

    // bending chain rule
    const double is = 1.0 / T.s[node];
    const double F11 = Tb(0, 0), F12 = 2.0 * Tb(0, 1), F22 = Tb(1, 1);
    const double nz = T.nu[node].dot(nu_eta) * is;
    g.w_P11 += F11 * nz;
    g.w_P12 += F12 * nz;
    g.w_P22 += F22 * nz;
    const double d1n = T.dnu1[node].dot(nu_eta) * is;
    const double d2n = T.dnu2[node].dot(nu_eta) * is;
    g.w_p1 += F11 * 2.0 * d1n + F12 * d2n;
    g.w_p2 += F12 * d1n + F22 * 2.0 * d2n;
    g.w_eta += (F11 * T.ddnu11[node].dot(nu_eta) + F12 * T.ddnu12[node].dot(nu_eta) +
                F22 * T.ddnu22[node].dot(nu_eta)) * is;
    const Vec3 V = F11 * D[0] + F12 * D[1] + F22 * D[2];
    g.w_p1 += V.dot(T.A1[node] + e * T.A1b[node]) * is;
    g.w_p2 += V.dot(T.A2[node] + e * T.A2b[node]) * is;
    g.w_eta += V.dot(s.p1 * T.A1b[node] + s.p2 * T.A2b[node] + T.C1[node] + 2.0 * e * T.C2[node]) * is;

    if (weighted_) {
        const double gam = 1.0 + (e * T.gC1[node] + e * e * T.gC2[node]) / T.s[node];
        const double dgam = (T.gC1[node] + 2.0 * e * T.gC2[node]) / T.s[node];
        const double w = point_density(node, s) / gam;
        g.w_eta = g.w_eta * gam + w * dgam;
        g.w_p1 *= gam;
        g.w_p2 *= gam;
        g.w_P11 *= gam;
        g.w_P12 *= gam;
        g.w_P22 *= gam;
    }
    return g;
}

SymField KoiterShell::metric_change(const Mat& eta) const {
    const Mat p1 = sp_.deriv(eta, 1, 0), p2 = sp_.deriv(eta, 0, 1);
    SymField f;
    f.c11.resize(ref_->n1, ref_->n2);
    f.c12.resize(ref_->n1, ref_->n2);
    f.c22.resize(ref_->n1, ref_->n2);
    for (int i = 0; i < ref_->n1; ++i) {
        for (int j = 0; j < ref_->n2; ++j) {
            PointDerivs s{eta(i, j), p1(i, j), p2(i, j), 0, 0, 0};
            Mat2 G, R;
            Vec3 ne, D[3];
            point_strains(ref_->idx(i, j), s, G, R, ne, D);
            f.c11(i, j) = G(0, 0);
            f.c12(i, j) = G(0, 1);
            f.c22(i, j) = G(1, 1);
        }
    }
    return f;
}

SymField KoiterShell::curvature_change(const Mat& eta) const {
    const Mat p1 = sp_.deriv(eta, 1, 0), p2 = sp_.deriv(eta, 0, 1);
    const Mat P11 = sp_.deriv(eta, 2, 0), P12 = sp_.deriv(eta, 1, 1), P22 = sp_.deriv(eta, 0, 2);
    SymField f;
    f.c11.resize(ref_->n1, ref_->n2);
    f.c12.resize(ref_->n1, ref_->n2);
    f.c22.resize(ref_->n1, ref_->n2);
    for (int i = 0; i < ref_->n1; ++i) {
        for (int j = 0; j < ref_->n2; ++j) {
            PointDerivs s{eta(i, j), p1(i, j), p2(i, j), P11(i, j), P12(i, j), P22(i, j)};
            Mat2 G, R;
            Vec3 ne, D[3];
            point_strains(ref_->idx(i, j), s, G, R, ne, D);
            f.c11(i, j) = R(0, 0);
            f.c12(i, j) = R(0, 1);
            f.c22(i, j) = R(1, 1);
        }
    }
    return f;
}

double KoiterShell::energy(const Mat& eta) const {
    const Mat p1 = sp_.deriv(eta, 1, 0), p2 = sp_.deriv(eta, 0, 1);
    const Mat P11 = sp_.deriv(eta, 2, 0), P12 = sp_.deriv(eta, 1, 1), P22 = sp_.deriv(eta, 0, 2);
    double acc = 0.0;
    for (int i = 0; i < ref_->n1; ++i)
        for (int j = 0; j < ref_->n2; ++j)
            acc += point_density(ref_->idx(i, j),
                                 {eta(i, j), p1(i, j), p2(i, j), P11(i, j), P12(i, j), P22(i, j)});
    return acc / (static_cast<double>(ref_->n1) * ref_->n2);
}

Mat KoiterShell::gradient(const Mat& eta) const {
    const Mat p1 = sp_.deriv(eta, 1, 0), p2 = sp_.deriv(eta, 0, 1);
    const Mat P11 = sp_.deriv(eta, 2, 0), P12 = sp_.deriv(eta, 1, 1), P22 = sp_.deriv(eta, 0, 2);
    Mat We(ref_->n1, ref_->n2), Wp1(ref_->n1, ref_->n2), Wp2(ref_->n1, ref_->n2);
    Mat WP11(ref_->n1, ref_->n2), WP12(ref_->n1, ref_->n2), WP22(ref_->n1, ref_->n2);
    for (int i = 0; i < ref_->n1; ++i) {
        for (int j = 0; j < ref_->n2; ++j) {
            const PointGrad g = point_density_grad(
                ref_->idx(i, j),
                {eta(i, j), p1(i, j), p2(i, j), P11(i, j), P12(i, j), P22(i, j)});
            We(i, j) = g.w_eta;
            Wp1(i, j) = g.w_p1;
            Wp2(i, j) = g.w_p2;
            WP11(i, j) = g.w_P11;
            WP12(i, j) = g.w_P12;
            WP22(i, j) = g.w_P22;
        }
    }
    // adjoints of the spectral derivative maps under the normalized pairing
    return We - sp_.deriv(Wp1, 1, 0) - sp_.deriv(Wp2, 0, 1) + sp_.deriv(WP11, 2, 0) +
           sp_.deriv(WP12, 1, 1) + sp_.deriv(WP22, 0, 2);
}

Mat KoiterShell::linear_symbol() const {
    Mat sym = Mat::Zero(ref_->n1, ref_->n2);
    if (ref_->bump_amp != 0.0) return sym;  // curved reference: no diagonal shortcut
    const double cb = (eps0_ * eps0_ * eps0_ / 3.0) * (c_vol_ + 2.0 * mu_);
    for (int i = 0; i < ref_->n1; ++i) {
        const int k1 = SpectralTorus::freq(i, ref_->n1);
        for (int j = 0; j < ref_->n2; ++j) {
            const int k2 = SpectralTorus::freq(j, ref_->n2);
            const double k2n = sqr(2.0 * pi * k1) + sqr(2.0 * pi * k2);
            sym(i, j) = cb * k2n * k2n;
        }
    }
    return sym;
}

ShellRegularizer::ShellRegularizer(int n1, int n2) : sp_(n1, n2), sym_(n1, n2), esym_(n1, n2) {
    for (int i = 0; i < n1; ++i) {
        const int k1 = SpectralTorus::freq(i, n1);
        for (int j = 0; j < n2; ++j) {
            const int k2 = SpectralTorus::freq(j, n2);
            const double k2n = sqr(2.0 * pi * k1) + sqr(2.0 * pi * k2);
            esym_(i, j) = k2n * k2n * k2n * k2n * k2n;  // |2 pi k|^10
            sym_(i, j) = 2.0 * esym_(i, j);
        }
    }
}

double ShellRegularizer::energy(const Mat& eta) const {
    const Eigen::MatrixXcd c = sp_.forward(eta);
    double acc = 0.0;
    for (int i = 0; i < eta.rows(); ++i)
        for (int j = 0; j < eta.cols(); ++j) acc += esym_(i, j) * std::norm(c(i, j));
    return acc;
}

Mat ShellRegularizer::gradient(const Mat& eta) const { return sp_.apply_symbol(eta, sym_); }

ShellStepper::ShellStepper(const KoiterShell& koiter, const ShellRegularizer& reg, double varrho,
                           double inner_tol, int inner_max_iter)
    : koiter_(&koiter), reg_(&reg), sp_(koiter.ref().n1, koiter.ref().n2), varrho_(varrho),
      inner_tol_(inner_tol), inner_max_iter_(inner_max_iter) {
    implicit_symbol_ = koiter.linear_symbol() + varrho * reg.symbol();
}

ShellStepper ShellStepper::from_config(const KoiterShell& k, const ShellRegularizer& r,
                                       const RunConfig& cfg) {
    return ShellStepper(k, r, cfg.get_d("coupler.rho"), cfg.get_d("shell.inner_tol"),
                        cfg.get_i("shell.inner_max_iter"));
}

void ShellStepper::step(ShellState& state, double dt, const Mat& g_mid) const {
    const Mat& eta0 = state.eta;
    const Mat& v0 = state.etadot;
    const Mat b = eta0 + dt * v0 + (0.5 * dt * dt) * g_mid;
    const Eigen::MatrixXcd bh = sp_.forward(b);
    const Eigen::MatrixXcd e0h = sp_.forward(eta0);

    Mat Y = eta0 + dt * v0;
    double err = 0.0;
    bool done = false;
    for (int it = 0; it < inner_max_iter_; ++it) {
        const Mat z = 0.5 * (eta0 + Y);
        // nonlinear remainder: full gradient minus the diagonal implicit part
        const Mat full = koiter_->gradient(z) + varrho_ * reg_->gradient(z);
        const Mat rem = full - sp_.apply_symbol(z, implicit_symbol_);
        const Eigen::MatrixXcd rh = sp_.forward(rem);
        Eigen::MatrixXcd Yh(sp_.n1(), sp_.n2());
        const double q = 0.25 * dt * dt;
        for (int i = 0; i < sp_.n1(); ++i)
            for (int j = 0; j < sp_.n2(); ++j)
                Yh(i, j) = (bh(i, j) - q * implicit_symbol_(i, j) * e0h(i, j) -
                            2.0 * q * rh(i, j)) /
                           (1.0 + q * implicit_symbol_(i, j));
        const Mat Ynew = sp_.backward(Yh);
        err = (Ynew - Y).cwiseAbs().maxCoeff();
        Y = Ynew;
        if (err <= inner_tol_ * std::max(1.0, Y.cwiseAbs().maxCoeff())) {
            done = true;
            break;
        }
    }
    if (!done) throw SolverDiverged("shell implicit midpoint inner iteration stalled, err=" +
                                    std::to_string(err));
    state.etadot = (2.0 / dt) * (Y - eta0) - v0;
    state.eta = Y;
    state.t += dt;
}

double ShellStepper::total_energy(const ShellState& state) const {
    const double n = static_cast<double>(state.eta.rows()) * state.eta.cols();
    const double kin = 0.5 * state.etadot.array().square().sum() / n;
    return kin + koiter_->energy(state.eta) + varrho_ * reg_->energy(state.eta);
}

}  // namespace polyfsi
