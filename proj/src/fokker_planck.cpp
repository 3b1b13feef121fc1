#include "polyfsi/fokker_planck.hpp"

#include <Eigen/Dense>

#include "polyfsi/errors.hpp"

namespace polyfsi {

FPSolver::FPSolver(const SpringLaw& law, const PhysicalParams& params, const QuadB& quad,
                   const MaxwellianTable& max, const ConfigBasis& cbasis,
                   const SpatialBasis& sbasis, double ell, int drag_picard, double tol_neg)
    : law_(law),
      params_(params),
      quad_(&quad),
      max_(&max),
      cb_(&cbasis),
      sb_(&sbasis),
      ell_(ell),
      drag_picard_(drag_picard),
      tol_neg_(tol_neg) {
    if (ell_ <= 0.0) throw ConfigError("cutoff level must be positive");
    if (drag_picard_ < 1) throw ConfigError("drag sweep count must be at least 1");
    wM_ = Vec(quad_->n);
    for (int i = 0; i < quad_->n; ++i) wM_[i] = quad_->w[i] * max_->M[i];
    momM_ = cb_->vals.transpose() * wM_;
    const double a11 = params_.rouse(0, 0);
    kappa_ = (a11 / (4.0 * params_.lambda)) * cb_->lambda;
}

ConfigDensity FPSolver::equilibrium() const {
    ConfigDensity s;
    s.f = Mat::Zero(cb_->n, sb_->n);
    s.f(cb_->const_index, sb_->const_index) = cb_->const_coef;
    return s;
}

FPSolver::Metric FPSolver::sample_metric(const DomainMap* m1, const DomainMap* m2) const {
    Metric met;
    const int nq = sb_->nq;
    met.J = Vec::Ones(nq);
    met.a = Vec::Zero(nq);
    met.c = Vec::Ones(nq);
    met.wmesh = Vec::Zero(nq);
    if (!m1 && !m2) return met;
    for (int i = 0; i < nq; ++i) {
        const double x = sb_->xq[i], z = sb_->zq[i];
        double a = 0.0, c = 0.0, w = 0.0;
        int cnt = 0;
        for (const DomainMap* m : {m1, m2}) {
            if (!m) continue;
            a += m->jac_a(x, z);
            c += m->jac_c(x, z);
            w += m->mesh_velocity(x, z);
            ++cnt;
        }
        met.a[i] = a / cnt;
        met.c[i] = c / cnt;
        met.J[i] = met.c[i];
        met.wmesh[i] = w / cnt;
    }
    return met;
}

Mat FPSolver::mass_matrix(const Vec& J) const {
    return sb_->vals.transpose() * (J * sb_->wq).asDiagonal() * sb_->vals;
}

void FPSolver::physical_gradients(const Metric& met, Mat& gx, Mat& gz) const {
    gx = sb_->dx - (met.a.array() / met.c.array()).matrix().asDiagonal() * sb_->dz;
    gz = met.c.cwiseInverse().asDiagonal() * sb_->dz;
}

Mat FPSolver::drag_rhs(const Mat& fmid, const std::vector<Mat2>& gradv, const Metric& met) const {
    const int nq = sb_->nq;
    bool active = false;
    for (const auto& g : gradv)
        if (g.cwiseAbs().maxCoeff() != 0.0) {
            active = true;
            break;
        }
    if (!active) return Mat::Zero(cb_->n, sb_->n);

    // psi values at all (q, x) nodes, then the cutoff drag density
    const Mat cn = fmid * sb_->vals.transpose();  // ncfg x nq
    Mat lam = cb_->vals * cn;                     // quad.n x nq
    for (int j = 0; j < nq; ++j)
        for (int i = 0; i < quad_->n; ++i) lam(i, j) = cutoff_Lambda(lam(i, j), ell_);

    Mat d = Mat::Zero(cb_->n, nq);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            bool nz = false;
            for (const auto& g : gradv)
                if (g(a, b) != 0.0) {
                    nz = true;
                    break;
                }
            if (!nz) continue;
            Vec scale(nq);
            for (int j = 0; j < nq; ++j) scale[j] = gradv[j](a, b);
            d.noalias() += (cb_->G[a][b].transpose() * lam) * scale.asDiagonal();
        }
    return d * (met.J * sb_->wq).asDiagonal() * sb_->vals;
}

void FPSolver::step(ConfigDensity& state, const FlowSample& flow, double dt) {
    const int nq = sb_->nq;
    if (static_cast<int>(flow.v.size()) != nq || static_cast<int>(flow.gradv.size()) != nq)
        throw AssemblyFailure("flow sample size does not match the spatial quadrature");

    const Metric met_n = sample_metric(flow.map_n, nullptr);
    const Metric met_np1 = sample_metric(flow.map_np1 ? flow.map_np1 : flow.map_n, nullptr);
    const Metric met_mid = sample_metric(flow.map_n, flow.map_np1 ? flow.map_np1 : flow.map_n);

    const Mat s_n = mass_matrix(met_n.J);
    const Mat s_np1 = mass_matrix(met_np1.J);
    const Mat s_mid = mass_matrix(met_mid.J);

    Mat gx, gz;
    physical_gradients(met_mid, gx, gz);
    const Vec wj = met_mid.J * sb_->wq;
    const Mat kx = gx.transpose() * wj.asDiagonal() * gx + gz.transpose() * wj.asDiagonal() * gz;
    Vec tx_x(nq), tx_z(nq);
    for (int j = 0; j < nq; ++j) {
        tx_x[j] = wj[j] * flow.v[j][0];
        tx_z[j] = wj[j] * (flow.v[j][1] - met_mid.wmesh[j]);
    }
    const Mat tx = gx.transpose() * tx_x.asDiagonal() * sb_->vals +
                   gz.transpose() * tx_z.asDiagonal() * sb_->vals;

    const Mat g0 = tx - params_.eps * kx;  // shared part of the generator
    const Mat f_n = state.f;
    Mat f_np1 = f_n;

    std::vector<Eigen::PartialPivLU<Mat>> lus;
    Mat rhs0(cb_->n, sb_->n);
    lus.reserve(cb_->n);
    for (int r = 0; r < cb_->n; ++r) {
        lus.emplace_back(Mat(s_np1 / dt - 0.5 * (g0 - kappa_[r] * s_mid)));
        rhs0.row(r) =
            ((s_n / dt + 0.5 * (g0 - kappa_[r] * s_mid)) * f_n.row(r).transpose()).transpose();
    }
    for (int sweep = 0; sweep < drag_picard_; ++sweep) {
        const Mat fmid = (sweep == 0) ? f_n : Mat(0.5 * (f_n + f_np1));
        const Mat d = drag_rhs(fmid, flow.gradv, met_mid);
        for (int r = 0; r < cb_->n; ++r) {
            const Vec sol = lus[r].solve((rhs0.row(r) + d.row(r)).transpose());
            if (!sol.allFinite()) throw SolverDiverged("configuration density step diverged");
            f_np1.row(r) = sol.transpose();
        }
    }
    state.f = f_np1;
    state.t += dt;
}

double FPSolver::mass(const ConfigDensity& s, const DomainMap* m1, const DomainMap* m2) const {
    const Metric met = sample_metric(m1, m2);
    const Vec sj = sb_->vals.transpose() * (met.J * sb_->wq);
    return cb_->mom.dot(s.f * sj);
}

double FPSolver::relative_entropy(const ConfigDensity& s, const DomainMap* m1,
                                  const DomainMap* m2) const {
    const Metric met = sample_metric(m1, m2);
    const Mat vals = cb_->vals * (s.f * sb_->vals.transpose());
    double total = 0.0;
    for (int j = 0; j < sb_->nq; ++j) {
        double acc = 0.0;
        for (int i = 0; i < quad_->n; ++i) acc += wM_[i] * entropy_F(vals(i, j));
        total += acc * met.J[j];
    }
    return total * sb_->wq;
}

double FPSolver::fisher_x(const ConfigDensity& s, const DomainMap* m1, const DomainMap* m2) const {
    const Metric met = sample_metric(m1, m2);
    Mat gxm, gzm;
    physical_gradients(met, gxm, gzm);
    const Mat vals = cb_->vals * (s.f * sb_->vals.transpose());
    const Mat gx = cb_->vals * (s.f * gxm.transpose());
    const Mat gz = cb_->vals * (s.f * gzm.transpose());
    double total = 0.0;
    for (int j = 0; j < sb_->nq; ++j) {
        double acc = 0.0;
        for (int i = 0; i < quad_->n; ++i) {
            const double p = vals(i, j);
            if (p <= tol_neg_) continue;
            acc += wM_[i] * (sqr(gx(i, j)) + sqr(gz(i, j))) / (4.0 * p);
        }
        total += acc * met.J[j];
    }
    return total * sb_->wq;
}

double FPSolver::fisher_q(const ConfigDensity& s, const DomainMap* m1, const DomainMap* m2) const {
    const Metric met = sample_metric(m1, m2);
    const Mat cn = s.f * sb_->vals.transpose();
    const Mat vals = cb_->vals * cn;
    const Mat g1 = cb_->d1 * cn;
    const Mat g2 = cb_->d2 * cn;
    double total = 0.0;
    for (int j = 0; j < sb_->nq; ++j) {
        double acc = 0.0;
        for (int i = 0; i < quad_->n; ++i) {
            const double p = vals(i, j);
            if (p <= tol_neg_) continue;
            acc += wM_[i] * (sqr(g1(i, j)) + sqr(g2(i, j))) / (4.0 * p);
        }
        total += acc * met.J[j];
    }
    return total * sb_->wq;
}

double FPSolver::entropy_production(const ConfigDensity& s, const std::vector<Mat2>& gradv,
                                    const DomainMap* m1, const DomainMap* m2) const {
    const Metric met = sample_metric(m1, m2);
    const Mat cn = s.f * sb_->vals.transpose();
    const Mat vals = cb_->vals * cn;
    const Mat g1 = cb_->d1 * cn;
    const Mat g2 = cb_->d2 * cn;
    double total = 0.0;
    for (int j = 0; j < sb_->nq; ++j) {
        const Mat2& gv = gradv[j];
        if (gv.cwiseAbs().maxCoeff() == 0.0) continue;
        double acc = 0.0;
        for (int i = 0; i < quad_->n; ++i) {
            const double gam = cutoff_gamma_ell(vals(i, j), ell_);
            if (gam == 0.0) continue;
            const double fx = gv(0, 0) * quad_->q1[i] + gv(0, 1) * quad_->q2[i];
            const double fz = gv(1, 0) * quad_->q1[i] + gv(1, 1) * quad_->q2[i];
            acc += wM_[i] * gam * (fx * g1(i, j) + fz * g2(i, j));
        }
        total += acc * met.J[j];
    }
    return params_.kpoly * total * sb_->wq;
}

double FPSolver::min_psi(const ConfigDensity& s) const {
    const Mat vals = cb_->vals * (s.f * sb_->vals.transpose());
    return vals.minCoeff();
}

double FPSolver::max_psi(const ConfigDensity& s) const {
    const Mat vals = cb_->vals * (s.f * sb_->vals.transpose());
    return vals.maxCoeff();
}

Vec FPSolver::marginal_coeffs(const ConfigDensity& s) const {
    return s.f.transpose() * momM_;
}

Vec FPSolver::marginal_at_nodes(const ConfigDensity& s) const {
    return sb_->vals * marginal_coeffs(s);
}

void FPSolver::slices(const ConfigDensity& s, Mat& vals, Mat& dq1, Mat& dq2) const {
    const Mat cn = s.f * sb_->vals.transpose();
    vals = cb_->vals * cn;
    dq1 = cb_->d1 * cn;
    dq2 = cb_->d2 * cn;
}

ConfigDensity FPSolver::project(const std::function<double(double, double, double, double)>& psi0,
                                const DomainMap* map, bool regularize_initial) const {
    const int nq = sb_->nq;
    Mat data(quad_->n, nq);
    for (int j = 0; j < nq; ++j) {
        const double x = sb_->xq[j], z = sb_->zq[j];
        for (int i = 0; i < quad_->n; ++i) {
            double v = psi0(x, z, quad_->q1[i], quad_->q2[i]);
            if (regularize_initial)
                v = cutoff_T(v * max_->M[i] / max_->Mm[i], ell_);
            data(i, j) = v;
        }
    }
    const Metric met = sample_metric(map, nullptr);
    const Mat s_mat = mass_matrix(met.J);
    const Mat b = (cb_->proj.transpose() * data) * (met.J * sb_->wq).asDiagonal() * sb_->vals;
    Eigen::LDLT<Mat> ldlt(s_mat);
    ConfigDensity out;
    out.f = ldlt.solve(b.transpose()).transpose();
    if (!out.f.allFinite()) throw AssemblyFailure("initial projection failed");
    return out;
}

}  // namespace polyfsi
