#include "polyfsi/fluid.hpp"

#include <Eigen/SparseLU>
#include <complex>

#include "polyfsi/errors.hpp"
#include "polyfsi/fft.hpp"

namespace polyfsi {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

namespace {

void append_block(std::vector<Trip>& trips, const SpMat& m, int row0, int col0, double scale = 1.0) {
    for (int k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            trips.emplace_back(row0 + static_cast<int>(it.row()), col0 + static_cast<int>(it.col()),
                               scale * it.value());
}

SpMat from_triplets(int rows, int cols, const std::vector<Trip>& t) {
    SpMat m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

}  // namespace

double line_regularizer_energy(const Vec& eta) {
    const int n = static_cast<int>(eta.size());
    std::vector<std::complex<double>> a(n);
    for (int i = 0; i < n; ++i) a[i] = eta[i];
    fft_radix2(a, false);
    double e = 0.0;
    for (int i = 0; i < n; ++i) {
        const int k = SpectralTorus::freq(i, n);
        const double m = 2.0 * pi * std::abs(k);
        double sym = m * m;
        sym = sym * sym * sym * sym * sym;  // |2 pi k|^10
        e += sym * std::norm(a[i] / static_cast<double>(n));
    }
    return e;
}

Mat line_regularizer_gradient_matrix(int n) {
    Mat g(n, n);
    std::vector<std::complex<double>> a(n);
    for (int s = 0; s < n; ++s) {
        for (int i = 0; i < n; ++i) a[i] = (i == s) ? 1.0 : 0.0;
        fft_radix2(a, false);
        for (int i = 0; i < n; ++i) {
            const int k = SpectralTorus::freq(i, n);
            const double m = 2.0 * pi * std::abs(k);
            double sym = m * m;
            sym = sym * sym * sym * sym * sym;
            a[i] *= 2.0 * sym;
        }
        fft_radix2(a, true);
        for (int i = 0; i < n; ++i) g(i, s) = a[i].real();
    }
    // exact symmetry (the symbol is even)
    g = 0.5 * (g + g.transpose()).eval();
    return g;
}

struct FluidSolver::Metric {
    Vec jc, acc, cic, wmc;  // centers: J, a/c, 1/c, mesh velocity
    Vec jk, ack, cik;       // corners
    Vec cv;                 // c at vertical faces
    Vec ah;                 // a at horizontal faces
    Vec ju1, ju2;           // J at dof positions
};

struct FluidSolver::Operators {
    SpMat dx1c, dz1c, dz1k;         // u1 derivative samplers
    SpMat dx2k, dz2k, dz2c, dx2c;   // u2 derivative samplers
    SpMat p1c, p2c;                 // center interpolations
    SpMat theta;                    // contravariant flux map (faces x dofs)
    SpMat gx1c, gz1k, gz1c;         // physical gradients, u1
    SpMat gx2k, gx2c, gz2c;         // physical gradients, u2
};

FluidSolver::FluidSolver(int nx, int nz, double mu, int n_shell)
    : nx_(nx), nz_(nz), nsh_(n_shell), h1_(1.0 / nx), h2_(1.0 / nz), mu_(mu) {
    nv_ = nx_ * nz_ + nx_ * (nz_ + 1);
    n_int_ = nx_ * nz_ + nx_ * (nz_ - 1);

    // interior embedding: all u1 dofs, u2 rows j = 1..nz-1; in coupled mode the top
    // u2 row is carried by the shell line through the spectral interpolation columns
    std::vector<Trip> te;
    int col = 0;
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j < nz_; ++j) te.emplace_back(u1_id(i, j), col++, 1.0);
    for (int i = 0; i < nx_; ++i)
        for (int j = 1; j < nz_; ++j) te.emplace_back(u2_id(i, j), col++, 1.0);
    if (nsh_ > 0) {
        binterp_ = Mat(nx_, nsh_);
        for (int sidx = 0; sidx < nsh_; ++sidx) {
            Vec e = Vec::Zero(nsh_);
            e[sidx] = 1.0;
            Spectral1D interp(e);
            for (int i = 0; i < nx_; ++i) binterp_(i, sidx) = interp.eval((i + 0.5) * h1_);
        }
        for (int i = 0; i < nx_; ++i)
            for (int sidx = 0; sidx < nsh_; ++sidx)
                if (binterp_(i, sidx) != 0.0) te.emplace_back(u2_id(i, nz_), col + sidx, binterp_(i, sidx));
        col += nsh_;
        lmat_ = line_regularizer_gradient_matrix(nsh_);
    }
    embed_ = from_triplets(nv_, col, te);
}

FluidState FluidSolver::make_state() const {
    FluidState s;
    s.u1 = Mat::Zero(nx_, nz_);
    s.u2 = Mat::Zero(nx_, nz_ + 1);
    s.p = Vec::Zero(cells());
    s.eta = Vec::Zero(std::max(nsh_, 1));
    s.etadot = Vec::Zero(std::max(nsh_, 1));
    return s;
}

FluidSolver::Metric FluidSolver::sample_metric(const DomainMap* m1, const DomainMap* m2) const {
    Metric met;
    const int nc = cells(), nk = nx_ * (nz_ + 1);
    met.jc = Vec::Ones(nc);
    met.acc = Vec::Zero(nc);
    met.cic = Vec::Ones(nc);
    met.wmc = Vec::Zero(nc);
    met.jk = Vec::Ones(nk);
    met.ack = Vec::Zero(nk);
    met.cik = Vec::Ones(nk);
    met.cv = Vec::Ones(nx_ * nz_);
    met.ah = Vec::Zero(nk);
    met.ju1 = Vec::Ones(nx_ * nz_);
    met.ju2 = Vec::Ones(nk);
    if (!m1 && !m2) return met;
    auto sample = [&](double x, double z, double& a, double& c, double& wm) {
        a = c = wm = 0.0;
        int cnt = 0;
        for (const DomainMap* m : {m1, m2}) {
            if (!m) continue;
            a += m->jac_a(x, z);
            c += m->jac_c(x, z);
            wm += m->mesh_velocity(x, z);
            ++cnt;
        }
        a /= cnt;
        c /= cnt;
        wm /= cnt;
    };
    double a, c, wm;
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j < nz_; ++j) {
            sample(xc(i), zc(j), a, c, wm);
            const int id = cid(i, j);
            met.jc[id] = c;
            met.acc[id] = a / c;
            met.cic[id] = 1.0 / c;
            met.wmc[id] = wm;
            sample(i * h1_, zc(j), a, c, wm);
            met.cv[u1_id(i, j) - u1_id(0, 0)] = c;
            met.ju1[i * nz_ + j] = c;
        }
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j <= nz_; ++j) {
            sample(i * h1_, j * h2_, a, c, wm);
            const int id = kid(i, j);
            met.jk[id] = c;
            met.ack[id] = a / c;
            met.cik[id] = 1.0 / c;
            sample((i + 0.5) * h1_, j * h2_, a, c, wm);
            met.ah[id] = a;
            met.ju2[id] = c;
        }
    return met;
}

FluidSolver::Operators FluidSolver::build_operators(const Metric& met) const {
    const int nc = cells(), nk = nx_ * (nz_ + 1);
    std::vector<Trip> tx1c, tz1k, tdz1c, tz2c, tx2k, tz2k, tx2c, tp1, tp2;
    auto im = [&](int i) { return (i % nx_ + nx_) % nx_; };

    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j < nz_; ++j) {
            const int c = cid(i, j);
            tx1c.emplace_back(c, u1_id(im(i + 1), j), 1.0 / h1_);
            tx1c.emplace_back(c, u1_id(i, j), -1.0 / h1_);
            tz2c.emplace_back(c, u2_id(i, j + 1), 1.0 / h2_);
            tz2c.emplace_back(c, u2_id(i, j), -1.0 / h2_);
            tp1.emplace_back(c, u1_id(i, j), 0.5);
            tp1.emplace_back(c, u1_id(im(i + 1), j), 0.5);
            tp2.emplace_back(c, u2_id(i, j), 0.5);
            tp2.emplace_back(c, u2_id(i, j + 1), 0.5);
        }
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j <= nz_; ++j) {
            const int k = kid(i, j);
            if (j == 0) {
                tz1k.emplace_back(k, u1_id(i, 0), 2.0 / h2_);
            } else if (j == nz_) {
                tz1k.emplace_back(k, u1_id(i, nz_ - 1), -2.0 / h2_);
            } else {
                tz1k.emplace_back(k, u1_id(i, j), 1.0 / h2_);
                tz1k.emplace_back(k, u1_id(i, j - 1), -1.0 / h2_);
            }
            tx2k.emplace_back(k, u2_id(i, j), 1.0 / h1_);
            tx2k.emplace_back(k, u2_id(im(i - 1), j), -1.0 / h1_);
            // corner-averaged vertical derivative of u2 (one-sided at the walls)
            if (j == 0) {
                for (int ii : {im(i - 1), i}) {
                    tz2k.emplace_back(k, u2_id(ii, 1), 0.5 / h2_);
                    tz2k.emplace_back(k, u2_id(ii, 0), -0.5 / h2_);
                }
            } else if (j == nz_) {
                for (int ii : {im(i - 1), i}) {
                    tz2k.emplace_back(k, u2_id(ii, nz_), 0.5 / h2_);
                    tz2k.emplace_back(k, u2_id(ii, nz_ - 1), -0.5 / h2_);
                }
            } else {
                for (int ii : {im(i - 1), i})
                    for (int jj : {j - 1, j}) {
                        tz2k.emplace_back(k, u2_id(ii, jj + 1), 0.25 / h2_);
                        tz2k.emplace_back(k, u2_id(ii, jj), -0.25 / h2_);
                    }
            }
        }
    // center averages of the corner samplers
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j < nz_; ++j) {
            const int c = cid(i, j);
            for (int ii : {i, im(i + 1)})
                for (int jj : {j, j + 1}) {
                    // dz1 at corner (ii, jj), quarter weight
                    if (jj == 0) {
                        tdz1c.emplace_back(c, u1_id(ii, 0), 0.5 / h2_);
                    } else if (jj == nz_) {
                        tdz1c.emplace_back(c, u1_id(ii, nz_ - 1), -0.5 / h2_);
                    } else {
                        tdz1c.emplace_back(c, u1_id(ii, jj), 0.25 / h2_);
                        tdz1c.emplace_back(c, u1_id(ii, jj - 1), -0.25 / h2_);
                    }
                    tx2c.emplace_back(c, u2_id(ii, jj), 0.25 / h1_);
                    tx2c.emplace_back(c, u2_id(im(ii - 1), jj), -0.25 / h1_);
                }
        }

    Operators op;
    op.dx1c = from_triplets(nc, nv_, tx1c);
    op.dz1k = from_triplets(nk, nv_, tz1k);
    op.dz1c = from_triplets(nc, nv_, tdz1c);
    op.dz2c = from_triplets(nc, nv_, tz2c);
    op.dx2k = from_triplets(nk, nv_, tx2k);
    op.dz2k = from_triplets(nk, nv_, tz2k);
    op.dx2c = from_triplets(nc, nv_, tx2c);
    op.p1c = from_triplets(nc, nv_, tp1);
    op.p2c = from_triplets(nc, nv_, tp2);
    op.theta = build_theta(met);

    op.gx1c = op.dx1c - SpMat(met.acc.asDiagonal() * op.dz1c);
    op.gz1c = met.cic.asDiagonal() * op.dz1c;
    op.gz1k = met.cik.asDiagonal() * op.dz1k;
    op.gx2k = op.dx2k - SpMat(met.ack.asDiagonal() * op.dz2k);
    op.gx2c = op.dx2c - SpMat(met.acc.asDiagonal() * op.dz2c);
    op.gz2c = met.cic.asDiagonal() * op.dz2c;
    return op;
}

SpMat FluidSolver::build_theta(const Metric& met) const {
    const int nfv = nx_ * nz_, nfh = nx_ * (nz_ + 1);
    std::vector<Trip> t;
    auto im = [&](int i) { return (i % nx_ + nx_) % nx_; };
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j < nz_; ++j)
            t.emplace_back(i * nz_ + j, u1_id(i, j), met.cv[i * nz_ + j]);
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j <= nz_; ++j) {
            const int f = nfv + kid(i, j);
            t.emplace_back(f, u2_id(i, j), 1.0);
            if (j > 0 && j < nz_) {
                const double a = met.ah[kid(i, j)];
                if (a != 0.0)
                    for (int ii : {i, im(i + 1)})
                        for (int jj : {j - 1, j}) t.emplace_back(f, u1_id(ii, jj), -0.25 * a);
            }
            // at the walls the tangential boundary value (zero) makes the metric
            // correction exact, so the boundary flux is the plain normal velocity
        }
    return from_triplets(nfv + nfh, nv_, t);
}

Vec FluidSolver::flatten(const FluidState& s) const {
    Vec u(nv_);
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j < nz_; ++j) u[u1_id(i, j)] = s.u1(i, j);
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j <= nz_; ++j) u[u2_id(i, j)] = s.u2(i, j);
    return u;
}

void FluidSolver::unflatten(const Vec& u, FluidState& s) const {
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j < nz_; ++j) s.u1(i, j) = u[u1_id(i, j)];
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j <= nz_; ++j) s.u2(i, j) = u[u2_id(i, j)];
}

Vec FluidSolver::mass_diag(const Metric& met) const {
    Vec m(nv_);
    const double cellw = h1_ * h2_;
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j < nz_; ++j) m[u1_id(i, j)] = cellw * met.ju1[i * nz_ + j];
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j <= nz_; ++j) {
            const double half = (j == 0 || j == nz_) ? 0.5 : 1.0;
            m[u2_id(i, j)] = cellw * half * met.ju2[kid(i, j)];
        }
    return m;
}

void FluidSolver::step(FluidState& s, const FluidStepData& d, double dt) {
    const DomainMap* mn = d.map_n;
    const DomainMap* mp = d.map_np1 ? d.map_np1 : d.map_n;
    const Metric met_n = sample_metric(mn, nullptr);
    const Metric met_np1 = sample_metric(mp, nullptr);
    const Metric met_mid = sample_metric(mn, mp);
    const Operators op = build_operators(met_mid);
    const bool coupled = nsh_ > 0;
    const int nc = cells();
    const int nvel = static_cast<int>(embed_.cols());

    const Vec mass_n = mass_diag(met_n);
    const Vec mass_np1 = mass_diag(met_np1);
    const Vec dmass = mass_np1 - mass_n;

    // sample weights
    Vec wc(nc), wk(nx_ * (nz_ + 1));
    for (int c = 0; c < nc; ++c) wc[c] = h1_ * h2_ * met_mid.jc[c];
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j <= nz_; ++j)
            wk[kid(i, j)] = h1_ * h2_ * met_mid.jk[kid(i, j)] * ((j == 0 || j == nz_) ? 0.5 : 1.0);

    const SpMat amat = SpMat(op.gx1c.transpose() * SpMat(wc.asDiagonal() * op.gx1c)) +
                       SpMat(op.gz1k.transpose() * SpMat(wk.asDiagonal() * op.gz1k)) +
                       SpMat(op.gx2k.transpose() * SpMat(wk.asDiagonal() * op.gx2k)) +
                       SpMat(op.gz2c.transpose() * SpMat(wc.asDiagonal() * op.gz2c));

    // skew transport by the relative velocity
    SpMat cskew(nv_, nv_);
    bool conv_active = false;
    {
        Vec vx = Vec::Zero(nc), vz = Vec::Zero(nc);
        if (!d.conv_v.empty()) {
            if (static_cast<int>(d.conv_v.size()) != nc)
                throw AssemblyFailure("transport velocity sample size mismatch");
            for (int c = 0; c < nc; ++c) {
                vx[c] = d.conv_v[c][0];
                vz[c] = d.conv_v[c][1];
            }
        }
        vz -= met_mid.wmc;
        if (vx.cwiseAbs().maxCoeff() > 0.0 || vz.cwiseAbs().maxCoeff() > 0.0) {
            conv_active = true;
            const SpMat g1 = vx.asDiagonal() * op.gx1c + vz.asDiagonal() * op.gz1c;
            const SpMat g2 = vx.asDiagonal() * op.gx2c + vz.asDiagonal() * op.gz2c;
            const SpMat nmat = SpMat(op.p1c.transpose() * SpMat(wc.asDiagonal() * g1)) +
                               SpMat(op.p2c.transpose() * SpMat(wc.asDiagonal() * g2));
            cskew = 0.5 * (nmat - SpMat(nmat.transpose()));
        }
    }

    // loads
    Vec lstress = Vec::Zero(nv_);
    Vec lbody = Vec::Zero(nv_);
    Vec tiso = Vec::Zero(nc);
    if (!d.stress.empty()) {
        if (static_cast<int>(d.stress.size()) != nc)
            throw AssemblyFailure("stress sample size mismatch");
        Vec t00(nc), t01(nc), t10(nc), t11(nc);
        for (int c = 0; c < nc; ++c) {
            const Mat2& T = d.stress[c];
            tiso[c] = 0.5 * (T(0, 0) + T(1, 1));
            t00[c] = T(0, 0) - tiso[c];
            t11[c] = T(1, 1) - tiso[c];
            t01[c] = T(0, 1);
            t10[c] = T(1, 0);
        }
        // deviatoric part against the viscous samplers (corner values by averaging)
        auto to_corners = [&](const Vec& f) {
            Vec g(nx_ * (nz_ + 1));
            auto iml = [&](int i) { return (i % nx_ + nx_) % nx_; };
            for (int i = 0; i < nx_; ++i)
                for (int j = 0; j <= nz_; ++j) {
                    double acc = 0.0;
                    int cnt = 0;
                    for (int ii : {iml(i - 1), i})
                        for (int jj : {j - 1, j}) {
                            if (jj < 0 || jj >= nz_) continue;
                            acc += f[cid(ii, jj)];
                            ++cnt;
                        }
                    g[kid(i, j)] = acc / cnt;
                }
            return g;
        };
        const Vec t01k = to_corners(t01), t10k = to_corners(t10);
        lstress -= op.gx1c.transpose() * Vec(wc.cwiseProduct(t00));
        lstress -= op.gz1k.transpose() * Vec(wk.cwiseProduct(t01k));
        lstress -= op.gx2k.transpose() * Vec(wk.cwiseProduct(t10k));
        lstress -= op.gz2c.transpose() * Vec(wc.cwiseProduct(t11));
        // isotropic part through the flux-divergence pairing (exactly invisible to
        // discretely divergence-free fields)
        lstress -= op.theta.transpose() * (dhat_transpose_times(tiso));
    }
    const Vec mass_mid = mass_diag(met_mid);
    Vec fdof = Vec::Zero(nv_);
    if (!d.fbody.empty()) {
        if (static_cast<int>(d.fbody.size()) != nc)
            throw AssemblyFailure("body force sample size mismatch");
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < nz_; ++j)
                fdof[u1_id(i, j)] =
                    0.5 * (d.fbody[cid((i - 1 + nx_) % nx_, j)][0] + d.fbody[cid(i, j)][0]);
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j <= nz_; ++j) {
                if (j == 0)
                    fdof[u2_id(i, j)] = d.fbody[cid(i, 0)][1];
                else if (j == nz_)
                    fdof[u2_id(i, j)] = d.fbody[cid(i, nz_ - 1)][1];
                else
                    fdof[u2_id(i, j)] = 0.5 * (d.fbody[cid(i, j - 1)][1] + d.fbody[cid(i, j)][1]);
            }
        lbody = mass_mid.cwiseProduct(fdof);
    }
    const Vec load = lstress + lbody;

    const Vec ufull_n = flatten(s);
    // momentum operator pieces: Mdot/dt + [cskew - dmass/(2dt)] u_mid + mu A u_mid
    SpMat csum = cskew;
    {
        std::vector<Trip> t;
        for (int k = 0; k < nv_; ++k)
            if (dmass[k] != 0.0) t.emplace_back(k, k, -0.5 * dmass[k] / dt);
        csum += from_triplets(nv_, nv_, t);
    }
    SpMat opl(nv_, nv_);
    {
        std::vector<Trip> t;
        for (int k = 0; k < nv_; ++k) t.emplace_back(k, k, mass_np1[k] / dt);
        opl = from_triplets(nv_, nv_, t) + SpMat(0.5 * csum) + SpMat(0.5 * mu_ * amat);
    }
    Vec bu = load;
    {
        Vec tmp = ufull_n.cwiseProduct(mass_n) / dt;
        tmp -= 0.5 * (csum * ufull_n);
        tmp -= 0.5 * mu_ * (amat * ufull_n);
        bu += tmp;
    }

    // divergence operators
    const SpMat divmid = dhat() * op.theta;        // cells x dofs (pressure pairing)
    const SpMat theta_np1 = build_theta(met_np1);
    const SpMat divnew = dhat() * theta_np1;

    const int ncols = nvel + nc + (coupled ? 0 : 1);
    std::vector<Trip> trips;
    const SpMat et = embed_.transpose();
    append_block(trips, SpMat(et * SpMat(opl * embed_)), 0, 0);
    append_block(trips, SpMat(et * SpMat(divmid.transpose())), 0, nvel, -1.0);
    append_block(trips, SpMat(divnew * embed_), nvel, 0);
    Vec rhs = Vec::Zero(ncols);
    rhs.head(nvel) = et * bu;

    const double hsh = coupled ? 1.0 / nsh_ : 0.0;
    if (coupled) {
        const Vec stab = d.shell_stab.size() ? d.shell_stab : Vec(Vec::Zero(nsh_));
        const Vec kpr = d.kprime.size() ? d.kprime : Vec(Vec::Zero(nsh_));
        const Vec gsh = d.gshell.size() ? d.gshell : Vec(Vec::Zero(nsh_));
        std::vector<Trip> t;
        for (int i = 0; i < nsh_; ++i)
            t.emplace_back(n_int_ + i, n_int_ + i, hsh * (1.0 / dt + 0.5 * stab[i]));
        for (int i = 0; i < nsh_; ++i)
            for (int j = 0; j < nsh_; ++j) {
                const double v = hsh * (dt / 4.0) * d.varrho * lmat_(i, j);
                if (v != 0.0) t.emplace_back(n_int_ + i, n_int_ + j, v);
            }
        for (const auto& tr : t) trips.push_back(tr);
        const Vec lterm = d.varrho * (lmat_ * Vec(s.eta + (dt / 4.0) * s.etadot));
        for (int i = 0; i < nsh_; ++i)
            rhs[n_int_ + i] += hsh * (s.etadot[i] / dt - 0.5 * stab[i] * s.etadot[i] - lterm[i] -
                                      kpr[i] + gsh[i]);
    } else {
        // zero-mean pressure gauge
        for (int c = 0; c < nc; ++c) {
            const double vol = h1_ * h2_ * met_np1.jc[c];
            trips.emplace_back(nvel + c, nvel + nc, vol);
            trips.emplace_back(nvel + nc, nvel + c, vol);
        }
    }

    SpMat sys = from_triplets(ncols, ncols, trips);
    sys.makeCompressed();
    Eigen::SparseLU<SpMat> lu(sys);
    if (lu.info() != Eigen::Success) throw PoissonSolveFailure("saddle factorization failed");
    const Vec x = lu.solve(rhs);
    if (!x.allFinite()) throw SolverDiverged("fluid step produced non-finite values");

    const Vec xv = x.head(nvel);
    const Vec p = x.segment(nvel, nc);
    const Vec ufull_np1 = embed_ * xv;
    const Vec umid = 0.5 * (ufull_n + ufull_np1);

    // bookkeeping before overwriting the state
    report_ = FluidStepReport{};
    report_.kinetic_new = 0.5 * ufull_np1.cwiseProduct(mass_np1).dot(ufull_np1);
    report_.viscous = mu_ * umid.dot(amat * umid);
    report_.skew_defect = conv_active ? umid.dot(cskew * umid) : 0.0;
    report_.pressure_defect = p.dot(divmid * umid);
    const Vec du = ufull_np1 - ufull_n;
    report_.mass_defect = du.cwiseProduct(dmass).dot(du) / (8.0 * dt);
    report_.stress_power = lstress.dot(umid);
    report_.body_power = lbody.dot(umid);
    report_.body_l2sq = fdof.cwiseProduct(mass_mid).dot(fdof);
    report_.umid_l2sq = umid.cwiseProduct(mass_mid).dot(umid);

    unflatten(ufull_np1, s);
    s.p = p;
    if (coupled) {
        const Vec etadot_np1 = xv.tail(nsh_);
        const Vec etadot_mid = 0.5 * (s.etadot + etadot_np1);
        const Vec eta_np1 = s.eta + dt * etadot_mid;
        const Vec eta_mid = 0.5 * (s.eta + eta_np1);
        report_.shell_kinetic_new = 0.5 * etadot_np1.squaredNorm() / nsh_;
        report_.shell_reg_power = d.varrho * etadot_mid.dot(lmat_ * eta_mid) / nsh_;
        if (d.kprime.size()) report_.shell_elastic_power = etadot_mid.dot(d.kprime) / nsh_;
        if (d.shell_stab.size())
            report_.shell_stab_power = etadot_mid.cwiseProduct(d.shell_stab).dot(etadot_mid) / nsh_;
        if (d.gshell.size()) {
            report_.shell_force_power = etadot_mid.dot(d.gshell) / nsh_;
            report_.shell_force_l2sq = d.gshell.squaredNorm() / nsh_;
        }
        report_.etadot_mid_l2sq = etadot_mid.squaredNorm() / nsh_;
        s.eta = eta_np1;
        s.etadot = etadot_np1;
    }
    s.t += dt;
}

Vec FluidSolver::divergence(const FluidState& s, const DomainMap* map) const {
    const Metric met = sample_metric(map, nullptr);
    const SpMat theta = build_theta(met);
    return dhat() * (theta * flatten(s));
}

double FluidSolver::trace_gap(const FluidState& s) const {
    double gap = 0.0;
    if (nsh_ > 0) {
        const Vec top = binterp_ * s.etadot;
        for (int i = 0; i < nx_; ++i) gap = std::max(gap, std::abs(s.u2(i, nz_) - top[i]));
    } else {
        for (int i = 0; i < nx_; ++i) gap = std::max(gap, std::abs(s.u2(i, nz_)));
    }
    return gap;
}

double FluidSolver::kinetic_energy(const FluidState& s, const DomainMap* map) const {
    const Metric met = sample_metric(map, nullptr);
    const Vec m = mass_diag(met);
    const Vec u = flatten(s);
    return 0.5 * u.cwiseProduct(m).dot(u);
}

void FluidSolver::project_divergence_free(Mat& u1, Mat& u2) const {
    const int nc = cells();
    // both walls fixed, static metric
    std::vector<Trip> te;
    int col = 0;
    for (int i = 0; i < nx_; ++i)
        for (int j = 0; j < nz_; ++j) te.emplace_back(u1_id(i, j), col++, 1.0);
    for (int i = 0; i < nx_; ++i)
        for (int j = 1; j < nz_; ++j) te.emplace_back(u2_id(i, j), col++, 1.0);
    const SpMat eint = from_triplets(nv_, col, te);

    const Metric met = sample_metric(nullptr, nullptr);
    const SpMat theta = build_theta(met);
    const SpMat dint = dhat() * SpMat(theta * eint);

    FluidState s = make_state();
    s.u1 = u1;
    s.u2 = u2;
    const Vec u = flatten(s);
    const Vec b = dhat() * (theta * u);
    const double netflux = b.sum();
    if (std::abs(netflux) > 1e-9 * std::max(1.0, u.cwiseAbs().maxCoeff()))
        throw AssemblyFailure("projection data has incompatible boundary fluxes");

    const double minv = 1.0 / (h1_ * h2_);
    std::vector<Trip> trips;
    append_block(trips, SpMat(dint * SpMat(minv * dint.transpose())), 0, 0);
    for (int c = 0; c < nc; ++c) {
        trips.emplace_back(c, nc, 1.0);
        trips.emplace_back(nc, c, 1.0);
    }
    SpMat sys = from_triplets(nc + 1, nc + 1, trips);
    sys.makeCompressed();
    Eigen::SparseLU<SpMat> lu(sys);
    if (lu.info() != Eigen::Success) throw PoissonSolveFailure("projection factorization failed");
    Vec rhs = Vec::Zero(nc + 1);
    rhs.head(nc) = b;
    const Vec phi = lu.solve(rhs);
    if (!phi.allFinite()) throw PoissonSolveFailure("projection solve produced non-finite values");
    const Vec corr = minv * (dint.transpose() * phi.head(nc));
    const Vec unew = u - eint * corr;
    unflatten(unew, s);
    u1 = s.u1;
    u2 = s.u2;
}

Vec FluidSolver::shell_pressure_force(const Vec& p, const DomainMap* map) const {
    if (nsh_ == 0) throw ConfigError("shell force requires the coupled fluid mode");
    const Metric met = sample_metric(map, nullptr);
    const SpMat theta = build_theta(met);
    const Vec full = theta.transpose() * (dhat().transpose() * p);
    Vec f(nsh_);
    const Vec reduced = embed_.transpose() * full;
    for (int i = 0; i < nsh_; ++i) f[i] = reduced[n_int_ + i] * nsh_;
    return f;
}

const SpMat& FluidSolver::dhat() const {
    if (dhat_.nonZeros() == 0) {
        std::vector<Trip> t;
        auto im = [&](int i) { return (i % nx_ + nx_) % nx_; };
        const int nfv = nx_ * nz_;
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < nz_; ++j) {
                const int c = cid(i, j);
                t.emplace_back(c, i * nz_ + j, -h2_);
                t.emplace_back(c, im(i + 1) * nz_ + j, h2_);
                t.emplace_back(c, nfv + kid(i, j), -h1_);
                t.emplace_back(c, nfv + kid(i, j + 1), h1_);
            }
        dhat_ = from_triplets(cells(), nfv + nx_ * (nz_ + 1), t);
    }
    return dhat_;
}

Vec FluidSolver::dhat_transpose_times(const Vec& cellvals) const {
    return dhat().transpose() * cellvals;
}

}  // namespace polyfsi
