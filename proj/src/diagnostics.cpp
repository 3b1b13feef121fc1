#include "polyfsi/diagnostics.hpp"

#include <cmath>
#include <complex>

#include "polyfsi/errors.hpp"

namespace polyfsi {

namespace {

Mat embed_line(const Vec& line, int n1, int n2) {
    if (static_cast<int>(line.size()) != n1)
        throw ConfigError("shell line length does not match the shell grid");
    Mat m(n1, n2);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) m(i, j) = line[i];
    return m;
}

double jac_or_one(const DomainMap* map, double x, double z) {
    return map ? map->jac_c(x, z) : 1.0;
}

}  // namespace

bool EnergyBreakdown::finite() const {
    for (double v : {kinetic_fluid, shell_kinetic, koiter, regularizer, xi_sup_sq, rel_entropy,
                     diss_viscous, diss_xi, fisher_x, fisher_q, work_f, work_g})
        if (!std::isfinite(v)) return false;
    return true;
}

double sup_abs_nodes(const Vec& values) {
    return values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
}

EnergyBreakdown assemble_breakdown(const FluidSolver& fluid, const FluidState& fs,
                                   const DomainMap* map, const KoiterShell* koiter, double varrho,
                                   const FPSolver* fp, const ConfigDensity* psi, double kpoly,
                                   const Vec* xi) {
    EnergyBreakdown b;
    b.kinetic_fluid = fluid.kinetic_energy(fs, map);
    if (fluid.n_shell() > 0) {
        b.shell_kinetic = 0.5 * fs.etadot.squaredNorm() / fluid.n_shell();
        b.regularizer = varrho * line_regularizer_energy(fs.eta);
        if (koiter)
            b.koiter = koiter->energy(embed_line(fs.eta, koiter->ref().n1, koiter->ref().n2));
    }
    if (xi) b.xi_sup_sq = sup_abs_nodes(*xi) * sup_abs_nodes(*xi);
    if (fp && psi) b.rel_entropy = kpoly * fp->relative_entropy(*psi, map);
    return b;
}

EnergyBreakdown assemble_breakdown_slow(const FluidSolver& fluid, const FluidState& fs,
                                        const DomainMap* map, const KoiterShell* koiter,
                                        double varrho, const FPSolver* fp,
                                        const ConfigDensity* psi, double kpoly, const Vec* xi) {
    EnergyBreakdown b;
    const int nx = fluid.nx(), nz = fluid.nz();
    const double h1 = 1.0 / nx, h2 = 1.0 / nz;
    double kin = 0.0;
    for (int j = 0; j < nz; ++j)
        for (int i = 0; i < nx; ++i)
            kin += 0.5 * h1 * h2 * jac_or_one(map, i * h1, (j + 0.5) * h2) * fs.u1(i, j) *
                   fs.u1(i, j);
    for (int j = 0; j <= nz; ++j)
        for (int i = 0; i < nx; ++i) {
            const double half = (j == 0 || j == nz) ? 0.5 : 1.0;
            kin += 0.5 * h1 * h2 * half * jac_or_one(map, (i + 0.5) * h1, j * h2) * fs.u2(i, j) *
                   fs.u2(i, j);
        }
    b.kinetic_fluid = kin;

    const int nsh = fluid.n_shell();
    if (nsh > 0) {
        double sk = 0.0;
        for (int i = 0; i < nsh; ++i) sk += fs.etadot[i] * fs.etadot[i];
        b.shell_kinetic = 0.5 * sk / nsh;

        // naive discrete Fourier transform of the line regularizer
        double reg = 0.0;
        for (int idx = 0; idx < nsh; ++idx) {
            const int k = SpectralTorus::freq(idx, nsh);
            std::complex<double> c(0.0, 0.0);
            for (int i = 0; i < nsh; ++i)
                c += fs.eta[i] *
                     std::exp(std::complex<double>(0.0, -2.0 * pi * k * i / double(nsh)));
            c /= double(nsh);
            const double m = 2.0 * pi * std::abs(k);
            reg += std::pow(m, 10) * std::norm(c);
        }
        b.regularizer = varrho * reg;

        if (koiter) {
            const auto& ref = koiter->ref();
            const Mat em = embed_line(fs.eta, ref.n1, ref.n2);
            const SymField G = koiter->metric_change(em);
            const SymField R = koiter->curvature_change(em);
            const double e0 = koiter->eps0();
            double acc = 0.0;
            for (int i = 0; i < ref.n1; ++i)
                for (int j = 0; j < ref.n2; ++j) {
                    const int node = ref.idx(i, j);
                    Mat2 Gm, Rm;
                    Gm << G.c11(i, j), G.c12(i, j), G.c12(i, j), G.c22(i, j);
                    Rm << R.c11(i, j), R.c12(i, j), R.c12(i, j), R.c22(i, j);
                    double w = 0.5 * e0 * koiter->contract(node, Gm, Gm) +
                               (e0 * e0 * e0 / 6.0) * koiter->contract(node, Rm, Rm);
                    if (koiter->weighted_measure()) {
                        const auto& T = ref.tables;
                        const double e = em(i, j);
                        w *= 1.0 + (e * T.gC1[node] + e * e * T.gC2[node]) / T.s[node];
                    }
                    acc += w;
                }
            b.koiter = acc / (double(ref.n1) * ref.n2);
        }
    }

    if (xi) {
        double sup = 0.0;
        for (int i = 0; i < xi->size(); ++i) sup = std::max(sup, std::abs((*xi)[i]));
        b.xi_sup_sq = sup * sup;
    }

    if (fp && psi) {
        const auto& sb = fp->space();
        const auto& cb = fp->config();
        const auto& quad = fp->quad();
        const auto& mx = fp->maxwellian();
        double acc = 0.0;
        for (int j = 0; j < sb.nq; ++j) {
            const double jz = jac_or_one(map, sb.xq[j], sb.zq[j]);
            double inner = 0.0;
            for (int i = 0; i < quad.n; ++i) {
                double p = 0.0;
                for (int r = 0; r < cb.n; ++r) {
                    double sval = 0.0;
                    for (int l = 0; l < sb.n; ++l) sval += psi->f(r, l) * sb.vals(j, l);
                    p += cb.vals(i, r) * sval;
                }
                inner += quad.w[i] * mx.M[i] * entropy_F(p);
            }
            acc += inner * jz * sb.wq;
        }
        b.rel_entropy = kpoly * acc;
    }
    return b;
}

ReynoldsParts reynolds_parts(const std::function<double(double, double, double)>& v,
                             const std::function<double(double, double, double)>& vt,
                             const DomainMap* map_a, const DomainMap* map_b, double ta, double tb,
                             int nqx, int nqz) {
    const double h1 = 1.0 / nqx, h2 = 1.0 / nqz;
    const double dt = tb - ta;
    const double tmid = 0.5 * (ta + tb);

    auto phys_z = [](const DomainMap* m, double x, double z) {
        return m ? m->forward(x, z)[1] : z;
    };
    auto integral = [&](const DomainMap* m, double t) {
        double acc = 0.0;
        for (int i = 0; i < nqx; ++i)
            for (int j = 0; j < nqz; ++j) {
                const double x = (i + 0.5) * h1, z = (j + 0.5) * h2;
                acc += v(x, phys_z(m, x, z), t) * jac_or_one(m, x, z) * h1 * h2;
            }
        return acc;
    };

    ReynoldsParts parts;
    parts.rate = (integral(map_b, tb) - integral(map_a, ta)) / dt;

    double bulk = 0.0, bdry = 0.0;
    for (int i = 0; i < nqx; ++i) {
        for (int j = 0; j < nqz; ++j) {
            const double x = (i + 0.5) * h1, z = (j + 0.5) * h2;
            const double zm = 0.5 * (phys_z(map_a, x, z) + phys_z(map_b, x, z));
            const double jm = 0.5 * (jac_or_one(map_a, x, z) + jac_or_one(map_b, x, z));
            bulk += vt(x, zm, tmid) * jm * h1 * h2;
        }
        const double x = (i + 0.5) * h1;
        const double wtop = 0.5 * ((map_a ? map_a->mesh_velocity(x, 1.0) : 0.0) +
                                   (map_b ? map_b->mesh_velocity(x, 1.0) : 0.0));
        const double ztop = 0.5 * (phys_z(map_a, x, 1.0) + phys_z(map_b, x, 1.0));
        bdry += wtop * v(x, ztop, tmid) * h1;
    }
    parts.bulk = bulk;
    parts.boundary = bdry;
    parts.residual = parts.rate - parts.bulk - parts.boundary;
    return parts;
}

double reynolds_residual(const std::function<double(double, double, double)>& v,
                         const std::function<double(double, double, double)>& vt,
                         const DomainMap* map_a, const DomainMap* map_b, double ta, double tb,
                         int nqx, int nqz) {
    return std::abs(reynolds_parts(v, vt, map_a, map_b, ta, tb, nqx, nqz).residual);
}

}  // namespace polyfsi
