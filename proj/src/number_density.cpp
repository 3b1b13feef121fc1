#include "polyfsi/number_density.hpp"

#include <Eigen/SparseLU>

#include "polyfsi/errors.hpp"

namespace polyfsi {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;

XiSolver::XiSolver(int nx, int nz, double eps)
    : nx_(nx), nz_(nz), h1_(1.0 / nx), h2_(1.0 / nz), eps_(eps) {}

Vec XiSolver::jacobian_centers(const DomainMap* map) const {
    Vec J = Vec::Ones(cells());
    if (!map) return J;
    for (int ix = 0; ix < nx_; ++ix)
        for (int iz = 0; iz < nz_; ++iz) J[cell(ix, iz)] = map->jac_c(xc(ix), zc(iz));
    return J;
}

SpMat XiSolver::assemble_diffusion(const DomainMap* map) const {
    // int A grad xi . grad chi with A = J F^{-1} F^{-T} = [[c, -a], [-a, (a^2+1)/c]]
    std::vector<Trip> t;
    // x-direction fluxes at vertical faces (periodic)
    for (int ix = 0; ix < nx_; ++ix) {
        const int il = (ix + nx_ - 1) % nx_;
        for (int iz = 0; iz < nz_; ++iz) {
            const double x = ix * h1_, z = zc(iz);
            const double A11 = map ? map->jac_c(x, z) : 1.0;
            const double coef = A11 * h2_ / h1_;
            const int cl = cell(il, iz), cr = cell(ix, iz);
            t.emplace_back(cl, cl, coef);
            t.emplace_back(cr, cr, coef);
            t.emplace_back(cl, cr, -coef);
            t.emplace_back(cr, cl, -coef);
        }
    }
    // z-direction fluxes at interior horizontal faces
    for (int ix = 0; ix < nx_; ++ix) {
        for (int iz = 1; iz < nz_; ++iz) {
            const double x = xc(ix), z = iz * h2_;
            double A22 = 1.0;
            if (map) {
                const double a = map->jac_a(x, z), c = map->jac_c(x, z);
                A22 = (a * a + 1.0) / c;
            }
            const double coef = A22 * h1_ / h2_;
            const int cd = cell(ix, iz - 1), cu = cell(ix, iz);
            t.emplace_back(cd, cd, coef);
            t.emplace_back(cu, cu, coef);
            t.emplace_back(cd, cu, -coef);
            t.emplace_back(cu, cd, -coef);
        }
    }
    // mixed terms at corners, symmetric by construction; skipped on the static metric
    if (map) {
        for (int ix = 0; ix < nx_; ++ix) {
            const int il = (ix + nx_ - 1) % nx_;
            for (int iz = 1; iz < nz_; ++iz) {
                const double x = ix * h1_, z = iz * h2_;
                const double A12 = -map->jac_a(x, z);
                if (A12 == 0.0) continue;
                const double w = h1_ * h2_;
                // corner-sampled gradients: gx over (il,iz-1..iz) -> (ix,iz-1..iz)
                const int c00 = cell(il, iz - 1), c01 = cell(il, iz);
                const int c10 = cell(ix, iz - 1), c11 = cell(ix, iz);
                // gx = (xi_right - xi_left)/h1 averaged over the two rows
                // gz = (xi_up - xi_down)/h2 averaged over the two columns
                const double gxc[4] = {-0.5 / h1_, -0.5 / h1_, 0.5 / h1_, 0.5 / h1_};
                const double gzc[4] = {-0.5 / h2_, 0.5 / h2_, -0.5 / h2_, 0.5 / h2_};
                const int id[4] = {c00, c01, c10, c11};
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b)
                        t.emplace_back(id[a], id[b], w * A12 * (gxc[a] * gzc[b] + gzc[a] * gxc[b]));
            }
        }
    }
    SpMat K(cells(), cells());
    K.setFromTriplets(t.begin(), t.end());
    return K;
}

SpMat XiSolver::assemble_advection(const std::vector<Vec2>& v_centers,
                                   const DomainMap* map) const {
    // rows: h1 h2 J (v - w_mesh) . grad_x xi sampled at centers, central differences
    std::vector<Trip> t;
    for (int ix = 0; ix < nx_; ++ix) {
        const int ixp = (ix + 1) % nx_, ixm = (ix + nx_ - 1) % nx_;
        for (int iz = 0; iz < nz_; ++iz) {
            const int c = cell(ix, iz);
            const double x = xc(ix), z = zc(iz);
            double a = 0.0, cj = 1.0, wmesh = 0.0;
            if (map) {
                a = map->jac_a(x, z);
                cj = map->jac_c(x, z);
                wmesh = map->mesh_velocity(x, z);
            }
            const double vx = v_centers[c][0];
            const double vz = v_centers[c][1] - wmesh;
            if (vx == 0.0 && vz == 0.0) continue;
            const double wr = h1_ * h2_ * cj;
            // reference-direction sample coefficients
            // physical gradient: gx = dxi/dxhat - (a/c) dxi/dzeta, gz = (1/c) dxi/dzeta
            const double cx = vx;                         // multiplies dxi/dxhat
            const double cz = (-vx * a + vz) / cj;        // multiplies dxi/dzeta
            t.emplace_back(c, cell(ixp, iz), wr * cx / (2.0 * h1_));
            t.emplace_back(c, cell(ixm, iz), -wr * cx / (2.0 * h1_));
            if (iz == 0) {
                t.emplace_back(c, cell(ix, 1), wr * cz / (2.0 * h2_));
                t.emplace_back(c, c, -wr * cz / (2.0 * h2_));
            } else if (iz == nz_ - 1) {
                t.emplace_back(c, c, wr * cz / (2.0 * h2_));
                t.emplace_back(c, cell(ix, nz_ - 2), -wr * cz / (2.0 * h2_));
            } else {
                t.emplace_back(c, cell(ix, iz + 1), wr * cz / (2.0 * h2_));
                t.emplace_back(c, cell(ix, iz - 1), -wr * cz / (2.0 * h2_));
            }
        }
    }
    SpMat N(cells(), cells());
    N.setFromTriplets(t.begin(), t.end());
    return N;
}

void XiSolver::step(Vec& xi, const std::vector<Vec2>& v_centers, const DomainMap* map_n,
                    const DomainMap* map_np1, double dt) {
    const Vec Jn = jacobian_centers(map_n);
    const Vec Jnp = jacobian_centers(map_np1);
    const double cellw = h1_ * h2_;

    // midpoint metric: reuse the end-time map for operator coefficients when moving;
    // Sdot is the exact difference quotient of the mass matrix
    const DomainMap* map_mid = map_np1 ? map_np1 : map_n;
    const SpMat K = assemble_diffusion(map_mid);
    const SpMat N = assemble_advection(v_centers, map_mid);

    SpMat lhs(cells(), cells()), rhs(cells(), cells());
    std::vector<Trip> tl, tr;
    for (int c = 0; c < cells(); ++c) {
        const double sdot = cellw * (Jnp[c] - Jn[c]) / dt;
        tl.emplace_back(c, c, cellw * Jnp[c] / dt - 0.5 * sdot);
        tr.emplace_back(c, c, cellw * Jn[c] / dt + 0.5 * sdot);
    }
    lhs.setFromTriplets(tl.begin(), tl.end());
    rhs.setFromTriplets(tr.begin(), tr.end());
    lhs += 0.5 * (N + eps_ * K);
    rhs -= 0.5 * (N + eps_ * K);

    Eigen::SparseLU<SpMat> lu(lhs);
    if (lu.info() != Eigen::Success) throw PoissonSolveFailure("number density step factorization failed");
    const Vec b = rhs * xi;
    const Vec xin = lu.solve(b);
    if (!xin.allFinite()) throw SolverDiverged("number density step produced non-finite values");
    const Vec mid = 0.5 * (xi + xin);
    last_dissipation_ = eps_ * mid.dot(K * mid);
    xi = xin;
}

double XiSolver::dissipation_static(const Vec& xi) const {
    const SpMat K = assemble_diffusion(nullptr);
    return xi.dot(K * xi);
}

double XiSolver::mass(const Vec& xi, const DomainMap* map) const {
    const Vec J = jacobian_centers(map);
    return h1_ * h2_ * J.dot(xi);
}

RenormalizedReport renormalized_check(const XiSolver& solver, const std::vector<Vec>& history,
                                      double dt, ThetaKind kind, const std::vector<Vec>& divv) {
    auto theta = [&](double s) {
        switch (kind) {
            case ThetaKind::quadratic: return s * s;
            case ThetaKind::linear: return s;
            case ThetaKind::power8: {
                double p = s * s;
                p *= p;
                return p * p;
            }
        }
        return 0.0;
    };
    auto theta_p = [&](double s) {
        switch (kind) {
            case ThetaKind::quadratic: return 2.0 * s;
            case ThetaKind::linear: return 1.0;
            case ThetaKind::power8: {
                double p = s * s;
                return 8.0 * p * p * p * s;
            }
        }
        return 0.0;
    };
    RenormalizedReport rep;
    const double cellw = 1.0 / (solver.nx() * solver.nz());
    double prev = 0.0;
    for (std::size_t n = 0; n < history.size(); ++n) {
        double val = 0.0;
        for (int c = 0; c < solver.cells(); ++c) val += theta(history[n][c]);
        val *= cellw;
        if (n > 0) {
            double residual = (val - prev) / dt;
            const Vec mid = 0.5 * (history[n] + history[n - 1]);
            if (kind == ThetaKind::quadratic) {
                // theta'' = 2: dissipation is 2 eps |grad Xi_mid|^2, which the
                // midpoint scheme balances exactly against the functional decay
                residual += 2.0 * solver.eps() * solver.dissipation_static(mid);
            }
            if (!divv.empty()) {
                double src = 0.0;
                for (int c = 0; c < solver.cells(); ++c) {
                    const double s = mid[c];
                    src += (s * theta_p(s) - theta(s)) * divv[n - 1][c];
                }
                residual -= src * cellw;
            }
            rep.max_residual = std::max(rep.max_residual, std::abs(residual));
            if (val > prev + 1e-12 * std::max(1.0, std::abs(prev)) && divv.empty())
                rep.monotone = false;
        }
        prev = val;
    }
    if (!history.empty()) {
        double first = 0.0, last = 0.0;
        for (int c = 0; c < solver.cells(); ++c) {
            first += theta(history.front()[c]);
            last += theta(history.back()[c]);
        }
        rep.drift = (last - first) * cellw;
    }
    return rep;
}

}  // namespace polyfsi
