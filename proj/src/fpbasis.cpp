#include "polyfsi/fpbasis.hpp"

#include <Eigen/Eigenvalues>

#include "polyfsi/errors.hpp"

namespace polyfsi {

namespace {

/// Shifted Legendre polynomial P_j on [0,1] and derivative, by recurrence.
void shifted_legendre(int j, double u, double& p, double& dp) {
    const double x = 2.0 * u - 1.0;
    double p0 = 1.0, d0 = 0.0, p1 = x, d1 = 1.0;
    if (j == 0) {
        p = 1.0;
        dp = 0.0;
        return;
    }
    for (int m = 1; m < j; ++m) {
        const double p2 = ((2.0 * m + 1.0) * x * p1 - m * p0) / (m + 1.0);
        const double d2 = ((2.0 * m + 1.0) * (p1 + x * d1) - m * d0) / (m + 1.0);
        p0 = p1;
        d0 = d1;
        p1 = p2;
        d1 = d2;
    }
    p = p1;
    dp = 2.0 * d1;  // chain rule for u -> 2u-1
}

/// Radial trial function r^k P_j(u(r)) with u = (r/R)^2, and its r-derivative.
void radial_fn(int k, int j, double r, double R, double& f, double& df) {
    const double u = (r / R) * (r / R);
    double p, dp;
    shifted_legendre(j, u, p, dp);
    double rk = 1.0, drk = 0.0;
    if (k > 0) {
        rk = std::pow(r, k);
        drk = k * std::pow(r, k - 1);
    }
    f = rk * p;
    df = drk * p + rk * dp * (2.0 * r / (R * R));
}

}  // namespace

ConfigBasis ConfigBasis::build(const SpringLaw& law, const QuadB& quad, const MaxwellianTable& max,
                               int kmax, int nrad) {
    ConfigBasis cb;
    const double R = law.radius();
    const int nr = quad.nr;

    // weighted radial moments at the radial nodes
    Vec mmr(nr);
    for (int i = 0; i < nr; ++i)
        mmr[i] = std::max(law.weight_unnorm(quad.ru[i]) / max.Z, 0.0) + 1.0 / max.m_floor;

    struct Branch {
        int k;       // angular wavenumber
        bool sine;   // sine or cosine branch
        Mat V;       // radial coefficients, columns = eigenfunctions
        Vec lam;
    };
    std::vector<Branch> branches;

    for (int k = 0; k <= kmax; ++k) {
        // radial mass and stiffness in the trial space r^k P_j(u), j < nrad
        Mat A(nrad, nrad), B(nrad, nrad);
        A.setZero();
        B.setZero();
        const double ang = (k == 0) ? 2.0 * pi : pi;  // int of cos^2(k th) over the circle
        for (int i = 0; i < nr; ++i) {
            const double r = quad.ru[i];
            const double w = quad.rw[i] * mmr[i];
            std::vector<double> f(nrad), df(nrad);
            for (int j = 0; j < nrad; ++j) radial_fn(k, j, r, R, f[j], df[j]);
            for (int a = 0; a < nrad; ++a) {
                for (int b = a; b < nrad; ++b) {
                    B(a, b) += w * f[a] * f[b] * ang;
                    double stiff = df[a] * df[b];
                    if (k > 0) stiff += k * k * f[a] * f[b] / (r * r);
                    A(a, b) += w * stiff * ang;
                }
            }
        }
        A = A.selfadjointView<Eigen::Upper>();
        B = B.selfadjointView<Eigen::Upper>();
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(A, B);
        if (es.info() != Eigen::Success)
            throw AssemblyFailure("configuration basis eigensolve failed at wavenumber " +
                                  std::to_string(k));
        Branch base{k, false, es.eigenvectors(), es.eigenvalues()};
        branches.push_back(base);
        if (k > 0) {
            Branch s = base;
            s.sine = true;
            branches.push_back(s);
        }
    }

    cb.n = 0;
    for (const auto& br : branches) cb.n += static_cast<int>(br.lam.size());
    cb.kmode.resize(cb.n);
    cb.lambda.resize(cb.n);
    cb.vals.resize(quad.n, cb.n);
    cb.d1.resize(quad.n, cb.n);
    cb.d2.resize(quad.n, cb.n);

    int col = 0;
    for (const auto& br : branches) {
        for (int e = 0; e < static_cast<int>(br.lam.size()); ++e, ++col) {
            cb.kmode[col] = br.sine ? -br.k : br.k;
            cb.lambda[col] = br.lam[e];
            for (int node = 0; node < quad.n; ++node) {
                const double r = quad.r[node], th = quad.th[node];
                double Rv = 0.0, dRv = 0.0;
                for (int j = 0; j < static_cast<int>(br.V.rows()); ++j) {
                    double f, df;
                    radial_fn(br.k, j, r, R, f, df);
                    Rv += br.V(j, e) * f;
                    dRv += br.V(j, e) * df;
                }
                const double c = std::cos(br.k * th), s = std::sin(br.k * th);
                const double ang = br.sine ? s : c;
                const double dang = br.sine ? br.k * c : -br.k * s;  // d/dth
                const double val = Rv * ang;
                const double fr = dRv * ang;                          // radial part of gradient
                const double fth = (br.k == 0) ? 0.0 : Rv * dang / r; // transversal part
                cb.vals(node, col) = val;
                cb.d1(node, col) = std::cos(th) * fr - std::sin(th) * fth;
                cb.d2(node, col) = std::sin(th) * fr + std::cos(th) * fth;
            }
        }
    }

    // weighted mass, projection and moment tables
    cb.mm_mass = 0.0;
    for (int node = 0; node < quad.n; ++node) cb.mm_mass += quad.w[node] * max.Mm[node];
    cb.proj.resize(quad.n, cb.n);
    cb.mom.resize(cb.n);
    for (int c = 0; c < cb.n; ++c) {
        double m = 0.0;
        for (int node = 0; node < quad.n; ++node) {
            cb.proj(node, c) = quad.w[node] * max.Mm[node] * cb.vals(node, c);
            m += cb.proj(node, c);
        }
        cb.mom[c] = m;
    }
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            cb.G[a][b].resize(quad.n, cb.n);
            for (int c = 0; c < cb.n; ++c) {
                const Mat& d = (a == 0) ? cb.d1 : cb.d2;
                for (int node = 0; node < quad.n; ++node) {
                    const double qb = (b == 0) ? quad.q1[node] : quad.q2[node];
                    cb.G[a][b](node, c) = quad.w[node] * max.M[node] * qb * d(node, c);
                }
            }
        }
    }

    // locate the constant mode (k = 0, eigenvalue ~ 0, value independent of the node)
    cb.const_index = -1;
    for (int c = 0; c < cb.n; ++c) {
        if (cb.kmode[c] == 0 && std::abs(cb.lambda[c]) < 1e-8) {
            cb.const_index = c;
            cb.const_coef = 1.0 / cb.vals(0, c);
            break;
        }
    }
    if (cb.const_index < 0) throw AssemblyFailure("configuration basis lost the constant mode");
    return cb;
}

SpatialBasis SpatialBasis::build(int mx, int mz, int nqx, int nqz) {
    SpatialBasis sb;
    sb.mx = mx;
    sb.mz = mz;
    sb.n = (2 * mx + 1) * (mz + 1);
    sb.nqx = nqx;
    sb.nqz = nqz;
    sb.nq = nqx * nqz;
    sb.xq.resize(sb.nq);
    sb.zq.resize(sb.nq);
    sb.wq = 1.0 / (static_cast<double>(nqx) * nqz);
    for (int ix = 0; ix < nqx; ++ix) {
        for (int iz = 0; iz < nqz; ++iz) {
            const int id = ix * nqz + iz;
            sb.xq[id] = (ix + 0.5) / nqx;
            sb.zq[id] = (iz + 0.5) / nqz;
        }
    }
    sb.vals.resize(sb.nq, sb.n);
    sb.dx.resize(sb.nq, sb.n);
    sb.dz.resize(sb.nq, sb.n);
    const double s2 = std::sqrt(2.0);
    int col = 0;
    for (int ax = 0; ax < 2 * mx + 1; ++ax) {
        // ax = 0: constant; odd: cos(2 pi j x); even: sin(2 pi j x), j = (ax+1)/2
        const int jx = (ax + 1) / 2;
        for (int cz = 0; cz <= mz; ++cz, ++col) {
            for (int node = 0; node < sb.nq; ++node) {
                const double x = sb.xq[node], z = sb.zq[node];
                double fx, dfx;
                if (ax == 0) {
                    fx = 1.0;
                    dfx = 0.0;
                } else if (ax % 2 == 1) {
                    fx = s2 * std::cos(2.0 * pi * jx * x);
                    dfx = -s2 * 2.0 * pi * jx * std::sin(2.0 * pi * jx * x);
                } else {
                    fx = s2 * std::sin(2.0 * pi * jx * x);
                    dfx = s2 * 2.0 * pi * jx * std::cos(2.0 * pi * jx * x);
                }
                double fz, dfz;
                if (cz == 0) {
                    fz = 1.0;
                    dfz = 0.0;
                } else {
                    fz = s2 * std::cos(pi * cz * z);
                    dfz = -s2 * pi * cz * std::sin(pi * cz * z);
                }
                sb.vals(node, col) = fx * fz;
                sb.dx(node, col) = dfx * fz;
                sb.dz(node, col) = fx * dfz;
            }
        }
    }
    sb.const_index = 0;
    return sb;
}

}  // namespace polyfsi
