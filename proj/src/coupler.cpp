#include "polyfsi/coupler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polyfsi/errors.hpp"

namespace polyfsi {

namespace {

bool zero_line(const Vec& v) { return v.size() == 0 || v.cwiseAbs().maxCoeff() == 0.0; }

Mat embed_line(const Vec& line, int n1, int n2) {
    Mat m(n1, n2);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) m(i, j) = line[i];
    return m;
}

int reflect_index(int i, int last) {
    if (last == 0) return 0;
    const int period = 2 * last;
    i = ((i % period) + period) % period;
    return i <= last ? i : period - i;
}

/// Optional per-node domain maps; rest lines stay on the exact static path.
struct MapSet {
    std::vector<bool> active;
    std::vector<DomainMap> maps;
    const DomainMap* at(int n) const { return active[n] ? &maps[n] : nullptr; }
};

MapSet build_maps(const CoupledModules& m, const std::vector<Vec>& lines,
                  const std::vector<Vec>& dlines) {
    const double tol = m.cfg->get_d("geom.newton_tol");
    const int iters = m.cfg->get_i("geom.newton_max_iter");
    MapSet s;
    const int n = static_cast<int>(lines.size());
    s.active.assign(n, false);
    s.maps.resize(n);
    for (int k = 0; k < n; ++k)
        if (!zero_line(lines[k]) || !zero_line(dlines[k])) {
            s.maps[k] = DomainMap(*m.ref, lines[k], dlines[k], tol, iters);
            s.active[k] = true;
        }
    return s;
}

std::vector<Vec> time_derivative_lines(const std::vector<Vec>& x, double dt) {
    const int last = static_cast<int>(x.size()) - 1;
    std::vector<Vec> d(x.size());
    for (int n = 0; n <= last; ++n) {
        if (last == 0)
            d[n] = Vec::Zero(x[n].size());
        else if (n == 0)
            d[n] = (x[1] - x[0]) / dt;
        else if (n == last)
            d[n] = (x[last] - x[last - 1]) / dt;
        else
            d[n] = (x[n + 1] - x[n - 1]) / (2.0 * dt);
    }
    return d;
}

CenterField centers_of(const FluidState& s, int nx, int nz) {
    CenterField c;
    c.vx = Mat(nx, nz);
    c.vz = Mat(nx, nz);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) {
            c.vx(i, j) = 0.5 * (s.u1(i, j) + s.u1((i + 1) % nx, j));
            c.vz(i, j) = 0.5 * (s.u2(i, j) + s.u2(i, j + 1));
        }
    return c;
}

std::vector<Vec2> to_vec2(const CenterField& f) {
    const int nx = static_cast<int>(f.vx.rows()), nz = static_cast<int>(f.vx.cols());
    std::vector<Vec2> v(static_cast<size_t>(nx) * nz);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) v[i * nz + j] = Vec2(f.vx(i, j), f.vz(i, j));
    return v;
}

double phys_z(const DomainMap* a, const DomainMap* b, double x, double z) {
    const double za = a ? a->forward(x, z)[1] : z;
    const double zb = b ? b->forward(x, z)[1] : z;
    return 0.5 * (za + zb);
}

/// Physical velocity gradient of a center field by reference-grid differences
/// (periodic in x, second-order one-sided at the walls) and the metric chain rule.
std::vector<Mat2> grad_centers(const CenterField& f, const DomainMap* mn, const DomainMap* mp,
                               int nx, int nz) {
    const double h1 = 1.0 / nx, h2 = 1.0 / nz;
    std::vector<Mat2> g(static_cast<size_t>(nx) * nz);
    auto dref = [&](const Mat& u, int i, int j, double& dx, double& dz) {
        dx = (u((i + 1) % nx, j) - u((i - 1 + nx) % nx, j)) / (2.0 * h1);
        if (j == 0)
            dz = (-3.0 * u(i, 0) + 4.0 * u(i, 1) - u(i, 2)) / (2.0 * h2);
        else if (j == nz - 1)
            dz = (3.0 * u(i, nz - 1) - 4.0 * u(i, nz - 2) + u(i, nz - 3)) / (2.0 * h2);
        else
            dz = (u(i, j + 1) - u(i, j - 1)) / (2.0 * h2);
    };
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) {
            const double x = (i + 0.5) * h1, z = (j + 0.5) * h2;
            double a = 0.0, c = 1.0;
            if (mn || mp) {
                const double an = mn ? mn->jac_a(x, z) : 0.0, ap = mp ? mp->jac_a(x, z) : 0.0;
                const double cn = mn ? mn->jac_c(x, z) : 1.0, cp = mp ? mp->jac_c(x, z) : 1.0;
                a = 0.5 * (an + ap);
                c = 0.5 * (cn + cp);
            }
            double dx1, dz1, dx2, dz2;
            dref(f.vx, i, j, dx1, dz1);
            dref(f.vz, i, j, dx2, dz2);
            Mat2& t = g[i * nz + j];
            t(0, 0) = dx1 - (a / c) * dz1;
            t(0, 1) = dz1 / c;
            t(1, 0) = dx2 - (a / c) * dz2;
            t(1, 1) = dz2 / c;
        }
    return g;
}

}  // namespace

RegularizationKernel RegularizationKernel::from_config(const RunConfig& cfg) {
    RegularizationKernel k;
    k.varrho = cfg.get_d("coupler.rho");
    const double s = std::sqrt(k.varrho);
    k.width_time = cfg.get_d("coupler.width_time0") * s;
    k.width_space = cfg.get_d("coupler.width_space0") * s;
    k.width_shell = cfg.get_d("coupler.width_shell0") * s;
    return k;
}

std::vector<double> RegularizationKernel::taps(double width, double h) {
    if (h <= 0.0) throw ConfigError("mollifier grid spacing must be positive");
    const int m = static_cast<int>(std::floor(width / h + 1e-12));
    if (m <= 0) return {1.0};
    std::vector<double> t(m + 1);
    for (int j = 0; j <= m; ++j) {
        const double s = static_cast<double>(j) / (m + 1);
        t[j] = std::pow(1.0 - s * s, 3);
    }
    double total = t[0];
    for (int j = 1; j <= m; ++j) total += 2.0 * t[j];
    for (double& v : t) v /= total;
    return t;
}

std::vector<Vec> mollify_time(const std::vector<Vec>& hist, const std::vector<double>& taps) {
    const int last = static_cast<int>(hist.size()) - 1;
    const int m = static_cast<int>(taps.size()) - 1;
    std::vector<Vec> out(hist.size());
    for (int n = 0; n <= last; ++n) {
        Vec acc = taps[0] * hist[n];
        for (int j = 1; j <= m; ++j)
            acc += taps[j] * (hist[reflect_index(n - j, last)] + hist[reflect_index(n + j, last)]);
        out[n] = acc;
    }
    return out;
}

Vec mollify_circular(const Vec& line, const std::vector<double>& taps) {
    const int n = static_cast<int>(line.size());
    const int m = static_cast<int>(taps.size()) - 1;
    Vec out(n);
    for (int i = 0; i < n; ++i) {
        double acc = taps[0] * line[i];
        for (int j = 1; j <= m; ++j)
            acc += taps[j] * (line[((i - j) % n + n) % n] + line[(i + j) % n]);
        out[i] = acc;
    }
    return out;
}

Mat mollify_slab(const Mat& f, const std::vector<double>& taps_x,
                 const std::vector<double>& taps_z) {
    const int nx = static_cast<int>(f.rows()), nz = static_cast<int>(f.cols());
    const int mx = static_cast<int>(taps_x.size()) - 1;
    const int mz = static_cast<int>(taps_z.size()) - 1;
    Mat g(nx, nz);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) {
            double acc = taps_x[0] * f(i, j);
            for (int k = 1; k <= mx; ++k)
                acc += taps_x[k] * (f(((i - k) % nx + nx) % nx, j) + f((i + k) % nx, j));
            g(i, j) = acc;
        }
    Mat out(nx, nz);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nz; ++j) {
            double acc = taps_z[0] * g(i, j);
            for (int k = 1; k <= mz; ++k) {
                if (j - k >= 0) acc += taps_z[k] * g(i, j - k);
                if (j + k < nz) acc += taps_z[k] * g(i, j + k);
            }
            out(i, j) = acc;
        }
    return out;
}

std::vector<CenterField> regularize_velocity(const std::vector<CenterField>& v,
                                             const RegularizationKernel& kernel, double dt) {
    if (v.empty()) return {};
    const int nx = static_cast<int>(v[0].vx.rows()), nz = static_cast<int>(v[0].vx.cols());
    const auto tx = RegularizationKernel::taps(kernel.width_space, 1.0 / nx);
    const auto tz = RegularizationKernel::taps(kernel.width_space, 1.0 / nz);
    const auto tt = RegularizationKernel::taps(kernel.width_time, dt);
    std::vector<CenterField> sp(v.size());
    for (size_t n = 0; n < v.size(); ++n) {
        sp[n].vx = mollify_slab(v[n].vx, tx, tz);
        sp[n].vz = mollify_slab(v[n].vz, tx, tz);
    }
    const int last = static_cast<int>(v.size()) - 1;
    const int m = static_cast<int>(tt.size()) - 1;
    std::vector<CenterField> out(v.size());
    for (int n = 0; n <= last; ++n) {
        Mat ax = tt[0] * sp[n].vx, az = tt[0] * sp[n].vz;
        for (int j = 1; j <= m; ++j) {
            const int lo = reflect_index(n - j, last), hi = reflect_index(n + j, last);
            ax += tt[j] * (sp[lo].vx + sp[hi].vx);
            az += tt[j] * (sp[lo].vz + sp[hi].vz);
        }
        out[n].vx = ax;
        out[n].vz = az;
    }
    return out;
}

std::vector<Vec> regularize_shell(const std::vector<Vec>& xi, const RegularizationKernel& kernel,
                                  double dt) {
    if (xi.empty()) return {};
    const int n = static_cast<int>(xi[0].size());
    const auto ts = RegularizationKernel::taps(kernel.width_shell, 1.0 / n);
    const auto tt = RegularizationKernel::taps(kernel.width_time, dt);
    std::vector<Vec> sp(xi.size());
    for (size_t k = 0; k < xi.size(); ++k) sp[k] = mollify_circular(xi[k], ts);
    return mollify_time(sp, tt);
}

FixedPointConfig FixedPointConfig::from_config(const RunConfig& cfg) {
    FixedPointConfig f;
    f.theta = cfg.get_d("coupler.theta");
    f.tol = cfg.get_d("coupler.tol");
    f.max_iter = cfg.get_i("coupler.max_iter");
    f.margin = cfg.get_d("coupler.margin");
    f.halvings_max = cfg.get_i("coupler.halvings_max");
    return f;
}

namespace {

/// One inner pass over a window: Fokker-Planck, number density and the
/// linearized fluid-shell pair, plus the per-step functional captures.
struct Sweep {
    std::vector<FluidState> fluid;
    std::vector<ConfigDensity> psi;
    std::vector<Vec> xi;
    std::vector<FluidStepReport> reports;
    std::vector<double> xi_diss, fisher_x, fisher_q, production;
    bool tripped = false;
    int steps_done = 0;
    double sup_eta = 0.0;
    std::string trip_message;
};

struct WindowDriver {
    const CoupledModules& m;
    const FixedPointConfig& fpc;
    const RegularizationKernel& kernel;
    int nx, nz, nsh;
    double dt, bound;

    Sweep run_sweep(const FluidState& f_start, const ConfigDensity& p_start, const Vec& xi_start,
                    const std::vector<CenterField>& rv, const std::vector<Vec>& rxi, int w,
                    double t0) const {
        Sweep sw;
        sw.fluid.push_back(f_start);
        sw.psi.push_back(p_start);
        sw.xi.push_back(xi_start);

        for (int n = 0; n <= w; ++n) {
            const AdmissibilityReport rep =
                check_admissible(*m.ref, embed_line(rxi[n], m.ref->n1, m.ref->n2), fpc.margin);
            if (!rep.ok) {
                sw.tripped = true;
                sw.sup_eta = rep.sup_eta;
                sw.steps_done = std::max(0, n - 1);
                sw.trip_message = "shell iterate left the admissible corridor";
                truncate(sw);
                return sw;
            }
        }
        const std::vector<Vec> rxid = time_derivative_lines(rxi, dt);
        const MapSet maps = build_maps(m, rxi, rxid);
        const PhysicalParams& params = m.fp->params();
        const double h1 = 1.0 / nx, h2 = 1.0 / nz;

        for (int n = 0; n < w; ++n) {
            const DomainMap* mapn = maps.at(n);
            const DomainMap* mapp = maps.at(n + 1);
            const double tmid = t0 + (n + 0.5) * dt;

            CenterField vmid;
            vmid.vx = 0.5 * (rv[n].vx + rv[n + 1].vx);
            vmid.vz = 0.5 * (rv[n].vz + rv[n + 1].vz);
            const std::vector<Vec2> v2 = to_vec2(vmid);
            const std::vector<Mat2> gv = grad_centers(vmid, mapn, mapp, nx, nz);

            // configuration density
            ConfigDensity psi = sw.psi.back();
            FlowSample flow;
            flow.v = v2;
            flow.gradv = gv;
            flow.map_n = mapn;
            flow.map_np1 = mapp;
            m.fp->step(psi, flow, dt);
            ConfigDensity mid;
            mid.f = 0.5 * (sw.psi.back().f + psi.f);
            mid.t = tmid;
            sw.fisher_x.push_back(m.fp->fisher_x(mid, mapn, mapp));
            sw.fisher_q.push_back(m.fp->fisher_q(mid, mapn, mapp));
            sw.production.push_back(m.fp->entropy_production(mid, gv, mapn, mapp));

            // number density
            Vec xi = sw.xi.back();
            m.xi->step(xi, v2, mapn, mapp, dt);
            sw.xi_diss.push_back(m.xi->last_step_dissipation());

            // polymer stress at the cell centers from the midpoint density
            std::vector<Mat2> stress;
            if (params.kpoly != 0.0 || params.dh != 0.0) {
                Mat vals, dq1, dq2;
                m.fp->slices(mid, vals, dq1, dq2);
                stress.resize(static_cast<size_t>(nx) * nz);
                PsiSlice slice;
                for (int c = 0; c < nx * nz; ++c) {
                    slice.vals = vals.col(c);
                    slice.d1 = dq1.col(c);
                    slice.d2 = dq2.col(c);
                    stress[c] = m.stress->truncated(slice, m.fp->ell());
                }
            }

            // forcing samples
            std::vector<Vec2> fb;
            if (m.fbody) {
                fb.resize(static_cast<size_t>(nx) * nz);
                for (int i = 0; i < nx; ++i)
                    for (int j = 0; j < nz; ++j) {
                        const double x = (i + 0.5) * h1, z = (j + 0.5) * h2;
                        fb[i * nz + j] = m.fbody(x, phys_z(mapn, mapp, x, z), tmid);
                    }
            }
            Vec gsh;
            if (m.gshell) {
                gsh = Vec(nsh);
                for (int i = 0; i < nsh; ++i) gsh[i] = m.gshell(static_cast<double>(i) / nsh, tmid);
            }

            // explicit elastic gradient at the regularized shell iterate
            const Vec rmid = 0.5 * (rxi[n] + rxi[n + 1]);
            const Mat grad = m.koiter->gradient(embed_line(rmid, m.ref->n1, m.ref->n2));
            Vec kpr(nsh);
            for (int i = 0; i < nsh; ++i) kpr[i] = grad(i, 0);

            // linearized fluid-shell pair
            FluidState fstate = sw.fluid.back();
            FluidStepData fd;
            fd.map_n = mapn;
            fd.map_np1 = mapp;
            fd.conv_v = v2;
            fd.stress = std::move(stress);
            fd.fbody = std::move(fb);
            fd.kprime = kpr;
            fd.gshell = gsh;
            fd.varrho = kernel.varrho;
            m.fluid->step(fstate, fd, dt);
            sw.reports.push_back(m.fluid->last_report());

            const double sup = fstate.eta.cwiseAbs().maxCoeff();
            if (sup >= (1.0 - fpc.margin) * bound) {
                sw.tripped = true;
                sw.sup_eta = sup;
                sw.steps_done = n;
                sw.trip_message = "shell displacement reached the admissibility guard";
                truncate(sw);
                return sw;
            }

            sw.fluid.push_back(std::move(fstate));
            sw.psi.push_back(std::move(psi));
            sw.xi.push_back(std::move(xi));
            sw.steps_done = n + 1;
        }
        return sw;
    }

    static void truncate(Sweep& sw) {
        const size_t keep = static_cast<size_t>(sw.steps_done);
        sw.fluid.resize(keep + 1);
        sw.psi.resize(keep + 1);
        sw.xi.resize(keep + 1);
        sw.reports.resize(keep);
        sw.xi_diss.resize(std::min(sw.xi_diss.size(), keep));
        sw.fisher_x.resize(std::min(sw.fisher_x.size(), keep));
        sw.fisher_q.resize(std::min(sw.fisher_q.size(), keep));
        sw.production.resize(std::min(sw.production.size(), keep));
    }

    void commit(CoupledTrajectory& traj, Sweep& sw, double t0) const {
        const PhysicalParams& params = m.fp->params();
        const double tolg = m.cfg->get_d("geom.newton_tol");
        const int iterg = m.cfg->get_i("geom.newton_max_iter");
        for (int n = 1; n <= sw.steps_done; ++n) {
            traj.time.push_back(t0 + n * dt);
            traj.fluid.push_back(std::move(sw.fluid[n]));
            traj.psi.push_back(std::move(sw.psi[n]));
            traj.xi.push_back(std::move(sw.xi[n]));
            traj.reports.push_back(sw.reports[n - 1]);

            const FluidState& fs = traj.fluid.back();
            DomainMap map;
            const DomainMap* mp = nullptr;
            if (!zero_line(fs.eta) || !zero_line(fs.etadot)) {
                map = DomainMap(*m.ref, fs.eta, fs.etadot, tolg, iterg);
                mp = &map;
            }
            EnergyBreakdown e =
                assemble_breakdown(*m.fluid, fs, mp, m.koiter, kernel.varrho, m.fp,
                                   &traj.psi.back(), params.kpoly, &traj.xi.back());
            const EnergyBreakdown& prev = traj.energy.back();
            const FluidStepReport& r = sw.reports[n - 1];
            e.diss_viscous = prev.diss_viscous + dt * r.viscous;
            e.diss_xi = prev.diss_xi + dt * sw.xi_diss[n - 1];
            e.fisher_x = prev.fisher_x + dt * sw.fisher_x[n - 1];
            e.fisher_q = prev.fisher_q + dt * sw.fisher_q[n - 1];
            e.work_f = prev.work_f + dt * r.body_power;
            e.work_g = prev.work_g + dt * r.shell_force_power;
            traj.energy.push_back(e);
            traj.production.push_back(traj.production.back() + dt * sw.production[n - 1]);
            traj.young.push_back(traj.young.back() +
                                 dt * 0.5 *
                                     (r.body_l2sq + r.umid_l2sq + r.shell_force_l2sq +
                                      r.etadot_mid_l2sq));
        }
    }

    /// Damped Picard on one window. Returns true when the window was committed
    /// (convergence or guard trip), false to request a halving.
    bool try_window(CoupledTrajectory& traj, int w, double t0) const {
        const FluidState f_start = traj.fluid.back();
        const ConfigDensity p_start = traj.psi.back();
        const Vec xi_start = traj.xi.back();
        const double h1 = 1.0 / nx, h2 = 1.0 / nz;

        std::vector<Vec> xi_hist(w + 1, f_start.eta);
        std::vector<CenterField> v_hist(w + 1, centers_of(f_start, nx, nz));

        for (int it = 1; it <= fpc.max_iter; ++it) {
            const auto rv = regularize_velocity(v_hist, kernel, dt);
            const auto rxi = regularize_shell(xi_hist, kernel, dt);
            Sweep sw = run_sweep(f_start, p_start, xi_start, rv, rxi, w, t0);
            ++traj.iterations_total;

            if (sw.tripped) {
                commit(traj, sw, t0);
                traj.guard_tripped = true;
                traj.guard_sup_eta = sw.sup_eta;
                traj.guard_message = sw.trip_message;
                traj.windows.push_back(sw.steps_done * dt);
                return true;
            }

            double d2 = 0.0;
            for (int n = 1; n <= w; ++n) {
                const CenterField cn = centers_of(sw.fluid[n], nx, nz);
                d2 += dt * h1 * h2 *
                      ((cn.vx - v_hist[n].vx).squaredNorm() + (cn.vz - v_hist[n].vz).squaredNorm());
                d2 += dt * (sw.fluid[n].eta - xi_hist[n]).squaredNorm() / nsh;
            }
            const double d = std::sqrt(d2);
            traj.fp_residuals.push_back(d);

            if (d <= fpc.tol) {
                commit(traj, sw, t0);
                traj.windows.push_back(w * dt);
                return true;
            }
            for (int n = 0; n <= w; ++n) {
                const CenterField cn = centers_of(sw.fluid[std::min(n, sw.steps_done)], nx, nz);
                v_hist[n].vx = (1.0 - fpc.theta) * v_hist[n].vx + fpc.theta * cn.vx;
                v_hist[n].vz = (1.0 - fpc.theta) * v_hist[n].vz + fpc.theta * cn.vz;
                xi_hist[n] = (1.0 - fpc.theta) * xi_hist[n] +
                             fpc.theta * sw.fluid[std::min(n, sw.steps_done)].eta;
            }
        }
        return false;
    }
};

}  // namespace

CoupledTrajectory fixed_point_solve(const CoupledModules& m, const FixedPointConfig& fpc,
                                    const RegularizationKernel& kernel, const FluidState& f0,
                                    const ConfigDensity& p0, const Vec& xi0, double t_end,
                                    double dt) {
    if (!m.fp || !m.xi || !m.fluid || !m.koiter || !m.stress || !m.ref || !m.cfg)
        throw ConfigError("coupled solve is missing a module");
    if (m.fluid->n_shell() <= 0 || m.fluid->n_shell() != m.ref->n1)
        throw ConfigError("coupled solve requires the shell line to match the reference grid");
    if (m.fp->space().nqx != m.fluid->nx() || m.fp->space().nqz != m.fluid->nz())
        throw ConfigError("configuration-density quadrature must match the fluid cells");
    if (m.xi->nx() != m.fluid->nx() || m.xi->nz() != m.fluid->nz())
        throw ConfigError("number-density grid must match the fluid cells");
    if (dt <= 0.0 || t_end <= 0.0) throw ConfigError("coupled solve needs positive dt and t_end");

    const int nsteps = std::max<long>(1, std::lround(t_end / dt));

    WindowDriver drv{m,
                     fpc,
                     kernel,
                     m.fluid->nx(),
                     m.fluid->nz(),
                     m.fluid->n_shell(),
                     dt,
                     0.0};
    {
        const Mat zero = Mat::Zero(m.ref->n1, m.ref->n2);
        drv.bound = check_admissible(*m.ref, zero, fpc.margin).bound;
    }

    CoupledTrajectory traj;
    traj.dt = dt;
    traj.time.push_back(0.0);
    traj.fluid.push_back(f0);
    traj.psi.push_back(p0);
    traj.xi.push_back(xi0);
    {
        DomainMap map;
        const DomainMap* mp = nullptr;
        if (!zero_line(f0.eta) || !zero_line(f0.etadot)) {
            map = DomainMap(*m.ref, f0.eta, f0.etadot, m.cfg->get_d("geom.newton_tol"),
                            m.cfg->get_i("geom.newton_max_iter"));
            mp = &map;
        }
        traj.energy.push_back(assemble_breakdown(*m.fluid, f0, mp, m.koiter, kernel.varrho, m.fp,
                                                 &p0, m.fp->params().kpoly, &xi0));
    }
    traj.production.push_back(0.0);
    traj.young.push_back(0.0);

    int done = 0;
    int window = nsteps;
    int halvings = 0;
    while (done < nsteps && !traj.guard_tripped) {
        const int w = std::min(window, nsteps - done);
        const bool ok = drv.try_window(traj, w, done * dt);
        if (traj.guard_tripped) break;
        if (ok) {
            done += w;
        } else {
            if (halvings >= fpc.halvings_max || window <= 1)
                throw NoConvergence("fixed point stagnated after exhausting window halvings");
            window = std::max(1, window / 2);
            ++halvings;
        }
    }
    return traj;
}

LedgerReport energy_ledger(const CoupledTrajectory& traj, const PhysicalParams& params,
                           double tol_ineq, bool throw_on_violation) {
    LedgerReport rep;
    if (traj.energy.empty()) return rep;
    const double e0 = traj.energy[0].total();
    const double wfx = 4.0 * params.eps * params.kpoly;
    const double wfq = params.kpoly * params.a0 / params.lambda;
    rep.max_slack = -1e300;
    for (size_t n = 0; n < traj.energy.size(); ++n) {
        const EnergyBreakdown& e = traj.energy[n];
        const double lhs =
            e.total() + e.diss_viscous + e.diss_xi + wfx * e.fisher_x + wfq * e.fisher_q;
        const double rhs = e0 + traj.young[n];
        const double slack = (lhs - rhs) / std::max(1.0, std::abs(rhs));
        if (slack > rep.max_slack) {
            rep.max_slack = slack;
            rep.worst_node = static_cast<int>(n);
            rep.lhs_worst = lhs;
            rep.rhs_worst = rhs;
        }
        if (n > 0) {
            const double inc = traj.energy[n].total() - traj.energy[n - 1].total();
            rep.max_energy_increase = std::max(rep.max_energy_increase, inc);
        }
    }
    rep.ok = rep.max_slack <= tol_ineq;
    {
        const EnergyBreakdown& e = traj.energy[rep.worst_node];
        std::ostringstream os;
        os << "ledger worst node " << rep.worst_node << " t=" << traj.time[rep.worst_node]
           << " slack=" << rep.max_slack << "\n"
           << "  kinetic=" << e.kinetic_fluid << " shell_kinetic=" << e.shell_kinetic
           << " elastic=" << e.koiter << " regularizer=" << e.regularizer << "\n"
           << "  sup_xi_sq=" << e.xi_sup_sq << " rel_entropy=" << e.rel_entropy << "\n"
           << "  diss_viscous=" << e.diss_viscous << " diss_xi=" << e.diss_xi
           << " fisher_x(w)=" << wfx * e.fisher_x << " fisher_q(w)=" << wfq * e.fisher_q << "\n"
           << "  young=" << traj.young[rep.worst_node]
           << " production=" << traj.production[rep.worst_node] << " lhs=" << rep.lhs_worst
           << " rhs=" << rep.rhs_worst;
        rep.breakdown = os.str();
    }
    if (!rep.ok && throw_on_violation) throw InequalityViolated(rep.breakdown);
    return rep;
}

RhoStudyReport rho_refinement_study(const std::function<CoupledTrajectory(double)>& runner,
                                    const std::vector<double>& rhos) {
    RhoStudyReport rep;
    rep.rhos = rhos;
    for (double r : rhos) rep.trajectories.push_back(runner(r));
    for (const CoupledTrajectory& t : rep.trajectories) {
        double sup = 0.0;
        for (const EnergyBreakdown& e : t.energy) sup = std::max(sup, e.regularizer);
        rep.sup_reg.push_back(sup);
    }
    for (size_t l = 0; l + 1 < rep.trajectories.size(); ++l) {
        const CoupledTrajectory& a = rep.trajectories[l];
        const CoupledTrajectory& b = rep.trajectories[l + 1];
        const size_t nn = std::min(a.fluid.size(), b.fluid.size());
        double du = 0.0, de = 0.0, dx = 0.0;
        for (size_t n = 1; n < nn; ++n) {
            const double cellw =
                1.0 / (static_cast<double>(a.fluid[n].u1.rows()) * a.fluid[n].u1.cols());
            du += a.dt * cellw *
                  ((a.fluid[n].u1 - b.fluid[n].u1).squaredNorm() +
                   (a.fluid[n].u2 - b.fluid[n].u2).squaredNorm());
            de += a.dt * (a.fluid[n].eta - b.fluid[n].eta).squaredNorm() /
                  static_cast<double>(a.fluid[n].eta.size());
            dx += a.dt * cellw * (a.xi[n] - b.xi[n]).squaredNorm();
        }
        rep.cauchy_u.push_back(std::sqrt(du));
        rep.cauchy_eta.push_back(std::sqrt(de));
        rep.cauchy_xi.push_back(std::sqrt(dx));
    }
    auto monotone = [](const std::vector<double>& d) {
        for (size_t i = 0; i + 1 < d.size(); ++i) {
            const bool tie_ok = d[i] <= 1e-14 && d[i + 1] <= 1e-14;
            if (!(d[i + 1] < d[i] || tie_ok)) return false;
        }
        return true;
    };
    rep.cauchy_monotone =
        monotone(rep.cauchy_u) && monotone(rep.cauchy_eta) && monotone(rep.cauchy_xi);
    rep.reg_drops = true;
    for (size_t i = 0; i + 1 < rep.sup_reg.size(); ++i) {
        const bool floor_ok = rep.sup_reg[i] <= 1e-16 && rep.sup_reg[i + 1] <= 1e-16;
        if (!(rep.sup_reg[i + 1] <= rep.sup_reg[i] / 10.0 * (1.0 + 1e-9) || floor_ok))
            rep.reg_drops = false;
    }
    return rep;
}

}  // namespace polyfsi
