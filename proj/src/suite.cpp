#include "polyfsi/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "polyfsi/diagnostics.hpp"
#include "polyfsi/errors.hpp"
#include "polyfsi/fieldio.hpp"
#include "polyfsi/presets.hpp"
#include "polyfsi/rng.hpp"

namespace polyfsi {

namespace {

int step_count(const RunConfig& cfg) {
    const double t_end = cfg.get_d("run.t_end");
    const double dt = cfg.get_d("run.dt");
    if (dt <= 0.0 || t_end <= 0.0) throw ConfigError("run.t_end and run.dt must be positive");
    return static_cast<int>(std::max<long>(1, std::lround(t_end / dt)));
}

std::vector<double> record_of(const Mat& m) {
    std::vector<double> d(m.size());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) d[static_cast<size_t>(i) * m.cols() + j] = m(i, j);
    return d;
}

std::vector<double> record_of(const Vec& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::unique_ptr<SolverStack> build_stack(const RunConfig& cfg) {
    auto st = std::make_unique<SolverStack>();
    st->cfg = cfg;
    st->ref = ReferenceShell::from_config(cfg);
    st->law = SpringLaw::from_config(cfg);
    st->params = PhysicalParams::from_config(cfg);
    st->quad = QuadB::build(st->law, cfg.get_i("poly.quad_nr"), cfg.get_i("poly.quad_nth"));
    st->max = MaxwellianTable::build(st->law, st->quad, cfg.get_d("poly.m_floor"));
    st->cbasis = ConfigBasis::build(st->law, st->quad, st->max, cfg.get_i("fp.kmax"),
                                    cfg.get_i("fp.nrad"));
    st->sbasis = SpatialBasis::build(cfg.get_i("fp.x_modes"), cfg.get_i("fp.z_modes"),
                                     cfg.get_i("fp.quad_nx"), cfg.get_i("fp.quad_nz"));
    st->fp = std::make_unique<FPSolver>(st->law, st->params, st->quad, st->max, st->cbasis,
                                        st->sbasis, cfg.get_d("poly.ell"),
                                        cfg.get_i("fp.drag_picard"), cfg.get_d("fp.tol_neg"));
    st->xi = std::make_unique<XiSolver>(cfg.get_i("fluid.nx"), cfg.get_i("fluid.nz"),
                                        cfg.get_d("poly.eps"));
    st->fluid = std::make_unique<FluidSolver>(cfg.get_i("fluid.nx"), cfg.get_i("fluid.nz"),
                                              cfg.get_d("fluid.mu"), st->ref.n1);
    st->koiter = std::make_unique<KoiterShell>(KoiterShell::from_config(st->ref, cfg));
    st->stress = std::make_unique<StressEvaluator>(st->law, st->quad, st->max, st->params);
    return st;
}

CoupledModules SolverStack::modules() const {
    CoupledModules m;
    m.fp = fp.get();
    m.xi = xi.get();
    m.fluid = fluid.get();
    m.koiter = koiter.get();
    m.stress = stress.get();
    m.ref = &ref;
    m.cfg = &cfg;
    const std::string kind = cfg.get_s("forcing.kind");
    const double amp = cfg.get_d("forcing.amp");
    const double freq = cfg.get_d("forcing.freq");
    const double mode = cfg.get_d("forcing.mode");
    if (kind == "breathing" && amp != 0.0) {
        m.gshell = [amp, freq, mode](double x, double t) {
            return amp * std::sin(2.0 * pi * freq * t) * std::cos(2.0 * pi * mode * x);
        };
    } else if (kind == "shear_body" && amp != 0.0) {
        m.fbody = [amp](double /*x*/, double z, double /*t*/) {
            return Vec2(amp * std::sin(pi * z), 0.0);
        };
    }
    return m;
}

FluidState SolverStack::initial_fluid() const {
    FluidState s = fluid->make_state();
    const int nx = fluid->nx(), nz = fluid->nz();
    const double h1 = 1.0 / nx, h2 = 1.0 / nz;
    const double ua = cfg.get_d("init.u_amp");
    if (ua != 0.0) {
        // Stream function ua * sin(2 pi x) * (z(1-z))^2: solenoidal, walls pinned.
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nz; ++j) {
                const double x = i * h1, z = (j + 0.5) * h2;
                s.u1(i, j) = ua * std::sin(2.0 * pi * x) * 2.0 * z * (1.0 - z) * (1.0 - 2.0 * z);
            }
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j <= nz; ++j) {
                const double x = (i + 0.5) * h1, z = j * h2;
                s.u2(i, j) = -2.0 * pi * ua * std::cos(2.0 * pi * x) * sqr(z * (1.0 - z));
            }
        fluid->project_divergence_free(s.u1, s.u2);
    }
    const int nsh = fluid->n_shell();
    if (nsh > 0) {
        const double ea = cfg.get_d("init.eta_amp");
        const double e1 = cfg.get_d("init.eta1_amp");
        const double mode = cfg.get_d("init.eta_mode");
        for (int i = 0; i < nsh; ++i) {
            const double x = static_cast<double>(i) / nsh;
            s.eta[i] = ea * std::cos(2.0 * pi * mode * x);
            s.etadot[i] = e1 * std::cos(2.0 * pi * mode * x);
        }
        if (e1 != 0.0) {
            const Vec top = fluid->top_interp() * s.etadot;
            for (int i = 0; i < nx; ++i) s.u2(i, nz) = top[i];
        }
    }
    return s;
}

ConfigDensity SolverStack::initial_psi() const {
    const std::string kind = cfg.get_s("init.psi");
    if (kind == "equilibrium") return fp->equilibrium();
    if (kind == "shear_perturbed") {
        const double a = cfg.get_d("init.psi_amp");
        return fp->project(
            [a](double x, double z, double q1, double q2) {
                return 1.0 + a * std::cos(2.0 * pi * x) * std::cos(pi * z) * q1 * q2 /
                                 (1.0 + q1 * q1 + q2 * q2);
            },
            nullptr, true);
    }
    if (kind == "positive_random") {
        // Random coefficients with spectral decay, then a constant shift so the
        // minimum over all quadrature nodes is positive: stays inside the span.
        Rng rng(static_cast<std::uint64_t>(cfg.get_d("run.seed")));
        const double a = cfg.get_d("init.psi_amp");
        ConfigDensity s;
        s.f = Mat::Zero(cbasis.n, sbasis.n);
        for (int r = 0; r < cbasis.n; ++r)
            for (int l = 0; l < sbasis.n; ++l)
                s.f(r, l) = a * rng.normal() / ((1.0 + r) * (1.0 + l));
        const ConfigDensity eq = fp->equilibrium();
        const double mn = fp->min_psi(s);
        s.f += (0.01 - mn) * eq.f;
        s.t = 0.0;
        return s;
    }
    throw ConfigError("init.psi: unknown kind " + kind);
}

Vec SolverStack::initial_xi(const ConfigDensity& psi0) const {
    const std::string kind = cfg.get_s("init.xi_kind");
    const int nx = xi->nx(), nz = xi->nz();
    if (kind == "constant") return Vec::Ones(nx * nz);
    if (kind == "bump") {
        Vec v(nx * nz);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < nz; ++j) {
                const double x = xi->xc(i), z = xi->zc(j);
                v[xi->cell(i, j)] =
                    1.0 + 0.5 * std::exp(-(sqr(x - 0.5) + sqr(z - 0.5)) / 0.05);
            }
        return v;
    }
    if (kind == "marginal") {
        if (sbasis.nqx != nx || sbasis.nqz != nz)
            throw ConfigError(
                "init.xi_kind=marginal requires fp.quad grid equal to the fluid grid");
        return fp->marginal_at_nodes(psi0);
    }
    throw ConfigError("init.xi_kind: unknown kind " + kind);
}

namespace {

void write_coupled_outputs(const SolverStack& st, CoupledRunResult& res) {
    const RunConfig& cfg = st.cfg;
    res.out_dir = resolve_out_dir(cfg.get_s("run.out_dir"));
    const std::string name = cfg.get_s("run.name");
    const CoupledTrajectory& tr = res.traj;
    const PhysicalParams& pp = st.params;

    CsvWriter diag(join_path(res.out_dir, name + "-diagnostics.csv"), "polyfsi-diagnostics v1",
                   {"t", "kinetic_fluid", "shell_kinetic", "koiter", "regularizer", "xi_sup_sq",
                    "rel_entropy", "total", "diss_viscous", "diss_xi", "fisher_x", "fisher_q",
                    "work_f", "work_g", "production", "young", "ledger_slack"});
    const double e0 = tr.energy.empty() ? 0.0 : tr.energy[0].total();
    for (size_t n = 0; n < tr.time.size(); ++n) {
        const EnergyBreakdown& e = tr.energy[n];
        const double lhs = e.total() + e.diss_viscous + e.diss_xi +
                           4.0 * pp.eps * pp.kpoly * e.fisher_x +
                           pp.kpoly * pp.a0 / pp.lambda * e.fisher_q;
        const double rhs = e0 + tr.young[n];
        diag.row({tr.time[n], e.kinetic_fluid, e.shell_kinetic, e.koiter, e.regularizer,
                  e.xi_sup_sq, e.rel_entropy, e.total(), e.diss_viscous, e.diss_xi, e.fisher_x,
                  e.fisher_q, e.work_f, e.work_g, tr.production[n], tr.young[n],
                  (lhs - rhs) / std::max(1.0, std::abs(rhs))});
    }
    diag.close();

    CsvWriter resid(join_path(res.out_dir, name + "-residuals.csv"), "polyfsi-residuals v1",
                    {"iteration", "residual"});
    for (size_t i = 0; i < tr.fp_residuals.size(); ++i)
        resid.row({static_cast<double>(i + 1), tr.fp_residuals[i]});
    resid.close();

    {
        std::ofstream led(join_path(res.out_dir, name + "-ledger.txt"));
        led << "status " << (res.ledger.ok ? "ok" : "violated") << "\n"
            << "max_slack " << format_full(res.ledger.max_slack) << "\n"
            << "max_energy_increase " << format_full(res.ledger.max_energy_increase) << "\n"
            << "iterations_total " << tr.iterations_total << "\n"
            << "windows " << tr.windows.size() << "\n"
            << "guard_tripped " << (tr.guard_tripped ? 1 : 0) << "\n";
        if (tr.guard_tripped)
            led << "guard_sup_eta " << format_full(tr.guard_sup_eta) << "\n"
                << "guard_message " << tr.guard_message << "\n";
        led << res.ledger.breakdown << "\n";
    }

    if (cfg.get_b("run.write_fields")) {
        const int every = cfg.get_i("run.write_every");
        const int nx = st.fluid->nx(), nz = st.fluid->nz();
        for (size_t n = 0; n < tr.time.size(); n += every) {
            StructuredGrid g;
            g.nx = nx;
            g.nz = nz;
            g.dx = 1.0 / nx;
            g.dz = 1.0 / nz;
            const FluidState& fs = tr.fluid[n];
            g.fields.push_back({"u1", 1, static_cast<int>(fs.u1.size()), record_of(fs.u1)});
            g.fields.push_back({"u2", 1, static_cast<int>(fs.u2.size()), record_of(fs.u2)});
            g.fields.push_back({"p", 1, static_cast<int>(fs.p.size()), record_of(fs.p)});
            g.fields.push_back({"eta", 1, static_cast<int>(fs.eta.size()), record_of(fs.eta)});
            g.fields.push_back(
                {"etadot", 1, static_cast<int>(fs.etadot.size()), record_of(fs.etadot)});
            g.fields.push_back({"xi", 1, static_cast<int>(tr.xi[n].size()), record_of(tr.xi[n])});
            char buf[32];
            std::snprintf(buf, sizeof(buf), "-fields-%06zu.txt", n);
            write_grid(g, join_path(res.out_dir, name + buf));
        }
    }
}

}  // namespace

CoupledRunResult run_coupled(const RunConfig& cfg, bool write_outputs) {
    auto st = build_stack(cfg);
    const CoupledModules m = st->modules();
    const FixedPointConfig fpc = FixedPointConfig::from_config(cfg);
    const RegularizationKernel kernel = RegularizationKernel::from_config(cfg);
    const ConfigDensity p0 = st->initial_psi();
    const FluidState f0 = st->initial_fluid();
    const Vec xi0 = st->initial_xi(p0);

    CoupledRunResult res;
    res.traj = fixed_point_solve(m, fpc, kernel, f0, p0, xi0, cfg.get_d("run.t_end"),
                                 cfg.get_d("run.dt"));
    res.ledger = energy_ledger(res.traj, st->params, 1e-3, false);
    if (write_outputs) write_coupled_outputs(*st, res);
    return res;
}

FpkRunResult run_fpk(const RunConfig& cfg, bool write_outputs, bool keep_states) {
    auto st = build_stack(cfg);
    const int nqx = st->sbasis.nqx, nqz = st->sbasis.nqz;
    XiSolver xisolve(nqx, nqz, st->params.eps);
    const double rate = cfg.get_d("shear.rate");
    const int nsteps = step_count(cfg);
    const double dt = cfg.get_d("run.dt");
    const PhysicalParams& pp = st->params;

    std::vector<Vec2> v(static_cast<size_t>(nqx) * nqz);
    std::vector<Mat2> gradv(v.size());
    for (int i = 0; i < nqx; ++i)
        for (int j = 0; j < nqz; ++j) {
            const double z = (j + 0.5) / nqz;
            v[i * nqz + j] = Vec2(rate * z, 0.0);
            Mat2 g = Mat2::Zero();
            g(0, 1) = rate;
            gradv[i * nqz + j] = g;
        }
    FlowSample flow;
    flow.v = v;
    flow.gradv = gradv;

    ConfigDensity psi = st->initial_psi();
    Vec xiv;
    {
        const std::string kind = cfg.get_s("init.xi_kind");
        if (kind == "constant")
            xiv = Vec::Ones(nqx * nqz);
        else if (kind == "bump") {
            xiv = Vec(nqx * nqz);
            for (int i = 0; i < nqx; ++i)
                for (int j = 0; j < nqz; ++j)
                    xiv[i * nqz + j] = 1.0 + 0.5 * std::exp(-(sqr((i + 0.5) / nqx - 0.5) +
                                                              sqr((j + 0.5) / nqz - 0.5)) /
                                                            0.05);
        } else
            xiv = st->fp->marginal_at_nodes(psi);
    }

    FpkRunResult res;
    auto push_node = [&](double t, double fx_acc, double fq_acc, double prod_acc,
                         double diss_acc) {
        res.time.push_back(t);
        res.entropy.push_back(pp.kpoly * st->fp->relative_entropy(psi));
        res.fisher_x_acc.push_back(fx_acc);
        res.fisher_q_acc.push_back(fq_acc);
        res.production_acc.push_back(prod_acc);
        res.min_psi.push_back(st->fp->min_psi(psi));
        res.mass.push_back(st->fp->mass(psi));
        res.xi_sup.push_back(xiv.cwiseAbs().maxCoeff());
        res.xi_norm2.push_back(xisolve.norm2_static(xiv));
        res.xi_diss_acc.push_back(diss_acc);
        res.xi_history.push_back(xiv);
        if (keep_states) res.psi_history.push_back(psi);
    };
    push_node(0.0, 0.0, 0.0, 0.0, 0.0);

    double fx_acc = 0.0, fq_acc = 0.0, prod_acc = 0.0, diss_acc = 0.0;
    for (int n = 0; n < nsteps; ++n) {
        const ConfigDensity old = psi;
        st->fp->step(psi, flow, dt);
        ConfigDensity mid;
        mid.f = 0.5 * (old.f + psi.f);
        mid.t = old.t + 0.5 * dt;
        fx_acc += dt * st->fp->fisher_x(mid);
        fq_acc += dt * st->fp->fisher_q(mid);
        prod_acc += dt * st->fp->entropy_production(mid, gradv);
        xisolve.step(xiv, v, nullptr, nullptr, dt);
        diss_acc += dt * xisolve.last_step_dissipation();
        push_node((n + 1) * dt, fx_acc, fq_acc, prod_acc, diss_acc);
    }

    const double wfx = 4.0 * pp.eps * pp.kpoly;
    const double wfq = pp.kpoly * pp.a0 / pp.lambda;
    res.entropy_slack = -1e300;
    res.min_psi_all = 1e300;
    res.mass_drift = 0.0;
    for (size_t n = 0; n < res.time.size(); ++n) {
        const double lhs =
            res.entropy[n] + wfx * res.fisher_x_acc[n] + wfq * res.fisher_q_acc[n];
        const double rhs = res.entropy[0] + res.production_acc[n];
        res.entropy_slack =
            std::max(res.entropy_slack, (lhs - rhs) / std::max(1.0, std::abs(rhs)));
        res.min_psi_all = std::min(res.min_psi_all, res.min_psi[n]);
        res.mass_drift = std::max(res.mass_drift, std::abs(res.mass[n] - res.mass[0]));
        if (res.xi_sup[0] > 0.0)
            res.xi_sup_growth =
                std::max(res.xi_sup_growth, res.xi_sup[n] / res.xi_sup[0] - 1.0);
        res.xi_identity_gap =
            std::max(res.xi_identity_gap,
                     std::abs(res.xi_norm2[n] + 2.0 * res.xi_diss_acc[n] - res.xi_norm2[0]) /
                         std::max(1.0, res.xi_norm2[0]));
    }

    if (write_outputs) {
        res.out_dir = resolve_out_dir(cfg.get_s("run.out_dir"));
        const std::string name = cfg.get_s("run.name");
        CsvWriter csv(join_path(res.out_dir, name + "-entropy.csv"), "polyfsi-entropy v1",
                      {"t", "entropy", "fisher_x_acc", "fisher_q_acc", "production_acc",
                       "min_psi", "mass", "xi_sup", "xi_norm2", "xi_diss_acc"});
        for (size_t n = 0; n < res.time.size(); ++n)
            csv.row({res.time[n], res.entropy[n], res.fisher_x_acc[n], res.fisher_q_acc[n],
                     res.production_acc[n], res.min_psi[n], res.mass[n], res.xi_sup[n],
                     res.xi_norm2[n], res.xi_diss_acc[n]});
        csv.close();
    }
    return res;
}

ShellRunResult run_shell(const RunConfig& cfg, bool write_outputs) {
    const ReferenceShell ref = ReferenceShell::from_config(cfg);
    const KoiterShell koiter = KoiterShell::from_config(ref, cfg);
    const ShellRegularizer reg(ref.n1, ref.n2);
    const ShellStepper stepper = ShellStepper::from_config(koiter, reg, cfg);
    const double varrho = cfg.get_d("coupler.rho");
    const int nsteps = step_count(cfg);
    const double dt = cfg.get_d("run.dt");

    ShellState state;
    state.eta = Mat(ref.n1, ref.n2);
    state.etadot = Mat(ref.n1, ref.n2);
    {
        const double ea = cfg.get_d("init.eta_amp");
        const double e1 = cfg.get_d("init.eta1_amp");
        const double mode = cfg.get_d("init.eta_mode");
        for (int i = 0; i < ref.n1; ++i)
            for (int j = 0; j < ref.n2; ++j) {
                const double x = static_cast<double>(i) / ref.n1;
                state.eta(i, j) = ea * std::cos(2.0 * pi * mode * x);
                state.etadot(i, j) = e1 * std::cos(2.0 * pi * mode * x);
            }
    }
    state.t = 0.0;

    const std::string fkind = cfg.get_s("forcing.kind");
    const double amp = cfg.get_d("forcing.amp");
    const double freq = cfg.get_d("forcing.freq");
    const double fmode = cfg.get_d("forcing.mode");

    ShellRunResult res;
    auto push = [&](double t) {
        res.time.push_back(t);
        res.kinetic.push_back(0.5 * state.etadot.squaredNorm() / (ref.n1 * ref.n2));
        res.elastic.push_back(koiter.energy(state.eta));
        res.regularizer.push_back(varrho * reg.energy(state.eta));
        res.total.push_back(res.kinetic.back() + res.elastic.back() + res.regularizer.back());
    };
    push(0.0);
    for (int n = 0; n < nsteps; ++n) {
        Mat g = Mat::Zero(ref.n1, ref.n2);
        if (fkind == "breathing" && amp != 0.0) {
            const double tm = (n + 0.5) * dt;
            for (int i = 0; i < ref.n1; ++i)
                for (int j = 0; j < ref.n2; ++j)
                    g(i, j) = amp * std::sin(2.0 * pi * freq * tm) *
                              std::cos(2.0 * pi * fmode * (static_cast<double>(i) / ref.n1));
        }
        stepper.step(state, dt, g);
        const AdmissibilityReport rep = check_admissible(ref, state.eta, 0.0);
        if (!rep.ok)
            throw AdmissibilityViolation("shell run left the admissible corridor at t=" +
                                         format_full(state.t));
        push(state.t);
        res.max_increase =
            std::max(res.max_increase, res.total.back() - res.total[res.total.size() - 2]);
    }
    res.final_state = state;

    if (write_outputs) {
        res.out_dir = resolve_out_dir(cfg.get_s("run.out_dir"));
        const std::string name = cfg.get_s("run.name");
        CsvWriter csv(join_path(res.out_dir, name + "-shell.csv"), "polyfsi-shell v1",
                      {"t", "kinetic", "elastic", "regularizer", "total"});
        for (size_t n = 0; n < res.time.size(); ++n)
            csv.row({res.time[n], res.kinetic[n], res.elastic[n], res.regularizer[n],
                     res.total[n]});
        csv.close();
    }
    return res;
}

SweepResult run_sweep_rho(const RunConfig& cfg, bool write_outputs, std::vector<double> rhos) {
    SweepResult res;
    res.report = rho_refinement_study(
        [&cfg](double r) {
            RunConfig c = cfg;
            c.set("coupler.rho", format_full(r));
            return run_coupled(c, false).traj;
        },
        rhos);
    if (write_outputs) {
        res.out_dir = resolve_out_dir(cfg.get_s("run.out_dir"));
        const std::string name = cfg.get_s("run.name");
        CsvWriter lv(join_path(res.out_dir, name + "-sweep-levels.csv"), "polyfsi-sweep v1",
                     {"rho", "sup_reg", "nodes"});
        for (size_t i = 0; i < res.report.rhos.size(); ++i)
            lv.row({res.report.rhos[i], res.report.sup_reg[i],
                    static_cast<double>(res.report.trajectories[i].time.size())});
        lv.close();
        CsvWriter pr(join_path(res.out_dir, name + "-sweep-pairs.csv"), "polyfsi-sweep v1",
                     {"rho_hi", "rho_lo", "cauchy_u", "cauchy_eta", "cauchy_xi"});
        for (size_t i = 0; i + 1 < res.report.rhos.size(); ++i)
            pr.row({res.report.rhos[i], res.report.rhos[i + 1], res.report.cauchy_u[i],
                    res.report.cauchy_eta[i], res.report.cauchy_xi[i]});
        pr.close();
    }
    return res;
}

namespace {

struct CaseReporter {
    std::ostream& os;
    bool all_ok = true;
    void report(const std::string& name, bool ok, const std::string& detail) {
        os << (ok ? "[ ok ] " : "[FAIL] ") << name;
        if (!detail.empty()) os << " (" << detail << ")";
        os << "\n";
        all_ok = all_ok && ok;
    }
};

double rest_drift(const CoupledRunResult& r) {
    double d = 0.0;
    for (const FluidState& fs : r.traj.fluid) {
        d = std::max(d, fs.u1.cwiseAbs().maxCoeff());
        d = std::max(d, fs.u2.cwiseAbs().maxCoeff());
        d = std::max(d, fs.eta.cwiseAbs().maxCoeff());
        d = std::max(d, fs.etadot.cwiseAbs().maxCoeff());
    }
    for (const Vec& x : r.traj.xi) d = std::max(d, (x.array() - 1.0).abs().maxCoeff());
    return d;
}

}  // namespace

bool run_validation(bool full, std::ostream& os) {
    CaseReporter rep{os};

    try {
        RunConfig c;
        RunConfig d;
        d.load_text(c.dump(), "dump");
        rep.report("config dump round-trip", d.dump() == c.dump(), "");
        bool rejected = false;
        try {
            d.set("bogus.key", "1");
        } catch (const ConfigError&) {
            rejected = true;
        }
        rep.report("unknown key rejected", rejected, "");
    } catch (const std::exception& e) {
        rep.report("config checks", false, e.what());
    }

    try {
        const std::string dir = resolve_out_dir("validate-tmp");
        StructuredGrid g;
        g.nx = 3;
        g.nz = 2;
        g.dx = 1.0 / 3;
        g.dz = 0.5;
        g.fields.push_back({"a", 2, 3, {0.1, -2.5e-17, 3.0, 4.0, 1.0 / 3.0, 6.02e23}});
        const std::string p1 = join_path(dir, "rt1.txt");
        const std::string p2 = join_path(dir, "rt2.txt");
        write_grid(g, p1);
        write_grid(read_grid(p1), p2);
        std::ifstream f1(p1), f2(p2);
        std::stringstream s1, s2;
        s1 << f1.rdbuf();
        s2 << f2.rdbuf();
        rep.report("field file round-trip bit-stable", s1.str() == s2.str(), "");
    } catch (const std::exception& e) {
        rep.report("field file round-trip bit-stable", false, e.what());
    }

    try {
        RunConfig c = preset_config("rest-state");
        if (!full) c.set("run.t_end", "0.05");
        c.set("run.out_dir", "validate-tmp");
        const CoupledRunResult r = run_coupled(c, false);
        const double drift = rest_drift(r);
        rep.report("rest state stays at rest", drift < 1e-9 && r.ledger.ok,
                   "drift=" + format_full(drift));
    } catch (const std::exception& e) {
        rep.report("rest state stays at rest", false, e.what());
    }

    try {
        RunConfig c = preset_config("shear-fixed-domain");
        if (!full) c.set("run.t_end", "0.05");
        const FpkRunResult r = run_fpk(c, false);
        const bool ok = r.entropy_slack <= 1e-3 && r.min_psi_all >= -1e-8 &&
                        r.mass_drift < 1e-10 && r.xi_sup_growth <= 1e-6;
        rep.report("prescribed shear entropy ledger", ok,
                   "slack=" + format_full(r.entropy_slack) +
                       " min_psi=" + format_full(r.min_psi_all));
    } catch (const std::exception& e) {
        rep.report("prescribed shear entropy ledger", false, e.what());
    }

    try {
        RunConfig c = preset_config("free-shell-vibration");
        if (!full) c.set("run.t_end", "0.02");
        const ShellRunResult r = run_shell(c, false);
        const double tol = 1e-6 * std::max(1.0, r.total[0]);
        rep.report("free shell vibration energy bounded", r.max_increase <= tol,
                   "max_increase=" + format_full(r.max_increase));
    } catch (const std::exception& e) {
        rep.report("free shell vibration energy bounded", false, e.what());
    }

    try {
        RunConfig c = preset_config("forced-breathing-shell");
        if (!full) c.set("run.t_end", "0.02");
        const CoupledRunResult r = run_coupled(c, false);
        rep.report("forced breathing ledger", r.ledger.ok && !r.traj.guard_tripped,
                   "slack=" + format_full(r.ledger.max_slack));
    } catch (const std::exception& e) {
        rep.report("forced breathing ledger", false, e.what());
    }

    try {
        RunConfig c = preset_config("blow-up-guard");
        const CoupledRunResult r = run_coupled(c, false);
        bool below = true;
        const Mat zero = Mat::Zero(c.get_i("shell.n1"), c.get_i("shell.n2"));
        const double bound =
            check_admissible(ReferenceShell::from_config(c), zero, 0.0).bound;
        for (const FluidState& fs : r.traj.fluid)
            if (fs.eta.size() && fs.eta.cwiseAbs().maxCoeff() >= bound) below = false;
        rep.report("admissibility guard trips below the bound",
                   r.traj.guard_tripped && below,
                   "sup_eta=" + format_full(r.traj.guard_sup_eta));
    } catch (const std::exception& e) {
        rep.report("admissibility guard trips below the bound", false, e.what());
    }

    if (full) {
        try {
            RunConfig c;
            c.load_file("presets/rho-sweep.cfg");
            c.set("run.t_end", "0.1");
            const SweepResult r = run_sweep_rho(c, false);
            rep.report("regularization refinement orders",
                       r.report.cauchy_monotone && r.report.reg_drops, "");
        } catch (const std::exception& e) {
            rep.report("regularization refinement orders", false, e.what());
        }
    }

    os << (rep.all_ok ? "validation passed\n" : "validation FAILED\n");
    return rep.all_ok;
}

int run_scenario(const RunConfig& cfg, std::ostream& os) {
    const std::string sc = cfg.get_s("run.scenario");
    if (sc == "shear-fixed-domain") {
        const FpkRunResult r = run_fpk(cfg, true);
        os << "entropy slack " << format_full(r.entropy_slack) << ", min psi "
           << format_full(r.min_psi_all) << ", mass drift " << format_full(r.mass_drift)
           << "\n";
        return (r.entropy_slack <= 1e-3 && r.min_psi_all >= -1e-8)
                   ? static_cast<int>(ExitCode::ok)
                   : static_cast<int>(ExitCode::inequality_violated);
    }
    if (sc == "free-shell-vibration") {
        const ShellRunResult r = run_shell(cfg, true);
        os << "final total shell energy " << format_full(r.total.back()) << "\n";
        return static_cast<int>(ExitCode::ok);
    }
    if (sc == "rho-sweep") {
        const SweepResult r = run_sweep_rho(cfg, true);
        os << "cauchy monotone " << (r.report.cauchy_monotone ? "yes" : "no")
           << ", regularizer drops " << (r.report.reg_drops ? "yes" : "no") << "\n";
        return static_cast<int>(ExitCode::ok);
    }
    if (sc == "rest-state" || sc == "forced-breathing-shell" || sc == "blow-up-guard") {
        const CoupledRunResult r = run_coupled(cfg, true);
        if (r.traj.guard_tripped) {
            os << "admissibility guard tripped at t=" << format_full(r.traj.time.back())
               << " with sup|eta|=" << format_full(r.traj.guard_sup_eta)
               << "; partial trajectory saved to " << r.out_dir << "\n";
            return static_cast<int>(ExitCode::admissibility_termination);
        }
        os << "ledger " << (r.ledger.ok ? "ok" : "VIOLATED") << ", max slack "
           << format_full(r.ledger.max_slack) << ", outputs in " << r.out_dir << "\n";
        return r.ledger.ok ? static_cast<int>(ExitCode::ok)
                           : static_cast<int>(ExitCode::inequality_violated);
    }
    throw ConfigError("run.scenario: unknown scenario " + sc);
}

}  // namespace polyfsi
