// Acceptance gate: one self-contained check per shipped guarantee, one
// PASS/FAIL line each, exit status = number of failed checks. Tolerances and
// runtime budgets are pinned; frozen constants are marked where they were
// measured on the committed discretization.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "polyfsi/config.hpp"
#include "polyfsi/coupler.hpp"
#include "polyfsi/errors.hpp"
#include "polyfsi/fieldio.hpp"
#include "polyfsi/fluid.hpp"
#include "polyfsi/geometry.hpp"
#include "polyfsi/polymer.hpp"
#include "polyfsi/presets.hpp"
#include "polyfsi/rng.hpp"
#include "polyfsi/shell.hpp"
#include "polyfsi/stress.hpp"
#include "polyfsi/suite.hpp"
#include "polyfsi/util.hpp"

using namespace polyfsi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Shared evidence pools filled as the criteria execute in order.
std::vector<double> g_fpk_slacks;      // entropy-ledger slack of every density run
std::vector<double> g_fpk_sup_growth;  // number-density sup-norm growth of every run
std::vector<double> g_skew_defects;    // |skew defect| of every committed fluid step

void collect_fpk(const FpkRunResult& r) {
    g_fpk_slacks.push_back(r.entropy_slack);
    g_fpk_sup_growth.push_back(r.xi_sup_growth);
}

void collect_skew(const CoupledTrajectory& tr) {
    for (const FluidStepReport& rep : tr.reports)
        g_skew_defects.push_back(std::abs(rep.skew_defect));
}

std::filesystem::path scratch_dir() {
    static const std::filesystem::path root = [] {
        auto p = std::filesystem::temp_directory_path() / "polyfsi-acceptance";
        std::filesystem::remove_all(p);
        std::filesystem::create_directories(p);
        return p;
    }();
    return root;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) return "";
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Shared random-state generators (identical constructions to the module tests,
// so the frozen constants below refer to the same seeded families).

struct SmoothState {
    Vec vals, d1, d2;
};

SmoothState random_smooth_state(const QuadB& quad, Rng& rng) {
    const double a1 = rng.uniform(-0.3, 0.3), a2 = rng.uniform(-0.3, 0.3);
    const double a3 = rng.uniform(-0.2, 0.2), a4 = rng.uniform(-0.1, 0.1);
    const double a5 = rng.uniform(-0.2, 0.2);
    SmoothState s;
    s.vals.resize(quad.n);
    s.d1.resize(quad.n);
    s.d2.resize(quad.n);
    for (int i = 0; i < quad.n; ++i) {
        const double x = quad.q1[i], y = quad.q2[i];
        s.vals(i) = a1 * x + a2 * y + a3 * x * y + a4 * (x * x - y * y) +
                    a5 * std::sin(x) * std::cos(y);
        s.d1(i) = a1 + a3 * y + 2.0 * a4 * x + a5 * std::cos(x) * std::cos(y);
        s.d2(i) = a2 + a3 * x - 2.0 * a4 * y - a5 * std::sin(x) * std::sin(y);
    }
    s.vals.array() += 0.2 - s.vals.minCoeff();
    return s;
}

Mat band_limited(const ReferenceShell& ref, Rng& rng, double amp) {
    Mat eta(ref.n1, ref.n2);
    const double a1 = rng.uniform(-1.0, 1.0), a2 = rng.uniform(-1.0, 1.0);
    const double a3 = rng.uniform(-1.0, 1.0), p = rng.uniform(0.0, 2.0 * pi);
    for (int i = 0; i < ref.n1; ++i)
        for (int j = 0; j < ref.n2; ++j) {
            const double y1 = double(i) / ref.n1, y2 = double(j) / ref.n2;
            eta(i, j) = a1 * std::cos(2.0 * pi * y1 + p) + a2 * std::sin(4.0 * pi * y1) +
                        a3 * std::cos(2.0 * pi * y1) * std::cos(2.0 * pi * y2);
        }
    const double sup = eta.cwiseAbs().maxCoeff();
    if (sup > 0.0) eta *= amp / sup;
    return eta;
}

// ---------------------------------------------------------------------------
// 1. Quiescent equilibrium is a fixed point of the full coupled stepper.

Outcome criterion_rest_state() {
    const auto t0 = Clock::now();
    const RunConfig cfg = preset_config("rest-state");  // 1000 steps of 1e-3
    const CoupledRunResult r = run_coupled(cfg, false);
    collect_skew(r.traj);

    double drift = 0.0;
    for (const FluidState& fs : r.traj.fluid) {
        drift = std::max(drift, fs.u1.cwiseAbs().maxCoeff());
        drift = std::max(drift, fs.u2.cwiseAbs().maxCoeff());
        drift = std::max(drift, fs.eta.cwiseAbs().maxCoeff());
        drift = std::max(drift, fs.etadot.cwiseAbs().maxCoeff());
    }
    for (const Vec& x : r.traj.xi)
        drift = std::max(drift, (x.array() - 1.0).abs().maxCoeff());
    for (const ConfigDensity& p : r.traj.psi)
        drift = std::max(drift, (p.f - r.traj.psi[0].f).cwiseAbs().maxCoeff());

    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = r.traj.time.size() == 1001 && !r.traj.guard_tripped && drift < 1e-9 &&
             secs < 60.0;
    o.detail = "drift=" + fmt(drift) + ", steps=" + std::to_string(r.traj.time.size() - 1) +
               ", " + fmt(secs) + "s (budget 60s)";
    return o;
}

// ---------------------------------------------------------------------------
// 2. Minimum principle: randomized nonnegative initial densities stay above
//    -1e-8 at every step of a prescribed-shear run.

Outcome criterion_minimum_principle() {
    const auto t0 = Clock::now();
    RunConfig base = preset_config("shear-fixed-domain");
    base.set("run.t_end", "0.1");
    base.set("init.psi", "positive_random");

    double worst_min = 1e300;
    for (int seed = 1; seed <= 20; ++seed) {
        RunConfig cfg = base;
        cfg.set("run.seed", std::to_string(seed));
        const FpkRunResult r = run_fpk(cfg, false);
        collect_fpk(r);
        worst_min = std::min(worst_min, r.min_psi_all);
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = worst_min >= -1e-8 && secs < 600.0;
    o.detail = "20 runs, worst min=" + fmt(worst_min) + ", " + fmt(secs) + "s (budget 600s)";
    return o;
}

// ---------------------------------------------------------------------------
// 3. Entropy inequality: on every density-suite run so far plus the committed
//    shear scenario, entropy + weighted Fisher accumulators stay below the
//    initial entropy + drag-power integral with relative slack <= 1e-3.

Outcome criterion_entropy_inequality() {
    const auto t0 = Clock::now();
    const RunConfig cfg = preset_config("shear-fixed-domain");  // t_end = 0.5
    const FpkRunResult r = run_fpk(cfg, false);
    collect_fpk(r);

    double worst = -1e300;
    for (double s : g_fpk_slacks) worst = std::max(worst, s);
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = worst <= 1e-3 && secs < 600.0;
    o.detail = std::to_string(g_fpk_slacks.size()) + " runs, worst slack=" + fmt(worst) +
               ", " + fmt(secs) + "s (budget 600s)";
    return o;
}

// ---------------------------------------------------------------------------
// 4. Number-density maximum principle on all runs, plus the fixed-domain
//    zero-velocity norm/dissipation identity.

Outcome criterion_xi_max_principle() {
    RunConfig cfg = preset_config("shear-fixed-domain");
    cfg.set("shear.rate", "0");
    cfg.set("init.xi_kind", "bump");
    cfg.set("run.t_end", "0.2");
    const FpkRunResult r = run_fpk(cfg, false);
    collect_fpk(r);

    double growth = 0.0;
    for (double g : g_fpk_sup_growth) growth = std::max(growth, g);
    Outcome o;
    o.pass = growth <= 1e-6 && r.xi_identity_gap <= 1e-8;
    o.detail = "sup growth=" + fmt(growth) + " over " +
               std::to_string(g_fpk_sup_growth.size()) +
               " runs, identity gap=" + fmt(r.xi_identity_gap);
    return o;
}

// ---------------------------------------------------------------------------
// 5. The two algebraic forms of the polymer stress agree on smooth states, and
//    the linear-spring equilibrium second moment is the identity matrix.

Outcome criterion_stress_forms() {
    RunConfig dflt;
    const PhysicalParams pp = PhysicalParams::from_config(dflt);

    SpringLaw fene;
    fene.kind = SpringKind::fene;
    fene.b = 10.0;
    const QuadB quad = QuadB::build(fene, 24, 24);
    const MaxwellianTable max = MaxwellianTable::build(fene, quad, 1e5);
    const StressEvaluator ev(fene, quad, max, pp);

    Rng rng(101);
    double worst_rel = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const SmoothState s = random_smooth_state(quad, rng);
        const Mat2 a = ev.kramers(s.vals);
        const PsiSlice slice{s.vals, s.d1, s.d2};
        const Mat2 b = ev.truncated(slice, 1e12);  // plateau never active
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        worst_rel = std::max(worst_rel, (a - b).cwiseAbs().maxCoeff() / scale);
    }

    SpringLaw hook;
    hook.kind = SpringKind::hookean;
    hook.b = 10.0;
    const QuadB hq = QuadB::build(hook, 48, 48);
    const MaxwellianTable hm = MaxwellianTable::build(hook, hq, 1e5);
    const StressEvaluator hev(hook, hq, hm, pp);
    const Mat2 P = hev.chain_moment(Vec::Ones(hq.n));
    const double moment_err =
        std::max({std::abs(P(0, 0) - 1.0), std::abs(P(1, 1) - 1.0), std::abs(P(0, 1)),
                  std::abs(P(1, 0))});

    Outcome o;
    o.pass = worst_rel < 1e-6 && moment_err < 1e-8;
    o.detail = "50 states, worst gap=" + fmt(worst_rel) +
               ", second-moment error=" + fmt(moment_err);
    return o;
}

// ---------------------------------------------------------------------------
// 6. Truncated stress: sup of the truncated moment grows at most linearly in
//    the level (frozen constant for the seeded family), and the truncated
//    stress converges to the untruncated one as the level grows.

Outcome criterion_truncated_stress() {
    RunConfig dflt;
    const PhysicalParams pp = PhysicalParams::from_config(dflt);
    SpringLaw fene;
    fene.kind = SpringKind::fene;
    fene.b = 10.0;
    const QuadB quad = QuadB::build(fene, 24, 24);
    const MaxwellianTable max = MaxwellianTable::build(fene, quad, 1e5);
    const StressEvaluator ev(fene, quad, max, pp);

    Rng rng(55);
    double measured = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        SmoothState s = random_smooth_state(quad, rng);
        const double scale = rng.uniform(5.0, 50.0);
        s.vals *= scale;
        s.d1 *= scale;
        s.d2 *= scale;
        const PsiSlice slice{s.vals, s.d1, s.d2};
        for (double ell : {1.0, 2.0, 4.0, 8.0, 16.0}) {
            const Mat2 P = ev.truncated_moment(slice, ell);
            measured = std::max(measured, P.cwiseAbs().maxCoeff() / ell);
        }
    }
    // frozen regression constant for this seeded family (measured 0.0707718)
    const bool growth_ok =
        measured <= 0.072 && measured <= 0.75 * ev.truncation_bound_constant();

    Rng rng2(23);
    const SmoothState s = random_smooth_state(quad, rng2);
    const PsiSlice slice{s.vals, s.d1, s.d2};
    const Mat2 exact = ev.kramers(s.vals);
    bool monotone = true;
    double prev = 1e30, final_gap = 1e30;
    for (double ell : {1.0, 2.0, 4.0, 8.0, 1e6}) {
        const double gap = (ev.truncated(slice, ell) - exact).cwiseAbs().maxCoeff();
        if (gap > prev + 1e-12) monotone = false;
        prev = gap;
        final_gap = gap;
    }

    Outcome o;
    o.pass = growth_ok && monotone && final_gap < 1e-6;
    o.detail = "growth constant=" + fmt(measured) + " (frozen bound 0.072), final gap=" +
               fmt(final_gap);
    return o;
}

// ---------------------------------------------------------------------------
// 7. Elastic shell energy gradient matches central finite differences, and the
//    undeformed state carries exactly zero energy and gradient.

Outcome criterion_elastic_gradient() {
    ReferenceShell ref;
    ref.n1 = 16;
    ref.n2 = 8;
    ref.bump_amp = 0.04;
    ref.build_tables();
    const KoiterShell shell(ref, 0.1, 1.0, 1.0, false);

    const Mat zero = Mat::Zero(ref.n1, ref.n2);
    const bool zero_ok =
        shell.energy(zero) == 0.0 && shell.gradient(zero).cwiseAbs().maxCoeff() <= 1e-12;

    Rng rng(17);
    const double t = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Mat eta = band_limited(ref, rng, 0.08);
        const Mat zeta = band_limited(ref, rng, 1.0);
        const Mat g = shell.gradient(eta);
        const double directional =
            (g.cwiseProduct(zeta)).sum() / double(ref.n1 * ref.n2);
        const double fd =
            (shell.energy(eta + t * zeta) - shell.energy(eta - t * zeta)) / (2.0 * t);
        worst = std::max(worst,
                         std::abs(directional - fd) / std::max(1.0, std::abs(fd)));
    }

    Outcome o;
    o.pass = zero_ok && worst < 1e-5;
    o.detail = "20 pairs, worst relative gap=" + fmt(worst) +
               std::string(zero_ok ? ", zero state exact" : ", zero state NOT exact");
    return o;
}

// ---------------------------------------------------------------------------
// 8. Coupled energy ledger on the committed forced run, and monotone decay of
//    the total energy in the exactly-conservative unforced regime.

Outcome criterion_coupled_ledger() {
    const auto t0 = Clock::now();
    const RunConfig fc = preset_config("forced-breathing-shell");  // t_end = 0.2
    const CoupledRunResult rf = run_coupled(fc, false);
    collect_skew(rf.traj);
    const bool forced_ok = rf.ledger.ok && !rf.traj.guard_tripped;

    RunConfig dc = preset_config("forced-breathing-shell");
    dc.set("forcing.kind", "none");
    dc.set("forcing.amp", "0");
    dc.set("poly.kpoly", "0");  // decay regime: pure solvent-shell exchange
    dc.set("poly.dh", "0");
    const CoupledRunResult rd = run_coupled(dc, false);
    collect_skew(rd.traj);
    const double e0 = rd.traj.energy.empty() ? 0.0 : rd.traj.energy[0].total();
    const double tol_inc = 1e-9 * std::max(1.0, e0);
    const bool decay_ok = rd.ledger.max_energy_increase <= tol_inc;

    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = forced_ok && decay_ok && secs < 1800.0;
    o.detail = "forced slack=" + fmt(rf.ledger.max_slack) + ", unforced max increase=" +
               fmt(rd.ledger.max_energy_increase) + " (tol " + fmt(tol_inc) + "), " +
               fmt(secs) + "s (budget 1800s)";
    return o;
}

// ---------------------------------------------------------------------------
// 9. The skew-symmetrized convection never feeds the kinetic energy: defects
//    below 1e-12 on every committed coupled step so far and on a dedicated
//    strongly-convected standalone run.

Outcome criterion_skew_convection() {
    FluidSolver fs(32, 16, 1.0, 0);
    FluidState s = fs.make_state();
    Rng rng(5);
    for (int i = 0; i < fs.nx(); ++i) {
        for (int j = 0; j < fs.nz(); ++j) s.u1(i, j) = 0.5 * rng.uniform(-1.0, 1.0);
        for (int j = 1; j < fs.nz(); ++j) s.u2(i, j) = 0.5 * rng.uniform(-1.0, 1.0);
        s.u2(i, 0) = s.u2(i, fs.nz()) = 0.0;
    }
    fs.project_divergence_free(s.u1, s.u2);

    FluidStepData data;
    data.conv_v.resize(fs.cells());
    for (int i = 0; i < fs.nx(); ++i)
        for (int j = 0; j < fs.nz(); ++j) {
            const double x = fs.xc(i), z = fs.zc(j);
            data.conv_v[i * fs.nz() + j] =
                Vec2(0.8 * (std::sin(2.0 * pi * x) + 0.3 * z),
                     0.8 * z * (1.0 - z) * std::cos(2.0 * pi * x));
        }
    double worst_dedicated = 0.0;
    for (int n = 0; n < 50; ++n) {
        fs.step(s, data, 1e-3);
        worst_dedicated =
            std::max(worst_dedicated, std::abs(fs.last_report().skew_defect));
    }

    double worst_suite = 0.0;
    for (double d : g_skew_defects) worst_suite = std::max(worst_suite, d);

    Outcome o;
    o.pass = !g_skew_defects.empty() && worst_suite < 1e-12 && worst_dedicated < 1e-12;
    o.detail = std::to_string(g_skew_defects.size()) +
               " coupled steps, worst=" + fmt(worst_suite) +
               "; dedicated run worst=" + fmt(worst_dedicated);
    return o;
}

// ---------------------------------------------------------------------------
// 10. Regularization refinement: consecutive trajectories become Cauchy in
//     (u, eta, Xi) and the weighted regularizer drops by >= 10x per level.

Outcome criterion_rho_refinement() {
    const auto t0 = Clock::now();
    RunConfig cfg;
    cfg.load_file(std::string(POLYFSI_PRESET_DIR) + "/rho-sweep.cfg");  // t_end = 0.25
    const SweepResult r = run_sweep_rho(cfg, false);

    std::string reg = "sup reg:";
    for (double v : r.report.sup_reg) reg += " " + fmt(v);
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = r.report.cauchy_monotone && r.report.reg_drops && secs < 3600.0;
    o.detail = std::string(r.report.cauchy_monotone ? "cauchy monotone" : "cauchy NOT monotone") +
               ", " + reg + ", " + fmt(secs) + "s (budget 3600s)";
    return o;
}

// ---------------------------------------------------------------------------
// 11. The admissibility guard stops the blow-up scenario with exit code 4
//     before the displacement reaches the collar bound; the saved partial
//     trajectory replays deterministically.

Outcome criterion_admissibility_guard() {
    const auto dir_a = scratch_dir() / "guard-a";
    const auto dir_b = scratch_dir() / "guard-b";

    int code_a = -1, code_b = -1;
    {
        RunConfig cfg = preset_config("blow-up-guard");
        cfg.set("run.out_dir", dir_a.string());
        std::ostringstream os;
        code_a = run_scenario(cfg, os);
    }
    {
        RunConfig cfg = preset_config("blow-up-guard");
        cfg.set("run.out_dir", dir_b.string());
        std::ostringstream os;
        code_b = run_scenario(cfg, os);
    }
    const std::string diag_a = slurp((dir_a / "blow-up-guard-diagnostics.csv").string());
    const std::string diag_b = slurp((dir_b / "blow-up-guard-diagnostics.csv").string());
    const std::string ledger = slurp((dir_a / "blow-up-guard-ledger.txt").string());
    const bool saved = diag_a.size() > 100 && ledger.find("guard_tripped 1") != std::string::npos;
    const bool replay = !diag_a.empty() && diag_a == diag_b;

    // Independent re-run to inspect the trajectory against the collar bound.
    RunConfig cfg = preset_config("blow-up-guard");
    const CoupledRunResult r = run_coupled(cfg, false);
    const ReferenceShell ref = ReferenceShell::from_config(cfg);
    const Mat zero = Mat::Zero(cfg.get_i("shell.n1"), cfg.get_i("shell.n2"));
    const double bound = check_admissible(ref, zero, 0.0).bound;
    bool below = r.traj.guard_tripped;
    double sup_eta = 0.0;
    for (const FluidState& fs : r.traj.fluid)
        if (fs.eta.size()) sup_eta = std::max(sup_eta, fs.eta.cwiseAbs().maxCoeff());
    below = below && sup_eta < bound;

    Outcome o;
    o.pass = code_a == 4 && code_b == 4 && saved && replay && below;
    o.detail = "exit code=" + std::to_string(code_a) + ", sup|eta|=" + fmt(sup_eta) +
               " < bound=" + fmt(bound) + (replay ? ", replay identical" : ", replay DIFFERS") +
               (saved ? ", partial trajectory saved" : ", trajectory MISSING");
    return o;
}

}  // namespace

int main() {
    struct Entry {
        const char* title;
        std::function<Outcome()> fn;
    };
    const std::vector<Entry> entries = {
        {"equilibrium rest state preserved for 1000 steps", criterion_rest_state},
        {"minimum principle under prescribed shear", criterion_minimum_principle},
        {"entropy inequality on every density run", criterion_entropy_inequality},
        {"number-density maximum principle and zero-velocity identity",
         criterion_xi_max_principle},
        {"stress form equivalence and equilibrium second moment", criterion_stress_forms},
        {"truncated stress growth bound and convergence", criterion_truncated_stress},
        {"elastic gradient matches finite differences", criterion_elastic_gradient},
        {"coupled energy ledger and unforced decay", criterion_coupled_ledger},
        {"skew convection feeds no kinetic energy", criterion_skew_convection},
        {"regularization refinement is Cauchy with vanishing regularizer",
         criterion_rho_refinement},
        {"admissibility guard stops the run deterministically",
         criterion_admissibility_guard},
    };

    int failures = 0;
    for (size_t i = 0; i < entries.size(); ++i) {
        Outcome o;
        try {
            o = entries[i].fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failures;
        std::printf("[%s] %2zu/11 %s — %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                    entries[i].title, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance: %zu/11 criteria passed\n", entries.size() - failures);
    return failures;
}
