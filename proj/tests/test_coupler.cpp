#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "polyfsi/config.hpp"
#include "polyfsi/coupler.hpp"
#include "polyfsi/presets.hpp"
#include "polyfsi/rng.hpp"
#include "polyfsi/suite.hpp"
#include "polyfsi/util.hpp"

using namespace polyfsi;

TEST_CASE("mollifier taps have unit mass and collapse to the identity below h") {
    for (double width : {0.03, 0.1, 0.37}) {
        const auto t = RegularizationKernel::taps(width, 0.01);
        REQUIRE(!t.empty());
        double total = t[0];
        for (size_t j = 1; j < t.size(); ++j) {
            total += 2.0 * t[j];
            CHECK(t[j] > 0.0);
            CHECK(t[j] < t[j - 1]);  // monotone bump profile
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(t.size() == static_cast<size_t>(width / 0.01) + 1);
    }
    const auto id = RegularizationKernel::taps(0.005, 0.01);
    REQUIRE(id.size() == 1);
    CHECK(id[0] == 1.0);
}

TEST_CASE("line and slab mollification reproduce constants and damp modes") {
    const auto taps = RegularizationKernel::taps(0.2, 1.0 / 32);

    // circular: constants exact
    CHECK((mollify_circular(Vec::Constant(32, 2.3), taps).array() - 2.3).abs().maxCoeff() <
          1e-14);

    // circular: single mode is damped by a positive factor strictly below one
    Vec mode(32);
    for (int i = 0; i < 32; ++i) mode(i) = std::cos(2.0 * pi * 3 * i / 32.0);
    const Vec sm = mollify_circular(mode, taps);
    double factor = 0.0;
    for (int i = 0; i < 32; ++i) factor = std::max(factor, std::abs(sm(i)));
    CHECK(factor < 1.0);
    CHECK(factor > 0.3);
    // and the damped line is still the same mode: ratio uniform where the mode is large
    for (int i = 0; i < 32; ++i)
        if (std::abs(mode(i)) > 0.5) CHECK(sm(i) / mode(i) == doctest::Approx(factor).epsilon(1e-10));

    // slab: x circular, z zero extension; constants exact away from the z boundary
    Mat f = Mat::Constant(32, 16, 1.4);
    const auto tz = RegularizationKernel::taps(0.1, 1.0 / 16);
    const Mat g = mollify_slab(f, taps, tz);
    const int mz = static_cast<int>(tz.size()) - 1;
    for (int i = 0; i < 32; ++i)
        for (int j = mz; j < 16 - mz; ++j)
            CHECK(std::abs(g(i, j) - 1.4) < 1e-14);
    // zero extension pulls the value down inside the boundary band
    CHECK(g(5, 0) < 1.4 - 1e-3);
}

TEST_CASE("temporal mollification uses even reflection so constants survive ends") {
    const auto taps = RegularizationKernel::taps(0.05, 0.01);
    REQUIRE(taps.size() > 2);
    std::vector<Vec> hist(20, Vec::Constant(4, 0.8));
    const auto out = mollify_time(hist, taps);
    REQUIRE(out.size() == hist.size());
    for (const Vec& v : out) CHECK((v.array() - 0.8).abs().maxCoeff() < 1e-14);

    // a linear-in-time history is preserved in the interior (symmetric taps)
    std::vector<Vec> lin(20);
    for (int n = 0; n < 20; ++n) lin[n] = Vec::Constant(4, 0.1 * n);
    const auto lout = mollify_time(lin, taps);
    const int m = static_cast<int>(taps.size()) - 1;
    for (int n = m; n < 20 - m; ++n)
        CHECK((lout[n] - lin[n]).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("velocity regularization fixes constants and is bounded in gradient") {
    RegularizationKernel kernel;
    kernel.varrho = 1e-2;
    kernel.width_space = 0.5 * std::sqrt(kernel.varrho);
    kernel.width_time = 0.5 * std::sqrt(kernel.varrho);
    kernel.width_shell = 0.5 * std::sqrt(kernel.varrho);
    const int nx = 32, nz = 16, nt = 12;
    const double dt = 1e-3;

    std::vector<CenterField> hist(nt);
    for (auto& c : hist) {
        c.vx = Mat::Constant(nx, nz, 0.7);
        c.vz = Mat::Constant(nx, nz, -0.4);
    }
    const auto out = regularize_velocity(hist, kernel, dt);
    REQUIRE(out.size() == hist.size());
    const auto tz = RegularizationKernel::taps(kernel.width_space, 1.0 / nz);
    const int mz = static_cast<int>(tz.size()) - 1;
    for (const auto& c : out)
        for (int i = 0; i < nx; ++i)
            for (int j = mz; j < nz - mz; ++j) {
                CHECK(std::abs(c.vx(i, j) - 0.7) < 1e-12);
                CHECK(std::abs(c.vz(i, j) + 0.4) < 1e-12);
            }

    // smoothing bound: the mollified gradient is controlled by the L2 size of the
    // data; measure the constant for this kernel and freeze it
    Rng rng(21);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<CenterField> rough(nt);
        double l2sq = 0.0;
        for (auto& c : rough) {
            c.vx = Mat(nx, nz);
            c.vz = Mat::Zero(nx, nz);
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j < nz; ++j) c.vx(i, j) = rng.uniform(-1.0, 1.0);
            l2sq += c.vx.squaredNorm() / (nx * nz) * dt;
        }
        const auto sm = regularize_velocity(rough, kernel, dt);
        double grad = 0.0;
        for (const auto& c : sm)
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j + 1 < nz; ++j) {
                    const int ir = (i + 1) % nx;
                    grad = std::max(grad, std::abs(c.vx(ir, j) - c.vx(i, j)) * nx);
                    grad = std::max(grad, std::abs(c.vx(i, j + 1) - c.vx(i, j)) * nz);
                }
        worst = std::max(worst, grad / std::sqrt(l2sq));
    }
    // frozen for this seeded kernel/grid family (measured 164.20027559103434)
    CHECK(worst < 170.0);
}

TEST_CASE("shell regularization approaches the identity as the width shrinks") {
    const int n = 64;
    Vec line(n);
    for (int i = 0; i < n; ++i)
        line(i) = 0.3 * std::sin(2.0 * pi * i / n) + 0.1 * std::cos(4.0 * pi * i / n);
    std::vector<Vec> hist(10, line);

    double prev = 1e300;
    for (double rho : {1e-1, 1e-2, 1e-3, 1e-4}) {
        RegularizationKernel k;
        k.varrho = rho;
        k.width_space = 0.5 * std::sqrt(rho);
        k.width_time = 0.5 * std::sqrt(rho);
        k.width_shell = 0.5 * std::sqrt(rho);
        const auto out = regularize_shell(hist, k, 1e-3);
        double gap = 0.0;
        for (const Vec& v : out) gap = std::max(gap, (v - line).cwiseAbs().maxCoeff());
        CHECK(gap < prev + 1e-15);
        prev = gap;
    }
    CHECK(prev < 1e-12);  // widths below the spacings: exact identity
}

TEST_CASE("rest initial data is a fixed point of the coupled solve") {
    RunConfig cfg = preset_config("rest-state");
    cfg.set("run.t_end", "0.02");
    const CoupledRunResult r = run_coupled(cfg, false);

    CHECK(!r.traj.guard_tripped);
    for (const FluidState& s : r.traj.fluid) {
        CHECK(s.u1.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(s.u2.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(s.eta.cwiseAbs().maxCoeff() < 1e-12);
    }
    for (size_t n = 0; n < r.traj.psi.size(); ++n)
        CHECK((r.traj.psi[n].f - r.traj.psi[0].f).cwiseAbs().maxCoeff() < 1e-11);
    CHECK(r.ledger.max_slack <= 1e-12);
    // each window needs exactly the residual-check iteration count of a fixed point
    const double avg_iters =
        static_cast<double>(r.traj.iterations_total) / std::max<size_t>(1, r.traj.windows.size());
    CHECK(avg_iters <= 2.0);
}

TEST_CASE("forced run contracts inside every window and keeps the ledger") {
    RunConfig cfg = preset_config("forced-breathing-shell");
    cfg.set("run.t_end", "0.02");
    const CoupledRunResult r = run_coupled(cfg, false);

    CHECK(!r.traj.guard_tripped);
    CHECK(r.ledger.ok);
    CHECK(r.ledger.max_slack <= 1e-3);

    // Picard residuals drop monotonically by a uniform factor within each window
    const auto& res = r.traj.fp_residuals;
    REQUIRE(res.size() >= 2);
    double worst_ratio = 0.0;
    int drops = 0;
    for (size_t i = 1; i < res.size(); ++i) {
        if (res[i - 1] > 1e-13 && res[i] < res[i - 1]) {
            worst_ratio = std::max(worst_ratio, res[i] / res[i - 1]);
            ++drops;
        }
    }
    CHECK(drops >= 1);
    CHECK(worst_ratio < 1.0);
    // frozen regression for this preset (measured 0.4981040801280659)
    CHECK(worst_ratio < 0.6);

    // trajectory sup of eta stays inside the guarded corridor
    const RunConfig& c = cfg;
    const double corridor = (1.0 - c.get_d("coupler.margin")) *
                            (c.get_d("geom.L") * (1.0 - c.get_d("geom.gamma_min")));
    for (const FluidState& s : r.traj.fluid)
        CHECK(s.eta.cwiseAbs().maxCoeff() < corridor + 1e-12);
}

TEST_CASE("refinement study on rest data reports exact ties at the floors") {
    RunConfig cfg = preset_config("rest-state");
    cfg.set("run.t_end", "0.01");
    const SweepResult sw = run_sweep_rho(cfg, false, {1e-1, 1e-2});
    const RhoStudyReport& rep = sw.report;
    REQUIRE(rep.rhos.size() == 2);
    for (double c : rep.cauchy_u) CHECK(c <= 1e-14);
    for (double c : rep.cauchy_eta) CHECK(c <= 1e-14);
    for (double c : rep.cauchy_xi) CHECK(c <= 1e-14);
    for (double s : rep.sup_reg) CHECK(s <= 1e-16);
    CHECK(rep.cauchy_monotone);
}
