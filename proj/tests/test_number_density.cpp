#include <doctest.h>

#include <cmath>
#include <vector>

#include "polyfsi/config.hpp"
#include "polyfsi/geometry.hpp"
#include "polyfsi/number_density.hpp"
#include "polyfsi/rng.hpp"
#include "polyfsi/util.hpp"

using namespace polyfsi;

namespace {

std::vector<Vec2> still(int cells) { return std::vector<Vec2>(cells, Vec2::Zero()); }

Vec random_positive(const XiSolver& s, Rng& rng) {
    Vec xi(s.cells());
    for (int ix = 0; ix < s.nx(); ++ix)
        for (int iz = 0; iz < s.nz(); ++iz) {
            const double x = s.xc(ix), z = s.zc(iz);
            xi(s.cell(ix, iz)) = 1.0 + 0.4 * std::cos(2.0 * pi * x) * std::cos(pi * z) +
                                 0.1 * std::cos(4.0 * pi * x) + 0.05 * rng.uniform(-1.0, 1.0);
        }
    return xi;
}

}  // namespace

TEST_CASE("constants are stationary on static and moving meshes") {
    XiSolver solver(16, 8, 0.1);
    Vec xi = Vec::Constant(solver.cells(), 1.7);

    // static mesh, zero velocity
    Vec a = xi;
    for (int s = 0; s < 20; ++s) solver.step(a, still(solver.cells()), nullptr, nullptr, 1e-3);
    CHECK((a.array() - 1.7).abs().maxCoeff() < 1e-13);

    // static mesh, prescribed divergence-free shear
    std::vector<Vec2> shear(solver.cells());
    for (int ix = 0; ix < solver.nx(); ++ix)
        for (int iz = 0; iz < solver.nz(); ++iz)
            shear[solver.cell(ix, iz)] = Vec2(solver.zc(iz), 0.0);
    Vec b = xi;
    for (int s = 0; s < 20; ++s) solver.step(b, shear, nullptr, nullptr, 1e-3);
    CHECK((b.array() - 1.7).abs().maxCoeff() < 1e-12);

    // moving mesh driven by a breathing shell line
    ReferenceShell ref;
    ref.n1 = 16;
    ref.n2 = 2;
    ref.build_tables();
    Vec c = xi;
    double t = 0.0;
    const double dt = 1e-3;
    auto line = [&](double time) {
        Vec e(ref.n1);
        for (int i = 0; i < ref.n1; ++i)
            e(i) = 0.05 * std::sin(2.0 * pi * time) * std::cos(2.0 * pi * i / ref.n1);
        return e;
    };
    auto linedot = [&](double time) {
        Vec e(ref.n1);
        for (int i = 0; i < ref.n1; ++i)
            e(i) = 0.05 * 2.0 * pi * std::cos(2.0 * pi * time) * std::cos(2.0 * pi * i / ref.n1);
        return e;
    };
    for (int s = 0; s < 20; ++s) {
        const DomainMap m0(ref, line(t), linedot(t), 1e-12, 50);
        const DomainMap m1(ref, line(t + dt), linedot(t + dt), 1e-12, 50);
        solver.step(c, still(solver.cells()), &m0, &m1, dt);
        t += dt;
    }
    CHECK((c.array() - 1.7).abs().maxCoeff() < 1e-11);
}

TEST_CASE("pure diffusion conserves mass and decays to the mean") {
    XiSolver solver(16, 8, 0.1);
    Rng rng(3);
    Vec xi = random_positive(solver, rng);
    const double mass0 = solver.mass(xi, nullptr);
    const double mean = mass0;  // domain volume is one
    double dev0 = (xi.array() - mean).abs().maxCoeff();
    for (int s = 0; s < 1200; ++s) {
        solver.step(xi, still(solver.cells()), nullptr, nullptr, 1e-3);
        CHECK(std::abs(solver.mass(xi, nullptr) - mass0) < 1e-10 * std::max(1.0, mass0));
    }
    const double dev1 = (xi.array() - mean).abs().maxCoeff();
    CHECK(dev1 < 0.05 * dev0);
}

TEST_CASE("fixed-domain dissipation identity holds to high precision") {
    XiSolver solver(16, 8, 0.1);
    Rng rng(5);
    Vec xi = random_positive(solver, rng);
    const double n0 = solver.norm2_static(xi);
    double diss = 0.0;
    const double dt = 1e-3;
    for (int s = 0; s < 200; ++s) {
        solver.step(xi, still(solver.cells()), nullptr, nullptr, dt);
        diss += dt * solver.last_step_dissipation();
    }
    const double lhs = solver.norm2_static(xi) + 2.0 * diss;
    CHECK(std::abs(lhs - n0) < 1e-8 * std::max(1.0, n0));
}

TEST_CASE("second-order spatial convergence on a manufactured mode") {
    // xi(t) = exp(-4 pi^2 eps t) cos(2 pi x): exact solution of pure diffusion
    const double eps = 0.1, tend = 0.05, dt = 1e-5;
    std::vector<double> errs;
    for (int nx : {8, 16, 32}) {
        XiSolver solver(nx, 4, eps);
        Vec xi(solver.cells());
        for (int ix = 0; ix < nx; ++ix)
            for (int iz = 0; iz < 4; ++iz)
                xi(solver.cell(ix, iz)) = std::cos(2.0 * pi * solver.xc(ix));
        const int steps = static_cast<int>(std::round(tend / dt));
        for (int s = 0; s < steps; ++s)
            solver.step(xi, still(solver.cells()), nullptr, nullptr, dt);
        const double decay = std::exp(-4.0 * pi * pi * eps * tend);
        double err = 0.0;
        for (int ix = 0; ix < nx; ++ix)
            err = std::max(err,
                           std::abs(xi(solver.cell(ix, 0)) - decay * std::cos(2.0 * pi * solver.xc(ix))));
        errs.push_back(err);
    }
    CHECK(errs[0] / errs[1] > 3.4);  // ratio 4 at second order
    CHECK(errs[1] / errs[2] > 3.4);
}

TEST_CASE("sup norm never grows under transport-diffusion") {
    XiSolver solver(16, 8, 0.1);
    Rng rng(7);
    Vec xi = random_positive(solver, rng);
    const double sup0 = xi.cwiseAbs().maxCoeff();
    std::vector<Vec2> shear(solver.cells());
    for (int ix = 0; ix < solver.nx(); ++ix)
        for (int iz = 0; iz < solver.nz(); ++iz)
            shear[solver.cell(ix, iz)] = Vec2(0.5 * solver.zc(iz), 0.0);
    double sup = 0.0;
    for (int s = 0; s < 300; ++s) {
        solver.step(xi, shear, nullptr, nullptr, 1e-3);
        sup = std::max(sup, xi.cwiseAbs().maxCoeff());
    }
    CHECK(sup <= sup0 * (1.0 + 1e-6));
    CHECK(xi.minCoeff() >= -1e-10);
}

TEST_CASE("renormalized balances along a diffusion history") {
    XiSolver solver(16, 8, 0.1);
    Rng rng(11);
    Vec xi = random_positive(solver, rng);
    std::vector<Vec> hist;
    hist.push_back(xi);
    const double dt = 1e-3;
    for (int s = 0; s < 100; ++s) {
        solver.step(xi, still(solver.cells()), nullptr, nullptr, dt);
        hist.push_back(xi);
    }
    // quadratic functional: monotone decay with a small defect
    const RenormalizedReport q = renormalized_check(solver, hist, dt, ThetaKind::quadratic);
    CHECK(q.monotone);
    CHECK(q.drift <= 0.0);
    CHECK(q.max_residual < 1e-8);
    // linear functional: pure mass conservation, equality
    const RenormalizedReport l = renormalized_check(solver, hist, dt, ThetaKind::linear);
    CHECK(l.monotone);
    CHECK(std::abs(l.drift) < 1e-10);
    CHECK(l.max_residual < 1e-10);
    // eighth-power sup proxy never increases
    const RenormalizedReport p = renormalized_check(solver, hist, dt, ThetaKind::power8);
    CHECK(p.monotone);
}

TEST_CASE("mass uses the metric of the supplied map") {
    ReferenceShell ref;
    ref.n1 = 16;
    ref.n2 = 2;
    ref.build_tables();
    XiSolver solver(16, 8, 0.1);
    const Vec xi = Vec::Ones(solver.cells());
    CHECK(solver.mass(xi, nullptr) == doctest::Approx(1.0).epsilon(1e-12));
    // lifting the top by a constant adds exactly that volume; the midpoint
    // quadrature of the Jacobian converges to it at second order
    const double c = 0.1;
    const DomainMap lifted(ref, Vec::Constant(ref.n1, c), Vec::Zero(ref.n1), 1e-12, 50);
    const double err8 = std::abs(solver.mass(xi, &lifted) - (1.0 + c));
    CHECK(err8 < 0.01);
    XiSolver fine(16, 32, 0.1);
    const double err32 = std::abs(fine.mass(Vec::Ones(fine.cells()), &lifted) - (1.0 + c));
    CHECK(err32 < err8 / 4.0);
}
