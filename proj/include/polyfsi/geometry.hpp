#pragma once

#include <complex>
#include <vector>

#include "polyfsi/config.hpp"
#include "polyfsi/errors.hpp"
#include "polyfsi/fft.hpp"
#include "polyfsi/util.hpp"

namespace polyfsi {

/// Reference mid-surface over the flat periodic square, given as an analytic
/// graph phi(y) = (y1, y2, 1 + h(y)) with h = bump_amp * cos(2 pi y1) cos(2 pi y2).
/// Carries the precomputed pointwise geometry fields every shell formula needs.
struct ReferenceShell {
    int n1 = 32, n2 = 2;
    double L = 0.5;        // collar depth
    double Ltilde = 0.5;   // admissibility bound of the elastic energy
    double gamma_min = 0.1;
    double bump_amp = 0.0;

    // analytic height map and derivatives (orders encoded by (o1,o2))
    double h(double y1, double y2, int o1, int o2) const;

    Vec3 phi(double y1, double y2) const;
    Vec3 dphi(int i, double y1, double y2) const;        // i in {1,2}
    Vec3 ddphi(int i, int j, double y1, double y2) const;
    Vec3 nu(double y1, double y2) const;                 // unit normal
    Vec3 dnu(int i, double y1, double y2) const;
    Vec3 ddnu(int i, int j, double y1, double y2) const;
    double area_factor(double y1, double y2) const;      // |d1 phi x d2 phi|

    /// Pointwise geometry tables on the n1 x n2 grid, node (i,j) at (i/n1, j/n2).
    struct Tables {
        std::vector<Vec3> d1, d2, dd11, dd12, dd22;       // phi derivatives
        std::vector<Vec3> nu, dnu1, dnu2, ddnu11, ddnu12, ddnu22;
        std::vector<Vec3> n0;                             // nu * area_factor
        std::vector<Vec3> A1, A1b, A2, A2b, C1, C2;       // deformed-normal coefficients
        Vec s;                                            // area factor
        Vec b11, b12, b22;                                // d_i phi . d_j nu + d_j phi . d_i nu
        Vec c11, c12, c22;                                // d_i nu . d_j nu
        Vec r11, r12, r22;                                // dd_ij phi . nu
        Vec gC1, gC2;                                     // nu . C1, nu . C2 (measure ratio)
    };
    Tables tables;

    void build_tables();

    static ReferenceShell from_config(const RunConfig& cfg);

    int idx(int i, int j) const { return i * n2 + j; }
};

/// Displacement/velocity pair of the moving shell at one time.
struct ShellState {
    Mat eta;     // n1 x n2
    Mat etadot;  // n1 x n2
    double t = 0.0;
};

struct AdmissibilityReport {
    bool ok = false;
    double sup_eta = 0.0;
    double min_gamma = 1.0;
    double bound = 0.0;    // invertibility bound on sup|eta| implied by the collar profile
    double margin = 0.0;   // bound*(1-corridor) - sup_eta
};

/// Non-unit deformed normal of phi + eta nu, evaluated on the grid (3 x n1*n2 columns).
std::vector<Vec3> deformed_normal(const ReferenceShell& ref, const Mat& eta);

/// Surface measure ratio gamma(eta) on the grid.
Mat geometric_factor(const ReferenceShell& ref, const Mat& eta);

/// Admissibility check of a displacement field against the collar profile and gamma floor.
AdmissibilityReport check_admissible(const ReferenceShell& ref, const Mat& eta, double corridor_margin);

/// 1-D spectral interpolant of a periodic grid function on [0,1).
class Spectral1D {
   public:
    Spectral1D() = default;
    explicit Spectral1D(const Vec& values);  // size must be a power of 2
    double eval(double x) const;
    double eval_d(double x) const;   // first derivative
    int n() const { return static_cast<int>(coef_.size()); }

   private:
    std::vector<std::complex<double>> coef_;
};

/// Collar profile beta of the slab domain map: 0 on [-1,-0.75], 1 on [-0.25,0], C^2.
double collar_beta(double s);
double collar_beta_d(double s);

/// Boundary-fitted coordinate map of the slab cross-section [0,1) x (0,1]:
///   Psi_eta(x, z) = (x, z + eta(x) beta((z-1)/L)),
/// identity below the collar, graph motion at the top.
class DomainMap {
   public:
    DomainMap() = default;
    DomainMap(const ReferenceShell& ref, const Vec& eta_line, const Vec& etadot_line,
              double newton_tol, int newton_max_iter);

    double eta(double x) const { return eta_.eval(x); }
    double eta_d(double x) const { return eta_.eval_d(x); }
    double etadot(double x) const { return etadot_.eval(x); }

    /// Collar profile in z: beta((z-1)/L) and derivative d/dz.
    double btilde(double z) const;
    double btilde_d(double z) const;

    /// Forward map and its Jacobian entries: F = [[1,0],[a,c]], J = det = c.
    Vec2 forward(double x, double z) const;
    double jac_a(double x, double z) const;  // d(second component)/dx
    double jac_c(double x, double z) const;  // d(second component)/dz
    double mesh_velocity(double x, double z) const;  // vertical, etadot(x)*btilde(z)

    /// Inverse map by Newton in the vertical coordinate.
    Vec2 inverse(double x, double Z) const;

    /// Horizontal reference coordinate and reference offset of a physical point.
    double project_y(double x, double /*Z*/) const { return x; }
    double offset_s(double /*x*/, double Z) const { return Z - 1.0; }

    double collar_depth() const { return L_; }

   private:
    Spectral1D eta_, etadot_;
    double L_ = 0.5;
    double newton_tol_ = 1e-12;
    int newton_max_iter_ = 50;
};

/// Build the slab domain map for the current shell state (uses the first grid row,
/// coupled scenarios keep the shell invariant in y2).
DomainMap build_domain_map(const ReferenceShell& ref, const ShellState& state, const RunConfig& cfg);

}  // namespace polyfsi
