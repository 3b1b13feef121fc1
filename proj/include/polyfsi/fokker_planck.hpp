#pragma once

#include <functional>
#include <vector>

#include "polyfsi/fpbasis.hpp"
#include "polyfsi/geometry.hpp"
#include "polyfsi/polymer.hpp"
#include "polyfsi/util.hpp"

namespace polyfsi {

/// Galerkin coefficients of the normalized configuration density psi-hat on the
/// tensor basis (configuration eigenfunctions) x (spatial Fourier-cosine modes):
/// f(r, l) multiplies phi_r(q) * w_l(xhat).
struct ConfigDensity {
    Mat f;
    double t = 0.0;
};

/// Velocity data for one step, sampled at the spatial quadrature nodes at the
/// midpoint time: physical Cartesian velocity and velocity gradient
/// (gradv(a,b) = d u_a / d x_b). Maps at both endpoint times; null = static slab.
struct FlowSample {
    std::vector<Vec2> v;
    std::vector<Mat2> gradv;
    const DomainMap* map_n = nullptr;
    const DomainMap* map_np1 = nullptr;
};

/// Tensor-Galerkin solver of the center-of-mass Fokker-Planck system on the
/// moving slab, implicit midpoint in time with explicit (optionally swept) drag.
/// Transport uses the velocity relative to the mesh and the gradient on the test
/// function, which cancels every boundary term against the natural flux condition
/// and conserves the weighted mass exactly, moving mesh included.
class FPSolver {
   public:
    FPSolver(const SpringLaw& law, const PhysicalParams& params, const QuadB& quad,
             const MaxwellianTable& max, const ConfigBasis& cbasis, const SpatialBasis& sbasis,
             double ell, int drag_picard, double tol_neg);

    /// Exact representation of the spatially uniform equilibrium psi-hat == 1.
    ConfigDensity equilibrium() const;

    /// Weighted least-squares projection of pointwise data psi0(x, z, q1, q2).
    /// With regularize_initial the data is first mapped through the initial-data
    /// regularization (weight-ratio damping and plateau cutoff at the current level).
    ConfigDensity project(const std::function<double(double, double, double, double)>& psi0,
                          const DomainMap* map, bool regularize_initial = true) const;

    void step(ConfigDensity& state, const FlowSample& flow, double dt);

    /// Weighted mass int int Mm psi-hat J; conserved exactly by step().
    double mass(const ConfigDensity& s, const DomainMap* m1 = nullptr,
                const DomainMap* m2 = nullptr) const;

    /// Relative entropy int int M F(psi-hat) J with F(s) = s log s + 1/e.
    double relative_entropy(const ConfigDensity& s, const DomainMap* m1 = nullptr,
                            const DomainMap* m2 = nullptr) const;

    /// Spatial and configurational Fisher information int int M |grad sqrt(psi)|^2 J;
    /// nodes below the negativity clip contribute zero.
    double fisher_x(const ConfigDensity& s, const DomainMap* m1 = nullptr,
                    const DomainMap* m2 = nullptr) const;
    double fisher_q(const ConfigDensity& s, const DomainMap* m1 = nullptr,
                    const DomainMap* m2 = nullptr) const;

    /// Entropy production rate of the truncated drag term:
    /// k sum_i int int (grad v) : (q_i x Gamma_ell(psi) grad_{q_i} psi) M J.
    double entropy_production(const ConfigDensity& s, const std::vector<Mat2>& gradv,
                              const DomainMap* m1 = nullptr, const DomainMap* m2 = nullptr) const;

    /// Extrema of psi-hat over the full quadrature node set.
    double min_psi(const ConfigDensity& s) const;
    double max_psi(const ConfigDensity& s) const;

    /// Marginal against the exact weight: coefficients of int_B M psi dq on the
    /// spatial basis, and its values at the spatial quadrature nodes.
    Vec marginal_coeffs(const ConfigDensity& s) const;
    Vec marginal_at_nodes(const ConfigDensity& s) const;

    /// Configuration slices (values and q-derivatives at configuration nodes) at
    /// every spatial node, as three (quad.n x nq) matrices.
    void slices(const ConfigDensity& s, Mat& vals, Mat& dq1, Mat& dq2) const;

    const SpatialBasis& space() const { return *sb_; }
    const ConfigBasis& config() const { return *cb_; }
    const QuadB& quad() const { return *quad_; }
    const MaxwellianTable& maxwellian() const { return *max_; }
    const PhysicalParams& params() const { return params_; }
    double ell() const { return ell_; }
    double tol_neg() const { return tol_neg_; }

   private:
    struct Metric {
        Vec J, a, c, wmesh;
    };
    Metric sample_metric(const DomainMap* m1, const DomainMap* m2) const;
    Mat mass_matrix(const Vec& J) const;
    void physical_gradients(const Metric& met, Mat& gx, Mat& gz) const;
    Mat drag_rhs(const Mat& fmid, const std::vector<Mat2>& gradv, const Metric& met) const;

    SpringLaw law_;
    PhysicalParams params_;
    const QuadB* quad_;
    const MaxwellianTable* max_;
    const ConfigBasis* cb_;
    const SpatialBasis* sb_;
    double ell_;
    int drag_picard_;
    double tol_neg_;
    Vec momM_;   // int_B M phi_r (exact-weight moments)
    Vec wM_;     // configuration weights w * M
    Vec kappa_;  // (A_11 / 4 lambda) * lambda_r per configuration mode
};

}  // namespace polyfsi
