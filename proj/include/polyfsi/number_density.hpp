#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "polyfsi/geometry.hpp"
#include "polyfsi/util.hpp"

namespace polyfsi {

/// Cell-centered polymer number density on the fluid grid, Crank-Nicolson in time,
/// advective-form transport (keeps constants exactly stationary on moving meshes)
/// and symmetric metric-weighted diffusion.
class XiSolver {
   public:
    XiSolver(int nx, int nz, double eps);

    int nx() const { return nx_; }
    int nz() const { return nz_; }
    double eps() const { return eps_; }
    int cells() const { return nx_ * nz_; }
    int cell(int ix, int iz) const { return ix * nz_ + iz; }
    double xc(int ix) const { return (ix + 0.5) * h1_; }
    double zc(int iz) const { return (iz + 0.5) * h2_; }

    /// One step; maps may be null for the static reference domain. Velocity samples are
    /// physical Cartesian components at cell centers at the midpoint time; the mesh
    /// velocity is derived from the maps.
    void step(Vec& xi, const std::vector<Vec2>& v_centers, const DomainMap* map_n,
              const DomainMap* map_np1, double dt);

    /// Symmetric diffusion form value <K xi, xi> (static reference metric).
    double dissipation_static(const Vec& xi) const;

    /// Squared L2 norm with the static cell measure.
    double norm2_static(const Vec& xi) const { return xi.squaredNorm() * h1_ * h2_; }

    /// Mass with the metric of the given map (null = static).
    double mass(const Vec& xi, const DomainMap* map) const;

    /// Gradient accumulator sample used by the fixed-domain dissipation identity:
    /// value of the diffusion form at the midpoint of the last step.
    double last_step_dissipation() const { return last_dissipation_; }

   private:
    Eigen::SparseMatrix<double> assemble_diffusion(const DomainMap* map_mid) const;
    Eigen::SparseMatrix<double> assemble_advection(const std::vector<Vec2>& v_centers,
                                                   const DomainMap* map_mid) const;
    Vec jacobian_centers(const DomainMap* map) const;

    int nx_, nz_;
    double h1_, h2_, eps_;
    mutable double last_dissipation_ = 0.0;
};

enum class ThetaKind { quadratic, linear, power8 };

struct RenormalizedReport {
    double max_residual = 0.0;   // worst per-step defect of the renormalized balance
    bool monotone = true;        // the theta functional never increased
    double drift = 0.0;          // net change of the functional over the history
};

/// Check the renormalized balance d/dt int theta(Xi) + eps int theta''(Xi)|grad Xi|^2
/// = int (Xi theta' - theta) div v along a fixed-domain history; divv may be empty
/// (divergence-free case) or hold one value per cell and step for compressible tests.
RenormalizedReport renormalized_check(const XiSolver& solver, const std::vector<Vec>& history,
                                      double dt, ThetaKind kind,
                                      const std::vector<Vec>& divv = {});

}  // namespace polyfsi
