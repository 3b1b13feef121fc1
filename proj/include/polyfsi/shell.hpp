#pragma once

#include "polyfsi/config.hpp"
#include "polyfsi/fft.hpp"
#include "polyfsi/geometry.hpp"
#include "polyfsi/util.hpp"

namespace polyfsi {

/// Symmetric 2x2 field triple stored componentwise on the shell grid.
struct SymField {
    Mat c11, c12, c22;
};

/// Nonlinear Koiter elastic energy of a displacement in the normal direction,
/// discretized spectrally on the periodic reference grid with exact gradients.
class KoiterShell {
   public:
    KoiterShell(const ReferenceShell& ref, double eps0, double lame_lambda, double lame_mu,
                bool weighted_measure);

    static KoiterShell from_config(const ReferenceShell& ref, const RunConfig& cfg);

    /// Membrane strain G(eta) (componentwise fields).
    SymField metric_change(const Mat& eta) const;

    /// Bending strain R(eta) (componentwise fields).
    SymField curvature_change(const Mat& eta) const;

    /// K(eta): normalized-measure integral of the elastic density.
    double energy(const Mat& eta) const;

    /// Exact gradient of the discrete energy w.r.t. the normalized L2 pairing.
    Mat gradient(const Mat& eta) const;

    /// Fourier symbol of the linearization at zero for the flat reference (diagonal part
    /// used as the implicit operator of the time stepper); zero table when the reference
    /// is not flat.
    Mat linear_symbol() const;

    /// Elastic tensor contraction c_vol*tra(X)tra(Y) + 2 mu <X,Y>_a at one node.
    double contract(int node, const Mat2& X, const Mat2& Y) const;

    double eps0() const { return eps0_; }
    bool weighted_measure() const { return weighted_; }
    const ReferenceShell& ref() const { return *ref_; }

   private:
    struct PointDerivs {
        double eta, p1, p2, P11, P12, P22;
    };
    struct PointGrad {
        double w_eta = 0, w_p1 = 0, w_p2 = 0, w_P11 = 0, w_P12 = 0, w_P22 = 0;
    };

    void point_strains(int node, const PointDerivs& s, Mat2& G, Mat2& R, Vec3& nu_eta,
                       Vec3 D[3]) const;
    double point_density(int node, const PointDerivs& s) const;
    PointGrad point_density_grad(int node, const PointDerivs& s) const;

    const ReferenceShell* ref_;
    SpectralTorus sp_;
    double eps0_, c_vol_, mu_;
    bool weighted_;
    std::vector<Mat2> ainv_;  // contravariant metric per node
};

/// Fifth-order spectral regularizer: energy sum |2 pi k|^10 |eta_hat|^2 and its gradient
/// with Fourier symbol 2 |2 pi k|^10 (normalized L2 pairing).
class ShellRegularizer {
   public:
    ShellRegularizer(int n1, int n2);
    double energy(const Mat& eta) const;
    Mat gradient(const Mat& eta) const;
    const Mat& symbol() const { return sym_; }       // gradient symbol table
    const Mat& energy_symbol() const { return esym_; }

   private:
    SpectralTorus sp_;
    Mat sym_, esym_;
};

/// Free shell dynamics: eta_tt + K'(eta) + varrho L'(eta) = g, implicit midpoint,
/// stiff diagonal part solved in Fourier space, remainder by inner fixed point.
class ShellStepper {
   public:
    ShellStepper(const KoiterShell& koiter, const ShellRegularizer& reg, double varrho,
                 double inner_tol, int inner_max_iter);

    static ShellStepper from_config(const KoiterShell& k, const ShellRegularizer& r,
                                    const RunConfig& cfg);

    /// Advance one step with given forcing evaluated at the midpoint time.
    void step(ShellState& state, double dt, const Mat& g_mid) const;

    /// Total shell energy: 0.5 mean(etadot^2) + K(eta) + varrho L(eta).
    double total_energy(const ShellState& state) const;

    double varrho() const { return varrho_; }

   private:
    const KoiterShell* koiter_;
    const ShellRegularizer* reg_;
    SpectralTorus sp_;
    Mat implicit_symbol_;  // linear-at-zero elastic symbol + varrho * regularizer symbol
    double varrho_, inner_tol_;
    int inner_max_iter_;
};

}  // namespace polyfsi
