#pragma once

#include "polyfsi/fpbasis.hpp"
#include "polyfsi/polymer.hpp"
#include "polyfsi/util.hpp"

namespace polyfsi {

/// Configuration-space slice of the density at one spatial point: values and
/// q-derivatives at the configuration quadrature nodes.
struct PsiSlice {
    Vec vals, d1, d2;
};

/// Polymer extra stress evaluated by configuration-space quadrature.
class StressEvaluator {
   public:
    StressEvaluator(const SpringLaw& law, const QuadB& quad, const MaxwellianTable& max,
                    const PhysicalParams& params);

    /// Marginal of the density against the exact weight: Xi = int_B M psi dq.
    double xi(const Vec& psivals) const;

    /// Chain moment sum_i int M psi U' q_i x q_i dq (positive semidefinite for psi >= 0).
    Mat2 chain_moment(const Vec& psivals) const;

    /// Full force-law stress: k * chain_moment - k (K+1) Xi I - dh Xi^2 I.
    Mat2 kramers(const Vec& psivals) const;

    /// Truncated gradient-form stress:
    ///   k sum_i int M grad_i(T_ell(psi)) x q_i dq - k Xi I - dh Xi^2 I.
    Mat2 truncated(const PsiSlice& s, double ell) const;

    /// The gradient-form moment alone (per spring, before the isotropic subtractions).
    Mat2 truncated_moment(const PsiSlice& s, double ell) const;

    /// Quadrature value of 2 int_B (|grad M| |q| + M) dq, an a priori bound constant
    /// for the truncated moment per unit cutoff level.
    double truncation_bound_constant() const;

    const PhysicalParams& params() const { return *params_; }

   private:
    const QuadB* quad_;
    const MaxwellianTable* max_;
    const PhysicalParams* params_;
    int chains_;
    Vec xi_w;              // w * M
    Vec uq11, uq12, uq22;  // w * M * U' * q_a * q_b
    Vec mq1, mq2;          // w * M * q_a (for the gradient form)
    double bound_const_;
};

/// Quadrature drag power sum w [ Tdev : gradv + tiso * divv ] with the isotropic part
/// paired against the flux-consistent divergence samples.
double drag_power(const std::vector<Mat2>& Tdev, const Vec& tiso,
                  const std::vector<Mat2>& gradv, const Vec& divv, const Vec& w);

}  // namespace polyfsi
