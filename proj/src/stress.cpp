#include "polyfsi/stress.hpp"

namespace polyfsi {

StressEvaluator::StressEvaluator(const SpringLaw& law, const QuadB& quad,
                                 const MaxwellianTable& max, const PhysicalParams& params)
    : quad_(&quad), max_(&max), params_(&params), chains_(law.chains) {
    const int n = quad.n;
    xi_w.resize(n);
    uq11.resize(n);
    uq12.resize(n);
    uq22.resize(n);
    mq1.resize(n);
    mq2.resize(n);
    bound_const_ = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = quad.w[i], M = max.M[i];
        const double s = 0.5 * (quad.q1[i] * quad.q1[i] + quad.q2[i] * quad.q2[i]);
        const double up = law.Uprime(s);
        xi_w[i] = w * M;
        uq11[i] = w * M * up * quad.q1[i] * quad.q1[i];
        uq12[i] = w * M * up * quad.q1[i] * quad.q2[i];
        uq22[i] = w * M * up * quad.q2[i] * quad.q2[i];
        mq1[i] = w * M * quad.q1[i];
        mq2[i] = w * M * quad.q2[i];
        bound_const_ += 2.0 * w * (std::abs(max.M_dr[i]) * quad.r[i] + M);
    }
}

double StressEvaluator::xi(const Vec& psivals) const { return xi_w.dot(psivals); }

Mat2 StressEvaluator::chain_moment(const Vec& psivals) const {
    Mat2 P;
    P(0, 0) = uq11.dot(psivals);
    P(0, 1) = P(1, 0) = uq12.dot(psivals);
    P(1, 1) = uq22.dot(psivals);
    return P;
}

Mat2 StressEvaluator::kramers(const Vec& psivals) const {
    const double k = params_->kpoly;
    const double Xi = xi(psivals);
    Mat2 T = k * chain_moment(psivals);
    const double iso = k * (chains_ + 1.0) * Xi + params_->dh * Xi * Xi;
    T(0, 0) -= iso;
    T(1, 1) -= iso;
    return T;
}

Mat2 StressEvaluator::truncated_moment(const PsiSlice& s, double ell) const {
    Mat2 P = Mat2::Zero();
    for (int i = 0; i < static_cast<int>(xi_w.size()); ++i) {
        const double g = cutoff_gamma_ell(s.vals[i], ell);
        P(0, 0) += mq1[i] * g * s.d1[i];
        P(0, 1) += mq2[i] * g * s.d1[i];
        P(1, 0) += mq1[i] * g * s.d2[i];
        P(1, 1) += mq2[i] * g * s.d2[i];
    }
    // symmetric at the continuous level; quadrature repair keeps the invariant exact
    P(0, 1) = P(1, 0) = 0.5 * (P(0, 1) + P(1, 0));
    return P;
}

Mat2 StressEvaluator::truncated(const PsiSlice& s, double ell) const {
    const double k = params_->kpoly;
    const double Xi = xi(s.vals);
    Mat2 T = k * truncated_moment(s, ell);
    const double iso = k * Xi + params_->dh * Xi * Xi;
    T(0, 0) -= iso;
    T(1, 1) -= iso;
    return T;
}

double StressEvaluator::truncation_bound_constant() const { return bound_const_; }

double drag_power(const std::vector<Mat2>& Tdev, const Vec& tiso,
                  const std::vector<Mat2>& gradv, const Vec& divv, const Vec& w) {
    double acc = 0.0;
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
        acc += w[i] * ((Tdev[i].array() * gradv[i].array()).sum() + tiso[i] * divv[i]);
    }
    return acc;
}

}  // namespace polyfsi
