#pragma once

#include "polyfsi/config.hpp"
#include "polyfsi/polymer.hpp"
#include "polyfsi/util.hpp"

namespace polyfsi {

/// Eigenbasis of the weighted configuration-space form
///   int_B Mm grad f . grad g  =  lambda int_B Mm f g,
/// separated in polar harmonics; functions are orthonormal in the weighted L2
/// and orthogonal in the weighted W^{1,2} inner product by construction.
struct ConfigBasis {
    int n = 0;                 // number of functions
    std::vector<int> kmode;    // angular wavenumber; >=0 cosine branch, <0 sine branch
    Vec lambda;                // Dirichlet-form eigenvalue per function
    Mat vals;                  // quad.n x n values at configuration quadrature nodes
    Mat d1, d2;                // partial derivatives at the nodes
    double mm_mass = 1.0;      // int_B Mm
    double const_coef = 1.0;   // coefficient c with c * phi_0 = 1 (phi_0 the constant mode)
    int const_index = -1;      // index of the constant mode

    // Drag tables: G[a][b](node, r) = w * M * q_b * d_a phi_r  (exact weight M).
    Mat G[2][2];
    // Weighted projection table: P(node, r) = w * Mm * phi_r.
    Mat proj;
    // Weighted q-moment of each basis function: int_B Mm phi_r.
    Vec mom;

    static ConfigBasis build(const SpringLaw& law, const QuadB& quad, const MaxwellianTable& max,
                             int kmax, int nrad);
};

/// Tensor Fourier(x) x cosine(z) spatial basis on the reference slab, orthonormal
/// in plain L2 of the unit square; midpoint quadrature tables included.
struct SpatialBasis {
    int mx = 0, mz = 0, n = 0;
    int nqx = 0, nqz = 0, nq = 0;
    std::vector<double> xq, zq;  // node coordinates (node index ix*nqz + iz)
    double wq = 0.0;             // uniform midpoint weight
    Mat vals;                    // nq x n
    Mat dx, dz;                  // reference partials at the nodes
    int const_index = 0;         // index of the constant function

    static SpatialBasis build(int mx, int mz, int nqx, int nqz);
};

}  // namespace polyfsi
