#pragma once

#include <complex>
#include <vector>

#include "polyfsi/util.hpp"

namespace polyfsi {

/// In-place iterative radix-2 FFT; size must be a power of two.
/// Hand-rolled to keep results bit-identical across platforms and libraries.
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse);

/// Spectral calculus on a uniform periodic grid over the unit torus [0,1)^2.
/// Fields are stored as n1 x n2 real matrices, node (i,j) at (i/n1, j/n2).
class SpectralTorus {
   public:
    SpectralTorus(int n1, int n2);

    int n1() const { return n1_; }
    int n2() const { return n2_; }

    Eigen::MatrixXcd forward(const Mat& f) const;
    Mat backward(const Eigen::MatrixXcd& c) const;

    /// Integer frequency of row/column index (in [-n/2, n/2)).
    static int freq(int idx, int n) { return idx <= n / 2 - 1 ? idx : idx - n; }

    /// Partial derivative d^{o1}/dy1 d^{o2}/dy2 (spectral, Nyquist zeroed for odd orders).
    Mat deriv(const Mat& f, int o1, int o2) const;

    /// Apply a real Fourier multiplier sym(k1,k2) given as a full n1 x n2 table.
    Mat apply_symbol(const Mat& f, const Mat& sym) const;

    /// Fourier interpolation of the field at arbitrary torus points.
    double interp(const Eigen::MatrixXcd& c, double y1, double y2) const;

   private:
    int n1_, n2_;
};

}  // namespace polyfsi
