#include "polyfsi/fft.hpp"

#include <stdexcept>

namespace polyfsi {

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: size must be a power of 2");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                std::complex<double> u = a[i + j];
                std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& z : a) z *= inv;
    }
}

SpectralTorus::SpectralTorus(int n1, int n2) : n1_(n1), n2_(n2) {
    auto pow2 = [](int n) { return n > 0 && (n & (n - 1)) == 0; };
    if (!pow2(n1) || !pow2(n2)) throw std::invalid_argument("SpectralTorus: sizes must be powers of 2");
}

Eigen::MatrixXcd SpectralTorus::forward(const Mat& f) const {
    Eigen::MatrixXcd c(n1_, n2_);
    std::vector<std::complex<double>> buf;
    // FFT along rows (y2 direction)
    for (int i = 0; i < n1_; ++i) {
        buf.assign(n2_, {});
        for (int j = 0; j < n2_; ++j) buf[j] = f(i, j);
        fft_radix2(buf, false);
        for (int j = 0; j < n2_; ++j) c(i, j) = buf[j];
    }
    // FFT along columns (y1 direction)
    for (int j = 0; j < n2_; ++j) {
        buf.assign(n1_, {});
        for (int i = 0; i < n1_; ++i) buf[i] = c(i, j);
        fft_radix2(buf, false);
        for (int i = 0; i < n1_; ++i) c(i, j) = buf[i];
    }
    c /= static_cast<double>(n1_) * static_cast<double>(n2_);
    return c;
}

Mat SpectralTorus::backward(const Eigen::MatrixXcd& c) const {
    Eigen::MatrixXcd t = c;
    std::vector<std::complex<double>> buf;
    for (int j = 0; j < n2_; ++j) {
        buf.assign(n1_, {});
        for (int i = 0; i < n1_; ++i) buf[i] = t(i, j);
        fft_radix2(buf, true);
        for (int i = 0; i < n1_; ++i) t(i, j) = buf[i] * static_cast<double>(n1_);
    }
    Mat out(n1_, n2_);
    for (int i = 0; i < n1_; ++i) {
        buf.assign(n2_, {});
        for (int j = 0; j < n2_; ++j) buf[j] = t(i, j);
        fft_radix2(buf, true);
        for (int j = 0; j < n2_; ++j) out(i, j) = (buf[j] * static_cast<double>(n2_)).real();
    }
    return out;
}

Mat SpectralTorus::deriv(const Mat& f, int o1, int o2) const {
    Eigen::MatrixXcd c = forward(f);
    for (int i = 0; i < n1_; ++i) {
        const int k1 = freq(i, n1_);
        for (int j = 0; j < n2_; ++j) {
            const int k2 = freq(j, n2_);
            std::complex<double> m(1.0, 0.0);
            if (o1 > 0) {
                if ((o1 % 2) == 1 && 2 * std::abs(k1) == n1_) { c(i, j) = 0.0; continue; }
                std::complex<double> ik(0.0, 2.0 * pi * k1);
                for (int r = 0; r < o1; ++r) m *= ik;
            }
            if (o2 > 0) {
                if ((o2 % 2) == 1 && 2 * std::abs(k2) == n2_) { c(i, j) = 0.0; continue; }
                std::complex<double> ik(0.0, 2.0 * pi * k2);
                for (int r = 0; r < o2; ++r) m *= ik;
            }
            c(i, j) *= m;
        }
    }
    return backward(c);
}

Mat SpectralTorus::apply_symbol(const Mat& f, const Mat& sym) const {
    Eigen::MatrixXcd c = forward(f);
    for (int i = 0; i < n1_; ++i)
        for (int j = 0; j < n2_; ++j) c(i, j) *= sym(i, j);
    return backward(c);
}

double SpectralTorus::interp(const Eigen::MatrixXcd& c, double y1, double y2) const {
    std::complex<double> acc(0.0, 0.0);
    for (int i = 0; i < n1_; ++i) {
        const int k1 = freq(i, n1_);
        for (int j = 0; j < n2_; ++j) {
            const int k2 = freq(j, n2_);
            const double ph = 2.0 * pi * (k1 * y1 + k2 * y2);
            acc += c(i, j) * std::complex<double>(std::cos(ph), std::sin(ph));
        }
    }
    return acc.real();
}

}  // namespace polyfsi
