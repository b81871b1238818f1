#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace lbphy {

/// Iterative radix-2 DIT FFT, forward convention X[i] = sum_k x[k] e^{-j2pi k i / n}.
/// Sizes here are always powers of two (M = 2^SF, Welch segments 4M).
template <typename T>
class Fft {
  public:
    explicit Fft(std::size_t n) : n_(n) {
        if (n == 0 || (n & (n - 1)) != 0)
            throw std::invalid_argument("Fft: size must be a power of two");
        tw_.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            tw_[k] = std::complex<T>(static_cast<T>(std::cos(ang)), static_cast<T>(std::sin(ang)));
        }
        rev_.resize(n);
        std::size_t log2n = 0;
        while ((std::size_t{1} << log2n) < n) ++log2n;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < log2n; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
            rev_[i] = r;
        }
    }

    std::size_t size() const { return n_; }

    void forward(std::complex<T>* x) const {
        for (std::size_t i = 0; i < n_; ++i)
            if (i < rev_[i]) std::swap(x[i], x[rev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t step = n_ / len;
            for (std::size_t i = 0; i < n_; i += len) {
                for (std::size_t k = 0; k < len / 2; ++k) {
                    const std::complex<T> w = tw_[k * step];
                    const std::complex<T> u = x[i + k];
                    const std::complex<T> v = x[i + k + len / 2] * w;
                    x[i + k] = u + v;
                    x[i + k + len / 2] = u - v;
                }
            }
        }
    }

    void forward(std::vector<std::complex<T>>& x) const {
        if (x.size() != n_) throw std::invalid_argument("Fft: length mismatch");
        forward(x.data());
    }

  private:
    std::size_t n_;
    std::vector<std::complex<T>> tw_;
    std::vector<std::size_t> rev_;
};

} // namespace lbphy
