#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "goldenphy/common.hpp"

// Exact-length DFTs for arbitrary sizes. Power-of-two lengths run a standard
// iterative radix-2 transform; every other length (the prime block sizes used
// throughout) goes through Bluestein's chirp-z reduction to a power-of-two
// convolution. Plans are cached per length and immutable once built, so they
// can be shared freely across threads.

namespace goldenphy {

namespace detail {

inline std::size_t next_pow2(std::size_t x) {
    std::size_t n = 1;
    while (n < x) n <<= 1;
    return n;
}

struct Pow2Plan {
    std::size_t n = 0;
    std::vector<std::uint32_t> bitrev;
    std::vector<cplx> twiddles;  // exp(-i 2 pi j / n), j < n/2

    explicit Pow2Plan(std::size_t size) : n(size) {
        if (n == 0 || (n & (n - 1)) != 0)
            throw std::invalid_argument("Pow2Plan: size must be a power of two");
        bitrev.resize(n);
        std::uint32_t j = 0;
        for (std::uint32_t i = 1; i < n; ++i) {
            std::uint32_t bit = static_cast<std::uint32_t>(n >> 1);
            while (j & bit) {
                j ^= bit;
                bit >>= 1;
            }
            j ^= bit;
            bitrev[i] = j;
        }
        twiddles.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            twiddles[k] = {std::cos(a), std::sin(a)};
        }
    }

    void run(cplx* data, bool inverse) const {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = bitrev[i];
            if (i < j) std::swap(data[i], data[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len / 2;
            const std::size_t stride = n / len;
            for (std::size_t base = 0; base < n; base += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    cplx w = twiddles[k * stride];
                    if (inverse) w = std::conj(w);
                    const cplx t = w * data[base + k + half];
                    const cplx u = data[base + k];
                    data[base + k] = u + t;
                    data[base + k + half] = u - t;
                }
            }
        }
        // No 1/n scaling here; callers normalize where needed.
    }
};

}  // namespace detail

class DftPlan {
  public:
    explicit DftPlan(std::size_t n) : n_(n) {
        if (n == 0) throw std::invalid_argument("DftPlan: size must be positive");
        if ((n & (n - 1)) == 0) {
            pow2_ = std::make_unique<detail::Pow2Plan>(n);
            return;
        }
        m_ = detail::next_pow2(2 * n - 1);
        pow2_ = std::make_unique<detail::Pow2Plan>(m_);
        // chirp[k] = exp(-i pi k^2 / n); k^2 is reduced mod 2n in exact
        // integer arithmetic so the phase stays bit-accurate for large n.
        chirp_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const std::uint64_t t = (static_cast<std::uint64_t>(k) * k) % (2 * n);
            const double a = -std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
            chirp_[k] = {std::cos(a), std::sin(a)};
        }
        // Convolution kernel b[k] = conj(chirp[|k|]), wrapped on the m-grid.
        kernel_fft_.assign(m_, cplx{0.0, 0.0});
        kernel_fft_[0] = std::conj(chirp_[0]);
        for (std::size_t k = 1; k < n; ++k) {
            kernel_fft_[k] = std::conj(chirp_[k]);
            kernel_fft_[m_ - k] = std::conj(chirp_[k]);
        }
        pow2_->run(kernel_fft_.data(), false);
    }

    std::size_t size() const { return n_; }

    // X[k] = sum_j x[j] exp(-i 2 pi j k / n)
    void forward(const cplx* in, cplx* out) const {
        if (!is_bluestein()) {
            std::copy(in, in + n_, out);
            pow2_->run(out, false);
            return;
        }
        thread_local cvec work;
        work.assign(m_, cplx{0.0, 0.0});
        for (std::size_t k = 0; k < n_; ++k) work[k] = in[k] * chirp_[k];
        pow2_->run(work.data(), false);
        for (std::size_t k = 0; k < m_; ++k) work[k] *= kernel_fft_[k];
        pow2_->run(work.data(), true);
        const double scale = 1.0 / static_cast<double>(m_);
        for (std::size_t k = 0; k < n_; ++k) out[k] = chirp_[k] * work[k] * scale;
    }

    // x[j] = (1/n) sum_k X[k] exp(+i 2 pi j k / n)
    void inverse(const cplx* in, cplx* out) const {
        if (!is_bluestein()) {
            std::copy(in, in + n_, out);
            pow2_->run(out, true);
            const double scale = 1.0 / static_cast<double>(n_);
            for (std::size_t k = 0; k < n_; ++k) out[k] *= scale;
            return;
        }
        thread_local cvec tmp;
        tmp.assign(n_, cplx{});
        for (std::size_t k = 0; k < n_; ++k) tmp[k] = std::conj(in[k]);
        forward(tmp.data(), out);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t k = 0; k < n_; ++k) out[k] = std::conj(out[k]) * scale;
    }

  private:
    bool is_bluestein() const { return m_ != 0; }

    std::size_t n_ = 0;
    std::size_t m_ = 0;  // 0 for native power-of-two plans
    std::unique_ptr<detail::Pow2Plan> pow2_;
    cvec chirp_;
    cvec kernel_fft_;
};

// Process-wide plan cache. Plans are never evicted; the set of distinct
// lengths in any run is small.
inline const DftPlan& plan_for(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<const DftPlan>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<const DftPlan>(n)).first;
    return *it->second;
}

inline cvec dft(const cvec& x) {
    cvec out(x.size());
    plan_for(x.size()).forward(x.data(), out.data());
    return out;
}

inline cvec idft(const cvec& x) {
    cvec out(x.size());
    plan_for(x.size()).inverse(x.data(), out.data());
    return out;
}

}  // namespace goldenphy
