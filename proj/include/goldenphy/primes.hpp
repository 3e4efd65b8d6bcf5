#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>

namespace goldenphy {

// Deterministic primality by trial division. Exact for the full uint32 range,
// which covers every sequence length this library works with (N <= 2^17 in
// practice); rejects larger inputs rather than risking a wrong answer.
inline bool is_prime(std::uint64_t n) {
    if (n >= (1ull << 32))
        throw std::invalid_argument("is_prime: value out of supported range (< 2^32)");
    if (n < 2) return false;
    if (n < 4) return true;
    if (n % 2 == 0 || n % 3 == 0) return false;
    for (std::uint64_t p = 5; p * p <= n; p += 6) {
        if (n % p == 0 || n % (p + 2) == 0) return false;
    }
    return true;
}

// Least prime >= x. Used to size sequence families from a spreading factor.
inline std::uint64_t smallest_prime_geq(std::uint64_t x) {
    if (x < 2) throw std::invalid_argument("smallest_prime_geq: x must be >= 2");
    std::uint64_t n = x;
    while (!is_prime(n)) ++n;
    return n;
}

// Modular inverse of a mod n for gcd(a, n) = 1 (extended Euclid).
inline std::uint64_t mod_inverse(std::uint64_t a, std::uint64_t n) {
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(n), new_r = static_cast<std::int64_t>(a % n);
    while (new_r != 0) {
        const std::int64_t q = r / new_r;
        t = std::exchange(new_t, t - q * new_t);
        r = std::exchange(new_r, r - q * new_r);
    }
    if (r != 1) throw std::invalid_argument("mod_inverse: arguments are not coprime");
    if (t < 0) t += static_cast<std::int64_t>(n);
    return static_cast<std::uint64_t>(t);
}

}  // namespace goldenphy
