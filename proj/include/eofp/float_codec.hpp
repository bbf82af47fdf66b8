#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace eofp {

inline constexpr int kMantissaBits = 23;
inline constexpr int kExponentBias = 127;
inline constexpr uint32_t kMantissaMask = (1u << kMantissaBits) - 1;  // 0x007FFFFF
inline constexpr uint32_t kExponentField = 0xFFu << kMantissaBits;    // 0x7F800000
inline constexpr uint32_t kSignMask = 0x80000000u;
inline constexpr uint32_t kSpecialExponent = 255;  // NaN / Inf

inline uint32_t float_bits(float x) { return std::bit_cast<uint32_t>(x); }
inline float float_from_bits(uint32_t u) { return std::bit_cast<float>(u); }

// sign / biased exponent / mantissa of one binary32 value. Bit 0 is the most
// significant bit of the word, so the layout is [sign][exponent][mantissa].
struct FloatFields {
    uint32_t sign;      // 0 or 1
    uint32_t exponent;  // biased, [0, 255]
    uint32_t mantissa;  // [0, 2^23 - 1]

    bool operator==(const FloatFields&) const = default;
};

inline FloatFields decompose(float x) {
    const uint32_t u = float_bits(x);
    return {u >> 31, (u >> kMantissaBits) & 0xFFu, u & kMantissaMask};
}

inline float compose(const FloatFields& f) {
    if (f.sign > 1u || f.exponent > 255u || f.mantissa > kMantissaMask)
        throw std::out_of_range("compose: field out of range");
    return float_from_bits((f.sign << 31) | (f.exponent << kMantissaBits) | f.mantissa);
}

inline bool is_normal(const FloatFields& f) {
    return f.exponent >= 1 && f.exponent <= 254;
}

// Stored exponent minus the bias. Defined for normal values only.
inline int unbiased_exponent(const FloatFields& f) {
    if (!is_normal(f))
        throw std::domain_error("unbiased_exponent: exponent field must be in [1, 254]");
    return static_cast<int>(f.exponent) - kExponentBias;
}

// (-1)^sign * (1 + sum b_i 2^-i) * 2^(exponent - bias), summed term by term.
// A documentation and test helper; runtime paths reinterpret bits directly.
inline double decimal_value(const FloatFields& f) {
    if (!is_normal(f))
        throw std::domain_error("decimal_value: exponent field must be in [1, 254]");
    double m = 1.0;
    for (int i = 1; i <= kMantissaBits; ++i) {
        if ((f.mantissa >> (kMantissaBits - i)) & 1u) m += std::ldexp(1.0, -i);
    }
    const double v = m * std::ldexp(1.0, static_cast<int>(f.exponent) - kExponentBias);
    return f.sign ? -v : v;
}

}  // namespace eofp
