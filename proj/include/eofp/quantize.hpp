#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eofp/errors.hpp"
#include "eofp/float_codec.hpp"

namespace eofp {

enum class RoundMode {
    ConditionalRound,  // OR the first dropped bit into the last kept one
    Chop,              // plain masking, the comparison baseline
};

// Mantissa quantization setup: zero the low n mantissa bits, keeping a
// bit-width of 32 - n per parameter. n = 0 applies no quantization.
struct QuantSpec {
    int n = 0;  // [0, 23]
    RoundMode mode = RoundMode::ConditionalRound;

    int bit_width() const { return 32 - n; }

    bool operator==(const QuantSpec&) const = default;
};

inline void validate(const QuantSpec& spec) {
    if (spec.n < 0 || spec.n > kMantissaBits)
        throw std::invalid_argument("QuantSpec: n must be in [0, 23], got " +
                                    std::to_string(spec.n));
}

// 1s at the 32 - n most significant bit positions.
inline constexpr uint32_t keep_mask(int n) { return ~uint32_t{0} << n; }

inline float quantize_value(float x, const QuantSpec& spec) {
    validate(spec);
    if (!std::isfinite(x))
        throw std::domain_error("quantize_value: input must be finite");
    if (spec.n == 0) return x;

    uint32_t u = float_bits(x);
    const uint32_t exponent = (u >> kMantissaBits) & 0xFFu;
    if (exponent == 0 && (u & kMantissaMask) != 0) {
        // Denormals carry no implicit leading 1; flush to signed zero so the
        // n = 23 output domain stays {0} and signed powers of two.
        return float_from_bits(u & kSignMask);
    }

    if (spec.mode == RoundMode::ConditionalRound) {
        if (spec.n < kMantissaBits) {
            // Last kept bit |= first dropped bit. OR cannot carry, so the
            // mantissa never overflows into the exponent.
            const uint32_t dropped = (u >> (spec.n - 1)) & 1u;
            u |= dropped << spec.n;
        } else {
            // No mantissa left: add its leading bit to the exponent field,
            // rounding the magnitude to a whole power of two.
            const uint32_t round_up = (u >> (kMantissaBits - 1)) & 1u;
            if (exponent + round_up >= kSpecialExponent)
                throw ExponentOverflowError(
                    "quantize_value: exponent overflow rounding to a power of two");
            u += round_up << kMantissaBits;
        }
    }
    return float_from_bits(u & keep_mask(spec.n));
}

// Element-wise quantize_value; errors gain the offending element index.
inline void quantize_in_place(std::span<float> values, const QuantSpec& spec) {
    validate(spec);
    for (size_t i = 0; i < values.size(); ++i) {
        try {
            values[i] = quantize_value(values[i], spec);
        } catch (const ExponentOverflowError& e) {
            throw ExponentOverflowError(
                std::string(e.what()) + " (element " + std::to_string(i) + ")",
                static_cast<long>(i));
        } catch (const std::domain_error& e) {
            throw std::domain_error(std::string(e.what()) + " (element " +
                                    std::to_string(i) + ")");
        }
    }
}

inline std::vector<float> quantize_tensor(std::span<const float> values,
                                          const QuantSpec& spec) {
    std::vector<float> out(values.begin(), values.end());
    quantize_in_place(out, spec);
    return out;
}

}  // namespace eofp
