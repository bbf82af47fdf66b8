#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "eofp/float_codec.hpp"
#include "eofp/quantize.hpp"
#include "eofp/tensor.hpp"

namespace eofp {

// Model-wide exponent statistics that drive the packed encoding.
struct ExponentRange {
    int max = 0;       // largest unbiased exponent among nonzero parameters
    int min = 0;       // smallest
    uint32_t len = 1;  // offset-code width in bits, excluding sign

    bool operator==(const ExponentRange&) const = default;
};

// Smallest len with 2^len - 1 >= max - min + 1: every exponent offset plus
// the zero escape fits in len bits.
inline uint32_t code_length(int max, int min) {
    return std::bit_width(static_cast<uint32_t>(max - min + 1));
}

// One parameter after exponent packing, stored in 1 + len + (23 - n) bits.
// exp_code 0 marks a zero value; otherwise the unbiased exponent is
// exp_code - 1 + min.
struct PackedCode {
    uint32_t sign = 0;      // 1 bit
    uint32_t exp_code = 0;  // len bits
    uint32_t residual = 0;  // the 23 - n kept mantissa bits

    bool operator==(const PackedCode&) const = default;
};

struct PackedTensor {
    std::vector<uint32_t> shape;
    std::vector<PackedCode> codes;

    bool operator==(const PackedTensor&) const = default;
};

struct PackedModel {
    int n = 0;
    ExponentRange range;
    std::vector<PackedTensor> tensors;

    bool operator==(const PackedModel&) const = default;
};

inline uint64_t parameter_count(const PackedModel& model) {
    uint64_t n = 0;
    for (const auto& t : model.tensors) n += t.codes.size();
    return n;
}

namespace detail {

// Zero here means either sign of zero; denormals and specials are rejected.
inline bool is_packable_zero(uint32_t bits) { return (bits & ~kSignMask) == 0; }

inline int checked_unbiased_exponent(uint32_t bits, const char* who) {
    const uint32_t exponent = (bits >> kMantissaBits) & 0xFFu;
    if (exponent == kSpecialExponent)
        throw std::domain_error(std::string(who) + ": NaN/Inf parameter");
    if (exponent == 0)
        throw std::domain_error(std::string(who) + ": denormal parameter");
    return static_cast<int>(exponent) - kExponentBias;
}

}  // namespace detail

// Extreme unbiased exponents over every nonzero parameter in the model.
inline ExponentRange scan_range(const RawModel& model) {
    int max = std::numeric_limits<int>::min();
    int min = std::numeric_limits<int>::max();
    for (const Tensor& t : model) {
        for (float v : t.values) {
            const uint32_t u = float_bits(v);
            if (detail::is_packable_zero(u)) continue;
            const int e = detail::checked_unbiased_exponent(u, "scan_range");
            if (e > max) max = e;
            if (e < min) min = e;
        }
    }
    if (max < min)
        throw std::invalid_argument("scan_range: model has no nonzero parameters");
    return {max, min, code_length(max, min)};
}

inline PackedCode encode_param(float x, const ExponentRange& range, int n) {
    if (n < 0 || n > kMantissaBits)
        throw std::invalid_argument("encode_param: n must be in [0, 23]");
    const uint32_t u = float_bits(x);
    const uint32_t sign = u >> 31;
    if (detail::is_packable_zero(u)) return {sign, 0, 0};

    const int e = detail::checked_unbiased_exponent(u, "encode_param");
    if (e < range.min || e > range.max)
        throw std::out_of_range("encode_param: exponent " + std::to_string(e) +
                                " outside scanned range [" + std::to_string(range.min) +
                                ", " + std::to_string(range.max) + "]");
    const uint32_t mantissa = u & kMantissaMask;
    if (n > 0 && (mantissa & ~keep_mask(n)) != 0)
        throw std::invalid_argument(
            "encode_param: mantissa has bits below the chop point; "
            "mantissa-quantize first");
    return {sign, static_cast<uint32_t>(e - range.min + 1), mantissa >> n};
}

// Exact inverse of encode_param.
inline float decode_param(const PackedCode& code, const ExponentRange& range, int n) {
    if (n < 0 || n > kMantissaBits)
        throw std::invalid_argument("decode_param: n must be in [0, 23]");
    if (range.len == 0 || range.len > 31)
        throw std::invalid_argument("decode_param: code length out of range");
    if (code.sign > 1u || code.exp_code >= (1u << range.len) ||
        code.residual >= (1u << (kMantissaBits - n)))
        throw std::out_of_range("decode_param: code field wider than declared");
    if (code.exp_code == 0) return float_from_bits(code.sign << 31);

    const int biased = static_cast<int>(code.exp_code) - 1 + range.min + kExponentBias;
    if (biased < 1 || biased > 254)
        throw std::out_of_range("decode_param: reconstructed exponent " +
                                std::to_string(biased) + " outside [1, 254]");
    return float_from_bits((code.sign << 31) |
                           (static_cast<uint32_t>(biased) << kMantissaBits) |
                           (code.residual << n));
}

// Scan the whole model, then re-encode every parameter. Order preserved.
// The model must already be mantissa-quantized with the same n.
inline PackedModel quantize_model(const RawModel& model, int n) {
    PackedModel packed;
    packed.n = n;
    packed.range = scan_range(model);
    packed.tensors.reserve(model.size());
    for (const Tensor& t : model) {
        PackedTensor pt;
        pt.shape = t.shape;
        pt.codes.reserve(t.values.size());
        for (float v : t.values) pt.codes.push_back(encode_param(v, packed.range, n));
        packed.tensors.push_back(std::move(pt));
    }
    return packed;
}

inline RawModel decode_model(const PackedModel& packed) {
    RawModel model;
    model.reserve(packed.tensors.size());
    for (const PackedTensor& pt : packed.tensors) {
        Tensor t;
        t.shape = pt.shape;
        t.values.reserve(pt.codes.size());
        for (const PackedCode& c : pt.codes)
            t.values.push_back(decode_param(c, packed.range, packed.n));
        model.push_back(std::move(t));
    }
    return model;
}

}  // namespace eofp
