// Test-only reference mantissa quantizer. Works on 32-character '0'/'1'
// strings indexed from the most significant bit, spelling out the mask /
// conditional-round / exponent-carry rules one character at a time so it
// stays independent of the production bit-twiddling in eofp/quantize.hpp.
#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <string>

namespace eofp_ref {

inline std::string to_bit_string(float x) {
    uint32_t u;
    std::memcpy(&u, &x, sizeof u);
    std::string s(32, '0');
    for (int i = 0; i < 32; ++i)
        if ((u >> (31 - i)) & 1u) s[i] = '1';
    return s;
}

inline float from_bit_string(const std::string& s) {
    uint32_t u = 0;
    for (int i = 0; i < 32; ++i)
        if (s[i] == '1') u |= 1u << (31 - i);
    float x;
    std::memcpy(&x, &u, sizeof x);
    return x;
}

// Head 32 - n characters '1', the last n '0'.
inline std::string mask_string(int n) {
    std::string m(32, '1');
    for (int i = 32 - n; i < 32; ++i) m[i] = '0';
    return m;
}

// Returns nullopt when the n = 23 exponent addition overflows.
inline std::optional<std::string> quantize_bits(std::string bits,
                                                const std::string& mask, int n,
                                                bool conditional_round) {
    if (n == 0) return bits;

    const bool exponent_zero = bits.substr(1, 8) == "00000000";
    const bool mantissa_zero = bits.substr(9, 23) == std::string(23, '0');
    if (exponent_zero && !mantissa_zero) {
        // Denormal: flush to signed zero.
        std::string zero(32, '0');
        zero[0] = bits[0];
        return zero;
    }

    if (conditional_round) {
        if (23 > n && n > 0) {
            bits[31 - n] = (bits[31 - n] == '1' || bits[31 - n + 1] == '1') ? '1' : '0';
        } else if (n == 23) {
            // bits[1:8] = bits[1:8] (+) bits[9], binary addition with carry.
            int carry = bits[9] == '1' ? 1 : 0;
            for (int i = 8; i >= 1 && carry; --i) {
                const int sum = (bits[i] - '0') + carry;
                bits[i] = static_cast<char>('0' + (sum & 1));
                carry = sum >> 1;
            }
            if (carry) return std::nullopt;
            if (bits.substr(1, 8) == "11111111") return std::nullopt;
        }
    }
    for (int i = 0; i < 32; ++i)
        if (mask[i] == '0') bits[i] = '0';
    return bits;
}

inline std::optional<float> quantize(float x, int n, bool conditional_round) {
    auto out = quantize_bits(to_bit_string(x), mask_string(n), n, conditional_round);
    if (!out) return std::nullopt;
    return from_bit_string(*out);
}

}  // namespace eofp_ref
