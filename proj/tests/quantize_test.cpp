#include "eofp/quantize.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "reference_quantizer.hpp"

using namespace eofp;

namespace {

QuantSpec chop(int n) { return {n, RoundMode::Chop}; }
QuantSpec round_spec(int n) { return {n, RoundMode::ConditionalRound}; }

// Finite floats with a bias toward interesting exponents and mantissas.
float random_finite(std::mt19937& rng) {
    for (;;) {
        const uint32_t u = rng();
        const float x = float_from_bits(u);
        if (std::isfinite(x)) return x;
    }
}

}  // namespace

TEST(QuantizeValue, ChopKnownDecimals) {
    const float x = 0.01234f;  // 0.012339999...
    EXPECT_NEAR(quantize_value(x, chop(6)), 0.012339949, 1e-8);
    EXPECT_NEAR(quantize_value(x, chop(12)), 0.012336730, 1e-8);
    // The same masks, stated on the bit pattern.
    EXPECT_EQ(float_bits(quantize_value(x, chop(6))), float_bits(x) & ~0x3Fu);
    EXPECT_EQ(float_bits(quantize_value(x, chop(12))), float_bits(x) & ~0xFFFu);
}

TEST(QuantizeValue, ZeroChopIsIdentity) {
    std::mt19937 rng(3);
    for (int i = 0; i < 1000; ++i) {
        const float x = random_finite(rng);
        EXPECT_EQ(float_bits(quantize_value(x, chop(0))), float_bits(x));
        EXPECT_EQ(float_bits(quantize_value(x, round_spec(0))), float_bits(x));
    }
}

TEST(QuantizeValue, FullChopRoundsToPowerOfTwo) {
    // 1.75 = 1.11b * 2^0; the mantissa's leading bit carries into the exponent.
    EXPECT_EQ(quantize_value(1.75f, round_spec(23)), 2.0f);
    // 1.25 = 1.01b * 2^0; leading mantissa bit clear, magnitude floors.
    EXPECT_EQ(quantize_value(1.25f, round_spec(23)), 1.0f);
    EXPECT_EQ(quantize_value(-1.75f, round_spec(23)), -2.0f);
    EXPECT_EQ(quantize_value(1.75f, chop(23)), 1.0f);
}

TEST(QuantizeValue, ZeroIsPreservedWithSign) {
    for (int n : {1, 9, 23}) {
        for (auto mode : {RoundMode::ConditionalRound, RoundMode::Chop}) {
            EXPECT_EQ(float_bits(quantize_value(0.0f, {n, mode})), 0u);
            EXPECT_EQ(float_bits(quantize_value(-0.0f, {n, mode})), kSignMask);
        }
    }
}

TEST(QuantizeValue, DenormalsFlushToSignedZero) {
    const float denorm = float_from_bits(0x00000001u);
    const float neg_denorm = float_from_bits(0x80000FFFu);
    for (int n : {1, 12, 23}) {
        EXPECT_EQ(float_bits(quantize_value(denorm, round_spec(n))), 0u);
        EXPECT_EQ(float_bits(quantize_value(neg_denorm, chop(n))), kSignMask);
    }
    // n = 0 applies no quantization, so even denormals pass through.
    EXPECT_EQ(float_bits(quantize_value(denorm, round_spec(0))), 0x00000001u);
}

TEST(QuantizeValue, RejectsNonFinite) {
    EXPECT_THROW(quantize_value(NAN, chop(4)), std::domain_error);
    EXPECT_THROW(quantize_value(INFINITY, round_spec(0)), std::domain_error);
    EXPECT_THROW(quantize_value(-INFINITY, chop(23)), std::domain_error);
}

TEST(QuantizeValue, RejectsBadSpec) {
    EXPECT_THROW(quantize_value(1.0f, chop(24)), std::invalid_argument);
    EXPECT_THROW(quantize_value(1.0f, chop(-1)), std::invalid_argument);
}

TEST(QuantizeValue, ExponentOverflowIsAnError) {
    // Biased exponent 254 with the leading mantissa bit set: rounding to a
    // power of two would need exponent 255.
    const float huge = float_from_bits((254u << 23) | (1u << 22));
    EXPECT_THROW(quantize_value(huge, round_spec(23)), ExponentOverflowError);
    // Without the leading mantissa bit the value floors safely.
    const float safe = float_from_bits(254u << 23);
    EXPECT_EQ(quantize_value(safe, round_spec(23)), safe);
}

TEST(QuantizeTensor, MatchesScalarPath) {
    std::mt19937 rng(17);
    std::normal_distribution<float> dist(0.0f, 1.0f);
    std::vector<float> values(1000);
    for (auto& v : values) v = dist(rng);
    const auto out = quantize_tensor(values, round_spec(9));
    ASSERT_EQ(out.size(), values.size());
    for (size_t i = 0; i < values.size(); ++i)
        EXPECT_EQ(float_bits(out[i]), float_bits(quantize_value(values[i], round_spec(9))));
}

TEST(QuantizeTensor, PowersOfTwoAreFixedPoints) {
    const std::vector<float> values{1.0f, -1.0f};
    const auto out = quantize_tensor(values, round_spec(23));
    EXPECT_EQ(out, values);
}

TEST(QuantizeTensor, ErrorCarriesElementIndex) {
    std::vector<float> values{1.0f, 2.0f, float_from_bits((254u << 23) | (1u << 22))};
    try {
        quantize_in_place(values, round_spec(23));
        FAIL() << "expected ExponentOverflowError";
    } catch (const ExponentOverflowError& e) {
        EXPECT_EQ(e.element(), 2);
        EXPECT_NE(std::string(e.what()).find("element 2"), std::string::npos);
    }

    std::vector<float> with_nan{0.0f, NAN};
    try {
        quantize_in_place(with_nan, chop(4));
        FAIL() << "expected domain_error";
    } catch (const std::domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("element 1"), std::string::npos);
    }
}

// ---- properties ----

TEST(QuantizeProperties, DroppedBitsAreZero) {
    std::mt19937 rng(23);
    for (int i = 0; i < 20000; ++i) {
        const float x = random_finite(rng);
        const int n = 1 + static_cast<int>(rng() % 23);
        for (auto mode : {RoundMode::ConditionalRound, RoundMode::Chop}) {
            try {
                const float q = quantize_value(x, {n, mode});
                EXPECT_EQ(float_bits(q) & ~keep_mask(n), 0u);
            } catch (const ExponentOverflowError&) {
            }
        }
    }
}

TEST(QuantizeProperties, Idempotent) {
    std::mt19937 rng(29);
    for (int i = 0; i < 20000; ++i) {
        const float x = random_finite(rng);
        const int n = static_cast<int>(rng() % 24);
        for (auto mode : {RoundMode::ConditionalRound, RoundMode::Chop}) {
            try {
                const float q = quantize_value(x, {n, mode});
                EXPECT_EQ(float_bits(quantize_value(q, {n, mode})), float_bits(q));
            } catch (const ExponentOverflowError&) {
            }
        }
    }
}

TEST(QuantizeProperties, ChopNestingTakesTheCoarser) {
    std::mt19937 rng(31);
    for (int i = 0; i < 20000; ++i) {
        const float x = random_finite(rng);
        const int n1 = static_cast<int>(rng() % 24);
        const int n2 = static_cast<int>(rng() % 24);
        const float nested = quantize_value(quantize_value(x, chop(n1)), chop(n2));
        const float direct = quantize_value(x, chop(std::max(n1, n2)));
        EXPECT_EQ(float_bits(nested), float_bits(direct));
    }
}

TEST(QuantizeProperties, ErrorBoundedByUnitInLastKeptPlace) {
    std::mt19937 rng(37);
    int tested = 0;
    while (tested < 20000) {
        const float x = random_finite(rng);
        const FloatFields f = decompose(x);
        if (!is_normal(f)) continue;
        const int n = 1 + static_cast<int>(rng() % 22);  // 0 < n < 23
        const double bound =
            std::ldexp(1.0, static_cast<int>(f.exponent) - 127) * std::ldexp(1.0, n - 23);
        for (auto mode : {RoundMode::ConditionalRound, RoundMode::Chop}) {
            const double err = std::abs(static_cast<double>(quantize_value(x, {n, mode})) -
                                        static_cast<double>(x));
            EXPECT_LE(err, bound) << "x=" << x << " n=" << n;
        }
        ++tested;
    }
}

TEST(QuantizeProperties, FullChopLandsOnNeighborPowersOfTwo) {
    std::mt19937 rng(41);
    int tested = 0;
    while (tested < 20000) {
        const float x = random_finite(rng);
        const FloatFields f = decompose(x);
        if (!is_normal(f) || f.exponent == 254) continue;
        const int k = unbiased_exponent(f);
        const float q = quantize_value(x, round_spec(23));
        const double ratio = std::abs(static_cast<double>(q) / static_cast<double>(x));
        EXPECT_GE(ratio, 2.0 / 3.0);
        EXPECT_LE(ratio, 4.0 / 3.0);
        // Boundary: decimal mantissa >= 1.5 selects the next power of two.
        const bool rounds_up = (f.mantissa >> 22) & 1u;
        EXPECT_EQ(std::abs(q), std::ldexp(1.0f, rounds_up ? k + 1 : k));
        ++tested;
    }
}

TEST(QuantizeProperties, SignIsPreserved) {
    std::mt19937 rng(43);
    for (int i = 0; i < 20000; ++i) {
        const float x = random_finite(rng);
        const int n = static_cast<int>(rng() % 24);
        for (auto mode : {RoundMode::ConditionalRound, RoundMode::Chop}) {
            try {
                const float q = quantize_value(x, {n, mode});
                EXPECT_EQ(float_bits(q) >> 31, float_bits(x) >> 31);
            } catch (const ExponentOverflowError&) {
            }
        }
    }
}

// The production quantizer against the literal bit-string reference.
// The acceptance suite repeats this at 10^6 values; this keeps a fast copy
// in the unit run.
TEST(QuantizeProperties, AgreesWithBitStringReference) {
    std::mt19937 rng(47);
    for (int i = 0; i < 10000; ++i) {
        const float x = random_finite(rng);
        for (int n = 0; n <= 23; ++n) {
            for (auto mode : {RoundMode::ConditionalRound, RoundMode::Chop}) {
                const bool cond = mode == RoundMode::ConditionalRound;
                std::optional<float> expect = eofp_ref::quantize(x, n, cond);
                if (!expect) {
                    EXPECT_THROW(quantize_value(x, {n, mode}), ExponentOverflowError);
                    continue;
                }
                const float got = quantize_value(x, {n, mode});
                EXPECT_EQ(float_bits(got), float_bits(*expect))
                    << "x=" << x << " n=" << n << " cond=" << cond;
            }
        }
    }
}
