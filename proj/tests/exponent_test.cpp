#include "eofp/exponent.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eofp/quantize.hpp"

using namespace eofp;

namespace {

// {+-0, +-2^-29, ..., +-2^0}: the canonical worked example.
RawModel power_ladder_model() {
    Tensor t;
    t.values.push_back(0.0f);
    t.values.push_back(-0.0f);
    for (int k = -29; k <= 0; ++k) {
        t.values.push_back(std::ldexp(1.0f, k));
        t.values.push_back(-std::ldexp(1.0f, k));
    }
    t.shape = {static_cast<uint32_t>(t.values.size())};
    return {t};
}

RawModel random_quantized_model(std::mt19937& rng, int n, size_t tensors = 4) {
    std::normal_distribution<float> dist(0.0f, 0.5f);
    RawModel model;
    for (size_t i = 0; i < tensors; ++i) {
        Tensor t;
        const uint32_t rows = 2 + rng() % 8, cols = 1 + rng() % 16;
        t.shape = {rows, cols};
        t.values.resize(rows * cols);
        for (auto& v : t.values) v = dist(rng);
        t.values[rng() % t.values.size()] = 0.0f;  // keep the zero escape exercised
        quantize_in_place(t.values, {n, RoundMode::ConditionalRound});
        model.push_back(std::move(t));
    }
    return model;
}

}  // namespace

TEST(ScanRange, PowerLadderExample) {
    const ExponentRange r = scan_range(power_ladder_model());
    EXPECT_EQ(r.max, 0);
    EXPECT_EQ(r.min, -29);
    EXPECT_EQ(r.len, 5u);
    // 6 bits per parameter once the sign is included (n = 23).
    EXPECT_EQ(1 + r.len + (23 - 23), 6u);
}

TEST(ScanRange, LenFormula) {
    // Exponents spanning [-23, 0] need 5 bits; a single value needs 1.
    Tensor t;
    t.values = {1.0f, std::ldexp(1.0f, -23)};
    t.shape = {2};
    EXPECT_EQ(scan_range({t}).len, 5u);

    Tensor single;
    single.values = {1.0f};
    single.shape = {1};
    EXPECT_EQ(scan_range({single}), (ExponentRange{0, 0, 1}));

    // Direct check of the ceiling against the naive formula.
    for (int max = -10; max <= 10; ++max)
        for (int min = -40; min <= max; ++min)
            EXPECT_EQ(code_length(max, min),
                      static_cast<uint32_t>(std::ceil(std::log2(max - min + 2))));
}

TEST(ScanRange, Rejections) {
    Tensor zeros;
    zeros.values = {0.0f, -0.0f};
    zeros.shape = {2};
    EXPECT_THROW(scan_range({zeros}), std::invalid_argument);

    Tensor bad;
    bad.values = {1.0f, NAN};
    bad.shape = {2};
    EXPECT_THROW(scan_range({bad}), std::domain_error);

    Tensor denorm;
    denorm.values = {float_from_bits(1u)};
    denorm.shape = {1};
    EXPECT_THROW(scan_range({denorm}), std::domain_error);
}

TEST(EncodeParam, PowerLadderCodes) {
    const ExponentRange r{0, -29, 5};
    EXPECT_EQ(encode_param(0.0f, r, 23), (PackedCode{0, 0, 0}));
    EXPECT_EQ(encode_param(-0.0f, r, 23), (PackedCode{1, 0, 0}));
    EXPECT_EQ(encode_param(std::ldexp(1.0f, -29), r, 23), (PackedCode{0, 1, 0}));
    EXPECT_EQ(encode_param(-std::ldexp(1.0f, -29), r, 23), (PackedCode{1, 1, 0}));
    EXPECT_EQ(encode_param(1.0f, r, 23), (PackedCode{0, 30, 0}));
    EXPECT_EQ(encode_param(-1.0f, r, 23), (PackedCode{1, 30, 0}));
}

TEST(EncodeParam, KeepsResidualMantissaVerbatim) {
    const ExponentRange r{0, -8, 4};
    const float x = quantize_value(0.0123399999f, {12, RoundMode::Chop});
    const PackedCode c = encode_param(x, r, 12);
    EXPECT_EQ(c.residual, (float_bits(x) & kMantissaMask) >> 12);
    EXPECT_EQ(c.exp_code, static_cast<uint32_t>(-7 - (-8) + 1));
}

TEST(EncodeParam, Rejections) {
    const ExponentRange r{0, -4, 3};
    EXPECT_THROW(encode_param(std::ldexp(1.0f, -9), r, 23), std::out_of_range);
    EXPECT_THROW(encode_param(std::ldexp(1.0f, 3), r, 23), std::out_of_range);
    // 1.25 has a live mantissa bit below a 23-bit chop.
    EXPECT_THROW(encode_param(1.25f, r, 23), std::invalid_argument);
    EXPECT_THROW(encode_param(NAN, r, 23), std::domain_error);
}

TEST(DecodeParam, PowerLadderInverses) {
    const ExponentRange r{0, -29, 5};
    EXPECT_EQ(decode_param({0, 30, 0}, r, 23), 1.0f);
    EXPECT_EQ(decode_param({1, 1, 0}, r, 23), -std::ldexp(1.0f, -29));
    EXPECT_EQ(float_bits(decode_param({0, 0, 0}, r, 23)), 0u);
    EXPECT_EQ(float_bits(decode_param({1, 0, 0}, r, 23)), kSignMask);
}

TEST(DecodeParam, Rejections) {
    const ExponentRange r{0, -29, 5};
    EXPECT_THROW(decode_param({0, 32, 0}, r, 23), std::out_of_range);  // wider than len
    EXPECT_THROW(decode_param({0, 1, 1}, r, 23), std::out_of_range);   // residual at n=23
    EXPECT_THROW(decode_param({2, 1, 0}, r, 23), std::out_of_range);
    // Reconstructed biased exponent outside [1, 254].
    const ExponentRange low{-120, -140, 5};
    EXPECT_THROW(decode_param({0, 1, 0}, low, 23), std::out_of_range);
}

TEST(DecodeParam, RoundTripsRandomQuantizedValues) {
    std::mt19937 rng(53);
    std::normal_distribution<float> dist(0.0f, 2.0f);
    int tested = 0;
    while (tested < 100000) {
        const int n = static_cast<int>(rng() % 24);
        const float x = quantize_value(dist(rng), {n, RoundMode::ConditionalRound});
        if (float_bits(x) == 0 || (float_bits(x) & ~kSignMask) == 0) continue;
        const int e = unbiased_exponent(decompose(x));
        // Random plausible range around the value's exponent.
        const int min = e - static_cast<int>(rng() % 20);
        const int max = e + static_cast<int>(rng() % 20);
        const ExponentRange r{max, min, code_length(max, min)};
        const float back = decode_param(encode_param(x, r, n), r, n);
        ASSERT_EQ(float_bits(back), float_bits(x));
        ++tested;
    }
}

TEST(QuantizeModel, SingleNonZeroParameter) {
    Tensor t;
    t.values = {0.0f, 0.0f, 1.0f, 0.0f};
    t.shape = {4};
    const PackedModel packed = quantize_model({t}, 23);
    EXPECT_EQ(packed.range, (ExponentRange{0, 0, 1}));
    ASSERT_EQ(packed.tensors.size(), 1u);
    const auto& codes = packed.tensors[0].codes;
    EXPECT_EQ(codes[0].exp_code, 0u);
    EXPECT_EQ(codes[1].exp_code, 0u);
    EXPECT_EQ(codes[2].exp_code, 1u);
    EXPECT_EQ(codes[3].exp_code, 0u);
}

TEST(QuantizeModel, PowerLadderProducesEveryCode) {
    const PackedModel packed = quantize_model(power_ladder_model(), 23);
    std::vector<bool> seen(31, false);
    for (const auto& c : packed.tensors[0].codes) seen[c.exp_code] = true;
    for (int code = 0; code <= 30; ++code) EXPECT_TRUE(seen[code]) << code;
}

TEST(QuantizeModel, LosslessOnQuantizedModels) {
    std::mt19937 rng(59);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = static_cast<int>(rng() % 24);
        const RawModel model = random_quantized_model(rng, n);
        const PackedModel packed = quantize_model(model, n);
        const RawModel back = decode_model(packed);
        ASSERT_EQ(back.size(), model.size());
        for (size_t t = 0; t < model.size(); ++t) {
            ASSERT_EQ(back[t].shape, model[t].shape);
            for (size_t i = 0; i < model[t].values.size(); ++i)
                ASSERT_EQ(float_bits(back[t].values[i]), float_bits(model[t].values[i]));
        }
        // Re-encoding the decoded model reproduces the codes.
        EXPECT_EQ(quantize_model(back, n), packed);
    }
}

TEST(QuantizeModel, CodeInvariants) {
    std::mt19937 rng(61);
    const RawModel model = random_quantized_model(rng, 9, 3);
    const PackedModel packed = quantize_model(model, 9);

    uint32_t max_code = 0;
    for (size_t t = 0; t < model.size(); ++t) {
        for (size_t i = 0; i < model[t].values.size(); ++i) {
            const PackedCode& c = packed.tensors[t].codes[i];
            const uint32_t u = float_bits(model[t].values[i]);
            // Zero escape: exactly the zero parameters get code 0.
            EXPECT_EQ(c.exp_code == 0, (u & ~kSignMask) == 0);
            if (c.exp_code > max_code) max_code = c.exp_code;
            // Monotonicity: codes order like unbiased exponents.
            if (c.exp_code != 0) {
                const int e = unbiased_exponent(decompose(model[t].values[i]));
                EXPECT_EQ(c.exp_code, static_cast<uint32_t>(e - packed.range.min + 1));
            }
        }
    }
    // Tightness: the densest code is exactly max - min + 1 and fits in len.
    EXPECT_EQ(max_code, static_cast<uint32_t>(packed.range.max - packed.range.min + 1));
    EXPECT_LT(max_code, 1u << packed.range.len);
    EXPECT_GE(2 * max_code + 1, 1u << packed.range.len);  // no slack beyond the ceiling
}
