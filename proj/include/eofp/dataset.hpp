#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace eofp {

// SNR values are clamped here so a zero-error comparison stays finite.
inline constexpr double kSnrCapDb = 200.0;

// Deterministic scalar draws on top of mt19937. The std:: distributions are
// not pinned across library versions, so they are not used for data that
// tests freeze.
inline float uniform01(std::mt19937& rng) {
    return static_cast<float>(rng() >> 8) * (1.0f / 16777216.0f);
}

inline float uniform(std::mt19937& rng, float lo, float hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline float gaussian(std::mt19937& rng) {
    // Box-Muller, u1 shifted away from zero.
    const double u1 = (static_cast<double>(rng()) + 1.0) * (1.0 / 4294967296.0);
    const double u2 = static_cast<double>(rng()) * (1.0 / 4294967296.0);
    return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) *
                              std::cos(2.0 * std::numbers::pi * u2));
}

struct DatasetConfig {
    uint32_t frames = 1024;     // total frame pairs; the last eighth validates
    uint32_t frame_len = 32;
    double input_snr_db = 6.0;  // +inf leaves the frames noise-free
};

// Paired denoising corpus. Clean frames are Hann-windowed mixtures of random
// sinusoids; noisy frames add white noise scaled so the corpus-wide SNR hits
// the configured target.
struct Dataset {
    uint32_t frame_len = 0;
    uint32_t frame_count = 0;
    uint32_t train_frames = 0;
    std::vector<float> clean;  // frame_count * frame_len, row major
    std::vector<float> noisy;

    std::span<const float> clean_frame(uint32_t i) const {
        return {clean.data() + static_cast<size_t>(i) * frame_len, frame_len};
    }
    std::span<const float> noisy_frame(uint32_t i) const {
        return {noisy.data() + static_cast<size_t>(i) * frame_len, frame_len};
    }
    uint32_t validation_frames() const { return frame_count - train_frames; }
};

inline Dataset synth_dataset(uint32_t seed, const DatasetConfig& cfg) {
    if (cfg.frames < 8 || cfg.frame_len == 0)
        throw std::invalid_argument("synth_dataset: need frame_len > 0 and frames >= 8");
    if (!(cfg.input_snr_db >= 0.0) && !std::isinf(cfg.input_snr_db))
        throw std::invalid_argument("synth_dataset: input SNR must be >= 0 dB");

    std::mt19937 rng(seed);
    Dataset ds;
    ds.frame_len = cfg.frame_len;
    ds.frame_count = cfg.frames;
    ds.train_frames = cfg.frames - cfg.frames / 8;
    const size_t total = static_cast<size_t>(cfg.frames) * cfg.frame_len;
    ds.clean.resize(total);
    ds.noisy.resize(total);

    const float L = static_cast<float>(cfg.frame_len);
    for (uint32_t f = 0; f < cfg.frames; ++f) {
        float* frame = ds.clean.data() + static_cast<size_t>(f) * cfg.frame_len;
        const uint32_t tones = 1 + rng() % 3;
        for (uint32_t k = 0; k < tones; ++k) {
            const float amp = uniform(rng, 0.3f, 1.0f);
            const float omega = uniform(rng, 0.2f, 2.8f);
            const float phase = uniform(rng, 0.0f, 2.0f * std::numbers::pi_v<float>);
            for (uint32_t t = 0; t < cfg.frame_len; ++t)
                frame[t] += amp * std::sin(omega * static_cast<float>(t) + phase);
        }
        for (uint32_t t = 0; t < cfg.frame_len; ++t) {
            const float hann =
                0.5f - 0.5f * std::cos(2.0f * std::numbers::pi_v<float> *
                                       static_cast<float>(t) / (L - 1.0f));
            frame[t] *= hann;
        }
    }

    std::vector<float> noise(total);
    double clean_power = 0.0, noise_power = 0.0;
    for (size_t i = 0; i < total; ++i) {
        noise[i] = gaussian(rng);
        clean_power += static_cast<double>(ds.clean[i]) * ds.clean[i];
        noise_power += static_cast<double>(noise[i]) * noise[i];
    }
    if (!std::isfinite(cfg.input_snr_db) || noise_power == 0.0) {
        ds.noisy = ds.clean;  // bit-identical, including signed zeros
        return ds;
    }
    const double scale = std::sqrt(
        clean_power / (noise_power * std::pow(10.0, cfg.input_snr_db / 10.0)));
    for (size_t i = 0; i < total; ++i)
        ds.noisy[i] = ds.clean[i] + static_cast<float>(scale) * noise[i];
    return ds;
}

// 10 log10(sum ref^2 / sum (test - ref)^2), clamped to +-kSnrCapDb.
inline double snr_db(std::span<const float> ref, std::span<const float> test) {
    double sig = 0.0, err = 0.0;
    for (size_t i = 0; i < ref.size(); ++i) {
        sig += static_cast<double>(ref[i]) * ref[i];
        const double d = static_cast<double>(test[i]) - ref[i];
        err += d * d;
    }
    if (sig == 0.0) return -kSnrCapDb;
    if (err == 0.0) return kSnrCapDb;
    const double v = 10.0 * std::log10(sig / err);
    return std::clamp(v, -kSnrCapDb, kSnrCapDb);
}

// Measured SNR of the noisy frames in [first, first + count).
inline double measured_input_snr_db(const Dataset& ds, uint32_t first, uint32_t count) {
    const size_t offset = static_cast<size_t>(first) * ds.frame_len;
    const size_t total = static_cast<size_t>(count) * ds.frame_len;
    return snr_db({ds.clean.data() + offset, total}, {ds.noisy.data() + offset, total});
}

}  // namespace eofp
