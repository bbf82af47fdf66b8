#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eofp/config.hpp"
#include "eofp/dataset.hpp"
#include "eofp/errors.hpp"
#include "eofp/network.hpp"
#include "eofp/quantize.hpp"

namespace eofp {

struct TrainConfig {
    uint32_t seed = 1;
    int epochs = 40;
    float learning_rate = 2.0f;  // steps scale with the per-sample mean-MSE gradient
    int batch_size = 8;
    std::optional<QuantSpec> quant;  // applied to every parameter at epoch end
    DatasetConfig data;
    std::vector<uint32_t> hidden = {64, 64};
};

struct EpochStats {
    double train_mse = 0.0;
    double val_mse = 0.0;
    double val_snr_db = 0.0;
};

struct EvalResult {
    double mse = 0.0;
    double output_snr_db = 0.0;
    double snr_improvement_db = 0.0;
};

struct TrainResult {
    ToyNetwork net;
    std::vector<EpochStats> history;
};

// Called after the epoch-end quantization, once the stats are final.
using EpochCallback = std::function<void(int epoch, const ToyNetwork&, const EpochStats&)>;

namespace detail {

struct SliceEval {
    double mse = 0.0;
    double output_snr_db = 0.0;
};

inline SliceEval evaluate_slice(const ToyNetwork& net, const Dataset& ds, uint32_t first,
                                uint32_t count, Workspace& ws) {
    double se = 0.0, sig = 0.0, err = 0.0;
    for (uint32_t f = first; f < first + count; ++f) {
        const auto out = forward(net, ds.noisy_frame(f), ws);
        const auto clean = ds.clean_frame(f);
        for (size_t i = 0; i < out.size(); ++i) {
            const double d = static_cast<double>(out[i]) - clean[i];
            se += d * d;
            err += d * d;
            sig += static_cast<double>(clean[i]) * clean[i];
        }
    }
    SliceEval r;
    r.mse = se / (static_cast<double>(count) * ds.frame_len);
    if (sig == 0.0)
        r.output_snr_db = -kSnrCapDb;
    else if (err == 0.0)
        r.output_snr_db = kSnrCapDb;
    else
        r.output_snr_db = std::clamp(10.0 * std::log10(sig / err), -kSnrCapDb, kSnrCapDb);
    return r;
}

inline void quantize_network(ToyNetwork& net, const QuantSpec& spec) {
    for (DenseLayer& layer : net.layers) {
        quantize_in_place(layer.weights, spec);
        quantize_in_place(layer.biases, spec);
    }
}

}  // namespace detail

// Validation metrics for the deployable network.
inline EvalResult evaluate(const ToyNetwork& net, const Dataset& ds) {
    Workspace ws(net);
    const auto slice =
        detail::evaluate_slice(net, ds, ds.train_frames, ds.validation_frames(), ws);
    EvalResult r;
    r.mse = slice.mse;
    r.output_snr_db = slice.output_snr_db;
    r.snr_improvement_db =
        slice.output_snr_db -
        measured_input_snr_db(ds, ds.train_frames, ds.validation_frames());
    return r;
}

// Minibatch SGD on MSE, full precision within an epoch. When a quantization
// spec is present, every weight and bias is quantized at the epoch boundary
// and the next epoch starts from the quantized values; the recorded stats
// always describe the post-quantization network.
inline TrainResult train(const TrainConfig& cfg, const EpochCallback& callback = {}) {
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (!(cfg.learning_rate > 0.0f))
        throw std::invalid_argument("train: learning rate must be positive");
    if (cfg.batch_size < 1) throw std::invalid_argument("train: batch size must be >= 1");
    if (cfg.quant) validate(*cfg.quant);

    const Dataset ds = synth_dataset(cfg.seed, cfg.data);

    std::vector<uint32_t> widths;
    widths.push_back(cfg.data.frame_len);
    widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
    widths.push_back(cfg.data.frame_len);

    TrainResult result;
    result.net = make_network(cfg.seed ^ 0x9E3779B9u, widths);
    Workspace ws(result.net);

    std::mt19937 order_rng(cfg.seed ^ 0x85EBCA6Bu);
    std::vector<uint32_t> order(ds.train_frames);
    for (uint32_t i = 0; i < ds.train_frames; ++i) order[i] = i;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (uint32_t i = ds.train_frames - 1; i > 0; --i)
            std::swap(order[i], order[order_rng() % (i + 1)]);

        for (uint32_t start = 0; start < ds.train_frames;
             start += static_cast<uint32_t>(cfg.batch_size)) {
            const uint32_t batch = std::min<uint32_t>(cfg.batch_size,
                                                      ds.train_frames - start);
            ws.zero_gradients();
            double batch_loss = 0.0;
            for (uint32_t b = 0; b < batch; ++b) {
                const uint32_t f = order[start + b];
                forward(result.net, ds.noisy_frame(f), ws);
                batch_loss += backward(result.net, ds.clean_frame(f), ws);
            }
            if (!std::isfinite(batch_loss))
                throw DivergenceError("train: loss diverged at epoch " +
                                          std::to_string(epoch),
                                      epoch);
            apply_gradients(result.net, ws, cfg.learning_rate / static_cast<float>(batch));
        }

        if (cfg.quant) detail::quantize_network(result.net, *cfg.quant);

        const auto train_eval = detail::evaluate_slice(result.net, ds, 0, ds.train_frames, ws);
        const auto val_eval = detail::evaluate_slice(result.net, ds, ds.train_frames,
                                                     ds.validation_frames(), ws);
        const EpochStats stats{train_eval.mse, val_eval.mse, val_eval.output_snr_db};
        if (!std::isfinite(stats.train_mse) || !std::isfinite(stats.val_mse))
            throw DivergenceError("train: metrics diverged at epoch " +
                                      std::to_string(epoch),
                                  epoch);
        result.history.push_back(stats);
        if (callback) callback(epoch, result.net, stats);
    }
    return result;
}

// ---- bit-width sweep ----

struct SweepConfig {
    std::vector<int> bit_widths = {32, 26, 20, 14, 12, 11, 10, 9};
    std::vector<RoundMode> modes = {RoundMode::ConditionalRound, RoundMode::Chop};
    uint32_t seed_count = 5;  // seeds base.seed, base.seed + 1, ...
    TrainConfig base;
};

struct SweepCell {
    double mse = 0.0;                 // seed-mean validation MSE
    double snr_improvement_db = 0.0;  // seed-mean
};

struct SweepRow {
    int bit_width = 0;
    std::vector<SweepCell> by_mode;  // parallel to SweepTable::modes
};

struct SweepTable {
    std::vector<RoundMode> modes;
    std::vector<SweepRow> rows;
};

// Grid of train + evaluate runs; every cell sees the same seeds, so columns
// are directly comparable.
inline SweepTable sweep(const SweepConfig& cfg) {
    if (cfg.seed_count == 0) throw std::invalid_argument("sweep: need >= 1 seed");
    for (int bw : cfg.bit_widths)
        if (bw < 9 || bw > 32)
            throw std::invalid_argument("sweep: bit-width must be in [9, 32], got " +
                                        std::to_string(bw));

    SweepTable table;
    table.modes = cfg.modes;
    for (int bw : cfg.bit_widths) {
        SweepRow row;
        row.bit_width = bw;
        for (RoundMode mode : cfg.modes) {
            SweepCell cell;
            for (uint32_t s = 0; s < cfg.seed_count; ++s) {
                TrainConfig run = cfg.base;
                run.seed = cfg.base.seed + s;
                run.quant = QuantSpec{32 - bw, mode};
                const TrainResult trained = train(run);
                const EvalResult eval = evaluate(trained.net, synth_dataset(run.seed, run.data));
                cell.mse += eval.mse;
                cell.snr_improvement_db += eval.snr_improvement_db;
            }
            cell.mse /= cfg.seed_count;
            cell.snr_improvement_db /= cfg.seed_count;
            row.by_mode.push_back(cell);
        }
        table.rows.push_back(row);
    }
    return table;
}

// ---- key = value run configuration ----
// Keys: seed, epochs, lr, frames, frame_len, input_snr_db, n, mode
// (sweep also reads: bit_widths, seeds).

inline RoundMode mode_from_string(const std::string& s) {
    if (s == "round" || s == "conditional") return RoundMode::ConditionalRound;
    if (s == "chop") return RoundMode::Chop;
    throw std::invalid_argument("config: mode must be 'round' or 'chop', got '" + s + "'");
}

namespace detail {
inline void reject_unknown_keys(const KeyValueConfig& cfg,
                                const std::set<std::string>& known) {
    for (const auto& [key, value] : cfg.values())
        if (!known.count(key))
            throw std::invalid_argument("config: unknown key '" + key + "'");
}
}  // namespace detail

inline TrainConfig train_config_from(const KeyValueConfig& cfg) {
    detail::reject_unknown_keys(cfg, {"seed", "epochs", "lr", "frames", "frame_len",
                                      "input_snr_db", "n", "mode"});
    TrainConfig out;
    out.seed = static_cast<uint32_t>(cfg.get_int("seed", 1));
    out.epochs = static_cast<int>(cfg.get_int("epochs", out.epochs));
    out.learning_rate = static_cast<float>(cfg.get_double("lr", out.learning_rate));
    out.data.frames = static_cast<uint32_t>(cfg.get_int("frames", out.data.frames));
    out.data.frame_len = static_cast<uint32_t>(cfg.get_int("frame_len", out.data.frame_len));
    out.data.input_snr_db = cfg.get_double("input_snr_db", out.data.input_snr_db);
    if (cfg.has("n")) {
        QuantSpec spec;
        spec.n = static_cast<int>(cfg.get_int("n", 0));
        spec.mode = mode_from_string(cfg.get("mode", "round"));
        validate(spec);
        out.quant = spec;
    } else if (cfg.has("mode")) {
        throw std::invalid_argument("config: 'mode' needs 'n' as well");
    }
    return out;
}

inline SweepConfig sweep_config_from(const KeyValueConfig& cfg) {
    detail::reject_unknown_keys(cfg, {"seed", "epochs", "lr", "frames", "frame_len",
                                      "input_snr_db", "bit_widths", "seeds"});
    SweepConfig out;
    out.base.seed = static_cast<uint32_t>(cfg.get_int("seed", 1));
    out.base.epochs = static_cast<int>(cfg.get_int("epochs", out.base.epochs));
    out.base.learning_rate =
        static_cast<float>(cfg.get_double("lr", out.base.learning_rate));
    out.base.data.frames =
        static_cast<uint32_t>(cfg.get_int("frames", out.base.data.frames));
    out.base.data.frame_len =
        static_cast<uint32_t>(cfg.get_int("frame_len", out.base.data.frame_len));
    out.base.data.input_snr_db = cfg.get_double("input_snr_db", out.base.data.input_snr_db);
    out.seed_count = static_cast<uint32_t>(cfg.get_int("seeds", out.seed_count));
    std::vector<long> widths;
    for (int bw : out.bit_widths) widths.push_back(bw);
    const auto parsed = cfg.get_int_list("bit_widths", widths);
    out.bit_widths.assign(parsed.begin(), parsed.end());
    return out;
}

}  // namespace eofp
