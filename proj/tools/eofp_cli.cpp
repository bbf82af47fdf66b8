// eofp: mantissa + exponent quantization of binary32 model files, a toy
// QAT harness on a synthetic denoising task, and a bit-width sweep.
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "eofp/config.hpp"
#include "eofp/exponent.hpp"
#include "eofp/model_store.hpp"
#include "eofp/qat.hpp"

namespace {

using namespace eofp;

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::invalid_argument("short write to " + path);
}

const char* mode_name(RoundMode mode) {
    return mode == RoundMode::Chop ? "chop" : "round";
}

void print_size_report(const SizeReport& r, bool with_exponent_stage, bool porcelain) {
    if (porcelain) {
        std::printf("parameters=%" PRIu64 "\n", r.parameter_count);
        std::printf("n=%d\n", r.n);
        std::printf("bit_width=%d\n", 32 - r.n);
        std::printf("full_kb=%.4f\n", r.full_precision_kb);
        std::printf("full_kb_int=%" PRIu64 "\n", r.full_precision_kb_int);
        std::printf("mantissa_kb=%.4f\n", r.mantissa_quantized_kb);
        std::printf("mantissa_kb_int=%" PRIu64 "\n", r.mantissa_quantized_kb_int);
        std::printf("mantissa_ratio=%.2f\n", r.mantissa_ratio);
        if (with_exponent_stage) {
            std::printf("len=%u\n", r.len);
            std::printf("exponent_kb=%.4f\n", r.exponent_quantized_kb);
            std::printf("exponent_kb_int=%" PRIu64 "\n", r.exponent_quantized_kb_int);
            std::printf("fraction_percent=%.2f\n", r.final_fraction_percent);
        }
        return;
    }
    std::printf("parameters      : %" PRIu64 "\n", r.parameter_count);
    std::printf("full precision  : %.1f KB  (%" PRIu64 " KB)\n", r.full_precision_kb,
                r.full_precision_kb_int);
    std::printf("mantissa stage  : %.1f KB  (%" PRIu64 " KB)  ratio %.2f\n",
                r.mantissa_quantized_kb, r.mantissa_quantized_kb_int, r.mantissa_ratio);
    if (with_exponent_stage)
        std::printf("exponent stage  : %.1f KB  (%" PRIu64 " KB)  %.2f%% of full precision\n",
                    r.exponent_quantized_kb, r.exponent_quantized_kb_int,
                    r.final_fraction_percent);
}

int cmd_quantize(const std::string& input, const std::string& output, int bits, bool chop,
                 bool no_exponent_stage, bool porcelain) {
    const AnyModel any = read_model(read_file(input));
    if (!std::holds_alternative<RawModel>(any))
        throw std::invalid_argument(input + " is already packed; expected a raw model file");
    RawModel model = std::get<RawModel>(any);
    if (parameter_count(model) == 0)
        throw std::invalid_argument(input + " holds no parameters");

    const QuantSpec spec{32 - bits, chop ? RoundMode::Chop : RoundMode::ConditionalRound};
    for (Tensor& t : model) quantize_in_place(t.values, spec);

    if (no_exponent_stage) {
        write_file(output, write_raw_model(model));
        // The exponent stage never ran, so only the mantissa figures apply;
        // len = 1 is a placeholder that the report omits.
        const SizeReport report = size_report(parameter_count(model), spec.n, 1);
        print_size_report(report, false, porcelain);
        if (porcelain) {
            std::printf("mode=%s\n", mode_name(spec.mode));
            std::printf("exponent_stage=0\n");
            std::printf("output=%s\n", output.c_str());
        } else {
            std::printf("exponent stage  : skipped\n");
            std::printf("wrote           : %s\n", output.c_str());
        }
        return 0;
    }

    const PackedModel packed = quantize_model(model, spec.n);
    write_file(output, write_packed_model(packed));
    const SizeReport report =
        size_report(parameter_count(packed), packed.n, packed.range.len);
    if (porcelain) {
        print_size_report(report, true, porcelain);
        std::printf("mode=%s\n", mode_name(spec.mode));
        std::printf("exponent_stage=1\n");
        std::printf("min=%d\n", packed.range.min);
        std::printf("max=%d\n", packed.range.max);
        std::printf("output=%s\n", output.c_str());
    } else {
        std::printf("chop count n    : %d  (bit-width %d, %s)\n", spec.n, bits,
                    chop ? "directly chopping" : "conditional rounding");
        std::printf("exponent range  : {max, min, len} = {%d, %d, %u}\n", packed.range.max,
                    packed.range.min, packed.range.len);
        print_size_report(report, true, porcelain);
        std::printf("wrote           : %s\n", output.c_str());
    }
    return 0;
}

int cmd_dequantize(const std::string& input, const std::string& output, bool porcelain) {
    const AnyModel any = read_model(read_file(input));
    if (!std::holds_alternative<PackedModel>(any))
        throw std::invalid_argument(input + " is not a packed model file");
    const PackedModel& packed = std::get<PackedModel>(any);
    const RawModel model = decode_model(packed);
    write_file(output, write_raw_model(model));
    if (porcelain) {
        std::printf("parameters=%" PRIu64 "\n", parameter_count(model));
        std::printf("n=%d\n", packed.n);
        std::printf("len=%u\n", packed.range.len);
        std::printf("min=%d\n", packed.range.min);
        std::printf("output=%s\n", output.c_str());
    } else {
        std::printf("decoded %" PRIu64 " parameters (n = %d, len = %u, min = %d)\n",
                    parameter_count(model), packed.n, packed.range.len, packed.range.min);
        std::printf("wrote           : %s\n", output.c_str());
    }
    return 0;
}

struct ValueStats {
    std::map<int, uint64_t> by_exponent;  // unbiased exponent -> count
    uint64_t zeros = 0;
    uint64_t denormals = 0;
    uint64_t nonfinite = 0;
    uint64_t total = 0;

    void add_float(float v) {
        ++total;
        const FloatFields f = decompose(v);
        if (f.exponent == kSpecialExponent) {
            ++nonfinite;
        } else if (f.exponent == 0) {
            if (f.mantissa == 0)
                ++zeros;
            else
                ++denormals;
        } else {
            ++by_exponent[unbiased_exponent(f)];
        }
    }
};

void print_histogram(const ValueStats& stats, bool porcelain) {
    if (porcelain) {
        std::printf("hist_zero=%" PRIu64 "\n", stats.zeros);
        if (stats.denormals) std::printf("hist_denormal=%" PRIu64 "\n", stats.denormals);
        if (stats.nonfinite) std::printf("hist_nonfinite=%" PRIu64 "\n", stats.nonfinite);
        for (const auto& [e, count] : stats.by_exponent)
            std::printf("hist_%d=%" PRIu64 "\n", e, count);
        return;
    }
    std::printf("log2 |parameter| histogram (%" PRIu64 " parameters)\n", stats.total);
    uint64_t peak = std::max<uint64_t>(stats.zeros, 1);
    for (const auto& [e, count] : stats.by_exponent) peak = std::max(peak, count);
    auto bar = [&](uint64_t count) {
        const int width = static_cast<int>((40 * count + peak - 1) / peak);
        for (int i = 0; i < width; ++i) std::fputc('#', stdout);
        std::fputc('\n', stdout);
    };
    std::printf("  %8s | %8" PRIu64 " | ", "zero", stats.zeros);
    bar(stats.zeros);
    if (stats.denormals) {
        std::printf("  %8s | %8" PRIu64 " | ", "denormal", stats.denormals);
        bar(stats.denormals);
    }
    for (const auto& [e, count] : stats.by_exponent) {
        char label[16];
        std::snprintf(label, sizeof label, "2^%d", e);
        std::printf("  %8s | %8" PRIu64 " | ", label, count);
        bar(count);
    }
    if (stats.nonfinite)
        std::printf("  %8s | %8" PRIu64 " |\n", "non-fin", stats.nonfinite);
}

int cmd_inspect(const std::string& input, bool porcelain) {
    const AnyModel any = read_model(read_file(input));
    ValueStats stats;

    if (std::holds_alternative<RawModel>(any)) {
        const RawModel& model = std::get<RawModel>(any);
        for (const Tensor& t : model)
            for (float v : t.values) stats.add_float(v);
        if (porcelain) {
            std::printf("format=raw\n");
            std::printf("version=%u\n", kFormatVersion);
            std::printf("n=0\n");
            std::printf("tensors=%zu\n", model.size());
            std::printf("parameters=%" PRIu64 "\n", parameter_count(model));
        } else {
            std::printf("format          : raw (unquantized, n=0)\n");
            std::printf("tensors         : %zu\n", model.size());
            std::printf("parameters      : %" PRIu64 "\n", parameter_count(model));
        }
        if (!stats.by_exponent.empty()) {
            const int max = stats.by_exponent.rbegin()->first;
            const int min = stats.by_exponent.begin()->first;
            if (porcelain) {
                std::printf("max=%d\nmin=%d\nlen=%u\n", max, min, code_length(max, min));
            } else {
                std::printf("exponent range  : {max, min, len} = {%d, %d, %u}\n", max, min,
                            code_length(max, min));
            }
        } else if (!porcelain) {
            std::printf("exponent range  : (no nonzero normal parameters)\n");
        }
    } else {
        const PackedModel& model = std::get<PackedModel>(any);
        for (const PackedTensor& t : model.tensors) {
            for (const PackedCode& c : t.codes) {
                ++stats.total;
                if (c.exp_code == 0)
                    ++stats.zeros;
                else
                    ++stats.by_exponent[model.range.min + static_cast<int>(c.exp_code) - 1];
            }
        }
        if (porcelain) {
            std::printf("format=packed\n");
            std::printf("version=%u\n", kFormatVersion);
            std::printf("n=%d\n", model.n);
            std::printf("bit_width=%d\n", 32 - model.n);
            std::printf("tensors=%zu\n", model.tensors.size());
            std::printf("parameters=%" PRIu64 "\n", parameter_count(model));
            std::printf("max=%d\nmin=%d\nlen=%u\n", model.range.max, model.range.min,
                        model.range.len);
            std::printf("bits_per_parameter=%d\n", packed_code_width(model.n, model.range.len));
        } else {
            std::printf("format          : packed (n=%d, bit-width %d)\n", model.n,
                        32 - model.n);
            std::printf("tensors         : %zu\n", model.tensors.size());
            std::printf("parameters      : %" PRIu64 "\n", parameter_count(model));
            std::printf("exponent range  : {max, min, len} = {%d, %d, %u}\n",
                        model.range.max, model.range.min, model.range.len);
            std::printf("stored width    : %d bits per parameter\n",
                        packed_code_width(model.n, model.range.len));
        }
    }
    print_histogram(stats, porcelain);
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& history_path,
              const std::string& model_path, bool porcelain) {
    const TrainConfig cfg = train_config_from(KeyValueConfig::load(config_path));
    const TrainResult result = train(cfg);

    std::ofstream hist(history_path, std::ios::trunc);
    if (!hist) throw std::invalid_argument("cannot open " + history_path + " for writing");
    hist << "epoch,train_mse,val_mse,val_snr_db\n";
    for (size_t e = 0; e < result.history.size(); ++e) {
        char line[128];
        std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.4f\n", e,
                      result.history[e].train_mse, result.history[e].val_mse,
                      result.history[e].val_snr_db);
        hist << line;
    }
    hist.flush();
    if (!hist) throw std::invalid_argument("short write to " + history_path);

    if (!model_path.empty()) write_file(model_path, write_raw_model(to_model(result.net)));

    const EvalResult eval = evaluate(result.net, synth_dataset(cfg.seed, cfg.data));
    if (porcelain) {
        std::printf("epochs=%d\n", cfg.epochs);
        std::printf("parameters=%zu\n", result.net.parameter_count());
        std::printf("quantized=%d\n", cfg.quant ? 1 : 0);
        if (cfg.quant) {
            std::printf("n=%d\n", cfg.quant->n);
            std::printf("mode=%s\n", mode_name(cfg.quant->mode));
        }
        std::printf("final_val_mse=%.9g\n", eval.mse);
        std::printf("final_val_snr_db=%.4f\n", eval.output_snr_db);
        std::printf("snr_improvement_db=%.4f\n", eval.snr_improvement_db);
        std::printf("history=%s\n", history_path.c_str());
        if (!model_path.empty()) std::printf("model=%s\n", model_path.c_str());
    } else {
        std::string quant_note;
        if (cfg.quant)
            quant_note = " with n=" + std::to_string(cfg.quant->n) + " " +
                         mode_name(cfg.quant->mode);
        std::printf("trained %zu-layer network (%zu parameters) for %d epochs%s\n",
                    result.net.layers.size(), result.net.parameter_count(), cfg.epochs,
                    quant_note.c_str());
        std::printf("final val MSE %.6g | val SNR %.2f dB (improvement %+.2f dB)\n",
                    eval.mse, eval.output_snr_db, eval.snr_improvement_db);
        std::printf("history written to %s\n", history_path.c_str());
        if (!model_path.empty()) std::printf("model written to %s\n", model_path.c_str());
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& table_path,
              bool porcelain) {
    const SweepConfig cfg = sweep_config_from(KeyValueConfig::load(config_path));
    const SweepTable table = sweep(cfg);

    std::ofstream out(table_path, std::ios::trunc);
    if (!out) throw std::invalid_argument("cannot open " + table_path + " for writing");
    out << "bit_width";
    for (RoundMode mode : table.modes)
        out << "," << mode_name(mode) << "_mse," << mode_name(mode)
            << "_snr_improvement_db";
    out << "\n";
    for (const SweepRow& row : table.rows) {
        out << row.bit_width;
        for (const SweepCell& cell : row.by_mode) {
            char buf[64];
            std::snprintf(buf, sizeof buf, ",%.9g,%.4f", cell.mse, cell.snr_improvement_db);
            out << buf;
        }
        out << "\n";
    }
    out.flush();
    if (!out) throw std::invalid_argument("short write to " + table_path);

    if (porcelain) {
        std::printf("seeds=%u\n", cfg.seed_count);
        for (const SweepRow& row : table.rows) {
            for (size_t m = 0; m < table.modes.size(); ++m) {
                std::printf("bw%d_%s_mse=%.9g\n", row.bit_width, mode_name(table.modes[m]),
                            row.by_mode[m].mse);
                std::printf("bw%d_%s_snr_improvement_db=%.4f\n", row.bit_width,
                            mode_name(table.modes[m]), row.by_mode[m].snr_improvement_db);
            }
        }
        std::printf("table=%s\n", table_path.c_str());
    } else {
        std::printf("%-10s", "bit-width");
        for (RoundMode mode : table.modes)
            std::printf("  %11s MSE  %10s dSNR", mode_name(mode), mode_name(mode));
        std::printf("\n");
        for (const SweepRow& row : table.rows) {
            std::printf("%-10d", row.bit_width);
            for (const SweepCell& cell : row.by_mode)
                std::printf("  %15.6g  %13.2f", cell.mse, cell.snr_improvement_db);
            std::printf("\n");
        }
        std::printf("table written to %s (averaged over %u seeds)\n", table_path.c_str(),
                    cfg.seed_count);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exponent-only floating point (EOFP) model quantization toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // lets --porcelain appear after the subcommand too

    bool porcelain = false;
    app.add_flag("--porcelain", porcelain, "emit line-oriented key=value output");

    std::string input, output, config_path;
    int bits = 9;
    bool chop = false, no_exponent_stage = false;
    std::string history_path = "history.csv", model_path, table_path = "sweep.csv";

    auto* quantize = app.add_subcommand(
        "quantize", "mantissa-quantize a raw model and pack its exponents");
    quantize->add_option("input", input, "raw model file")->required();
    quantize->add_option("output", output, "destination file")->required();
    quantize->add_option("--bits", bits, "remaining bit-width per parameter")
        ->check(CLI::Range(9, 32))
        ->capture_default_str();
    quantize->add_flag("--chop", chop, "directly chop instead of conditional rounding");
    quantize->add_flag("--no-exponent-stage", no_exponent_stage,
                       "stop after mantissa quantization; write a raw file");

    auto* dequantize =
        app.add_subcommand("dequantize", "decode a packed model back to raw binary32");
    dequantize->add_option("input", input, "packed model file")->required();
    dequantize->add_option("output", output, "destination raw file")->required();

    auto* inspect = app.add_subcommand("inspect", "print header, exponent range and "
                                                  "log2-magnitude histogram");
    inspect->add_option("input", input, "model file, raw or packed")->required();

    auto* train_cmd = app.add_subcommand("train", "run the denoising QAT demo");
    train_cmd->add_option("config", config_path, "key = value run configuration")
        ->required();
    train_cmd->add_option("--history", history_path, "per-epoch metrics CSV")
        ->capture_default_str();
    train_cmd->add_option("--save-model", model_path, "also save the final model (raw)");

    auto* sweep_cmd =
        app.add_subcommand("sweep", "train over a grid of bit-widths and rounding modes");
    sweep_cmd->add_option("config", config_path, "key = value sweep configuration")
        ->required();
    sweep_cmd->add_option("--table", table_path, "result grid CSV")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help exits clean, every usage error is 1
    }

    try {
        if (quantize->parsed())
            return cmd_quantize(input, output, bits, chop, no_exponent_stage, porcelain);
        if (dequantize->parsed()) return cmd_dequantize(input, output, porcelain);
        if (inspect->parsed()) return cmd_inspect(input, porcelain);
        if (train_cmd->parsed())
            return cmd_train(config_path, history_path, model_path, porcelain);
        if (sweep_cmd->parsed()) return cmd_sweep(config_path, table_path, porcelain);
    } catch (const eofp::ExponentOverflowError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const eofp::DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
