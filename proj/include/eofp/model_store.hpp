#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "eofp/bitstream.hpp"
#include "eofp/errors.hpp"
#include "eofp/exponent.hpp"
#include "eofp/tensor.hpp"

namespace eofp {

// On-disk container. All multi-byte header integers are little endian.
//
//   offset  size  field
//   0       4     magic "EOFP"
//   4       1     version (currently 1)
//   5       1     n, mantissa chop count
//   6       1     len, exponent code width in bits (0 marks a raw file)
//   7       2     min, smallest unbiased exponent (int16)
//   9       2     tensor count (uint16)
//   11      ...   per tensor: rank (1 byte), then each dimension (uint32)
//
// Tensor payloads follow in tensor order. A packed file stores each
// parameter as [sign][exp_code][residual] in 1 + len + (23 - n) bits, MSB
// first, each tensor padded to a byte boundary. A raw file (n = 0, len = 0,
// min = 0) stores plain binary32 values. A file with no tensors is exactly
// the 11 header bytes.

inline constexpr char kMagic[4] = {'E', 'O', 'F', 'P'};
inline constexpr uint8_t kFormatVersion = 1;
inline constexpr size_t kHeaderBytes = 11;
inline constexpr uint32_t kMaxCodeLength = 8;  // unbiased exponents span < 2^8 values
inline constexpr uint64_t kMaxFileParameters = uint64_t{1} << 32;

using AnyModel = std::variant<RawModel, PackedModel>;

inline int packed_code_width(int n, uint32_t len) {
    return 1 + static_cast<int>(len) + (kMantissaBits - n);
}

namespace detail {

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xFF));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

    uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(bytes_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::span<const uint8_t> take(size_t count) {
        need(count);
        auto s = bytes_.subspan(pos_, count);
        pos_ += count;
        return s;
    }
    size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(size_t count) const {
        if (bytes_.size() - pos_ < count)
            throw ModelFileError(ModelFileError::Kind::Truncated,
                                 "model file: truncated stream");
    }

    std::span<const uint8_t> bytes_;
    size_t pos_ = 0;
};

inline void write_header(std::vector<uint8_t>& out, uint8_t n, uint8_t len, int min,
                         size_t tensor_count) {
    if (min < std::numeric_limits<int16_t>::min() ||
        min > std::numeric_limits<int16_t>::max())
        throw std::invalid_argument("model file: min exponent does not fit int16");
    if (tensor_count > 0xFFFF)
        throw std::invalid_argument("model file: too many tensors");
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kFormatVersion);
    out.push_back(n);
    out.push_back(len);
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(min)));
    put_u16(out, static_cast<uint16_t>(tensor_count));
}

inline void write_tensor_descriptor(std::vector<uint8_t>& out,
                                    const std::vector<uint32_t>& shape) {
    if (shape.size() > 0xFF)
        throw std::invalid_argument("model file: tensor rank exceeds 255");
    out.push_back(static_cast<uint8_t>(shape.size()));
    for (uint32_t d : shape) put_u32(out, d);
}

inline void check_element_count(const std::vector<uint32_t>& shape, size_t actual,
                                const char* what) {
    const uint64_t expected = element_count(shape);
    if (expected != actual)
        throw std::invalid_argument(std::string("model file: ") + what +
                                    " count does not match its shape");
}

}  // namespace detail

inline std::vector<uint8_t> write_packed_model(const PackedModel& model) {
    if (model.n < 0 || model.n > kMantissaBits)
        throw std::invalid_argument("write_packed_model: n out of range");
    const ExponentRange& r = model.range;
    if (r.len == 0 || r.len > kMaxCodeLength || r.min > r.max ||
        r.len != code_length(r.max, r.min))
        throw std::invalid_argument("write_packed_model: inconsistent exponent range");

    std::vector<uint8_t> out;
    detail::write_header(out, static_cast<uint8_t>(model.n),
                         static_cast<uint8_t>(r.len), r.min, model.tensors.size());
    for (const PackedTensor& t : model.tensors)
        detail::write_tensor_descriptor(out, t.shape);

    const uint32_t max_code = static_cast<uint32_t>(r.max - r.min + 1);
    const int residual_bits = kMantissaBits - model.n;
    for (const PackedTensor& t : model.tensors) {
        detail::check_element_count(t.shape, t.codes.size(), "packed tensor");
        BitWriter bits;
        for (const PackedCode& c : t.codes) {
            if (c.sign > 1u || c.exp_code > max_code ||
                c.residual >= (1u << residual_bits))
                throw std::invalid_argument(
                    "write_packed_model: code inconsistent with range/n");
            bits.write(c.sign, 1);
            bits.write(c.exp_code, static_cast<int>(r.len));
            bits.write(c.residual, residual_bits);
        }
        auto payload = bits.take();
        out.insert(out.end(), payload.begin(), payload.end());
    }
    return out;
}

inline std::vector<uint8_t> write_raw_model(const RawModel& model) {
    std::vector<uint8_t> out;
    detail::write_header(out, 0, 0, 0, model.size());
    for (const Tensor& t : model) detail::write_tensor_descriptor(out, t.shape);
    for (const Tensor& t : model) {
        detail::check_element_count(t.shape, t.values.size(), "tensor");
        for (float v : t.values) detail::put_u32(out, float_bits(v));
    }
    return out;
}

inline AnyModel read_model(std::span<const uint8_t> bytes) {
    detail::ByteReader in(bytes);

    char magic[4];
    auto m = in.take(4);
    std::memcpy(magic, m.data(), 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw ModelFileError(ModelFileError::Kind::BadMagic, "model file: bad magic");
    const uint8_t version = in.u8();
    if (version != kFormatVersion)
        throw ModelFileError(ModelFileError::Kind::BadVersion,
                             "model file: unsupported version " + std::to_string(version));
    const uint8_t n = in.u8();
    const uint8_t len = in.u8();
    const int min = static_cast<int16_t>(in.u16());
    const uint16_t tensor_count = in.u16();

    if (n > kMantissaBits)
        throw ModelFileError(ModelFileError::Kind::BadHeader,
                             "model file: chop count n > 23");
    const bool raw = (len == 0);
    if (raw && (n != 0 || min != 0))
        throw ModelFileError(ModelFileError::Kind::BadHeader,
                             "model file: raw sentinel requires n = 0 and min = 0");
    if (!raw && len > kMaxCodeLength)
        throw ModelFileError(ModelFileError::Kind::BadHeader,
                             "model file: exponent code length > 8");

    std::vector<std::vector<uint32_t>> shapes(tensor_count);
    uint64_t total = 0;
    for (auto& shape : shapes) {
        const uint8_t rank = in.u8();
        shape.resize(rank);
        uint64_t count = 1;
        for (auto& d : shape) {
            d = in.u32();
            count *= d;
            if (count > kMaxFileParameters)
                throw ModelFileError(ModelFileError::Kind::BadHeader,
                                     "model file: tensor too large");
        }
        total += count;
        if (total > kMaxFileParameters)
            throw ModelFileError(ModelFileError::Kind::BadHeader,
                                 "model file: model too large");
    }

    // The payload length is implied by the header, so a size mismatch is
    // detectable before any element is decoded.
    uint64_t payload_bytes = 0;
    const int width = raw ? 0 : packed_code_width(n, len);
    for (const auto& shape : shapes) {
        const uint64_t count = element_count(shape);
        payload_bytes += raw ? count * 4 : (count * width + 7) / 8;
    }
    if (in.remaining() < payload_bytes)
        throw ModelFileError(ModelFileError::Kind::Truncated,
                             "model file: payload shorter than header implies");
    if (in.remaining() > payload_bytes)
        throw ModelFileError(ModelFileError::Kind::TrailingData,
                             "model file: trailing bytes after payload");

    if (raw) {
        RawModel model(tensor_count);
        for (size_t i = 0; i < shapes.size(); ++i) {
            model[i].shape = std::move(shapes[i]);
            const uint64_t count = element_count(model[i].shape);
            model[i].values.resize(count);
            for (auto& v : model[i].values) v = float_from_bits(in.u32());
        }
        return model;
    }

    PackedModel model;
    model.n = n;
    model.range.min = min;
    model.range.len = len;
    model.tensors.resize(tensor_count);
    uint32_t max_code_seen = 0;
    for (size_t i = 0; i < shapes.size(); ++i) {
        PackedTensor& t = model.tensors[i];
        t.shape = std::move(shapes[i]);
        const uint64_t count = element_count(t.shape);
        BitReader bits(in.take(static_cast<size_t>((count * width + 7) / 8)));
        t.codes.resize(count);
        for (auto& c : t.codes) {
            c.sign = bits.read(1);
            c.exp_code = bits.read(static_cast<int>(len));
            c.residual = bits.read(kMantissaBits - n);
            if (c.exp_code > max_code_seen) max_code_seen = c.exp_code;
        }
    }
    // The header stores {n, len, min}; max is recovered from the codes.
    model.range.max = max_code_seen == 0 ? min : min + static_cast<int>(max_code_seen) - 1;
    return model;
}

// Stage-by-stage size accounting for a parameter count P:
//   full precision    P * 32 bits
//   mantissa stage    P * (32 - n) bits
//   exponent stage    P * (1 + len + (23 - n)) bits
struct SizeReport {
    uint64_t parameter_count = 0;
    int n = 0;
    uint32_t len = 0;
    double full_precision_kb = 0.0;
    double mantissa_quantized_kb = 0.0;
    double exponent_quantized_kb = 0.0;
    // Round-half-up to whole KB, the form the stage summaries print.
    uint64_t full_precision_kb_int = 0;
    uint64_t mantissa_quantized_kb_int = 0;
    uint64_t exponent_quantized_kb_int = 0;
    double mantissa_ratio = 0.0;          // 32 / (32 - n)
    double compression_ratio = 0.0;       // 32 / (1 + len + (23 - n))
    double final_fraction_percent = 0.0;  // exponent stage over full, integer KB
};

inline uint64_t round_half_up(double x) {
    return static_cast<uint64_t>(std::floor(x + 0.5));
}

inline SizeReport size_report(uint64_t parameter_count, int n, uint32_t len) {
    if (parameter_count == 0)
        throw std::invalid_argument("size_report: parameter count must be positive");
    if (n < 0 || n > kMantissaBits)
        throw std::invalid_argument("size_report: n out of range");
    if (len == 0 || len > kMaxCodeLength)
        throw std::invalid_argument("size_report: len out of range");

    const double p = static_cast<double>(parameter_count);
    SizeReport r;
    r.parameter_count = parameter_count;
    r.n = n;
    r.len = len;
    r.full_precision_kb = p * 32 / 8 / 1024;
    r.mantissa_quantized_kb = p * (32 - n) / 8 / 1024;
    r.exponent_quantized_kb = p * packed_code_width(n, len) / 8 / 1024;
    r.full_precision_kb_int = round_half_up(r.full_precision_kb);
    r.mantissa_quantized_kb_int = round_half_up(r.mantissa_quantized_kb);
    r.exponent_quantized_kb_int = round_half_up(r.exponent_quantized_kb);
    r.mantissa_ratio = 32.0 / (32 - n);
    r.compression_ratio = 32.0 / packed_code_width(n, len);
    r.final_fraction_percent = 100.0 * static_cast<double>(r.exponent_quantized_kb_int) /
                               static_cast<double>(r.full_precision_kb_int);
    return r;
}

}  // namespace eofp
