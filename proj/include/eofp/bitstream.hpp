#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace eofp {

// MSB-first bit packing: fields enter most significant bit first and bytes
// fill from bit 7 down to bit 0.
class BitWriter {
public:
    void write(uint32_t value, int width) {
        for (int i = width - 1; i >= 0; --i) put_bit((value >> i) & 1u);
    }

    // Unwritten bits of the final byte stay zero.
    const std::vector<uint8_t>& bytes() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }

private:
    void put_bit(uint32_t b) {
        if (free_ == 0) {
            buf_.push_back(0);
            free_ = 8;
        }
        --free_;
        if (b) buf_.back() |= static_cast<uint8_t>(1u << free_);
    }

    std::vector<uint8_t> buf_;
    int free_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

    uint32_t read(int width) {
        uint32_t v = 0;
        for (int i = 0; i < width; ++i) v = (v << 1) | get_bit();
        return v;
    }

    size_t bits_consumed() const { return pos_; }

private:
    uint32_t get_bit() {
        if (pos_ >= bytes_.size() * 8)
            throw std::out_of_range("BitReader: read past end of stream");
        const uint32_t b = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
        ++pos_;
        return b;
    }

    std::span<const uint8_t> bytes_;
    size_t pos_ = 0;
};

}  // namespace eofp
