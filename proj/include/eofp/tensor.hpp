#pragma once

#include <cstdint>
#include <vector>

namespace eofp {

// Dense row-major tensor of binary32 parameters.
struct Tensor {
    std::vector<uint32_t> shape;
    std::vector<float> values;

    bool operator==(const Tensor&) const = default;
};

// A model is its tensors, in a fixed order.
using RawModel = std::vector<Tensor>;

inline uint64_t element_count(const std::vector<uint32_t>& shape) {
    uint64_t n = 1;
    for (uint32_t d : shape) n *= d;
    return n;
}

inline uint64_t parameter_count(const RawModel& model) {
    uint64_t n = 0;
    for (const auto& t : model) n += t.values.size();
    return n;
}

}  // namespace eofp
