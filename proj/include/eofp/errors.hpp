#pragma once

#include <stdexcept>
#include <string>

namespace eofp {

// Thrown when conditional rounding at n == 23 would push the biased exponent
// to 255 and the value would stop being a finite float.
class ExponentOverflowError : public std::runtime_error {
public:
    explicit ExponentOverflowError(std::string msg, long element = -1)
        : std::runtime_error(std::move(msg)), element_(element) {}

    // Index of the offending tensor element, or -1 for scalar calls.
    long element() const noexcept { return element_; }

private:
    long element_;
};

// Raised by the training loop when the loss stops being finite.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::string msg, int epoch)
        : std::runtime_error(std::move(msg)), epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

// Malformed model files. The failure class is kept so callers can emit a
// distinct diagnostic per case.
class ModelFileError : public std::runtime_error {
public:
    enum class Kind {
        BadMagic,
        BadVersion,
        BadHeader,     // field values that cannot describe a model
        Truncated,     // stream ends before the header/payload does
        TrailingData,  // bytes left over after the last payload
    };

    ModelFileError(Kind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace eofp
