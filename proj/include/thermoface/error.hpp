#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace thermoface {

enum class ErrorCode {
    EmptyImage,
    InvalidPlane,
    ImageTooSmall,
    NoComponents,
    ShapeMismatch,
    InvalidTarget,
    InvalidBlockSize,
    InvalidTopology,
    EmptyDataset,
    NeedTwoClasses,
    NoTrials,
    InvalidClass,
    InvalidConfig,
    IoError,
    FormatError,
};

constexpr std::string_view error_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::InvalidPlane: return "InvalidPlane";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::NoComponents: return "NoComponents";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::InvalidBlockSize: return "InvalidBlockSize";
    case ErrorCode::InvalidTopology: return "InvalidTopology";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NeedTwoClasses: return "NeedTwoClasses";
    case ErrorCode::NoTrials: return "NoTrials";
    case ErrorCode::InvalidClass: return "InvalidClass";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    }
    return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code.
/// what() reads "<CodeName>: <detail>".
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail = {})
        : std::runtime_error(detail.empty() ? std::string(error_name(code))
                                            : std::string(error_name(code)) + ": " + detail),
          code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace thermoface
