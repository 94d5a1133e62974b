#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bloomseg {

enum class ErrorCode {
    InvalidArgument,
    UnreadableFile,
    UnsupportedFormat,
    CorruptData,
    IoFailure,
    InvalidSpec,
    LayoutMismatch,
    CountMismatch,
    ShapeMismatch,
    MissingScoreFile,
    EmptyDataset,
    EmptySelection,
    EmptyStrokes,
    OverlappingStrokes,
    UnpairedFiles,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace bloomseg
