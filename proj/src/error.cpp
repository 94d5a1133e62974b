#include "bloomseg/error.hpp"

namespace bloomseg {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::UnreadableFile: return "UnreadableFile";
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptData: return "CorruptData";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::LayoutMismatch: return "LayoutMismatch";
        case ErrorCode::CountMismatch: return "CountMismatch";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::MissingScoreFile: return "MissingScoreFile";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::EmptySelection: return "EmptySelection";
        case ErrorCode::EmptyStrokes: return "EmptyStrokes";
        case ErrorCode::OverlappingStrokes: return "OverlappingStrokes";
        case ErrorCode::UnpairedFiles: return "UnpairedFiles";
    }
    return "Unknown";
}

} // namespace bloomseg
