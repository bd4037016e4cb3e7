#include "accdor/errors.hpp"

namespace accdor {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidImage: return "InvalidImage";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::NoAnteriorSegment: return "NoAnteriorSegment";
    case ErrorCode::PromptOutsideAllMasks: return "PromptOutsideAllMasks";
    case ErrorCode::BackendError: return "BackendError";
    case ErrorCode::BackendTimeout: return "BackendTimeout";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DivergedTraining: return "DivergedTraining";
    case ErrorCode::AlphaSearchFailed: return "AlphaSearchFailed";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

} // namespace accdor
