#include "tomocal/errors.hpp"

namespace tomocal {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::OverlapError: return "OverlapError";
        case ErrorCode::DegenerateViewPair: return "DegenerateViewPair";
        case ErrorCode::DegenerateAngle: return "DegenerateAngle";
        case ErrorCode::DegenerateView: return "DegenerateView";
        case ErrorCode::MarkerOutsideSlab: return "MarkerOutsideSlab";
        case ErrorCode::DegeneratePoints: return "DegeneratePoints";
        case ErrorCode::ClassificationError: return "ClassificationError";
        case ErrorCode::NegativeDiscriminant: return "NegativeDiscriminant";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::InsufficientViews: return "InsufficientViews";
        case ErrorCode::RankDeficient: return "RankDeficient";
    }
    return "UnknownError";
}

}  // namespace tomocal
