#include "upw/error.hpp"

namespace upw {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::InvalidToken: return "invalid-token";
        case ErrorKind::EmptyImage: return "empty-image";
        case ErrorKind::Alignment: return "alignment";
        case ErrorKind::Corruption: return "corruption";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::Config: return "config";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Format: return "format";
        case ErrorKind::Truncation: return "truncation";
        case ErrorKind::Encoding: return "encoding";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace upw
