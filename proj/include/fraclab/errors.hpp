#pragma once

#include <stdexcept>
#include <string>

namespace fraclab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidAddress : Error { using Error::Error; };
struct InsufficientSequence : Error { using Error::Error; };
struct NonExtinctionFailed : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct MissingLevel : Error { using Error::Error; };
struct ScaleError : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct DegenerateMass : Error { using Error::Error; };
struct PreconditionError : Error { using Error::Error; };
struct UnsupportedDimension : Error { using Error::Error; };

}  // namespace fraclab
