#pragma once

#include <stdexcept>
#include <string>

namespace tcpr {

// Root of the library's error hierarchy. The CLI maps subclasses onto its
// exit-code contract at the outermost catch site; library code just throws
// the most specific type it can.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- input / serialization ---
struct IoFailure : Error { using Error::Error; };
struct BadMagic : Error { using Error::Error; };
struct DimMismatch : Error { using Error::Error; };
struct LabelOutOfRange : Error { using Error::Error; };
struct NonFiniteValue : Error { using Error::Error; };
struct ClassOutOfRange : Error { using Error::Error; };
struct BadSpec : Error { using Error::Error; };

// --- geometry / numerics ---
struct ZeroVector : Error { using Error::Error; };
struct ZeroAfterProjection : Error { using Error::Error; };
struct ZeroStd : Error { using Error::Error; };

// --- fitting / evaluation ---
struct MissingBase : Error { using Error::Error; };
struct MissingQuery : Error { using Error::Error; };
struct EmptyClass : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };
struct InsufficientClasses : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };
struct AllEpisodesFailed : Error { using Error::Error; };

}  // namespace tcpr
