#pragma once

#include <stdexcept>

namespace thermoscope {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveProperty final : Error { using Error::Error; };
struct NonPositiveEffusivity final : Error { using Error::Error; };
struct NegativeTime final : Error { using Error::Error; };
struct InvalidGrid final : Error { using Error::Error; };
struct InvalidConfig final : Error { using Error::Error; };
struct NoContact final : Error { using Error::Error; };
struct OutOfRange final : Error { using Error::Error; };
struct TooFewSamples final : Error { using Error::Error; };
struct InvalidBounds final : Error { using Error::Error; };
struct DegenerateInput final : Error { using Error::Error; };
struct EmptyTrials final : Error { using Error::Error; };
struct MissingPassive final : Error { using Error::Error; };
struct SingleClass final : Error { using Error::Error; };
struct DimensionMismatch final : Error { using Error::Error; };
struct BadBlockStructure final : Error { using Error::Error; };
struct UnknownStudy final : Error { using Error::Error; };
struct UnknownMaterial final : Error { using Error::Error; };

}  // namespace thermoscope
