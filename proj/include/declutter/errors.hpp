#pragma once

#include <stdexcept>
#include <string>

namespace declutter {

/// Base class for every error raised by the library. The CLI maps these to
/// exit code 3 (runtime error) unless they are ConfigError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

#define DECLUTTER_DEFINE_ERROR(Name)  \
  class Name : public Error {         \
   public:                            \
    using Error::Error;               \
  }

// simscene
DECLUTTER_DEFINE_ERROR(PlacementFailure);
DECLUTTER_DEFINE_ERROR(NonConvergence);
// clutter
DECLUTTER_DEFINE_ERROR(ImageTooSmall);
DECLUTTER_DEFINE_ERROR(OutOfBounds);
// grasp
DECLUTTER_DEFINE_ERROR(ShapeMismatch);
DECLUTTER_DEFINE_ERROR(RankDeficient);
DECLUTTER_DEFINE_ERROR(TooFewPixels);
DECLUTTER_DEFINE_ERROR(RectangleOutOfBounds);
DECLUTTER_DEFINE_ERROR(NoCandidates);
// push
DECLUTTER_DEFINE_ERROR(NoEntryPoint);
// experiments
DECLUTTER_DEFINE_ERROR(NoAttempts);
DECLUTTER_DEFINE_ERROR(Overlap);

#undef DECLUTTER_DEFINE_ERROR

}  // namespace declutter
