#pragma once

#include <stdexcept>
#include <string>

namespace liewalk {

/// Base class of all errors thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Two elements or measures built over different group models were combined.
struct ModelMismatch : Error {
  using Error::Error;
};

/// A group element has no principal logarithm, or its logarithm leaves the
/// injectivity domain of the exponential chart.
struct OutsideChart : Error {
  using Error::Error;
};

/// A discrete convolution would exceed the configured support cap.
struct SupportOverflow : Error {
  using Error::Error;
};

/// A stopped-walk enumeration exceeded its step cap before every path stopped.
struct CapExceeded : Error {
  using Error::Error;
};

/// Every atom assigns zero likelihood to a conditioning observation.
struct ZeroDensityObservation : Error {
  using Error::Error;
};

/// A sample drawn from a mixture evaluated to zero density under that same
/// mixture; impossible by construction, so it signals a chart bug.
struct DegenerateDensity : Error {
  using Error::Error;
};

/// An estimator was invoked with too few samples to be meaningful.
struct InsufficientSamples : Error {
  using Error::Error;
};

/// A scale range is too narrow for the requested geometric subdivision.
struct RangeTooNarrow : Error {
  using Error::Error;
};

/// A probed entropy-gap hypothesis failed beyond Monte Carlo error.
struct HypothesisFailed : Error {
  using Error::Error;
};

/// Invalid or inconsistent experiment configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace liewalk
