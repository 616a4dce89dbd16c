#pragma once

#include <stdexcept>
#include <string>

namespace mxad {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape/axis contract violations in tensor ops.
struct DimensionError : Error {
    using Error::Error;
};

// Malformed input files (edge lists, labels, configs).
struct ValidationError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

// Negative sampler could not find a non-edge within the retry bound.
struct SamplingError : Error {
    using Error::Error;
};

// Anomaly injector could not find enough absent pairs.
struct GenerationError : Error {
    using Error::Error;
};

struct MetricError : Error {
    using Error::Error;
};

struct TrainingError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace mxad
