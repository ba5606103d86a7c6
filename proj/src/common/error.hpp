#pragma once

#include <stdexcept>
#include <string>

namespace ptych {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters: bad sizes, ratios, seeds, unknown keys.
class ConfigError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// NaN/Inf encountered in values, gradients or losses.
class NumericError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class MissingModelError : public Error {
public:
    using Error::Error;
};

class UnknownMethodError : public Error {
public:
    using Error::Error;
};

} // namespace ptych
