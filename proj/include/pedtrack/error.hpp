#pragma once

#include <stdexcept>
#include <string>

namespace pedtrack {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (files, records, embeddings).
class DataError : public Error {
public:
    using Error::Error;
};

// Invalid configuration key or value.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace pedtrack
