#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bibstat {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

class DuplicateIdError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class KeyNotFoundError : public Error {
public:
    using Error::Error;
};

class SingularDesignError : public Error {
public:
    SingularDesignError(const std::string& msg, std::vector<std::string> columns)
        : Error(msg), collinear_columns(std::move(columns)) {}
    std::vector<std::string> collinear_columns;
};

class SeparationError : public Error {
public:
    using Error::Error;
};

class TooFewClustersError : public Error {
public:
    using Error::Error;
};

class SpecMismatchError : public Error {
public:
    using Error::Error;
};

class InsufficientCountriesError : public Error {
public:
    using Error::Error;
};

} // namespace bibstat
