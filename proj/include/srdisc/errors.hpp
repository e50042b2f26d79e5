#pragma once

#include <stdexcept>
#include <string>

namespace srdisc {

struct DomainError : std::domain_error {
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

struct IntegrationNotConverged : std::runtime_error {
    explicit IntegrationNotConverged(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateCoefficient : std::runtime_error {
    explicit DegenerateCoefficient(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyInput : std::invalid_argument {
    explicit EmptyInput(const std::string& what) : std::invalid_argument(what) {}
};

struct InsufficientReplicates : std::invalid_argument {
    explicit InsufficientReplicates(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace srdisc
