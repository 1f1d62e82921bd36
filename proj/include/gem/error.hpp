#pragma once

#include <stdexcept>
#include <string>

namespace gem {

/// Raised for out-of-range or inconsistent physical/grid parameters.
class invalid_parameter : public std::invalid_argument
{
public:
    explicit invalid_parameter(const std::string& what)
      : std::invalid_argument(what)
    {
    }
};

/// Solver blow-up or a refused (unstable) grid.
class numerical_failure : public std::runtime_error
{
public:
    explicit numerical_failure(const std::string& what)
      : std::runtime_error(what)
    {
    }
};

/// A metric that has no value for the given data (zero input energy, ...).
class undefined_metric : public std::domain_error
{
public:
    explicit undefined_metric(const std::string& what)
      : std::domain_error(what)
    {
    }
};

class pole_error : public std::domain_error
{
public:
    explicit pole_error(const std::string& what)
      : std::domain_error(what)
    {
    }
};

} // namespace gem
