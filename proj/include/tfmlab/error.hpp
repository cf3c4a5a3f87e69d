#pragma once

#include <stdexcept>
#include <string>

namespace tfmlab {

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// dist
class ZeroDensity : public Error
{
public:
  using Error::Error;
};

class NoRoot : public Error
{
public:
  NoRoot(std::string const &what, double fallback)
    : Error(what)
    , fallback_(fallback)
  {}

  double fallback() const
  {
    return fallback_;
  }

private:
  double fallback_;
};

class OutOfRange : public Error
{
public:
  using Error::Error;
};

class NumericFailure : public Error
{
public:
  using Error::Error;
};

class InvalidParameter : public Error
{
public:
  using Error::Error;
};

// agents / engine
class InfoViolation : public Error
{
public:
  using Error::Error;
};

// interim / checkers
class MonotonicityViolation : public Error
{
public:
  using Error::Error;
};

class BenchmarkUnavailable : public Error
{
public:
  using Error::Error;
};

class ScenarioGap : public Error
{
public:
  using Error::Error;
};

// cli
class ConfigError : public Error
{
public:
  using Error::Error;
};

}  // namespace tfmlab
