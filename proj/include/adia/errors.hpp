#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace adia {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Instantaneous gap |E+ - E-| fell below the gap floor.
class DegenerateSpectrum : public std::runtime_error {
 public:
  DegenerateSpectrum(double t, double gap)
      : std::runtime_error(describe(t, gap)), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  static std::string describe(double t, double gap) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "degenerate spectrum at t=%.6g (|R|=%.3e)", t, gap);
    return buf;
  }

  double time_;
};

class UnsupportedModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unitarity drift of the integrated propagator exceeded the configured bound.
class IntegrationDiverged : public std::runtime_error {
 public:
  IntegrationDiverged(double t, double drift)
      : std::runtime_error(describe(t, drift)),
        time_(t),
        drift_(drift) {}
  double time() const noexcept { return time_; }
  double drift() const noexcept { return drift_; }

 private:
  static std::string describe(double t, double drift) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "integration diverged at t=%.6g: unitarity drift %.3e", t, drift);
    return buf;
  }

  double time_;
  double drift_;
};

class EnsembleMemberError : public std::runtime_error {
 public:
  EnsembleMemberError(std::size_t index, const std::string& what)
      : std::runtime_error("ensemble member " + std::to_string(index) + ": " + what),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Scenario configuration problem; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace adia
