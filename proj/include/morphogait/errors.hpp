#ifndef MORPHOGAIT_ERRORS_HPP_
#define MORPHOGAIT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace morphogait {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

/// Kinematic domain violations (angle out of range, height not achievable).
class KinematicsError : public Error {
  public:
    explicit KinematicsError(const std::string &msg) : Error(msg) {}
};

/// Target point outside the limb workspace. Carries the (clamped) knee
/// cosine that exceeded [-1, 1].
class UnreachableError : public KinematicsError {
  public:
    UnreachableError(const std::string &msg, double cos_knee)
        : KinematicsError(msg), cos_knee_(cos_knee) {}
    double cos_knee() const { return cos_knee_; }

  private:
    double cos_knee_;
};

/// Invalid or inconsistent gait parameters.
class GaitError : public Error {
  public:
    explicit GaitError(const std::string &msg) : Error(msg) {}
};

/// Failures while stepping the kinematic simulation.
class SimulationError : public Error {
  public:
    explicit SimulationError(const std::string &msg) : Error(msg) {}
};

/// Malformed run configuration or input file.
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string &msg) : Error(msg) {}
};

/// Socket / stream transport failures.
class TransportError : public Error {
  public:
    explicit TransportError(const std::string &msg) : Error(msg) {}
};

/// Malformed or out-of-contract wire frames.
class ProtocolError : public Error {
  public:
    explicit ProtocolError(const std::string &msg) : Error(msg) {}
};

} // namespace morphogait

#endif // MORPHOGAIT_ERRORS_HPP_
