#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mixloc {

using NodeId = int;

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Positions of every node, indexed by NodeId.
using Configuration = std::vector<Vec3>;

enum class Role { Anchor, Free };

/// The five local measurement classes. Each node carries exactly one.
enum class Sensor { RelPos, Distance, Bearing, Angle, RatioOfDistance };

const char* to_string(Role role);
const char* to_string(Sensor sensor);
Role role_from_string(const std::string& name);
Sensor sensor_from_string(const std::string& name);

/// Stacks a configuration into a 3n vector (node-major, xyz-minor).
VecX stack(const Configuration& points);
Configuration unstack(const Eigen::Ref<const VecX>& stacked);

// Error hierarchy. Every failure the library reports derives from Error.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Input geometry is degenerate for the requested path (coplanar, colinear, ...).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

class RealizabilityError : public Error {
public:
    using Error::Error;
};

class InsufficientMeasurements : public Error {
public:
    using Error::Error;
};

class NotLocalizable : public Error {
public:
    using Error::Error;
};

class CoverageError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, double gamma) : Error(what), gamma_(gamma) {}
    double gamma() const { return gamma_; }

private:
    double gamma_;
};

class BoundUnavailable : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

}  // namespace mixloc
