#include "mixloc/types.hpp"

namespace mixloc {

const char* to_string(Role role) {
    return role == Role::Anchor ? "anchor" : "free";
}

const char* to_string(Sensor sensor) {
    switch (sensor) {
        case Sensor::RelPos: return "relpos";
        case Sensor::Distance: return "distance";
        case Sensor::Bearing: return "bearing";
        case Sensor::Angle: return "angle";
        case Sensor::RatioOfDistance: return "ratio";
    }
    return "?";
}

Role role_from_string(const std::string& name) {
    if (name == "anchor") return Role::Anchor;
    if (name == "free") return Role::Free;
    throw InvalidArgument("unknown role '" + name + "'");
}

Sensor sensor_from_string(const std::string& name) {
    if (name == "relpos") return Sensor::RelPos;
    if (name == "distance") return Sensor::Distance;
    if (name == "bearing") return Sensor::Bearing;
    if (name == "angle") return Sensor::Angle;
    if (name == "ratio") return Sensor::RatioOfDistance;
    throw InvalidArgument("unknown sensor '" + name + "'");
}

VecX stack(const Configuration& points) {
    VecX out(3 * static_cast<Eigen::Index>(points.size()));
    for (std::size_t a = 0; a < points.size(); ++a) {
        out.segment<3>(3 * static_cast<Eigen::Index>(a)) = points[a];
    }
    return out;
}

Configuration unstack(const Eigen::Ref<const VecX>& stacked) {
    if (stacked.size() % 3 != 0) {
        throw InvalidArgument("unstack: length is not a multiple of 3");
    }
    Configuration out(static_cast<std::size_t>(stacked.size() / 3));
    for (std::size_t a = 0; a < out.size(); ++a) {
        out[a] = stacked.segment<3>(3 * static_cast<Eigen::Index>(a));
    }
    return out;
}

}  // namespace mixloc
