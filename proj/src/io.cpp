#include "mixloc/io.hpp"

#include <cmath>
#include <fstream>

namespace mixloc {

namespace {

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const Json& j) {
    if (!j.is_array() || j.size() != 3) throw InvalidArgument("expected a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const char* mode_name(NoiseMode m) { return m == NoiseMode::Gaussian ? "gaussian" : "fixed-offset"; }

NoiseMode mode_from(const std::string& s) {
    if (s == "gaussian") return NoiseMode::Gaussian;
    if (s == "fixed-offset") return NoiseMode::FixedOffset;
    throw InvalidArgument("unknown noise mode '" + s + "'");
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    auto it = j.find(key);
    return it == j.end() || it->is_null() ? fallback : it->template get<T>();
}

}  // namespace

Json noise_to_json(const NoiseSpec& n) {
    Json j;
    j["mode"] = mode_name(n.mode);
    j["seed"] = n.seed;
    j["sigma"] = {{"relpos", n.sigma_relpos},
                  {"distance", n.sigma_distance},
                  {"bearing", n.sigma_bearing},
                  {"angle", n.sigma_angle},
                  {"ratio", n.sigma_ratio}};
    if (!n.vector_offsets.empty()) {
        Json list = Json::array();
        for (const auto& [key, v] : n.vector_offsets) {
            list.push_back({{"owner", key.first}, {"neighbor", key.second}, {"offset", vec_json(v)}});
        }
        j["vector_offsets"] = list;
    }
    if (!n.scalar_offsets.empty()) {
        Json list = Json::array();
        for (const auto& [key, v] : n.scalar_offsets) {
            const auto [owner, a, b] = key;
            list.push_back({{"owner", owner}, {"a", a}, {"b", b}, {"offset", v}});
        }
        j["scalar_offsets"] = list;
    }
    return j;
}

NoiseSpec noise_from_json(const Json& j) {
    NoiseSpec n;
    n.mode = mode_from(get_or<std::string>(j, "mode", "gaussian"));
    n.seed = get_or<std::uint64_t>(j, "seed", 0);
    if (auto it = j.find("sigma"); it != j.end()) {
        n.sigma_relpos = get_or<double>(*it, "relpos", 0.0);
        n.sigma_distance = get_or<double>(*it, "distance", 0.0);
        n.sigma_bearing = get_or<double>(*it, "bearing", 0.0);
        n.sigma_angle = get_or<double>(*it, "angle", 0.0);
        n.sigma_ratio = get_or<double>(*it, "ratio", 0.0);
    }
    if (auto it = j.find("vector_offsets"); it != j.end()) {
        for (const auto& e : *it) {
            n.vector_offsets[{e.at("owner").get<NodeId>(), e.at("neighbor").get<NodeId>()}] =
                vec_from(e.at("offset"));
        }
    }
    if (auto it = j.find("scalar_offsets"); it != j.end()) {
        for (const auto& e : *it) {
            n.scalar_offsets[{e.at("owner").get<NodeId>(), e.at("a").get<NodeId>(),
                              e.at("b").get<NodeId>()}] = e.at("offset").get<double>();
        }
    }
    n.validate();
    return n;
}

Json scenario_to_json(const Scenario& s) {
    Json j;
    j["name"] = s.name;
    Json nodes = Json::array();
    for (const auto& n : s.network.nodes()) {
        const auto& q = n.orientation;
        nodes.push_back({{"id", n.id},
                         {"xyz", vec_json(n.position)},
                         {"role", to_string(n.role)},
                         {"sensor", to_string(n.sensor)},
                         {"quaternion", Json::array({q.w(), q.x(), q.y(), q.z()})}});
    }
    j["nodes"] = nodes;
    Json edges = Json::array();
    for (auto [a, b] : s.network.edges()) edges.push_back(Json::array({a, b}));
    j["edges"] = edges;
    if (s.noise) j["noise"] = noise_to_json(*s.noise);
    if (!s.neighbor_sets.empty()) {
        Json sets = Json::array();
        for (const auto& [node, list] : s.neighbor_sets) sets.push_back({{"node", node}, {"sets", list}});
        j["neighbor_sets"] = sets;
    }
    return j;
}

Scenario scenario_from_json(const Json& j) {
    Scenario s;
    s.name = get_or<std::string>(j, "name", "");
    std::vector<NodeSpec> nodes;
    for (const auto& e : j.at("nodes")) {
        NodeSpec n;
        n.id = e.at("id").get<NodeId>();
        n.position = vec_from(e.at("xyz"));
        n.role = role_from_string(e.at("role").get<std::string>());
        n.sensor = sensor_from_string(e.at("sensor").get<std::string>());
        if (auto it = e.find("quaternion"); it != e.end() && !it->is_null()) {
            if (it->size() != 4) throw InvalidArgument("quaternion must have 4 entries (w,x,y,z)");
            n.orientation = Eigen::Quaterniond((*it)[0].get<double>(), (*it)[1].get<double>(),
                                               (*it)[2].get<double>(), (*it)[3].get<double>());
            if (!(n.orientation.norm() > 1e-9)) throw InvalidArgument("quaternion has zero norm");
            // Hand-written files carry a few digits; the network wants unit norm.
            if (std::abs(n.orientation.norm() - 1.0) > 1e-12) n.orientation.normalize();
        }
        nodes.push_back(n);
    }
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
        if (e.size() != 2) throw InvalidArgument("edges must be pairs");
        edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
    }
    s.network = Network(std::move(nodes), edges);
    if (auto it = j.find("noise"); it != j.end() && !it->is_null()) s.noise = noise_from_json(*it);
    if (auto it = j.find("neighbor_sets"); it != j.end()) {
        for (const auto& e : *it) {
            s.neighbor_sets[e.at("node").get<NodeId>()] =
                e.at("sets").get<std::vector<std::vector<NodeId>>>();
        }
    }
    return s;
}

Json displacement_to_json(const DisplacementConstraint& c) {
    return {{"center", c.center},
            {"neighbors", c.neighbors},
            {"coeffs", std::vector<double>(c.coeffs.data(), c.coeffs.data() + c.coeffs.size())},
            {"source", to_string(c.source)},
            {"branch", to_string(c.branch)}};
}

DisplacementConstraint displacement_from_json(const Json& j) {
    DisplacementConstraint c;
    c.center = j.at("center").get<NodeId>();
    c.neighbors = j.at("neighbors").get<std::vector<NodeId>>();
    const auto mu = j.at("coeffs").get<std::vector<double>>();
    if (mu.size() != c.neighbors.size() || mu.size() < 2 || mu.size() > 4) {
        throw InvalidArgument("constraint: need 2 to 4 neighbors with one coefficient each");
    }
    c.coeffs = Eigen::Map<const VecX>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    c.source = source_from_string(get_or<std::string>(j, "source", "explicit"));
    c.branch = branch_from_string(get_or<std::string>(j, "branch", "3d"));
    return c;
}

Json constraints_to_json(const ConstraintSet& set) {
    Json j;
    Json ang = Json::array();
    for (const auto& a : set.angles) {
        Json w = Json::array();
        for (const auto& [x, y] : a.weights) w.push_back(Json::array({x, y}));
        ang.push_back({{"triple", a.triple}, {"weights", w}});
    }
    j["angles"] = ang;
    Json disp = Json::array();
    for (const auto& c : set.displacements) disp.push_back(displacement_to_json(c));
    j["displacements"] = disp;
    Json fail = Json::array();
    for (const auto& f : set.failures) {
        fail.push_back({{"node", f.node}, {"neighbors", f.neighbors}, {"reason", f.reason}});
    }
    j["failures"] = fail;
    return j;
}

ConstraintSet constraints_from_json(const Json& j) {
    ConstraintSet set;
    if (auto it = j.find("angles"); it != j.end()) {
        for (const auto& e : *it) {
            AngleConstraint a;
            a.triple = e.at("triple").get<std::array<NodeId, 3>>();
            const auto& w = e.at("weights");
            if (w.size() != 3) throw InvalidArgument("angle constraint needs three weight pairs");
            for (std::size_t t = 0; t < 3; ++t) {
                a.weights[t] = {w[t][0].get<double>(), w[t][1].get<double>()};
            }
            set.angles.push_back(a);
        }
    }
    for (const auto& e : j.at("displacements")) set.displacements.push_back(displacement_from_json(e));
    if (auto it = j.find("failures"); it != j.end()) {
        for (const auto& e : *it) {
            set.failures.push_back({e.at("node").get<NodeId>(),
                                    e.at("neighbors").get<std::vector<NodeId>>(),
                                    e.at("reason").get<std::string>()});
        }
    }
    return set;
}

Json trajectory_summary(SolveMode mode, const Trajectory& t) {
    Json j;
    j["mode"] = to_string(mode);
    j["converged_at"] = t.converged_at ? Json(*t.converged_at) : Json(nullptr);
    j["final_error"] = t.error_norms.empty() ? Json(nullptr) : Json(t.error_norms.back());
    j["gamma"] = t.gamma;
    return j;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

Scenario load_scenario(const std::string& path) {
    try {
        return scenario_from_json(read_json_file(path));
    } catch (const Json::exception& e) {
        throw InvalidArgument("'" + path + "': " + e.what());
    }
}

void save_scenario(const std::string& path, const Scenario& s) {
    write_json_file(path, scenario_to_json(s));
}

}  // namespace mixloc
