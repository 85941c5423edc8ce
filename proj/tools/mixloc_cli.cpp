// mixloc: generate scenarios, build constraints, check localizability,
// solve, bound the noisy error, and replay the published worked examples.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mixloc/io.hpp"
#include "mixloc/reference.hpp"
#include "mixloc/rigidity.hpp"
#include "mixloc/scenario.hpp"
#include "mixloc/solver.hpp"

namespace fs = std::filesystem;
using namespace mixloc;

namespace {

struct Common {
    std::string scenario;
    std::string out;
    std::uint64_t seed = 1;
    std::string mode = "direct";
    std::string gamma = "auto";
    std::optional<double> noise;
    double tol = 1e-9;
    GeometryTolerances geometry;
    bool json = false;
};

// Human-readable lines on stdout, mirrored into a JSON document.
class Report {
public:
    explicit Report(std::string command) { doc_["command"] = std::move(command); }

    template <typename T>
    void line(const std::string& key, const T& value, const std::string& text) {
        doc_[key] = value;
        if (!quiet_) std::cout << text << '\n';
    }
    template <typename T>
    void field(const std::string& key, const T& value) {
        doc_[key] = value;
    }
    void quiet(bool q) { quiet_ = q; }
    Json& doc() { return doc_; }

    void finish(const Common& c, const std::string& file) {
        if (!c.out.empty()) write_json_file((fs::path(c.out) / file).string(), doc_);
        if (c.json) std::cout << doc_.dump(2) << '\n';
    }

private:
    Json doc_;
    bool quiet_ = false;
};

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(12);
    s << x;
    return s.str();
}

std::string fmt(const Vec3& v) { return fmt(v.x()) + " " + fmt(v.y()) + " " + fmt(v.z()); }

void ensure_out(const Common& c) {
    if (!c.out.empty()) fs::create_directories(c.out);
}

std::optional<NoiseSpec> noise_for(const Common& c, const Scenario& s) {
    if (c.noise) {
        NoiseSpec n;
        n.seed = c.seed;
        n.sigma_relpos = n.sigma_distance = n.sigma_bearing = n.sigma_angle = n.sigma_ratio =
            *c.noise;
        n.validate();
        return n;
    }
    return s.noise;
}

struct Built {
    MeasurementBook clean_book;
    MeasurementBook book;
    ConstraintSet clean;
    ConstraintSet set;
    InformationMatrix info;
    InformationMatrix clean_info;
    RigidityReport rigidity;
    bool noisy = false;
};

Built build(const Scenario& s, const std::optional<NoiseSpec>& noise, const Common& c) {
    Built b;
    ConstraintPolicy policy = s.policy();
    policy.builder.geometry = c.geometry;
    const Network& net = s.network;
    const Configuration p = net.positions();
    b.clean_book = synthesize_all(net);
    b.clean = build_network_constraints(net, b.clean_book, policy);
    const RigidityMatrix rc = build_rigidity_matrix(b.clean, p);
    b.rigidity = is_infinitesimally_rigid(rc, c.tol);
    b.clean_info = information_matrix(rc, net.anchor_count());
    b.noisy = noise && !noise->is_zero();
    if (b.noisy) {
        b.book = synthesize_all(net, noise);
        b.set = build_network_constraints(net, b.book, policy);
        b.info = information_matrix(build_rigidity_matrix(b.set, p), net.anchor_count());
    } else {
        b.book = b.clean_book;
        b.set = b.clean;
        b.info = b.clean_info;
    }
    return b;
}

Configuration anchors_of(const Network& net) {
    Configuration p = net.positions();
    p.resize(static_cast<std::size_t>(net.anchor_count()));
    return p;
}

int cmd_generate(const Common& c, const std::string& kind, int anchors, int free,
                 const std::string& mix, bool require_rigid) {
    Scenario s;
    if (kind == "fig4") {
        s = seven_node_scenario();
    } else if (kind == "fig4-dangling") {
        s = seven_node_dangling_scenario();
    } else if (kind == "sec6-analog") {
        s = mixed_27_node_scenario(c.seed);
    } else if (kind == "random") {
        RandomNetworkOptions o;
        o.anchors = anchors;
        o.free = free;
        o.mix = sensor_mix_from_string(mix);
        o.seed = c.seed;
        o.require_rigid = require_rigid;
        s = random_scenario(o);
    } else {
        throw InvalidArgument("unknown scenario kind '" + kind + "'");
    }
    if (c.noise) s.noise = noise_for(c, s);
    std::string path = c.out.empty() ? "scenario.json" : c.out;
    if (fs::path(path).extension() != ".json") {
        fs::create_directories(path);
        path = (fs::path(path) / "scenario.json").string();
    }
    save_scenario(path, s);
    Report r("generate");
    r.line("kind", kind, "kind: " + kind);
    r.line("nodes", s.network.size(), "nodes: " + std::to_string(s.network.size()));
    r.line("anchors", s.network.anchor_count(),
           "anchors: " + std::to_string(s.network.anchor_count()));
    r.line("file", path, "wrote: " + path);
    if (c.json) std::cout << r.doc().dump(2) << '\n';
    return 0;
}

int cmd_build(const Common& c) {
    const Scenario s = load_scenario(c.scenario);
    const Built b = build(s, noise_for(c, s), c);
    ensure_out(c);
    if (!c.out.empty()) {
        write_json_file((fs::path(c.out) / "constraints.json").string(), constraints_to_json(b.set));
    }
    Report r("build-constraints");
    r.line("angle_constraints", b.set.angles.size(),
           "angle constraints: " + std::to_string(b.set.angles.size()));
    r.line("displacement_constraints", b.set.displacements.size(),
           "displacement constraints: " + std::to_string(b.set.displacements.size()));
    r.line("failures", b.set.failures.size(),
           "build failures: " + std::to_string(b.set.failures.size()));
    for (const auto& d : b.set.displacements) {
        std::string text = "  centre " + std::to_string(d.center) + " neighbors";
        for (NodeId id : d.neighbors) text += " " + std::to_string(id);
        text += " [" + std::string(to_string(d.source)) + ", " + to_string(d.branch) + "]";
        std::cout << text << '\n';
    }
    r.field("constraints", constraints_to_json(b.set));
    r.finish(c, "build_report.json");
    return 0;
}

int cmd_check(const Common& c) {
    const Scenario s = load_scenario(c.scenario);
    const Built b = build(s, noise_for(c, s), c);
    ensure_out(c);
    const Spectrum sp = symmetric_spectrum(b.clean_info.ff());
    const bool localizable = check_localizable(b.clean_info.ff());
    Report r("check");
    r.line("rigid", b.rigidity.rigid, std::string("rigid: ") + (b.rigidity.rigid ? "true" : "false"));
    r.line("nullity", b.rigidity.nullity, "nullity: " + std::to_string(b.rigidity.nullity));
    r.line("localizable", localizable, std::string("localizable: ") + (localizable ? "true" : "false"));
    r.line("lambda_min", sp.lambda_min, "lambda_min: " + fmt(sp.lambda_min));
    r.line("lambda_max", sp.lambda_max, "lambda_max: " + fmt(sp.lambda_max));
    if (b.noisy && localizable) {
        const NoiseMargin m = noise_margin_ok(b.clean_info.ff(), b.info.ff());
        r.line("noise_margin", m.ratio,
               "noise_margin: " + fmt(m.ratio) + (m.ok ? " (within margin)" : " (margin violated)"));
        if (m.ok) {
            const ErrorBound eb = error_bound(b.clean_info.ff(), b.info.ff() - b.clean_info.ff(),
                                              b.info.fa() - b.clean_info.fa(),
                                              s.network.positions(), s.network.anchor_count());
            r.line("error_bound", eb.u, "error_bound: " + fmt(eb.u));
        }
    }
    r.finish(c, "report.json");
    return localizable ? 0 : 1;
}

int cmd_solve(const Common& c, int max_iters, int stride, double eps) {
    const Scenario s = load_scenario(c.scenario);
    const std::optional<NoiseSpec> noise = noise_for(c, s);
    const Built b = build(s, noise, c);
    ensure_out(c);
    const Network& net = s.network;
    const Configuration truth = net.positions();
    const Configuration anchors = anchors_of(net);
    const SolveMode mode = solve_mode_from_string(c.mode);
    const int na = net.anchor_count();

    Trajectory t;
    std::vector<NodeId> unlocalized;
    if (mode == SolveMode::Direct) {
        t.final_estimates = direct_solve(b.info.ff(), b.info.fa(), anchors);
        t.iterations = {0};
        t.estimates = {t.final_estimates};
        t.converged_at = 0;
    } else if (mode == SolveMode::Simultaneous) {
        SolverConfig sc;
        sc.mode = mode;
        if (c.gamma != "auto") sc.step_size = std::stod(c.gamma);
        sc.max_iters = max_iters;
        sc.stride = stride;
        sc.convergence_eps = eps;
        sc.init_seed = c.seed;
        t = solve_simultaneous(sc, anchors, net.size(), b.set.displacements, truth);
    } else {
        const SequentialResult seq = solve_sequential(net, b.book, BuilderOptions{c.geometry});
        t.final_estimates.assign(seq.estimates.begin() + na, seq.estimates.end());
        t.iterations = {seq.rounds};
        t.estimates = {t.final_estimates};
        if (seq.complete()) t.converged_at = seq.rounds;
        unlocalized = seq.unlocalized;
    }
    if (t.error_norms.empty()) {
        double sq = 0.0;
        for (std::size_t f = 0; f < t.final_estimates.size(); ++f) {
            const Vec3 d = t.final_estimates[f] - truth[static_cast<std::size_t>(na) + f];
            if (d.allFinite()) sq += d.squaredNorm();
        }
        t.error_norms.assign(t.estimates.size(), std::sqrt(sq));
    }

    Report r("solve");
    r.doc()["summary"] = trajectory_summary(mode, t);
    Json positions = Json::array();
    for (std::size_t f = 0; f < t.final_estimates.size(); ++f) {
        const NodeId id = na + static_cast<NodeId>(f);
        const Vec3& x = t.final_estimates[f];
        positions.push_back({{"id", id}, {"xyz", {x.x(), x.y(), x.z()}}});
        std::cout << "node " << id << ": " << fmt(x) << '\n';
    }
    r.field("positions", positions);
    r.line("mode", c.mode, "mode: " + c.mode);
    if (mode == SolveMode::Simultaneous) r.line("gamma", t.gamma, "gamma: " + fmt(t.gamma));
    r.line("converged", t.converged_at.has_value(),
           std::string("converged: ") + (t.converged_at ? "true" : "false"));
    r.line("final_error", t.error_norms.back(), "final_error: " + fmt(t.error_norms.back()));
    if (!unlocalized.empty()) r.line("unlocalized", unlocalized, "unlocalized: " + std::to_string(unlocalized.size()));
    if (!c.out.empty()) {
        std::ofstream csv(fs::path(c.out) / "trajectory.csv");
        write_trajectory_csv(csv, t, na, truth);
        write_json_file((fs::path(c.out) / "summary.json").string(), trajectory_summary(mode, t));
    }
    r.finish(c, "solve_report.json");
    return 0;
}

int cmd_bound(const Common& c) {
    const Scenario s = load_scenario(c.scenario);
    const std::optional<NoiseSpec> noise = noise_for(c, s);
    if (!noise || noise->is_zero()) throw InvalidArgument("bound: give --noise or a scenario noise block");
    const Built b = build(s, noise, c);
    ensure_out(c);
    const NoiseMargin m = noise_margin_ok(b.clean_info.ff(), b.info.ff());
    Report r("bound");
    r.line("noise_margin", m.ratio, "noise_margin: " + fmt(m.ratio));
    r.line("within_margin", m.ok, std::string("within_margin: ") + (m.ok ? "true" : "false"));
    int code = 1;
    if (m.ok) {
        const ErrorBound eb = error_bound(b.clean_info.ff(), b.info.ff() - b.clean_info.ff(),
                                          b.info.fa() - b.clean_info.fa(), s.network.positions(),
                                          s.network.anchor_count());
        r.line("error_bound", eb.u, "error_bound: " + fmt(eb.u));
        r.line("origin", std::vector<double>{eb.origin.x(), eb.origin.y(), eb.origin.z()},
               "origin: " + fmt(eb.origin));
        code = 0;
    }
    r.finish(c, "bound.json");
    return code;
}

int cmd_replay(const Common& c) {
    ensure_out(c);
    Report r("replay-paper");
    Json checks = Json::array();
    bool all = true;
    for (const ReferenceCheck& k :
         {seven_node_solution_check(), seven_node_blocks_check(), noisy_constraint_check()}) {
        std::cout << (k.pass ? "PASS " : "FAIL ") << k.name << ": " << k.detail << '\n';
        checks.push_back({{"name", k.name}, {"pass", k.pass}, {"max_error", k.max_error},
                          {"detail", k.detail}});
        all = all && k.pass;
    }
    r.field("checks", checks);
    r.field("pass", all);
    r.finish(c, "replay.json");
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Localization from mixed local measurements"};
    app.require_subcommand(1);
    Common c;

    const auto common = [&](CLI::App* sub, bool needs_scenario) {
        auto* opt = sub->add_option("--scenario", c.scenario, "Scenario JSON file");
        if (needs_scenario) opt->required()->check(CLI::ExistingFile);
        sub->add_option("--out", c.out, "Output directory");
        sub->add_option("--seed", c.seed, "Seed for generation, noise and initial estimates");
        sub->add_option("--noise", c.noise, "Standard deviation applied to every measurement class")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--tol", c.tol, "Relative singular-value threshold for rank decisions");
        sub->add_option("--volume-tol", c.geometry.volume, "Relative squared-volume threshold for coplanarity");
        sub->add_option("--area-tol", c.geometry.area, "Relative squared-area threshold for colinearity");
        sub->add_option("--colinear-tol", c.geometry.colinear, "Relative slack on the colinear triangle equalities");
        sub->add_option("--realizability-tol", c.geometry.realizability,
                        "Most negative Gram eigenvalue, relative to the largest, still accepted");
        sub->add_flag("--json", c.json, "Also print the JSON report");
    };

    std::string kind = "fig4", mix = "mixed";
    int anchors = 4, free = 10;
    bool require_rigid = false;
    auto* gen = app.add_subcommand("generate", "Write a scenario file");
    common(gen, false);
    gen->add_option("--kind", kind, "fig4 | fig4-dangling | sec6-analog | random")
        ->check(CLI::IsMember({"fig4", "fig4-dangling", "sec6-analog", "random"}));
    gen->add_option("--anchors", anchors, "Anchors for random networks")->check(CLI::Range(3, 1000));
    gen->add_option("--free", free, "Free nodes for random networks")->check(CLI::Range(1, 100000));
    gen->add_option("--mix", mix,
                    "all-distance | all-bearing | all-angle | all-ratio | all-relpos | mixed");
    gen->add_flag("--require-rigid", require_rigid, "Redraw until rigid and localizable");

    auto* bld = app.add_subcommand("build-constraints", "Build and dump constraints");
    common(bld, true);

    auto* chk = app.add_subcommand("check", "Rigidity and localizability report");
    common(chk, true);

    int max_iters = 1000000, stride = 100;
    double eps = 1e-9;
    auto* slv = app.add_subcommand("solve", "Estimate free-node positions");
    common(slv, true);
    slv->add_option("--mode", c.mode, "direct | simultaneous | sequential")
        ->check(CLI::IsMember({"direct", "simultaneous", "sequential"}));
    slv->add_option("--gamma", c.gamma, "Step size, or auto for 1/lambda_max(M_ff)");
    slv->add_option("--max-iters", max_iters, "Iteration cap")->check(CLI::NonNegativeNumber);
    slv->add_option("--stride", stride, "Record every k-th iterate")->check(CLI::PositiveNumber);
    slv->add_option("--eps", eps, "Stop when an update is shorter than this")->check(CLI::PositiveNumber);

    auto* bnd = app.add_subcommand("bound", "Noise margin and error bound");
    common(bnd, true);

    auto* rep = app.add_subcommand("replay-paper", "Check the published worked examples");
    common(rep, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and friends report success; usage errors share the error code.
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        if (gen->parsed()) return cmd_generate(c, kind, anchors, free, mix, require_rigid);
        if (bld->parsed()) return cmd_build(c);
        if (chk->parsed()) return cmd_check(c);
        if (slv->parsed()) return cmd_solve(c, max_iters, stride, eps);
        if (bnd->parsed()) return cmd_bound(c);
        if (rep->parsed()) return cmd_replay(c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
