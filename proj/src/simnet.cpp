#include "mixloc/simnet.hpp"

#include <cmath>

namespace mixloc {

namespace {

class Courier {
public:
    Courier(const Network& net, SimRun& run, std::size_t limit)
        : net_(net), run_(run), limit_(limit) {}

    void send(int round, NodeId from, NodeId to, Message::Kind kind) {
        if (!net_.adjacent(from, to)) {
            throw PreconditionError("message from " + std::to_string(from) + " to " +
                                    std::to_string(to) + " does not follow an edge");
        }
        ++run_.messages;
        if (run_.log.size() < limit_) {
            run_.log.push_back({round, from, to, kind});
        } else {
            run_.log_truncated = true;
        }
    }

    void broadcast(int round, NodeId from, Message::Kind kind) {
        for (NodeId to : net_.neighbors(from)) send(round, from, to, kind);
    }

private:
    const Network& net_;
    SimRun& run_;
    std::size_t limit_;
};

void exchange_measurements(const Network& net, const SimConfig& config, SimRun& run,
                           Courier& courier) {
    std::optional<NoiseSpec> noise = config.noise;
    if (noise) {
        noise->seed = config.seed;
        noise->validate();
    }
    const int n = net.size();
    run.books.assign(static_cast<std::size_t>(n), {});
    for (NodeId i = 0; i < n; ++i) {
        if (net.neighbors(i).empty()) continue;
        const MeasurementSet own = synthesize_measurements(net, i, noise);
        run.books[static_cast<std::size_t>(i)][i] = own;
        for (NodeId j : net.neighbors(i)) {
            courier.send(0, i, j, Message::Kind::Measurements);
            run.books[static_cast<std::size_t>(j)][i] = own;
        }
    }
    run.rounds = 1;
}

void build_constraints(const Network& net, const SimConfig& config, SimRun& run,
                       Courier& courier) {
    run.constraints.angles = anchor_angle_constraints(net);
    for (NodeId i = net.anchor_count(); i < net.size(); ++i) {
        auto built = build_node_constraints(net, run.books[static_cast<std::size_t>(i)], i,
                                            config.policy, &run.constraints.failures);
        for (auto& c : built) {
            bool reachable = true;
            for (NodeId m : c.members()) {
                if (m != i && !net.adjacent(i, m)) reachable = false;
            }
            if (!reachable) {
                run.constraints.failures.push_back(
                    {i, c.neighbors, "constraint members are not all neighbors of the builder"});
                continue;
            }
            for (NodeId m : c.members()) {
                if (m != i) courier.send(run.rounds, i, m, Message::Kind::Constraint);
            }
            add_unique(run.constraints.displacements, std::move(c));
        }
    }
    ++run.rounds;
}

void run_simultaneous(const Network& net, const SimConfig& config, SimRun& run,
                      Courier& courier) {
    const int n = net.size();
    const int na = net.anchor_count();
    const auto& disp = run.constraints.displacements;
    const auto by_node = constraints_by_node(disp, n);
    for (NodeId i = na; i < n; ++i) {
        if (by_node[static_cast<std::size_t>(i)].empty()) {
            throw CoverageError("free node " + std::to_string(i) + " ends with no constraint");
        }
    }

    SolverConfig sc = config.solver;
    sc.init_seed = config.seed;
    Configuration anchors;
    for (NodeId a = 0; a < na; ++a) anchors.push_back(net.node(a).position);

    Trajectory traj;
    {
        Configuration p(static_cast<std::size_t>(n), Vec3::Zero());
        std::copy(anchors.begin(), anchors.end(), p.begin());
        const InformationMatrix info = information_matrix(build_rigidity_matrix({}, disp, p), na);
        const Spectrum sp = symmetric_spectrum(info.ff());
        traj.gamma = sc.step_size ? *sc.step_size : 1.0 / sp.lambda_max;
        if (!(traj.gamma > 0.0) || !std::isfinite(traj.gamma)) {
            throw InvalidArgument("simulation: step size must be positive and finite");
        }
    }

    Configuration state = anchors;
    const Configuration init = initial_estimates(sc, anchors, n - na);
    state.insert(state.end(), init.begin(), init.end());
    const Configuration truth = net.positions();

    // Anchors announce their positions once.
    for (NodeId a = 0; a < na; ++a) courier.broadcast(run.rounds, a, Message::Kind::Estimate);

    const auto error_of = [&](const Configuration& s) {
        double sq = 0.0;
        for (NodeId i = na; i < n; ++i) {
            sq += (s[static_cast<std::size_t>(i)] - truth[static_cast<std::size_t>(i)]).squaredNorm();
        }
        return std::sqrt(sq);
    };
    const auto record = [&](int it) {
        traj.iterations.push_back(it);
        traj.estimates.emplace_back(state.begin() + na, state.end());
        traj.error_norms.push_back(error_of(state));
    };
    record(0);
    const double initial_error = traj.error_norms.front();

    int it = 0;
    bool recorded_last = true;
    Configuration next = state;
    while (it < sc.max_iters) {
        for (NodeId i = na; i < n; ++i) courier.broadcast(run.rounds, i, Message::Kind::Estimate);
        double sq = 0.0;
        for (NodeId i = na; i < n; ++i) {
            // Node i only sees what its neighbors sent last round.
            const EstimateReader inbox = [&, i](NodeId id) -> Vec3 {
                if (id != i && !net.adjacent(i, id)) {
                    throw PreconditionError("node " + std::to_string(i) + " read node " +
                                            std::to_string(id) + ", which is not a neighbor");
                }
                return state[static_cast<std::size_t>(id)];
            };
            const Vec3 delta =
                traj.gamma * local_update(i, disp, by_node[static_cast<std::size_t>(i)], inbox);
            next[static_cast<std::size_t>(i)] = state[static_cast<std::size_t>(i)] + delta;
            sq += delta.squaredNorm();
        }
        std::swap(state, next);
        ++it;
        ++run.rounds;
        const double update = std::sqrt(sq);
        traj.final_update_norm = update;
        const double err = error_of(state);
        if (!std::isfinite(err) || err > sc.divergence_factor * std::max(initial_error, 1e-300)) {
            throw DivergenceError("simulation diverged with step size " + std::to_string(traj.gamma),
                                  traj.gamma);
        }
        recorded_last = false;
        if (it % sc.stride == 0) {
            record(it);
            recorded_last = true;
        }
        if (update < sc.convergence_eps) {
            traj.converged_at = it;
            break;
        }
    }
    if (!recorded_last) record(it);
    traj.iterations_run = it;
    traj.final_estimates.assign(state.begin() + na, state.end());
    run.estimates = state;
    run.trajectory = std::move(traj);
}

void run_sequential(const Network& net, const SimConfig& config, SimRun& run, Courier& courier) {
    const BookView view = [&](NodeId i) -> const MeasurementBook& {
        return run.books[static_cast<std::size_t>(i)];
    };
    SequentialResult seq = solve_sequential(net, view, config.policy.builder);
    const int base = run.rounds;
    for (NodeId a = 0; a < net.anchor_count(); ++a) courier.broadcast(base, a, Message::Kind::Estimate);
    for (std::size_t k = 0; k < seq.order.size(); ++k) {
        courier.broadcast(base + seq.round_of[k], seq.order[k], Message::Kind::Estimate);
    }
    run.rounds += seq.rounds;
    run.estimates = seq.estimates;
    run.sequential = std::move(seq);
}

}  // namespace

SimRun run(const Network& net, const SimConfig& config) {
    if (!config.force) {
        const AssumptionReport report = validate_assumptions(net);
        if (!report.ok()) {
            throw PreconditionError("simulation: " + report.violations.front().message +
                                    " (set force to run anyway)");
        }
    }
    SimRun out;
    Courier courier(net, out, config.log_limit);
    exchange_measurements(net, config, out, courier);
    build_constraints(net, config, out, courier);
    if (config.protocol == Protocol::Simultaneous) {
        run_simultaneous(net, config, out, courier);
    } else {
        run_sequential(net, config, out, courier);
    }
    return out;
}

}  // namespace mixloc
