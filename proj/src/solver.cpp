#include "mixloc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include <Eigen/Cholesky>

namespace mixloc {

const char* to_string(SolveMode mode) {
    switch (mode) {
        case SolveMode::Direct: return "direct";
        case SolveMode::Simultaneous: return "simultaneous";
        case SolveMode::Sequential: return "sequential";
    }
    return "?";
}

SolveMode solve_mode_from_string(const std::string& name) {
    if (name == "direct") return SolveMode::Direct;
    if (name == "simultaneous") return SolveMode::Simultaneous;
    if (name == "sequential") return SolveMode::Sequential;
    throw InvalidArgument("unknown solve mode '" + name + "'");
}

Configuration direct_solve(const MatX& mff, const MatX& mfa, const Configuration& anchors,
                           double tol) {
    if (mfa.rows() != mff.rows() || mfa.cols() != static_cast<Eigen::Index>(3 * anchors.size())) {
        throw InvalidArgument("direct_solve: block shapes do not match");
    }
    if (!check_localizable(mff, tol)) {
        throw NotLocalizable("direct_solve: M_ff is singular");
    }
    const VecX rhs = -mfa * stack(anchors);
    const VecX x = mff.ldlt().solve(rhs);
    return unstack(x);
}

std::vector<std::vector<int>> constraints_by_node(
    const std::vector<DisplacementConstraint>& displacements, int nodes) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(nodes));
    for (std::size_t c = 0; c < displacements.size(); ++c) {
        for (NodeId id : displacements[c].members()) {
            if (id < 0 || id >= nodes) {
                throw InvalidArgument("constraint references node " + std::to_string(id) +
                                      " outside the network");
            }
            auto& list = out[static_cast<std::size_t>(id)];
            if (list.empty() || list.back() != static_cast<int>(c)) list.push_back(static_cast<int>(c));
        }
    }
    return out;
}

Vec3 local_update(NodeId i, const std::vector<DisplacementConstraint>& displacements,
                  const std::vector<int>& involving, const EstimateReader& read) {
    Vec3 step = Vec3::Zero();
    for (int idx : involving) {
        const auto& c = displacements[static_cast<std::size_t>(idx)];
        const Vec3 centre = read(c.center);
        Vec3 residual = Vec3::Zero();
        for (std::size_t e = 0; e < c.neighbors.size(); ++e) {
            residual += c.coeffs(static_cast<Eigen::Index>(e)) * (read(c.neighbors[e]) - centre);
        }
        if (c.center == i) {
            step += c.coefficient_sum() * residual;
        } else if (auto mu = c.coefficient_of(i)) {
            step -= *mu * residual;
        }
    }
    return step;
}

namespace {

void require_coverage(const std::vector<std::vector<int>>& by_node, int anchors) {
    for (std::size_t i = static_cast<std::size_t>(anchors); i < by_node.size(); ++i) {
        if (by_node[i].empty()) {
            throw CoverageError("free node " + std::to_string(i) +
                                " is not covered by any displacement constraint");
        }
    }
}

}  // namespace

Configuration simultaneous_step(const Configuration& estimates,
                                const std::vector<DisplacementConstraint>& displacements,
                                int anchors, double gamma) {
    const int n = static_cast<int>(estimates.size());
    const auto by_node = constraints_by_node(displacements, n);
    require_coverage(by_node, anchors);
    const EstimateReader read = [&](NodeId id) { return estimates[static_cast<std::size_t>(id)]; };
    Configuration next = estimates;
    for (NodeId i = anchors; i < n; ++i) {
        next[static_cast<std::size_t>(i)] +=
            gamma * local_update(i, displacements, by_node[static_cast<std::size_t>(i)], read);
    }
    return next;
}

Configuration initial_estimates(const SolverConfig& config, const Configuration& anchors,
                                int free_nodes) {
    if (config.initial) {
        if (static_cast<int>(config.initial->size()) != free_nodes) {
            throw InvalidArgument("initial estimates: expected one per free node");
        }
        return *config.initial;
    }
    Box box;
    if (config.init_box) {
        box = *config.init_box;
    } else {
        if (anchors.empty()) throw InvalidArgument("initial estimates: no anchors to size the box");
        Vec3 lo = anchors.front(), hi = anchors.front();
        for (const auto& a : anchors) {
            lo = lo.cwiseMin(a);
            hi = hi.cwiseMax(a);
        }
        const Vec3 mid = 0.5 * (lo + hi);
        box.lo = mid + 2.0 * (lo - mid);
        box.hi = mid + 2.0 * (hi - mid);
    }
    std::mt19937_64 rng(config.init_seed);
    Configuration out;
    out.reserve(static_cast<std::size_t>(free_nodes));
    for (int f = 0; f < free_nodes; ++f) {
        Vec3 x;
        for (int a = 0; a < 3; ++a) {
            std::uniform_real_distribution<double> u(box.lo(a), std::max(box.hi(a), box.lo(a)));
            x(a) = u(rng);
        }
        out.push_back(x);
    }
    return out;
}

Trajectory solve_simultaneous(const SolverConfig& config, const Configuration& anchors, int nodes,
                              const std::vector<DisplacementConstraint>& displacements,
                              const std::optional<Configuration>& truth) {
    const int na = static_cast<int>(anchors.size());
    const int nf = nodes - na;
    if (nf < 1) throw InvalidArgument("solve_simultaneous: no free nodes");
    if (config.stride < 1 || config.max_iters < 0 || !(config.convergence_eps > 0.0)) {
        throw InvalidArgument("solve_simultaneous: stride >= 1, max_iters >= 0, eps > 0 required");
    }
    if (truth && static_cast<int>(truth->size()) != nodes) {
        throw InvalidArgument("solve_simultaneous: truth must cover every node");
    }
    const auto by_node = constraints_by_node(displacements, nodes);
    require_coverage(by_node, na);

    Trajectory traj;
    // Step size from the free block of R^T R.
    const RigidityMatrix r = build_rigidity_matrix({}, displacements, [&] {
        Configuration p(static_cast<std::size_t>(nodes), Vec3::Zero());
        std::copy(anchors.begin(), anchors.end(), p.begin());
        return p;
    }());
    const InformationMatrix info = information_matrix(r, na);
    const Spectrum spec = symmetric_spectrum(info.ff());
    if (config.step_size) {
        if (!(*config.step_size > 0.0)) throw InvalidArgument("step size must be positive");
        traj.gamma = *config.step_size;
    } else {
        traj.gamma = 1.0 / spec.lambda_max;
    }
    if (!(spec.lambda_min > 1e-10 * spec.lambda_max)) {
        traj.warnings.push_back("M_ff is singular; the iteration has no unique fixed point");
    }

    Configuration state(anchors);
    const Configuration init = initial_estimates(config, anchors, nf);
    state.insert(state.end(), init.begin(), init.end());

    const auto error_of = [&](const Configuration& s) {
        double sq = 0.0;
        for (int i = na; i < nodes; ++i) {
            sq += (s[static_cast<std::size_t>(i)] - (*truth)[static_cast<std::size_t>(i)]).squaredNorm();
        }
        return std::sqrt(sq);
    };
    const auto record = [&](int it) {
        traj.iterations.push_back(it);
        traj.estimates.emplace_back(state.begin() + na, state.end());
        if (truth) traj.error_norms.push_back(error_of(state));
    };
    record(0);
    const double initial_error = truth ? traj.error_norms.front() : 0.0;
    double first_update = -1.0;

    // Each round computes every constraint residual once from the previous
    // estimates and hands each member its share; identical to summing
    // local_update over the nodes.
    std::vector<Vec3> residuals(displacements.size());
    Configuration step(static_cast<std::size_t>(nodes));
    int it = 0;
    bool recorded_last = true;
    while (it < config.max_iters) {
        for (std::size_t c = 0; c < displacements.size(); ++c) {
            const auto& d = displacements[c];
            const Vec3& centre = state[static_cast<std::size_t>(d.center)];
            Vec3 res = Vec3::Zero();
            for (std::size_t e = 0; e < d.neighbors.size(); ++e) {
                res += d.coeffs(static_cast<Eigen::Index>(e)) *
                       (state[static_cast<std::size_t>(d.neighbors[e])] - centre);
            }
            residuals[c] = res;
        }
        std::fill(step.begin(), step.end(), Vec3::Zero());
        for (std::size_t c = 0; c < displacements.size(); ++c) {
            const auto& d = displacements[c];
            step[static_cast<std::size_t>(d.center)] += d.coefficient_sum() * residuals[c];
            for (std::size_t e = 0; e < d.neighbors.size(); ++e) {
                step[static_cast<std::size_t>(d.neighbors[e])] -=
                    d.coeffs(static_cast<Eigen::Index>(e)) * residuals[c];
            }
        }
        double sq = 0.0;
        for (int i = na; i < nodes; ++i) {
            const Vec3 delta = traj.gamma * step[static_cast<std::size_t>(i)];
            state[static_cast<std::size_t>(i)] += delta;
            sq += delta.squaredNorm();
        }
        ++it;
        const double update = std::sqrt(sq);
        traj.final_update_norm = update;
        if (first_update < 0.0) first_update = update;

        const double err = truth ? error_of(state) : 0.0;
        const bool blown = !std::isfinite(update) || !std::isfinite(err) ||
                           (truth ? err > config.divergence_factor * std::max(initial_error, 1e-300)
                                  : update > config.divergence_factor *
                                                 std::max(first_update, 1e-300));
        if (blown) {
            throw DivergenceError("simultaneous iteration diverged with step size " +
                                      std::to_string(traj.gamma),
                                  traj.gamma);
        }
        recorded_last = false;
        if (it % config.stride == 0) {
            record(it);
            recorded_last = true;
        }
        if (update < config.convergence_eps) {
            traj.converged_at = it;
            break;
        }
    }
    if (!recorded_last) record(it);
    traj.iterations_run = it;
    traj.final_estimates.assign(state.begin() + na, state.end());
    return traj;
}

std::optional<Vec3> constraint_fixed_point(NodeId i, const DisplacementConstraint& c,
                                           const EstimateReader& read) {
    constexpr double viable = 1e-6;
    const double total = c.coefficient_sum();
    if (c.center == i) {
        if (std::abs(total) <= viable) return std::nullopt;
        Vec3 acc = Vec3::Zero();
        for (std::size_t e = 0; e < c.neighbors.size(); ++e) {
            acc += c.coeffs(static_cast<Eigen::Index>(e)) * read(c.neighbors[e]);
        }
        return acc / total;
    }
    const auto mu_i = c.coefficient_of(i);
    if (!mu_i || std::abs(*mu_i) <= viable) return std::nullopt;
    Vec3 acc = (total / *mu_i) * read(c.center);
    for (std::size_t e = 0; e < c.neighbors.size(); ++e) {
        if (c.neighbors[e] == i) continue;
        acc -= (c.coeffs(static_cast<Eigen::Index>(e)) / *mu_i) * read(c.neighbors[e]);
    }
    return acc;
}

SequentialResult solve_sequential(const Network& net, const BookView& books,
                                  const BuilderOptions& opts) {
    const int n = net.size();
    const int na = net.anchor_count();
    SequentialResult out;
    out.estimates.assign(static_cast<std::size_t>(n),
                         Vec3::Constant(std::numeric_limits<double>::quiet_NaN()));
    std::vector<bool> localized(static_cast<std::size_t>(n), false);
    for (NodeId a = 0; a < na; ++a) {
        out.estimates[static_cast<std::size_t>(a)] = net.node(a).position;
        localized[static_cast<std::size_t>(a)] = true;
    }

    for (;;) {
        const std::vector<bool> snapshot = localized;
        const Configuration estimates = out.estimates;
        const EstimateReader read = [&](NodeId id) {
            return estimates[static_cast<std::size_t>(id)];
        };
        bool progress = false;
        ++out.rounds;
        for (NodeId i = na; i < n; ++i) {
            if (snapshot[static_cast<std::size_t>(i)]) continue;
            std::vector<NodeId> ready;
            for (NodeId j : net.neighbors(i)) {
                if (snapshot[static_cast<std::size_t>(j)]) ready.push_back(j);
            }
            const MeasurementBook& book = books(i);
            std::optional<Vec3> fixed;
            const auto try_subset = [&](const std::vector<NodeId>& subset) {
                try {
                    const auto c = build_displacement_constraint(book, i, subset, opts);
                    for (NodeId m : c.members()) {
                        if (m != i && !snapshot[static_cast<std::size_t>(m)]) return;
                    }
                    fixed = constraint_fixed_point(i, c, read);
                } catch (const Error&) {
                }
            };
            const std::size_t k = ready.size();
            if (k >= 4) {
                for (std::size_t a = 0; a < k && !fixed; ++a)
                    for (std::size_t b = a + 1; b < k && !fixed; ++b)
                        for (std::size_t c = b + 1; c < k && !fixed; ++c)
                            for (std::size_t d = c + 1; d < k && !fixed; ++d)
                                try_subset({ready[a], ready[b], ready[c], ready[d]});
            } else if (k == 3 || k == 2) {
                try_subset(ready);
            }
            if (fixed && fixed->allFinite()) {
                out.estimates[static_cast<std::size_t>(i)] = *fixed;
                localized[static_cast<std::size_t>(i)] = true;
                out.order.push_back(i);
                out.round_of.push_back(out.rounds);
                progress = true;
            }
        }
        if (!progress) break;
    }
    for (NodeId i = na; i < n; ++i) {
        if (!localized[static_cast<std::size_t>(i)]) out.unlocalized.push_back(i);
    }
    return out;
}

SequentialResult solve_sequential(const Network& net, const MeasurementBook& book,
                                  const BuilderOptions& opts) {
    return solve_sequential(
        net, [&](NodeId) -> const MeasurementBook& { return book; }, opts);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t, int anchors,
                          const std::optional<Configuration>& truth) {
    out << "iter,node_id,x,y,z,err_norm\n";
    out.precision(17);
    for (std::size_t s = 0; s < t.estimates.size(); ++s) {
        const auto& est = t.estimates[s];
        for (std::size_t f = 0; f < est.size(); ++f) {
            const NodeId id = anchors + static_cast<NodeId>(f);
            out << t.iterations[s] << ',' << id << ',' << est[f].x() << ',' << est[f].y() << ','
                << est[f].z() << ',';
            if (truth) out << (est[f] - (*truth)[static_cast<std::size_t>(id)]).norm();
            out << '\n';
        }
    }
}

}  // namespace mixloc
