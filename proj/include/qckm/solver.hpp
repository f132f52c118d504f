#ifndef QCKM_SOLVER_HPP
#define QCKM_SOLVER_HPP

// One-hot QUBO solvers: a shallow QAOA over the penalized energy
// landscape with a weight-preserving XY mixer, and exact enumeration
// baselines.
//
// The mixer applies exp(-i beta (XX+YY)) along the candidate ring as a
// sequential sweep (1,2),(2,3),...,(D,1). Each pair conserves Hamming
// weight, so a one-hot initial state (W state or single excitation)
// keeps the search inside the feasible subspace exactly, and one sweep
// carries amplitude from the first slot to every slot on the ring.
//
// Parameter search is derivative-free and deterministic: an 8x8 grid
// over (gamma, beta) in [0,pi) x [0,pi/2) shared across layers, then a
// coordinate pattern search with halving steps. The reported selection
// is the lowest-energy feasible bitstring observed anywhere during the
// search; if sampling never hits the feasible subspace, the solver falls
// back to enumerating it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "qubo.hpp"
#include "rng.hpp"
#include "statevec.hpp"

namespace qckm {

inline constexpr std::uint64_t kEnumerationCap = 10000000;

struct OptimizerConfig {
    unsigned grid = 8;           // grid points per axis
    unsigned pattern_evals = 60; // evaluation budget after the grid
    double min_step = 1e-3;      // stop refining below this step
};

enum class QaoaInit { w_state, single_excitation };

struct QaoaConfig {
    unsigned layers = 1;
    std::uint64_t shots = 10000; // per-solve budget, split across evaluations
    bool analytic = false;
    QaoaInit init = QaoaInit::w_state;
    OptimizerConfig optimizer{};
};

struct GateCounts {
    std::uint64_t mixer_2q = 0;
    std::uint64_t cost_2q = 0;
};

struct SolveReport {
    OneHotAssignment assignment;
    std::size_t selected = 0;        // assignment.pick[0] for group solves
    double best_energy = 0.0;        // penalized energy of the selection
    double optimum_energy = 0.0;     // exact feasible minimum
    double suboptimality = 0.0;      // best_energy - optimum_energy
    double feasible_fraction = 1.0;  // at the chosen parameters
    std::vector<double> gamma;
    std::vector<double> beta;
    std::uint64_t shots_used = 0;
    std::size_t evaluations = 0;
    bool fallback = false; // no feasible sample seen, enumerated instead
    GateCounts gates;
};

namespace detail {

template <typename F>
void for_each_feasible_mask(std::span<const std::size_t> sizes, F&& f) {
    std::vector<std::size_t> pick(sizes.size(), 0);
    std::vector<std::size_t> offs(sizes.size(), 0);
    for (std::size_t g = 1; g < sizes.size(); ++g)
        offs[g] = offs[g - 1] + sizes[g - 1];
    while (true) {
        std::uint64_t mask = 0;
        for (std::size_t g = 0; g < sizes.size(); ++g)
            mask |= std::uint64_t{1} << (offs[g] + pick[g]);
        f(mask);
        std::size_t g = 0;
        while (g < sizes.size()) {
            if (++pick[g] < sizes[g])
                break;
            pick[g] = 0;
            ++g;
        }
        if (g == sizes.size())
            return;
    }
}

inline std::vector<std::uint64_t> feasible_masks(std::span<const std::size_t> sizes) {
    std::vector<std::uint64_t> out;
    for_each_feasible_mask(sizes, [&](std::uint64_t m) { out.push_back(m); });
    return out;
}

} // namespace detail

// Initial state in the one-hot subspace: per-group W states (uniform over
// every feasible bitstring) or the first slot of each group excited.
inline Statevector qaoa_init_state(std::span<const std::size_t> sizes, QaoaInit init) {
    std::size_t n = 0;
    for (std::size_t d : sizes) {
        if (d == 0)
            throw std::invalid_argument("every group needs at least one candidate");
        n += d;
    }
    if (n > kMaxQubits)
        throw capacity_error("QAOA register of " + std::to_string(n) +
                             " qubits exceeds the cap");
    Statevector s = Statevector::zero(static_cast<unsigned>(n));
    s.amp[0] = 0.0;
    if (init == QaoaInit::single_excitation) {
        std::uint64_t mask = 0;
        std::size_t off = 0;
        for (std::size_t d : sizes) {
            mask |= std::uint64_t{1} << off;
            off += d;
        }
        s.amp[mask] = 1.0;
        return s;
    }
    double count = 1.0;
    for (std::size_t d : sizes)
        count *= static_cast<double>(d);
    double a = 1.0 / std::sqrt(count);
    detail::for_each_feasible_mask(sizes, [&](std::uint64_t m) { s.amp[m] = a; });
    return s;
}

// Full circuit for given parameters. energies indexes penalized energies
// by basis state. Gate noise (when rng is non-null) follows each cost
// block and each mixer pair; state preparation is direct and noiseless.
inline Statevector qaoa_circuit(std::span<const double> energies,
                                std::span<const std::size_t> sizes,
                                std::span<const double> gamma,
                                std::span<const double> beta, QaoaInit init,
                                const NoiseModel* noise = nullptr,
                                RngStream* rng = nullptr) {
    if (gamma.size() != beta.size() || gamma.empty())
        throw std::invalid_argument("need matching, non-empty parameter vectors");
    Statevector s = qaoa_init_state(sizes, init);
    if (energies.size() != s.size())
        throw std::invalid_argument("energy table does not match the register");
    const double p2 = noise != nullptr ? noise->p2 : 0.0;
    std::vector<unsigned> all(s.qubits);
    for (unsigned q = 0; q < s.qubits; ++q)
        all[q] = q;
    for (std::size_t l = 0; l < gamma.size(); ++l) {
        double g = gamma[l];
        double b = beta[l];
        apply_noisy_gate(
            s, [&](Statevector& v) { apply_cost_phase(v, energies, g); },
            std::span<const unsigned>(all), p2, rng);
        std::size_t off = 0;
        for (std::size_t d : sizes) {
            if (d >= 2) {
                std::size_t pairs = d == 2 ? 1 : d;
                for (std::size_t t = 0; t < pairs; ++t) {
                    unsigned qa = static_cast<unsigned>(off + t);
                    unsigned qb = static_cast<unsigned>(off + (t + 1) % d);
                    unsigned touched[2] = {qa, qb};
                    apply_noisy_gate(
                        s, [&](Statevector& v) { apply_xy_pair(v, qa, qb, b); },
                        std::span<const unsigned>(touched, 2), p2, rng);
                }
            }
            off += d;
        }
    }
    return s;
}

namespace detail {

// Ising pair couplings of the penalized QUBO: pair (r, s) carries
// 2 Q_rs, plus 2 lambda when r and s share a one-hot group.
inline std::uint64_t penalized_coupling_nnz(std::span<const double> quad, std::size_t n,
                                            std::span<const std::size_t> group_of,
                                            double lambda) {
    std::uint64_t nnz = 0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = r + 1; s < n; ++s) {
            double c = 2.0 * quad[r * n + s];
            if (group_of[r] == group_of[s])
                c += 2.0 * lambda;
            if (c != 0.0)
                ++nnz;
        }
    return nnz;
}

inline std::vector<std::size_t> group_index(std::span<const std::size_t> sizes) {
    std::vector<std::size_t> g;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        g.insert(g.end(), sizes[i], i);
    return g;
}

} // namespace detail

// Two-qubit gate budget of the circuit family: per layer, one XY pair per
// ring edge (D per group of D >= 2) and one ZZ interaction per nonzero
// Ising coupling of the penalized cost.
inline GateCounts gate_count_report(const GroupQubo& q, unsigned layers) {
    GateCounts g;
    g.mixer_2q = static_cast<std::uint64_t>(layers) * (q.d >= 2 ? q.d : 0);
    std::vector<std::size_t> gi(q.d, 0);
    g.cost_2q = static_cast<std::uint64_t>(layers) *
                detail::penalized_coupling_nnz(q.quad, q.d, gi, q.lambda);
    return g;
}

inline GateCounts gate_count_report(const JointQubo& q, unsigned layers) {
    GateCounts g;
    std::uint64_t ring = 0;
    for (std::size_t d : q.sizes)
        if (d >= 2)
            ring += d;
    g.mixer_2q = static_cast<std::uint64_t>(layers) * ring;
    std::vector<std::size_t> gi = detail::group_index(q.sizes);
    g.cost_2q = static_cast<std::uint64_t>(layers) *
                detail::penalized_coupling_nnz(q.quad, q.n(), gi, q.lambda);
    return g;
}

namespace detail {

struct BestFeasible {
    bool found = false;
    std::uint64_t mask = 0;
    double energy = std::numeric_limits<double>::infinity();

    void offer(std::uint64_t m, double e) {
        if (!found || e < energy) {
            found = true;
            mask = m;
            energy = e;
        }
    }
};

inline SolveReport qaoa_solve_energies(std::span<const double> energies,
                                       std::span<const std::size_t> sizes,
                                       const QaoaConfig& cfg, const StreamContext& ctx,
                                       const NoiseModel* noise, ResourceUsage* usage) {
    if (cfg.layers == 0)
        throw std::invalid_argument("QAOA needs at least one layer");
    const std::size_t p = cfg.layers;
    std::size_t n = 0;
    for (std::size_t d : sizes)
        n += d;

    std::vector<std::uint64_t> feasible = feasible_masks(sizes);
    std::uint64_t opt_mask = feasible.front();
    for (std::uint64_t m : feasible)
        if (energies[m] < energies[opt_mask])
            opt_mask = m;

    SolveReport rep;
    rep.optimum_energy = energies[opt_mask];
    rep.gamma.assign(p, 0.0);
    rep.beta.assign(p, 0.0);
    if (usage != nullptr)
        usage->observe_width(n);

    const unsigned grid = std::max(1u, cfg.optimizer.grid);
    const std::size_t planned =
        static_cast<std::size_t>(grid) * grid + cfg.optimizer.pattern_evals;
    const std::uint64_t shots_per_eval =
        cfg.analytic ? 0
                     : std::max<std::uint64_t>(
                           1, cfg.shots / static_cast<std::uint64_t>(planned));

    RngStream shot_rng(ctx.rng, StreamLabel::shots, ctx.salt, ctx.group_tag,
                       std::uint64_t{1} << 40);

    BestFeasible best_sample;
    double best_obj = std::numeric_limits<double>::infinity();
    std::vector<double> best_theta(2 * p, 0.0);
    double best_ff = 0.0;

    auto evaluate = [&](const std::vector<double>& theta) {
        std::span<const double> gam(theta.data(), p);
        std::span<const double> bet(theta.data() + p, p);
        double obj = 0.0;
        double ff = 0.0;
        if (cfg.analytic) {
            Statevector s =
                qaoa_circuit(energies, sizes, gam, bet, cfg.init, nullptr, nullptr);
            for (std::size_t b = 0; b < s.size(); ++b)
                obj += std::norm(s.amp[b]) * energies[b];
            for (std::uint64_t m : feasible) {
                double pm = std::norm(s.amp[m]);
                if (pm > 1e-12) {
                    ff += pm;
                    best_sample.offer(m, energies[m]);
                }
            }
        } else {
            const bool traj = noise != nullptr && noise->gate_noise();
            std::uint64_t feas_hits = 0;
            double esum = 0.0;
            auto absorb = [&](std::uint64_t outcome, std::uint64_t count) {
                esum += energies[outcome] * static_cast<double>(count);
                if (feasible_mask(sizes, outcome)) {
                    feas_hits += count;
                    best_sample.offer(outcome, energies[outcome]);
                }
            };
            if (traj) {
                for (std::uint64_t t = 0; t < shots_per_eval; ++t) {
                    Statevector s = qaoa_circuit(energies, sizes, gam, bet, cfg.init,
                                                 noise, &shot_rng);
                    ShotResult r = sample_shots(s, 1, noise, shot_rng);
                    absorb(r.counts.begin()->first, 1);
                }
            } else {
                Statevector s =
                    qaoa_circuit(energies, sizes, gam, bet, cfg.init, nullptr, nullptr);
                ShotResult r = sample_shots(s, shots_per_eval, noise, shot_rng);
                for (const auto& [outcome, count] : r.counts)
                    absorb(outcome, count);
            }
            obj = esum / static_cast<double>(shots_per_eval);
            ff = static_cast<double>(feas_hits) / static_cast<double>(shots_per_eval);
            rep.shots_used += shots_per_eval;
            if (usage != nullptr)
                usage->add_shots(shots_per_eval);
        }
        ++rep.evaluations;
        if (obj < best_obj) {
            best_obj = obj;
            best_theta = theta;
            best_ff = ff;
        }
        return obj;
    };

    // Coarse grid, one (gamma, beta) replicated across layers.
    const double pi = 3.14159265358979323846;
    for (unsigned i = 0; i < grid; ++i)
        for (unsigned j = 0; j < grid; ++j) {
            double g = pi * static_cast<double>(i) / static_cast<double>(grid);
            double b = 0.5 * pi * static_cast<double>(j) / static_cast<double>(grid);
            std::vector<double> theta(2 * p);
            std::fill(theta.begin(), theta.begin() + p, g);
            std::fill(theta.begin() + p, theta.end(), b);
            evaluate(theta);
        }

    // Coordinate pattern search from the grid winner, halving steps.
    std::vector<double> theta = best_theta;
    double cur = best_obj;
    double step_g = pi / (2.0 * grid);
    double step_b = pi / (4.0 * grid);
    std::size_t used = 0;
    while (used < cfg.optimizer.pattern_evals &&
           (step_g >= cfg.optimizer.min_step || step_b >= cfg.optimizer.min_step)) {
        bool improved = false;
        std::vector<double> round_theta = theta;
        double round_obj = cur;
        for (std::size_t c = 0; c < 2 * p && used < cfg.optimizer.pattern_evals; ++c) {
            double step = c < p ? step_g : step_b;
            for (double sign : {1.0, -1.0}) {
                if (used >= cfg.optimizer.pattern_evals)
                    break;
                std::vector<double> cand = theta;
                cand[c] += sign * step;
                double obj = evaluate(cand);
                ++used;
                if (obj < round_obj) {
                    round_obj = obj;
                    round_theta = cand;
                    improved = true;
                }
            }
        }
        if (improved) {
            theta = round_theta;
            cur = round_obj;
        } else {
            step_g *= 0.5;
            step_b *= 0.5;
        }
    }

    rep.gamma.assign(best_theta.begin(), best_theta.begin() + p);
    rep.beta.assign(best_theta.begin() + p, best_theta.end());
    rep.feasible_fraction = best_ff;

    std::uint64_t chosen;
    if (best_sample.found) {
        chosen = best_sample.mask;
    } else {
        chosen = opt_mask;
        rep.fallback = true;
    }
    rep.best_energy = energies[chosen];
    rep.suboptimality = rep.best_energy - rep.optimum_energy;
    rep.assignment = *decode_mask(sizes, chosen);
    rep.selected = rep.assignment.pick.empty() ? 0 : rep.assignment.pick[0];
    return rep;
}

} // namespace detail

inline SolveReport qaoa_solve(const GroupQubo& q, const QaoaConfig& cfg,
                              const StreamContext& ctx,
                              const NoiseModel* noise = nullptr,
                              ResourceUsage* usage = nullptr) {
    std::vector<double> energies = to_diagonal_energies(q);
    std::size_t sizes[1] = {q.d};
    SolveReport rep = detail::qaoa_solve_energies(
        energies, std::span<const std::size_t>(sizes, 1), cfg, ctx, noise, usage);
    rep.gates = gate_count_report(q, cfg.layers);
    return rep;
}

inline SolveReport qaoa_solve(const JointQubo& q, const QaoaConfig& cfg,
                              const StreamContext& ctx,
                              const NoiseModel* noise = nullptr,
                              ResourceUsage* usage = nullptr) {
    std::vector<double> energies = to_diagonal_energies(q);
    SolveReport rep = detail::qaoa_solve_energies(energies, q.sizes, cfg, ctx, noise,
                                                  usage);
    rep.gates = gate_count_report(q, cfg.layers);
    return rep;
}

inline SolveReport exhaustive_group(const GroupQubo& q) {
    SolveReport rep;
    std::size_t best = 0;
    double be = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < q.d; ++r) {
        double e = energy(q, std::uint64_t{1} << r, true);
        if (e < be) {
            be = e;
            best = r;
        }
    }
    rep.assignment.pick = {best};
    rep.selected = best;
    rep.best_energy = be;
    rep.optimum_energy = be;
    rep.suboptimality = 0.0;
    rep.feasible_fraction = 1.0;
    return rep;
}

// Exact feasible minimum of the joint problem. Enumeration count is
// prod D_g; refuses beyond the cap. Works directly on picks, so it does
// not need the 2^n energy table.
inline SolveReport exhaustive_joint(const JointQubo& q) {
    double count = 1.0;
    for (std::size_t d : q.sizes)
        count *= static_cast<double>(d);
    if (count > static_cast<double>(kEnumerationCap))
        throw capacity_error("joint enumeration of " + std::to_string(count) +
                             " assignments exceeds the cap");
    const std::size_t k = q.groups();
    std::vector<std::size_t> offs(k, 0);
    for (std::size_t g = 1; g < k; ++g)
        offs[g] = offs[g - 1] + q.sizes[g - 1];

    OneHotAssignment cur;
    cur.pick.assign(k, 0);
    OneHotAssignment best = cur;
    double be = std::numeric_limits<double>::infinity();
    while (true) {
        double e = 0.0;
        for (std::size_t g = 0; g < k; ++g) {
            std::size_t rg = offs[g] + cur.pick[g];
            e += q.lin[rg] + q.q(rg, rg);
            for (std::size_t h = g + 1; h < k; ++h)
                e += 2.0 * q.q(rg, offs[h] + cur.pick[h]);
        }
        if (e < be) {
            be = e;
            best = cur;
        }
        std::size_t g = 0;
        while (g < k) {
            if (++cur.pick[g] < q.sizes[g])
                break;
            cur.pick[g] = 0;
            ++g;
        }
        if (g == k)
            break;
    }
    SolveReport rep;
    rep.assignment = best;
    rep.selected = best.pick.empty() ? 0 : best.pick[0];
    rep.best_energy = be;
    rep.optimum_energy = be;
    rep.suboptimality = 0.0;
    rep.feasible_fraction = 1.0;
    return rep;
}

// Per-block argmin of the joint problem with the cross-group couplings
// dropped: the selection whose distance to the joint optimum the
// coupling max-norm bound controls.
inline OneHotAssignment exhaustive_grouped_blocks(const JointQubo& q) {
    OneHotAssignment a;
    a.pick.resize(q.groups());
    for (std::size_t g = 0; g < q.groups(); ++g) {
        std::size_t off = q.offset(g);
        std::size_t best = 0;
        double be = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < q.sizes[g]; ++r) {
            double e = q.lin[off + r] + q.q(off + r, off + r);
            if (e < be) {
                be = e;
                best = r;
            }
        }
        a.pick[g] = best;
    }
    return a;
}

} // namespace qckm

#endif
