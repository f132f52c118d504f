#ifndef QCKM_PIPELINE_HPP
#define QCKM_PIPELINE_HPP

// End-to-end clustering: standardize, sketch the dataset, seed with a
// short classical run, then alternately re-sketch clusters, regenerate
// candidate centroids around the current ones (keeping the incumbent in
// slot 0), and re-solve the selection QUBOs, until centroids stop moving.
// Keeping the incumbent candidate makes each re-solve a descent step on
// the per-group surrogate up to the solver's suboptimality.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "kmeans.hpp"
#include "qubo.hpp"
#include "rng.hpp"
#include "sketch.hpp"
#include "solver.hpp"
#include "statevec.hpp"

namespace qckm {

enum class SolverMode { qaoa, exhaustive };
enum class Formulation { grouped, coupled };
enum class SketchMode { qff, exact };

struct PipelineConfig {
    std::size_t k = 3;
    std::size_t m = 0;              // 0 -> 4 * k * dim
    std::size_t candidates = 6;     // D per cluster
    unsigned layers = 1;            // QAOA depth
    std::size_t subsample = 256;    // B, clamped to the population
    std::uint64_t qaoa_shots = 10000;
    std::size_t qff_shots = 512;    // per Hadamard-test basis
    double epsilon = 1e-3;
    unsigned refine = 5;            // refinement step cap
    double tau = 1e-3;              // stop when centroids move less than this
    double jitter = 0.5;            // initial candidate spread (standardized units)
    double jitter_decay = 0.7;
    double sigma = 1.0;             // frequency scale
    SolverMode solver = SolverMode::qaoa;
    Formulation formulation = Formulation::grouped;
    SketchMode sketch = SketchMode::qff;
    bool analytic = false;
    NoiseModel noise{};
    std::size_t seed_restarts = 2;
    std::size_t seed_iters = 10;
};

struct GroupRecord {
    std::size_t selected = 0;
    double surrogate = 0.0;        // ||v_selected - z_g||^2
    double surrogate_elite = 0.0;  // ||v_slot0 - z_g||^2 when an incumbent exists
    double delta = 0.0;            // solver suboptimality in surrogate units
    double feasible_fraction = 1.0;
    bool solved = false;
    bool elite_present = false;
    bool empty_group = false;
};

struct IterationRecord {
    std::size_t iteration = 0;
    std::vector<GroupRecord> groups;
    double movement = 0.0; // Frobenius distance to the previous centroids
    double joint_fit = 0.0; // ||z_X - mean selected feature||^2
    double joint_delta = 0.0;
    bool coupled = false;
};

struct ClusteringResult {
    Centroids centroids; // original units
    std::vector<std::size_t> assignment;
    double sse = 0.0;
    std::size_t q_peak = 0;          // widest register any circuit used
    std::size_t observed_qubits = 0; // same, from the tracker
    std::uint64_t total_shots = 0;
    double seconds = 0.0;
    std::size_t iterations = 0;
    std::size_t m = 0;
    std::vector<IterationRecord> trace;
};

// Register requirement: the candidate ring and the index register (with
// its ancilla) are never alive at the same time, so the peak is the max.
inline std::size_t q_peak(std::size_t candidates, std::size_t subsample) {
    QffRegisters regs = QffRegisters::for_count(subsample);
    return std::max<std::size_t>(candidates, regs.circuit_qubits());
}

// Short seeded classical run on standardized data.
inline Centroids seed_centroids(const Dataset& std_data, std::size_t k, RngSpec rng,
                                std::size_t restarts = 2, std::size_t max_iter = 10) {
    LloydConfig cfg;
    cfg.restarts = restarts;
    cfg.max_iter = max_iter;
    return lloyd_kmeans(std_data, k, cfg, rng).centroids;
}

// D candidates per cluster: optionally the current centroid verbatim in
// slot 0, the rest Gaussian-jittered around it.
inline CandidateSet generate_candidates(const Centroids& centers,
                                        std::size_t per_group, double scale,
                                        const FrequencyMatrix& w, bool elite_first,
                                        RngSpec rng, std::uint64_t salt) {
    if (per_group == 0)
        throw std::invalid_argument("need at least one candidate per group");
    if (centers.dim != w.dim)
        throw std::invalid_argument("centroid dimension does not match frequencies");
    CandidateSet cs;
    cs.dim = centers.dim;
    cs.m = w.m;
    cs.sizes.assign(centers.k, per_group);
    cs.centroids.resize(centers.k * per_group * centers.dim);
    cs.features.resize(centers.k * per_group * w.m);
    for (std::size_t g = 0; g < centers.k; ++g) {
        RngStream jrng(rng, StreamLabel::jitter, salt, g);
        for (std::size_t r = 0; r < per_group; ++r) {
            double* dst = cs.centroids.data() + (g * per_group + r) * centers.dim;
            for (std::size_t j = 0; j < centers.dim; ++j) {
                double v = centers.at(g, j);
                if (!(elite_first && r == 0))
                    v += scale * jrng.normal();
                dst[j] = v;
            }
            auto phi = feature_map({dst, centers.dim}, w);
            for (std::size_t j = 0; j < w.m; ++j)
                cs.features[(g * per_group + r) * w.m + j] = phi[j];
        }
    }
    return cs;
}

namespace detail {

inline double sketch_sq_distance(std::span<const cplx> feature,
                                 std::span<const cplx> target) {
    double acc = 0.0;
    for (std::size_t j = 0; j < feature.size(); ++j)
        acc += std::norm(feature[j] - target[j]);
    return acc;
}

} // namespace detail

// ||v_{g, pick_g} - z_g||^2 per group.
inline std::vector<double> surrogate_cost(std::span<const std::size_t> picks,
                                          const std::vector<Sketch>& targets,
                                          const CandidateSet& cands) {
    if (picks.size() != cands.groups() || targets.size() != cands.groups())
        throw std::invalid_argument("group count mismatch");
    std::vector<double> f(picks.size());
    for (std::size_t g = 0; g < picks.size(); ++g)
        f[g] = detail::sketch_sq_distance(cands.feature(g, picks[g]),
                                          std::span<const cplx>(targets[g].z));
    return f;
}

inline void validate(const PipelineConfig& cfg, const Dataset& data) {
    if (cfg.k == 0 || cfg.k > data.n)
        throw std::invalid_argument("cluster count must lie in [1, n]");
    if (cfg.candidates == 0)
        throw std::invalid_argument("need at least one candidate per cluster");
    if (cfg.subsample == 0)
        throw std::invalid_argument("subsample size must be positive");
    if (!cfg.analytic && cfg.sketch == SketchMode::qff && cfg.qff_shots == 0)
        throw std::invalid_argument("sketch estimation needs a positive shot count");
    if (!(cfg.tau >= 0.0) || !(cfg.jitter > 0.0) || !(cfg.jitter_decay > 0.0))
        throw std::invalid_argument("refinement parameters must be positive");
    if (cfg.layers == 0)
        throw std::invalid_argument("QAOA depth must be at least one layer");
    qckm::validate(cfg.noise);
    if (cfg.formulation == Formulation::coupled) {
        if (cfg.solver == SolverMode::qaoa && cfg.k * cfg.candidates > kMaxQubits)
            throw capacity_error(
                "coupled register of " + std::to_string(cfg.k * cfg.candidates) +
                " qubits exceeds the cap of " + std::to_string(kMaxQubits));
        if (cfg.solver == SolverMode::exhaustive &&
            std::pow(static_cast<double>(cfg.candidates),
                     static_cast<double>(cfg.k)) >
                static_cast<double>(kEnumerationCap))
            throw capacity_error("joint enumeration exceeds the cap");
    }
}

inline ClusteringResult run_qc_kmeans(const Dataset& data, const PipelineConfig& cfg,
                                      RngSpec rng) {
    validate(cfg, data);
    auto t0 = std::chrono::steady_clock::now();
    ResourceUsage usage;

    auto [std_data, scaler] = standardize(data);
    const std::size_t m = cfg.m != 0 ? cfg.m : 4 * cfg.k * data.dim;
    RngStream wrng(rng, StreamLabel::frequencies);
    FrequencyMatrix w = sample_frequencies(m, data.dim, cfg.sigma, wrng);

    QffConfig qff;
    qff.subsample = cfg.subsample;
    qff.shots_per_basis = cfg.qff_shots;
    qff.analytic = cfg.analytic;
    const NoiseModel* noise = cfg.noise.any() ? &cfg.noise : nullptr;

    Sketch dataset_sketch;
    if (cfg.sketch == SketchMode::exact)
        dataset_sketch = exact_sketch(std_data, w);
    else
        dataset_sketch =
            qff_estimate_sketch(std_data, w, qff, noise, {rng, 0, 0}, &usage);

    QaoaConfig qcfg;
    qcfg.layers = cfg.layers;
    qcfg.shots = cfg.qaoa_shots;
    qcfg.analytic = cfg.analytic;

    Centroids current = seed_centroids(std_data, cfg.k, rng, cfg.seed_restarts,
                                       cfg.seed_iters);
    std::vector<std::size_t> assignment = assign_nearest(std_data, current);

    ClusteringResult res;
    res.m = m;

    for (std::size_t t = 0; t <= cfg.refine; ++t) {
        if (t > 0)
            assignment = assign_nearest(std_data, current);

        double scale = cfg.jitter * std::pow(cfg.jitter_decay, static_cast<double>(t));
        bool elite = t > 0;
        CandidateSet cands = generate_candidates(current, cfg.candidates, scale, w,
                                                 elite, rng, t);

        IterationRecord rec;
        rec.iteration = t;
        rec.groups.resize(cfg.k);
        Centroids next = current;
        std::vector<std::size_t> picks(cfg.k, 0);

        if (cfg.formulation == Formulation::grouped) {
            for (std::size_t g = 0; g < cfg.k; ++g) {
                GroupRecord& gr = rec.groups[g];
                std::optional<Sketch> target;
                bool member_seen = false;
                for (std::size_t i = 0; i < data.n && !member_seen; ++i)
                    member_seen = assignment[i] == g;
                if (member_seen) {
                    if (cfg.sketch == SketchMode::exact) {
                        std::vector<std::size_t> members;
                        for (std::size_t i = 0; i < data.n; ++i)
                            if (assignment[i] == g)
                                members.push_back(i);
                        target = exact_sketch_subset(std_data, members, w);
                    } else {
                        target = group_sketch(std_data, assignment, g, w, qff, noise,
                                              {rng, t, 0}, &usage);
                    }
                } else if (t == 0) {
                    target = dataset_sketch; // nothing near this seed yet
                } else {
                    gr.empty_group = true; // keep the centroid, skip the solve
                    picks[g] = 0;          // slot 0 is that centroid verbatim
                    continue;
                }

                GroupQubo qubo = build_group_qubo(*target, cands, g, cfg.epsilon);
                SolveReport rep;
                if (cfg.solver == SolverMode::qaoa)
                    rep = qaoa_solve(qubo, qcfg, {rng, t, g + 1}, noise, &usage);
                else
                    rep = exhaustive_group(qubo);

                picks[g] = rep.selected;
                gr.solved = true;
                gr.selected = rep.selected;
                gr.feasible_fraction = rep.feasible_fraction;
                gr.delta = rep.suboptimality * qubo.s_coef;
                gr.surrogate = detail::sketch_sq_distance(
                    cands.feature(g, rep.selected), std::span<const cplx>(target->z));
                if (elite) {
                    gr.elite_present = true;
                    gr.surrogate_elite = detail::sketch_sq_distance(
                        cands.feature(g, 0), std::span<const cplx>(target->z));
                }
                auto sel = cands.centroid(g, rep.selected);
                for (std::size_t j = 0; j < data.dim; ++j)
                    next.at(g, j) = sel[j];
            }
        } else {
            rec.coupled = true;
            JointQubo joint = build_joint_qubo(dataset_sketch, cands, cfg.epsilon);
            SolveReport rep;
            if (cfg.solver == SolverMode::qaoa)
                rep = qaoa_solve(joint, qcfg, {rng, t, 0}, noise, &usage);
            else
                rep = exhaustive_joint(joint);
            rec.joint_delta = rep.suboptimality * joint.s_coef;
            for (std::size_t g = 0; g < cfg.k; ++g) {
                GroupRecord& gr = rec.groups[g];
                picks[g] = rep.assignment.pick[g];
                gr.solved = true;
                gr.selected = picks[g];
                gr.feasible_fraction = rep.feasible_fraction;
                gr.elite_present = elite;
                auto sel = cands.centroid(g, picks[g]);
                for (std::size_t j = 0; j < data.dim; ++j)
                    next.at(g, j) = sel[j];
            }
        }

        // Fit of the selected centroid set against the dataset sketch.
        {
            std::vector<cplx> zmu(m, cplx(0.0, 0.0));
            for (std::size_t g = 0; g < cfg.k; ++g) {
                auto f = cands.feature(g, picks[g]);
                for (std::size_t j = 0; j < m; ++j)
                    zmu[j] += f[j];
            }
            double fit = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                fit += std::norm(dataset_sketch.z[j] -
                                 zmu[j] / static_cast<double>(cfg.k));
            rec.joint_fit = fit;
        }

        double movement = 0.0;
        for (std::size_t i = 0; i < next.values.size(); ++i) {
            double d = next.values[i] - current.values[i];
            movement += d * d;
        }
        rec.movement = std::sqrt(movement);
        current = next;
        res.trace.push_back(std::move(rec));
        ++res.iterations;
        if (t > 0 && res.trace.back().movement <= cfg.tau)
            break;
    }

    res.centroids = scaler.invert(current);
    res.assignment = assign_nearest(data, res.centroids);
    res.sse = sse(data, res.centroids, res.assignment);
    res.observed_qubits = usage.max_qubits;
    res.q_peak = usage.max_qubits;
    res.total_shots = usage.total_shots;
    auto t1 = std::chrono::steady_clock::now();
    res.seconds = std::chrono::duration<double>(t1 - t0).count();
    return res;
}

} // namespace qckm

#endif
