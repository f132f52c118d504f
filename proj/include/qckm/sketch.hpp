#ifndef QCKM_SKETCH_HPP
#define QCKM_SKETCH_HPP

// Sketch construction: exact Fourier-feature means, and their estimation
// from subsampled data through simulated Hadamard tests.
//
// For one frequency component, the B subsampled phases are loaded into a
// diagonal oracle over an index register of n_i = max(1, ceil(log2 B))
// qubits. The register holds M = 2^n_i slots; the M - B padding slots
// carry phase 0 and contribute a known +1 each, which the estimator
// removes in closed form:
//
//   mu_M = (1/M) (sum_l exp(i theta_l) + (M - B))
//   z^   = (M/B) mu_M - (M - B)/B
//
// so z^ is an unbiased estimate of the subsample mean, and the subsample
// mean is an unbiased estimate of the population component.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "rng.hpp"
#include "statevec.hpp"

namespace qckm {

struct QffConfig {
    std::size_t subsample = 256;      // B, clamped to the population size
    std::size_t shots_per_basis = 512; // S, per real/imag Hadamard test
    bool analytic = false;             // exact expectations, no sampling
};

struct QffRegisters {
    unsigned index_qubits = 1; // n_i
    std::size_t padded = 2;    // M = 2^n_i

    static QffRegisters for_count(std::size_t b) {
        if (b == 0)
            throw std::invalid_argument("subsample size must be at least 1");
        unsigned n = 1;
        while ((std::size_t{1} << n) < b)
            ++n;
        if (n + 1 > kMaxQubits)
            throw capacity_error("subsample of " + std::to_string(b) +
                                 " needs an index register wider than the cap");
        return {n, std::size_t{1} << n};
    }

    unsigned circuit_qubits() const { return index_qubits + 1; }
};

inline Sketch exact_sketch(const Dataset& data, const FrequencyMatrix& w) {
    validate(data);
    Sketch s;
    s.kind = SketchKind::exact;
    s.z.assign(w.m, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < data.n; ++i) {
        auto phi = feature_map(data.row(i), w);
        for (std::size_t j = 0; j < w.m; ++j)
            s.z[j] += phi[j];
    }
    for (auto& v : s.z)
        v /= static_cast<double>(data.n);
    return s;
}

inline Sketch exact_sketch_subset(const Dataset& data,
                                  std::span<const std::size_t> indices,
                                  const FrequencyMatrix& w) {
    if (indices.empty())
        throw std::invalid_argument("subset sketch needs at least one point");
    Sketch s;
    s.kind = SketchKind::exact;
    s.z.assign(w.m, cplx(0.0, 0.0));
    for (std::size_t i : indices) {
        auto phi = feature_map(data.row(i), w);
        for (std::size_t j = 0; j < w.m; ++j)
            s.z[j] += phi[j];
    }
    for (auto& v : s.z)
        v /= static_cast<double>(indices.size());
    return s;
}

// Mean feature vector of a centroid set, weights 1/k.
inline Sketch centroid_sketch(const Centroids& c, const FrequencyMatrix& w) {
    if (c.k == 0)
        throw std::invalid_argument("centroid sketch needs at least one centroid");
    Sketch s;
    s.kind = SketchKind::exact;
    s.z.assign(w.m, cplx(0.0, 0.0));
    for (std::size_t g = 0; g < c.k; ++g) {
        auto phi = feature_map(c.row(g), w);
        for (std::size_t j = 0; j < w.m; ++j)
            s.z[j] += phi[j];
    }
    for (auto& v : s.z)
        v /= static_cast<double>(c.k);
    return s;
}

// B distinct indices out of [0, n), uniform over subsets (partial
// Fisher-Yates), order as produced by the shuffle.
inline std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t b,
                                                  RngStream& rng) {
    if (b == 0 || b > n)
        throw std::invalid_argument("subsample size must lie in [1, n]");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = i;
    for (std::size_t i = 0; i < b; ++i) {
        std::size_t j = i + rng.index(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(b);
    return idx;
}

enum class HadamardBasis { real, imag };

// One Hadamard test: ancilla-controlled phase oracle over the index
// register, estimating Re mu_M (real basis) or Im mu_M (imag basis, via
// an S-dagger on the ancilla before the closing H). Sampling reads only
// the ancilla wire. In analytic mode the exact <Z> is returned and the
// noise model is ignored.
inline double hadamard_test_mu(std::span<const double> phases, QffRegisters regs,
                               HadamardBasis basis, std::size_t shots,
                               const NoiseModel* noise, RngStream& rng,
                               bool analytic = false,
                               ResourceUsage* usage = nullptr) {
    if (phases.size() > regs.padded)
        throw std::invalid_argument("phase list exceeds the index register");
    const unsigned width = regs.circuit_qubits();
    const unsigned ancilla = regs.index_qubits;
    if (usage != nullptr)
        usage->observe_width(width);
    DiagonalOracle oracle = DiagonalOracle::padded(phases, regs.index_qubits);

    std::vector<unsigned> all(width);
    for (unsigned q = 0; q < width; ++q)
        all[q] = q;

    const bool trajectories =
        !analytic && noise != nullptr && noise->gate_noise();
    const double p1 = noise != nullptr ? noise->p1 : 0.0;
    const double p2 = noise != nullptr ? noise->p2 : 0.0;
    const double pro = (!analytic && noise != nullptr) ? noise->p_readout : 0.0;

    auto build = [&](RngStream* nrng) {
        Statevector s = Statevector::zero(width);
        for (unsigned q = 0; q < width; ++q)
            apply_noisy_gate(
                s, [q](Statevector& v) { apply_h(v, q); },
                std::span<const unsigned>(&all[q], 1), p1, nrng);
        apply_noisy_gate(
            s,
            [&](Statevector& v) { apply_controlled_diagonal(v, oracle, ancilla, 0); },
            std::span<const unsigned>(all.data(), width), p2, nrng);
        if (basis == HadamardBasis::imag)
            apply_noisy_gate(
                s, [&](Statevector& v) { apply_sdg(v, ancilla); },
                std::span<const unsigned>(&all[ancilla], 1), p1, nrng);
        apply_noisy_gate(
            s, [&](Statevector& v) { apply_h(v, ancilla); },
            std::span<const unsigned>(&all[ancilla], 1), p1, nrng);
        return s;
    };

    if (analytic) {
        Statevector s = build(nullptr);
        return expectation_z(s, ancilla);
    }
    if (shots == 0)
        throw std::invalid_argument("shot count must be positive outside analytic mode");
    if (usage != nullptr)
        usage->add_shots(shots);

    std::int64_t sum = 0;
    if (trajectories) {
        for (std::size_t t = 0; t < shots; ++t) {
            Statevector s = build(&rng);
            double p = prob_one(s, ancilla);
            p = p * (1.0 - pro) + (1.0 - p) * pro;
            sum += rng.bernoulli(p) ? -1 : 1;
        }
    } else {
        Statevector s = build(nullptr);
        double p = prob_one(s, ancilla);
        p = p * (1.0 - pro) + (1.0 - p) * pro;
        for (std::size_t t = 0; t < shots; ++t)
            sum += rng.bernoulli(p) ? -1 : 1;
    }
    return static_cast<double>(sum) / static_cast<double>(shots);
}

namespace detail {

inline std::vector<double> component_phases(const Dataset& data,
                                            std::span<const std::size_t> indices,
                                            const FrequencyMatrix& w, std::size_t j) {
    std::vector<double> theta(indices.size());
    auto row = w.row(j);
    for (std::size_t t = 0; t < indices.size(); ++t) {
        double acc = 0.0;
        auto x = data.row(indices[t]);
        for (std::size_t c = 0; c < w.dim; ++c)
            acc += row[c] * x[c];
        theta[t] = acc;
    }
    return theta;
}

} // namespace detail

// Estimate one sketch component from an already-drawn subsample.
inline cplx qff_estimate_component(const Dataset& data,
                                   std::span<const std::size_t> indices,
                                   const FrequencyMatrix& w, std::size_t j,
                                   const QffConfig& cfg, const NoiseModel* noise,
                                   const StreamContext& ctx,
                                   ResourceUsage* usage = nullptr) {
    if (j >= w.m)
        throw std::invalid_argument("component index out of range");
    const std::size_t b = indices.size();
    QffRegisters regs = QffRegisters::for_count(b);
    std::vector<double> theta = detail::component_phases(data, indices, w, j);

    RngStream re_rng(ctx, StreamLabel::shots, 2 * j);
    RngStream im_rng(ctx, StreamLabel::shots, 2 * j + 1);
    double mu_re = hadamard_test_mu(theta, regs, HadamardBasis::real,
                                    cfg.shots_per_basis, noise, re_rng,
                                    cfg.analytic, usage);
    double mu_im = hadamard_test_mu(theta, regs, HadamardBasis::imag,
                                    cfg.shots_per_basis, noise, im_rng,
                                    cfg.analytic, usage);

    const double m = static_cast<double>(regs.padded);
    const double bd = static_cast<double>(b);
    return (m / bd) * cplx(mu_re, mu_im) - cplx((m - bd) / bd, 0.0);
}

// Full m-component estimate over one subsample of the dataset.
inline Sketch qff_estimate_sketch(const Dataset& data, const FrequencyMatrix& w,
                                  const QffConfig& cfg, const NoiseModel* noise,
                                  const StreamContext& ctx,
                                  ResourceUsage* usage = nullptr) {
    validate(data);
    const std::size_t b = std::min(cfg.subsample, data.n);
    RngStream sub_rng(ctx, StreamLabel::subsampling);
    std::vector<std::size_t> idx = subsample_indices(data.n, b, sub_rng);
    Sketch s;
    s.kind = SketchKind::estimated;
    s.z.resize(w.m);
    for (std::size_t j = 0; j < w.m; ++j)
        s.z[j] = qff_estimate_component(data, idx, w, j, cfg, noise, ctx, usage);
    return s;
}

// Estimate restricted to one cluster. Empty cluster -> nullopt; the
// caller decides what to fall back to.
inline std::optional<Sketch> group_sketch(const Dataset& data,
                                          std::span<const std::size_t> assignment,
                                          std::size_t group, const FrequencyMatrix& w,
                                          const QffConfig& cfg, const NoiseModel* noise,
                                          StreamContext ctx,
                                          ResourceUsage* usage = nullptr) {
    if (assignment.size() != data.n)
        throw std::invalid_argument("assignment length does not match data");
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.n; ++i)
        if (assignment[i] == group)
            members.push_back(i);
    if (members.empty())
        return std::nullopt;

    ctx.group_tag = group + 1;
    const std::size_t b = std::min(cfg.subsample, members.size());
    RngStream sub_rng(ctx, StreamLabel::subsampling);
    std::vector<std::size_t> pick = subsample_indices(members.size(), b, sub_rng);
    std::vector<std::size_t> idx(pick.size());
    for (std::size_t t = 0; t < pick.size(); ++t)
        idx[t] = members[pick[t]];

    Sketch s;
    s.kind = SketchKind::estimated;
    s.z.resize(w.m);
    for (std::size_t j = 0; j < w.m; ++j)
        s.z[j] = qff_estimate_component(data, idx, w, j, cfg, noise, ctx, usage);
    return s;
}

// Error budget per component: population variance of the unit-modulus
// feature values, the sampled population fraction, and the predicted
// mean-squared-error bound  S_V^2 / B + 2 M^2 / (B^2 S)  (the shot term
// drops out in analytic mode).
struct SketchDiagnostics {
    std::vector<double> population_variance; // S_V^2 per component
    double population_fraction = 0.0;        // f = B / N
    std::vector<double> mse_bound;
};

inline SketchDiagnostics sketch_diagnostics(const Dataset& data,
                                            const FrequencyMatrix& w,
                                            const QffConfig& cfg) {
    validate(data);
    if (data.n < 2)
        throw std::invalid_argument("diagnostics need at least two points");
    const std::size_t b = std::min(cfg.subsample, data.n);
    QffRegisters regs = QffRegisters::for_count(b);
    Sketch mean = exact_sketch(data, w);

    SketchDiagnostics diag;
    diag.population_fraction =
        static_cast<double>(b) / static_cast<double>(data.n);
    diag.population_variance.assign(w.m, 0.0);
    for (std::size_t i = 0; i < data.n; ++i) {
        auto phi = feature_map(data.row(i), w);
        for (std::size_t j = 0; j < w.m; ++j)
            diag.population_variance[j] += std::norm(phi[j] - mean.z[j]);
    }
    for (auto& v : diag.population_variance)
        v /= static_cast<double>(data.n - 1);

    const double bd = static_cast<double>(b);
    const double md = static_cast<double>(regs.padded);
    double shot_term = 0.0;
    if (!cfg.analytic)
        shot_term = 2.0 * md * md /
                    (bd * bd * static_cast<double>(cfg.shots_per_basis));
    diag.mse_bound.resize(w.m);
    for (std::size_t j = 0; j < w.m; ++j)
        diag.mse_bound[j] = diag.population_variance[j] / bd + shot_term;
    return diag;
}

} // namespace qckm

#endif
