#ifndef QCKM_QUBO_HPP
#define QCKM_QUBO_HPP

// Candidate-selection QUBOs.
//
// Group form, one cluster with D candidate centroids and target sketch z:
//   c[r]     = -2 Re<z, v_r>
//   Q[r][r'] =    Re<v_r, v_r'>
// so the one-hot energy of picking r is ||v_r - z||^2 - ||z||^2.
//
// Joint form over all k clusters against the dataset sketch z_X:
//   b[(g,r)]          = -(2/k) Re<z_X, v_{g,r}>
//   Q[(g,r)][(h,r')]  = (1/k^2) Re<v_{g,r}, v_{h,r'}>
//
// Normalization divides every coefficient by
//   S = sum |c| + sum over all ordered pairs (diagonal included) |Q|
// and sets the one-hot penalty weight lambda = 1 + epsilon. For any two
// assignments the fit parts then differ by at most 1, so every
// constraint-violating assignment sits strictly above every feasible one.

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"

namespace qckm {

// Candidate centroids for every cluster, concatenated, with their
// precomputed feature rows.
struct CandidateSet {
    std::size_t dim = 0;
    std::size_t m = 0;
    std::vector<std::size_t> sizes;  // candidates per group
    std::vector<double> centroids;   // (sum sizes) x dim
    std::vector<cplx> features;      // (sum sizes) x m

    std::size_t groups() const { return sizes.size(); }

    std::size_t total() const {
        std::size_t t = 0;
        for (std::size_t d : sizes)
            t += d;
        return t;
    }

    std::size_t offset(std::size_t g) const {
        std::size_t t = 0;
        for (std::size_t i = 0; i < g; ++i)
            t += sizes[i];
        return t;
    }

    std::span<const double> centroid(std::size_t g, std::size_t r) const {
        return {centroids.data() + (offset(g) + r) * dim, dim};
    }

    std::span<const cplx> feature(std::size_t g, std::size_t r) const {
        return {features.data() + (offset(g) + r) * m, m};
    }
};

enum class LambdaMode { normalized, raw };

struct GroupQubo {
    std::size_t d = 0;        // candidate count
    std::vector<double> quad; // d x d, symmetric
    std::vector<double> lin;  // d
    double lambda = 0.0;
    double s_coef = 1.0;
    double epsilon = 1e-3;

    double q(std::size_t r, std::size_t s) const { return quad[r * d + s]; }
};

struct JointQubo {
    std::vector<std::size_t> sizes;
    std::vector<double> quad; // n x n, symmetric
    std::vector<double> lin;  // n
    double lambda = 0.0;
    double s_coef = 1.0;
    double epsilon = 1e-3;

    std::size_t n() const { return lin.size(); }
    std::size_t groups() const { return sizes.size(); }

    std::size_t offset(std::size_t g) const {
        std::size_t t = 0;
        for (std::size_t i = 0; i < g; ++i)
            t += sizes[i];
        return t;
    }

    double q(std::size_t r, std::size_t s) const { return quad[r * n() + s]; }
};

// One selected candidate index per group.
struct OneHotAssignment {
    std::vector<std::size_t> pick;
};

namespace detail {

inline double re_inner(std::span<const cplx> a, std::span<const cplx> b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        acc += a[j].real() * b[j].real() + a[j].imag() * b[j].imag();
    return acc;
}

template <typename Qubo>
void normalize_impl(Qubo& q) {
    double s = 0.0;
    for (double v : q.lin)
        s += std::abs(v);
    for (double v : q.quad)
        s += std::abs(v);
    if (s <= 0.0)
        s = 1.0;
    for (double& v : q.lin)
        v /= s;
    for (double& v : q.quad)
        v /= s;
    q.s_coef = s;
    q.lambda = 1.0 + q.epsilon;
}

} // namespace detail

inline void normalize_and_set_penalty(GroupQubo& q) { detail::normalize_impl(q); }
inline void normalize_and_set_penalty(JointQubo& q) { detail::normalize_impl(q); }

// features: count rows of length m, flattened row-major.
inline GroupQubo build_group_qubo(std::span<const cplx> target,
                                  std::span<const cplx> features, std::size_t count,
                                  double epsilon = 1e-3,
                                  LambdaMode mode = LambdaMode::normalized) {
    if (count == 0)
        throw std::invalid_argument("group needs at least one candidate");
    const std::size_t m = target.size();
    if (features.size() != count * m)
        throw std::invalid_argument("feature block does not match target length");
    GroupQubo q;
    q.d = count;
    q.epsilon = epsilon;
    q.lin.resize(count);
    q.quad.resize(count * count);
    for (std::size_t r = 0; r < count; ++r) {
        std::span<const cplx> vr{features.data() + r * m, m};
        q.lin[r] = -2.0 * detail::re_inner(target, vr);
        for (std::size_t s = r; s < count; ++s) {
            std::span<const cplx> vs{features.data() + s * m, m};
            double val = detail::re_inner(vr, vs);
            q.quad[r * count + s] = val;
            q.quad[s * count + r] = val;
        }
    }
    if (mode == LambdaMode::normalized)
        normalize_and_set_penalty(q);
    else
        q.lambda = 1.0 + epsilon;
    return q;
}

inline GroupQubo build_group_qubo(const Sketch& target, const CandidateSet& cands,
                                  std::size_t group, double epsilon = 1e-3,
                                  LambdaMode mode = LambdaMode::normalized) {
    if (group >= cands.groups())
        throw std::invalid_argument("group index out of range");
    if (target.m() != cands.m)
        throw std::invalid_argument("sketch length does not match candidate features");
    std::span<const cplx> block{cands.features.data() + cands.offset(group) * cands.m,
                                cands.sizes[group] * cands.m};
    return build_group_qubo(std::span<const cplx>(target.z), block,
                            cands.sizes[group], epsilon, mode);
}

inline JointQubo build_joint_qubo(const Sketch& dataset_sketch,
                                  const CandidateSet& cands, double epsilon = 1e-3,
                                  LambdaMode mode = LambdaMode::normalized) {
    if (cands.groups() == 0)
        throw std::invalid_argument("joint build needs at least one group");
    if (dataset_sketch.m() != cands.m)
        throw std::invalid_argument("sketch length does not match candidate features");
    const double k = static_cast<double>(cands.groups());
    const std::size_t n = cands.total();
    JointQubo q;
    q.sizes = cands.sizes;
    q.epsilon = epsilon;
    q.lin.resize(n);
    q.quad.resize(n * n);
    std::span<const cplx> zx(dataset_sketch.z);
    for (std::size_t r = 0; r < n; ++r) {
        std::span<const cplx> vr{cands.features.data() + r * cands.m, cands.m};
        q.lin[r] = -(2.0 / k) * detail::re_inner(zx, vr);
        for (std::size_t s = r; s < n; ++s) {
            std::span<const cplx> vs{cands.features.data() + s * cands.m, cands.m};
            double val = detail::re_inner(vr, vs) / (k * k);
            q.quad[r * n + s] = val;
            q.quad[s * n + r] = val;
        }
    }
    if (mode == LambdaMode::normalized)
        normalize_and_set_penalty(q);
    else
        q.lambda = 1.0 + epsilon;
    return q;
}

namespace detail {

inline double fit_energy(std::span<const double> lin, std::span<const double> quad,
                         std::size_t n, std::uint64_t mask) {
    double e = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        if (!(mask & (std::uint64_t{1} << r)))
            continue;
        e += lin[r];
        for (std::size_t s = 0; s < n; ++s)
            if (mask & (std::uint64_t{1} << s))
                e += quad[r * n + s];
    }
    return e;
}

inline double penalty_energy(std::span<const std::size_t> sizes, double lambda,
                             std::uint64_t mask) {
    double e = 0.0;
    std::size_t off = 0;
    for (std::size_t d : sizes) {
        std::uint64_t gm = (mask >> off) & ((std::uint64_t{1} << d) - 1);
        double miss = 1.0 - static_cast<double>(std::popcount(gm));
        e += lambda * miss * miss;
        off += d;
    }
    return e;
}

} // namespace detail

inline double energy(const GroupQubo& q, std::uint64_t mask,
                     bool include_penalty = true) {
    double e = detail::fit_energy(q.lin, q.quad, q.d, mask);
    if (include_penalty) {
        double miss = 1.0 - static_cast<double>(std::popcount(mask));
        e += q.lambda * miss * miss;
    }
    return e;
}

inline double energy(const JointQubo& q, std::uint64_t mask,
                     bool include_penalty = true) {
    double e = detail::fit_energy(q.lin, q.quad, q.n(), mask);
    if (include_penalty)
        e += detail::penalty_energy(q.sizes, q.lambda, mask);
    return e;
}

inline std::uint64_t assignment_mask(std::span<const std::size_t> sizes,
                                     const OneHotAssignment& a) {
    if (a.pick.size() != sizes.size())
        throw std::invalid_argument("assignment group count mismatch");
    std::uint64_t mask = 0;
    std::size_t off = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        if (a.pick[g] >= sizes[g])
            throw std::invalid_argument("assignment candidate index out of range");
        mask |= std::uint64_t{1} << (off + a.pick[g]);
        off += sizes[g];
    }
    return mask;
}

// Exactly one bit set per group block?
inline bool feasible_mask(std::span<const std::size_t> sizes, std::uint64_t mask) {
    std::size_t off = 0;
    for (std::size_t d : sizes) {
        std::uint64_t gm = (mask >> off) & ((std::uint64_t{1} << d) - 1);
        if (std::popcount(gm) != 1)
            return false;
        off += d;
    }
    std::size_t n = off;
    return (mask >> n) == 0;
}

inline std::optional<OneHotAssignment> decode_mask(std::span<const std::size_t> sizes,
                                                   std::uint64_t mask) {
    if (!feasible_mask(sizes, mask))
        return std::nullopt;
    OneHotAssignment a;
    a.pick.resize(sizes.size());
    std::size_t off = 0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
        std::uint64_t gm = (mask >> off) & ((std::uint64_t{1} << sizes[g]) - 1);
        a.pick[g] = static_cast<std::size_t>(std::countr_zero(gm));
        off += sizes[g];
    }
    return a;
}

// Penalized energies over the full register, indexed by basis state.
inline std::vector<double> to_diagonal_energies(const GroupQubo& q) {
    if (q.d > kMaxQubits)
        throw capacity_error("group of " + std::to_string(q.d) +
                             " candidates exceeds the register cap");
    std::vector<double> e(std::size_t{1} << q.d);
    for (std::uint64_t mask = 0; mask < e.size(); ++mask)
        e[mask] = energy(q, mask, true);
    return e;
}

inline std::vector<double> to_diagonal_energies(const JointQubo& q) {
    if (q.n() > kMaxQubits)
        throw capacity_error("joint problem of " + std::to_string(q.n()) +
                             " variables exceeds the register cap");
    std::vector<double> e(std::size_t{1} << q.n());
    for (std::uint64_t mask = 0; mask < e.size(); ++mask)
        e[mask] = energy(q, mask, true);
    return e;
}

// Cross-group interaction picked up by a feasible assignment:
// 2 sum_{g<h} R_gh[r_g][r_h].
inline double coupling_energy(const JointQubo& q, const OneHotAssignment& a) {
    if (a.pick.size() != q.groups())
        throw std::invalid_argument("assignment group count mismatch");
    double e = 0.0;
    for (std::size_t g = 0; g < q.groups(); ++g) {
        std::size_t rg = q.offset(g) + a.pick[g];
        for (std::size_t h = g + 1; h < q.groups(); ++h) {
            std::size_t rh = q.offset(h) + a.pick[h];
            e += 2.0 * q.q(rg, rh);
        }
    }
    return e;
}

// |coupling| <= 2 sum_{g<h} max|R_gh| for any feasible assignment, and
// solving the blocks independently costs at most twice that against the
// joint optimum.
struct GapBounds {
    double coupling_abs_bound = 0.0;  // 2 sum max-norms
    double selection_gap_bound = 0.0; // 4 sum max-norms
};

inline GapBounds relaxation_gap_bounds(const JointQubo& q) {
    double sum = 0.0;
    for (std::size_t g = 0; g < q.groups(); ++g)
        for (std::size_t h = g + 1; h < q.groups(); ++h) {
            double mx = 0.0;
            for (std::size_t r = 0; r < q.sizes[g]; ++r)
                for (std::size_t s = 0; s < q.sizes[h]; ++s) {
                    double v = std::abs(q.q(q.offset(g) + r, q.offset(h) + s));
                    if (v > mx)
                        mx = v;
                }
            sum += mx;
        }
    return {2.0 * sum, 4.0 * sum};
}

} // namespace qckm

#endif
