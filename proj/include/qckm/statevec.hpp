#ifndef QCKM_STATEVEC_HPP
#define QCKM_STATEVEC_HPP

// Dense statevector simulator, sized for the narrow registers this
// pipeline actually builds (index register + ancilla, or one candidate
// register). Qubit 0 is the least significant bit of the basis index.
// Gates mutate the state in place.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace qckm {

// Stochastic Pauli channel parameters. p1 applies to one-qubit gates,
// p2 to multi-qubit blocks (per touched qubit), p_readout flips each
// measured bit independently.
struct NoiseModel {
    double p1 = 0.0;
    double p2 = 0.0;
    double p_readout = 0.0;

    bool gate_noise() const { return p1 > 0.0 || p2 > 0.0; }
    bool any() const { return gate_noise() || p_readout > 0.0; }
};

inline void validate(const NoiseModel& nm) {
    for (double p : {nm.p1, nm.p2, nm.p_readout})
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("noise probabilities must lie in [0, 1]");
}

// Accumulates the widest register built and every shot fired, so a run
// can report its true resource footprint.
struct ResourceUsage {
    std::size_t max_qubits = 0;
    std::uint64_t total_shots = 0;

    void observe_width(std::size_t q) {
        if (q > max_qubits)
            max_qubits = q;
    }
    void add_shots(std::uint64_t s) { total_shots += s; }
};

struct Statevector {
    unsigned qubits = 0;
    std::vector<cplx> amp;

    static Statevector zero(unsigned q) {
        if (q == 0 || q > kMaxQubits)
            throw capacity_error("register width " + std::to_string(q) +
                                 " outside the simulable range [1, " +
                                 std::to_string(kMaxQubits) + "]");
        Statevector s;
        s.qubits = q;
        s.amp.assign(std::size_t{1} << q, cplx(0.0, 0.0));
        s.amp[0] = 1.0;
        return s;
    }

    std::size_t size() const { return amp.size(); }

    double norm_sq() const {
        double t = 0.0;
        for (const cplx& a : amp)
            t += std::norm(a);
        return t;
    }
};

inline Statevector basis_state(unsigned q, std::uint64_t index) {
    Statevector s = Statevector::zero(q);
    if (index >= s.size())
        throw std::invalid_argument("basis index out of range");
    s.amp[0] = 0.0;
    s.amp[index] = 1.0;
    return s;
}

// Uniform single-excitation superposition |10..0> + |01..0> + ... over q qubits.
inline Statevector w_state(unsigned q) {
    Statevector s = Statevector::zero(q);
    s.amp[0] = 0.0;
    double a = 1.0 / std::sqrt(static_cast<double>(q));
    for (unsigned t = 0; t < q; ++t)
        s.amp[std::size_t{1} << t] = a;
    return s;
}

namespace detail {

inline void check_qubit(const Statevector& s, unsigned q) {
    if (q >= s.qubits)
        throw std::invalid_argument("qubit index out of range");
}

} // namespace detail

inline void apply_h(Statevector& s, unsigned q) {
    detail::check_qubit(s, q);
    const std::size_t bit = std::size_t{1} << q;
    const double inv = 0.70710678118654752440;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i & bit)
            continue;
        cplx a = s.amp[i];
        cplx b = s.amp[i | bit];
        s.amp[i] = (a + b) * inv;
        s.amp[i | bit] = (a - b) * inv;
    }
}

// S-dagger: |1> picks up phase -i.
inline void apply_sdg(Statevector& s, unsigned q) {
    detail::check_qubit(s, q);
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (i & bit)
            s.amp[i] *= cplx(0.0, -1.0);
}

inline void apply_x(Statevector& s, unsigned q) {
    detail::check_qubit(s, q);
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!(i & bit))
            std::swap(s.amp[i], s.amp[i | bit]);
}

inline void apply_y(Statevector& s, unsigned q) {
    detail::check_qubit(s, q);
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!(i & bit)) {
            cplx a = s.amp[i];
            cplx b = s.amp[i | bit];
            s.amp[i] = cplx(0.0, -1.0) * b;
            s.amp[i | bit] = cplx(0.0, 1.0) * a;
        }
}

inline void apply_z(Statevector& s, unsigned q) {
    detail::check_qubit(s, q);
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (i & bit)
            s.amp[i] = -s.amp[i];
}

// Diagonal phase oracle over an index register. The phase table always
// spans the full padded register; slots past the encoded count are zero.
struct DiagonalOracle {
    unsigned index_qubits = 0;
    std::vector<double> phase; // length 2^index_qubits

    static DiagonalOracle padded(std::span<const double> phases, unsigned index_qubits) {
        std::size_t cap = std::size_t{1} << index_qubits;
        if (phases.size() > cap)
            throw std::invalid_argument("more phases than the index register can hold");
        DiagonalOracle o;
        o.index_qubits = index_qubits;
        o.phase.assign(cap, 0.0);
        for (std::size_t i = 0; i < phases.size(); ++i)
            o.phase[i] = phases[i];
        return o;
    }
};

// amp(control=1, index=m) *= exp(i phase[m]); index bits start at target_base.
inline void apply_controlled_diagonal(Statevector& s, const DiagonalOracle& o,
                                      unsigned control, unsigned target_base = 0) {
    detail::check_qubit(s, control);
    if (target_base + o.index_qubits > s.qubits)
        throw std::invalid_argument("oracle does not fit the register");
    if (control >= target_base && control < target_base + o.index_qubits)
        throw std::invalid_argument("control qubit overlaps the index register");
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t mask = (std::size_t{1} << o.index_qubits) - 1;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(i & cbit))
            continue;
        std::size_t m = (i >> target_base) & mask;
        double ph = o.phase[m];
        if (ph != 0.0)
            s.amp[i] *= cplx(std::cos(ph), std::sin(ph));
    }
}

// amp[b] *= exp(-i gamma E_b) over the whole register.
inline void apply_cost_phase(Statevector& s, std::span<const double> energies,
                             double gamma) {
    if (energies.size() != s.size())
        throw std::invalid_argument("energy table does not match the register");
    for (std::size_t i = 0; i < s.size(); ++i) {
        double ph = -gamma * energies[i];
        s.amp[i] *= cplx(std::cos(ph), std::sin(ph));
    }
}

// exp(-i beta (XX + YY)) on qubits (a, b): rotates the {|01>, |10>}
// subspace by [[cos 2b, -i sin 2b], [-i sin 2b, cos 2b]], identity on
// {|00>, |11>}. Hamming weight is preserved exactly.
inline void apply_xy_pair(Statevector& s, unsigned a, unsigned b, double beta) {
    detail::check_qubit(s, a);
    detail::check_qubit(s, b);
    if (a == b)
        throw std::invalid_argument("pair qubits must differ");
    const std::size_t abit = std::size_t{1} << a;
    const std::size_t bbit = std::size_t{1} << b;
    const double c = std::cos(2.0 * beta);
    const cplx is(0.0, -std::sin(2.0 * beta));
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((i & abit) || !(i & bbit))
            continue; // enumerate each {01,10} pair once, from the a=0,b=1 member
        std::size_t j = (i | abit) & ~bbit;
        cplx u = s.amp[i];
        cplx v = s.amp[j];
        s.amp[i] = c * u + is * v;
        s.amp[j] = is * u + c * v;
    }
}

inline double prob_one(const Statevector& s, unsigned q) {
    detail::check_qubit(s, q);
    const std::size_t bit = std::size_t{1} << q;
    double p = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (i & bit)
            p += std::norm(s.amp[i]);
    return p;
}

// <Z> on one qubit: P(0) - P(1).
inline double expectation_z(const Statevector& s, unsigned q) {
    return 1.0 - 2.0 * prob_one(s, q);
}

// Depolarizing-style insertion: each touched qubit independently gets a
// uniformly random Pauli with probability p.
inline void apply_pauli_noise(Statevector& s, std::span<const unsigned> touched,
                              double p, RngStream& rng) {
    if (p <= 0.0)
        return;
    for (unsigned q : touched) {
        if (!rng.bernoulli(p))
            continue;
        switch (rng.index(3)) {
        case 0: apply_x(s, q); break;
        case 1: apply_y(s, q); break;
        default: apply_z(s, q); break;
        }
    }
}

// Ideal gate followed by the Pauli channel on the qubits it touched.
template <typename Gate>
void apply_noisy_gate(Statevector& s, Gate&& gate, std::span<const unsigned> touched,
                      double p, RngStream* rng) {
    gate(s);
    if (rng != nullptr && p > 0.0)
        apply_pauli_noise(s, touched, p, *rng);
}

struct ShotResult {
    unsigned qubits = 0;
    std::uint64_t shots = 0;
    std::map<std::uint64_t, std::uint64_t> counts;
};

inline std::string to_bitstring(std::uint64_t index, unsigned qubits) {
    std::string s(qubits, '0');
    for (unsigned q = 0; q < qubits; ++q)
        if (index & (std::uint64_t{1} << q))
            s[qubits - 1 - q] = '1';
    return s;
}

// Multinomial sampling of computational-basis outcomes. Gate noise, when
// wanted, must already be in the state (trajectory built upstream);
// only readout flips are applied here.
inline ShotResult sample_shots(const Statevector& s, std::uint64_t shots,
                               const NoiseModel* noise, RngStream& rng) {
    ShotResult r;
    r.qubits = s.qubits;
    r.shots = shots;
    std::vector<double> cum(s.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        acc += std::norm(s.amp[i]);
        cum[i] = acc;
    }
    if (!(acc > 0.0))
        throw std::invalid_argument("cannot sample from a zero state");
    const double pro = noise != nullptr ? noise->p_readout : 0.0;
    for (std::uint64_t t = 0; t < shots; ++t) {
        double u = rng.uniform() * acc;
        std::size_t lo = 0, hi = s.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cum[mid] > u)
                hi = mid;
            else
                lo = mid + 1;
        }
        std::uint64_t out = lo;
        if (pro > 0.0)
            for (unsigned q = 0; q < s.qubits; ++q)
                if (rng.bernoulli(pro))
                    out ^= std::uint64_t{1} << q;
        ++r.counts[out];
    }
    return r;
}

} // namespace qckm

#endif
