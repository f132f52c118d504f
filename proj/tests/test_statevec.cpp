#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <qckm/statevec.hpp>

using namespace qckm;

namespace {

using Mat4 = std::array<cplx, 16>;

Mat4 mat_mul(const Mat4& a, const Mat4& b) {
    Mat4 c{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            cplx acc = 0.0;
            for (int t = 0; t < 4; ++t)
                acc += a[i * 4 + t] * b[t * 4 + j];
            c[i * 4 + j] = acc;
        }
    return c;
}

// exp(A) by scaling-and-squaring over a plain Taylor series; good to
// ~1e-14 for the small norms used here.
Mat4 mat_exp(Mat4 a) {
    int s = 6;
    double scale = 1.0 / static_cast<double>(1 << s);
    for (cplx& v : a)
        v *= scale;
    Mat4 result{};
    for (int i = 0; i < 4; ++i)
        result[i * 4 + i] = 1.0;
    Mat4 term = result;
    for (int k = 1; k <= 20; ++k) {
        term = mat_mul(term, a);
        for (cplx& v : term)
            v /= static_cast<double>(k);
        for (int i = 0; i < 16; ++i)
            result[i] += term[i];
    }
    for (int i = 0; i < s; ++i)
        result = mat_mul(result, result);
    return result;
}

// XX + YY on two qubits, basis order |00>,|01>,|10>,|11> with qubit 0 the
// low bit: nonzero only between |01> and |10>, each entry 2.
Mat4 xx_plus_yy() {
    Mat4 h{};
    h[1 * 4 + 2] = 2.0;
    h[2 * 4 + 1] = 2.0;
    return h;
}

Statevector random_state(unsigned qubits, std::uint64_t seed) {
    Statevector s = Statevector::zero(qubits);
    RngStream rng(RngSpec{seed}, StreamLabel::synthesis);
    double norm = 0.0;
    for (auto& a : s.amp) {
        a = cplx(rng.normal(), rng.normal());
        norm += std::norm(a);
    }
    norm = std::sqrt(norm);
    for (auto& a : s.amp)
        a /= norm;
    return s;
}

unsigned popcount64(std::uint64_t v) {
    unsigned c = 0;
    while (v) {
        c += v & 1;
        v >>= 1;
    }
    return c;
}

} // namespace

TEST_CASE("state construction and capacity limits", "[statevec]") {
    Statevector s = Statevector::zero(3);
    REQUIRE(s.size() == 8);
    REQUIRE(s.amp[0] == cplx(1.0, 0.0));
    REQUIRE_THAT(s.norm_sq(), Catch::Matchers::WithinAbs(1.0, 1e-14));
    REQUIRE_THROWS_AS(Statevector::zero(0), capacity_error);
    REQUIRE_THROWS_AS(Statevector::zero(kMaxQubits + 1), capacity_error);

    Statevector b = basis_state(3, 5);
    REQUIRE(b.amp[5] == cplx(1.0, 0.0));
    REQUIRE_THROWS_AS(basis_state(2, 4), std::invalid_argument);
}

TEST_CASE("w state is uniform over single excitations", "[statevec]") {
    Statevector s = w_state(4);
    REQUIRE_THAT(s.norm_sq(), Catch::Matchers::WithinAbs(1.0, 1e-14));
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (popcount64(i) == 1)
            REQUIRE_THAT(std::abs(s.amp[i]), Catch::Matchers::WithinAbs(0.5, 1e-14));
        else
            REQUIRE(std::abs(s.amp[i]) == 0.0);
    }
}

TEST_CASE("single-qubit gates match their matrices", "[statevec]") {
    // H|0> then H again returns |0>
    Statevector s = Statevector::zero(2);
    apply_h(s, 1);
    REQUIRE_THAT(std::abs(s.amp[0]), Catch::Matchers::WithinAbs(std::sqrt(0.5), 1e-14));
    REQUIRE_THAT(std::abs(s.amp[2]), Catch::Matchers::WithinAbs(std::sqrt(0.5), 1e-14));
    apply_h(s, 1);
    REQUIRE_THAT(std::abs(s.amp[0]), Catch::Matchers::WithinAbs(1.0, 1e-14));

    // Y|0> = i|1>, Y|1> = -i|0>
    Statevector y0 = Statevector::zero(1);
    apply_y(y0, 0);
    REQUIRE_THAT(std::abs(y0.amp[1] - cplx(0.0, 1.0)), Catch::Matchers::WithinAbs(0.0, 1e-14));
    apply_y(y0, 0);
    // Y^2 = I up to no global phase here: Y(i|1>) = i * (-i)|0> = |0>
    REQUIRE_THAT(std::abs(y0.amp[0] - cplx(1.0, 0.0)), Catch::Matchers::WithinAbs(0.0, 1e-14));

    // Sdg twice equals Z
    Statevector a = random_state(2, 17);
    Statevector b = a;
    apply_sdg(a, 0);
    apply_sdg(a, 0);
    apply_z(b, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        REQUIRE_THAT(std::abs(a.amp[i] - b.amp[i]), Catch::Matchers::WithinAbs(0.0, 1e-14));

    // X swaps
    Statevector x = basis_state(2, 0b01);
    apply_x(x, 1);
    REQUIRE(std::abs(x.amp[0b11]) == 1.0);
}

TEST_CASE("controlled diagonal phases only the control-one branch", "[statevec]") {
    std::vector<double> phases = {0.3, -1.2, 2.5, 0.9};
    DiagonalOracle o = DiagonalOracle::padded(phases, 2);
    Statevector s = random_state(3, 23); // qubits 0,1 index, qubit 2 control
    Statevector before = s;
    apply_controlled_diagonal(s, o, 2, 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        cplx expect = before.amp[i];
        if (i & 4u) {
            double ph = phases[i & 3u];
            expect *= cplx(std::cos(ph), std::sin(ph));
        }
        REQUIRE_THAT(std::abs(s.amp[i] - expect), Catch::Matchers::WithinAbs(0.0, 1e-14));
    }

    REQUIRE_THROWS_AS(apply_controlled_diagonal(s, o, 1, 0), std::invalid_argument);
    std::vector<double> too_many(5, 0.0);
    REQUIRE_THROWS_AS(DiagonalOracle::padded(too_many, 2), std::invalid_argument);
}

TEST_CASE("oracle padding slots carry zero phase", "[statevec]") {
    std::vector<double> phases = {1.0, 2.0, 3.0}; // B=3 into M=4
    DiagonalOracle o = DiagonalOracle::padded(phases, 2);
    REQUIRE(o.phase.size() == 4);
    REQUIRE(o.phase[3] == 0.0);
}

TEST_CASE("cost phase multiplies basis amplitudes elementwise", "[statevec]") {
    Statevector s = random_state(3, 31);
    Statevector before = s;
    std::vector<double> e(8);
    for (int i = 0; i < 8; ++i)
        e[i] = 0.37 * i - 1.1;
    apply_cost_phase(s, e, 0.77);
    for (std::size_t i = 0; i < 8; ++i) {
        cplx expect = before.amp[i] * std::exp(cplx(0.0, -0.77 * e[i]));
        REQUIRE_THAT(std::abs(s.amp[i] - expect), Catch::Matchers::WithinAbs(0.0, 1e-14));
    }
}

TEST_CASE("xy pair gate equals the matrix exponential", "[statevec]") {
    // exact 4x4 reference on two qubits
    for (double beta : {0.0, 0.2, -0.9, 1.4}) {
        Mat4 h = xx_plus_yy();
        for (cplx& v : h)
            v *= cplx(0.0, -beta);
        Mat4 u = mat_exp(h);

        Statevector s = random_state(2, 41);
        std::array<cplx, 4> in = {s.amp[0], s.amp[1], s.amp[2], s.amp[3]};
        apply_xy_pair(s, 0, 1, beta);
        for (int i = 0; i < 4; ++i) {
            cplx expect = 0.0;
            for (int j = 0; j < 4; ++j)
                expect += u[i * 4 + j] * in[j];
            REQUIRE_THAT(std::abs(s.amp[i] - expect),
                         Catch::Matchers::WithinAbs(0.0, 1e-12));
        }
    }
}

TEST_CASE("xy pair acts on the chosen qubits inside a register", "[statevec]") {
    // embed in 4 qubits on (1, 3); oracle by applying the 2-qubit version
    // to the extracted pair amplitudes
    Statevector s = random_state(4, 43);
    Statevector ref = s;
    double beta = 0.63;
    apply_xy_pair(s, 1, 3, beta);
    double c = std::cos(2.0 * beta);
    cplx is(0.0, -std::sin(2.0 * beta));
    for (std::size_t base = 0; base < 16; ++base) {
        if ((base & 0b0010u) || (base & 0b1000u))
            continue;
        std::size_t i01 = base | 0b1000u; // qubit3=1, qubit1=0
        std::size_t i10 = base | 0b0010u;
        cplx u = ref.amp[i10];
        cplx v = ref.amp[i01];
        REQUIRE_THAT(std::abs(s.amp[i10] - (c * u + is * v)),
                     Catch::Matchers::WithinAbs(0.0, 1e-13));
        REQUIRE_THAT(std::abs(s.amp[i01] - (is * u + c * v)),
                     Catch::Matchers::WithinAbs(0.0, 1e-13));
        REQUIRE(s.amp[base] == ref.amp[base]);
        REQUIRE(s.amp[base | 0b1010u] == ref.amp[base | 0b1010u]);
    }
}

TEST_CASE("xy pair preserves hamming weight sectors", "[statevec]") {
    Statevector s = Statevector::zero(4);
    s.amp[0] = 0.0;
    s.amp[0b0001] = std::sqrt(0.5); // weight-1 support only
    s.amp[0b0100] = std::sqrt(0.5);
    for (auto [a, b] : {std::pair<unsigned, unsigned>{0, 1}, {1, 2}, {2, 3}, {3, 0}})
        apply_xy_pair(s, a, b, 0.4);
    for (std::size_t i = 0; i < s.size(); ++i)
        if (popcount64(i) != 1)
            REQUIRE_THAT(std::abs(s.amp[i]), Catch::Matchers::WithinAbs(0.0, 1e-14));
    REQUIRE_THAT(s.norm_sq(), Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("probabilities and z expectation agree with direct sums", "[statevec]") {
    Statevector s = random_state(3, 53);
    for (unsigned q = 0; q < 3; ++q) {
        double p = 0.0;
        for (std::size_t i = 0; i < 8; ++i)
            if (i & (1u << q))
                p += std::norm(s.amp[i]);
        REQUIRE_THAT(prob_one(s, q), Catch::Matchers::WithinAbs(p, 1e-14));
        REQUIRE_THAT(expectation_z(s, q), Catch::Matchers::WithinAbs(1.0 - 2.0 * p, 1e-14));
    }
}

TEST_CASE("pauli noise preserves the norm and respects p", "[statevec]") {
    Statevector s = random_state(3, 59);
    Statevector before = s;
    RngStream rng(RngSpec{5}, StreamLabel::shots);
    std::vector<unsigned> touched = {0, 1, 2};

    apply_pauli_noise(s, touched, 0.0, rng);
    for (std::size_t i = 0; i < s.size(); ++i)
        REQUIRE(s.amp[i] == before.amp[i]);

    apply_pauli_noise(s, touched, 1.0, rng);
    REQUIRE_THAT(s.norm_sq(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    bool changed = false;
    for (std::size_t i = 0; i < s.size(); ++i)
        changed = changed || std::abs(s.amp[i] - before.amp[i]) > 1e-9;
    REQUIRE(changed);
}

TEST_CASE("bitstring rendering puts qubit zero rightmost", "[statevec]") {
    REQUIRE(to_bitstring(0b101, 3) == "101");
    REQUIRE(to_bitstring(0b001, 3) == "001");
    REQUIRE(to_bitstring(0, 2) == "00");
}

TEST_CASE("shot sampling tracks the distribution and readout noise", "[statevec]") {
    Statevector s = Statevector::zero(2);
    apply_h(s, 0); // uniform over {00, 01}
    RngStream rng(RngSpec{77}, StreamLabel::shots);
    ShotResult r = sample_shots(s, 20000, nullptr, rng);
    REQUIRE(r.counts.size() == 2);
    double f0 = static_cast<double>(r.counts[0]) / 20000.0;
    REQUIRE(std::abs(f0 - 0.5) < 5.0 * std::sqrt(0.25 / 20000.0));

    // certain readout flip maps |00> to 11 deterministically
    Statevector z = Statevector::zero(2);
    NoiseModel nm;
    nm.p_readout = 1.0;
    ShotResult rf = sample_shots(z, 100, &nm, rng);
    REQUIRE(rf.counts.size() == 1);
    REQUIRE(rf.counts.begin()->first == 0b11u);

    // deterministic given the stream
    RngStream r1(RngSpec{8}, StreamLabel::shots);
    RngStream r2(RngSpec{8}, StreamLabel::shots);
    ShotResult a = sample_shots(s, 500, nullptr, r1);
    ShotResult b = sample_shots(s, 500, nullptr, r2);
    REQUIRE(a.counts == b.counts);
}

TEST_CASE("resource usage accumulates widths and shots", "[statevec]") {
    ResourceUsage u;
    u.observe_width(3);
    u.observe_width(9);
    u.observe_width(5);
    u.add_shots(100);
    u.add_shots(23);
    REQUIRE(u.max_qubits == 9);
    REQUIRE(u.total_shots == 123);
}
