#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <qckm/datasets.hpp>
#include <qckm/kmeans.hpp>
#include <qckm/pipeline.hpp>

using namespace qckm;

namespace {

Dataset three_blobs(std::size_t n, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.family = Family::blobs;
    spec.n = n;
    spec.blobs = 3;
    spec.blob_spread = 0.4;
    spec.box = 3.0;
    spec.seed = seed;
    return generate(spec);
}

} // namespace

TEST_CASE("register peak combines ring and index widths", "[pipeline]") {
    REQUIRE(q_peak(6, 256) == 9);  // 8-qubit index + ancilla beats the ring
    REQUIRE(q_peak(6, 4) == 6);    // ring dominates a 3-qubit test circuit
    REQUIRE(q_peak(12, 256) == 12);
    REQUIRE(q_peak(2, 2) == 2);
}

TEST_CASE("lloyd baseline improves sse and fills every cluster", "[pipeline]") {
    Dataset d = three_blobs(120, 3);
    LloydConfig cfg;
    LloydResult res = lloyd_kmeans(d, 3, cfg, RngSpec{1});
    REQUIRE(res.centroids.k == 3);
    REQUIRE(res.assignment.size() == 120);

    // against a single random-centroid strawman
    Centroids random = Centroids::with_shape(3, 2);
    RngStream rng(RngSpec{2}, StreamLabel::seeding);
    for (double& v : random.values)
        v = rng.normal();
    auto ra = assign_nearest(d, random);
    REQUIRE(res.sse <= sse(d, random, ra));

    // converged means: each centroid equals its member mean
    for (std::size_t g = 0; g < 3; ++g) {
        double mx = 0.0, my = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < d.n; ++i)
            if (res.assignment[i] == g) {
                mx += d.at(i, 0);
                my += d.at(i, 1);
                ++count;
            }
        REQUIRE(count > 0);
        REQUIRE_THAT(res.centroids.at(g, 0),
                     Catch::Matchers::WithinAbs(mx / static_cast<double>(count), 1e-9));
        REQUIRE_THAT(res.centroids.at(g, 1),
                     Catch::Matchers::WithinAbs(my / static_cast<double>(count), 1e-9));
    }
}

TEST_CASE("candidate generation keeps the incumbent in slot zero", "[pipeline]") {
    Centroids c = Centroids::with_shape(2, 2);
    c.at(0, 0) = 1.0;
    c.at(0, 1) = -1.0;
    c.at(1, 0) = 0.5;
    c.at(1, 1) = 2.0;
    RngStream wrng(RngSpec{4}, StreamLabel::frequencies);
    FrequencyMatrix w = sample_frequencies(5, 2, 1.0, wrng);

    CandidateSet cs = generate_candidates(c, 4, 0.3, w, true, RngSpec{5}, 2);
    REQUIRE(cs.groups() == 2);
    REQUIRE(cs.total() == 8);
    for (std::size_t g = 0; g < 2; ++g) {
        auto elite = cs.centroid(g, 0);
        REQUIRE(elite[0] == c.at(g, 0));
        REQUIRE(elite[1] == c.at(g, 1));
        for (std::size_t r = 1; r < 4; ++r) {
            auto cand = cs.centroid(g, r);
            REQUIRE((cand[0] != c.at(g, 0) || cand[1] != c.at(g, 1)));
        }
        // stored features match the stored centroids
        for (std::size_t r = 0; r < 4; ++r) {
            auto phi = feature_map(cs.centroid(g, r), w);
            for (std::size_t j = 0; j < w.m; ++j)
                REQUIRE_THAT(std::abs(cs.feature(g, r)[j] - phi[j]),
                             Catch::Matchers::WithinAbs(0.0, 1e-12));
        }
    }

    // without the elite flag every slot is jittered
    CandidateSet free = generate_candidates(c, 4, 0.3, w, false, RngSpec{5}, 2);
    REQUIRE((free.centroid(0, 0)[0] != c.at(0, 0) || free.centroid(0, 0)[1] != c.at(0, 1)));

    // deterministic in (seed, salt, group)
    CandidateSet rep = generate_candidates(c, 4, 0.3, w, true, RngSpec{5}, 2);
    REQUIRE(rep.centroids == cs.centroids);
    CandidateSet other = generate_candidates(c, 4, 0.3, w, true, RngSpec{5}, 3);
    REQUIRE(other.centroids != cs.centroids);
}

TEST_CASE("surrogate cost measures sketch distance of the picks", "[pipeline]") {
    Centroids c = Centroids::with_shape(2, 2);
    c.at(0, 0) = -0.4;
    c.at(1, 1) = 0.8;
    RngStream wrng(RngSpec{6}, StreamLabel::frequencies);
    FrequencyMatrix w = sample_frequencies(3, 2, 1.0, wrng);
    CandidateSet cs = generate_candidates(c, 3, 0.5, w, false, RngSpec{7}, 0);

    std::vector<Sketch> targets(2);
    RngStream trng(RngSpec{8}, StreamLabel::synthesis);
    for (Sketch& t : targets) {
        t.z.resize(3);
        for (auto& v : t.z)
            v = cplx(trng.normal(), trng.normal());
    }
    std::vector<std::size_t> picks = {2, 1};
    auto f = surrogate_cost(picks, targets, cs);
    for (std::size_t g = 0; g < 2; ++g) {
        double direct = 0.0;
        for (std::size_t j = 0; j < 3; ++j)
            direct += std::norm(cs.feature(g, picks[g])[j] - targets[g].z[j]);
        REQUIRE_THAT(f[g], Catch::Matchers::WithinAbs(direct, 1e-12));
    }
}

TEST_CASE("config validation fails fast on capacity breaches", "[pipeline]") {
    Dataset d = three_blobs(60, 9);
    PipelineConfig cfg;
    cfg.k = 10;
    cfg.candidates = 6;
    cfg.formulation = Formulation::coupled;
    cfg.solver = SolverMode::qaoa;
    REQUIRE_THROWS_AS(run_qc_kmeans(d, cfg, RngSpec{1}), capacity_error);

    cfg.solver = SolverMode::exhaustive;
    REQUIRE_THROWS_AS(run_qc_kmeans(d, cfg, RngSpec{1}), capacity_error);

    PipelineConfig bad;
    bad.k = 0;
    REQUIRE_THROWS_AS(validate(bad, d), std::invalid_argument);
    PipelineConfig shots;
    shots.qff_shots = 0;
    REQUIRE_THROWS_AS(validate(shots, d), std::invalid_argument);
}

TEST_CASE("exact exhaustive pipeline clusters blobs sensibly", "[pipeline]") {
    Dataset d = three_blobs(150, 10);
    PipelineConfig cfg;
    cfg.k = 3;
    cfg.candidates = 4;
    cfg.sketch = SketchMode::exact;
    cfg.solver = SolverMode::exhaustive;
    cfg.refine = 4;
    ClusteringResult res = run_qc_kmeans(d, cfg, RngSpec{11});

    REQUIRE(res.assignment.size() == d.n);
    REQUIRE(res.centroids.k == 3);
    REQUIRE(res.m == 4 * 3 * 2);
    REQUIRE(res.total_shots == 0);   // nothing sampled
    REQUIRE(res.q_peak == 0);        // no circuits built
    REQUIRE(res.iterations >= 1);
    REQUIRE(res.iterations <= 5);
    REQUIRE(res.sse > 0.0);

    // competitive with lloyd on easy blobs, within a loose factor
    LloydResult lr = lloyd_kmeans(d, 3, LloydConfig{}, RngSpec{11});
    REQUIRE(res.sse <= 3.0 * lr.sse);

    // centroids land inside the data's bounding box, in original units
    double lo = 1e300, hi = -1e300;
    for (double v : d.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : res.centroids.values) {
        REQUIRE(v >= lo - 1.0);
        REQUIRE(v <= hi + 1.0);
    }
}

TEST_CASE("estimated analytic pipeline is reproducible", "[pipeline]") {
    Dataset d = three_blobs(80, 12);
    PipelineConfig cfg;
    cfg.k = 2;
    cfg.candidates = 3;
    cfg.m = 8;
    cfg.subsample = 16;
    cfg.analytic = true;
    cfg.refine = 2;
    ClusteringResult a = run_qc_kmeans(d, cfg, RngSpec{13});
    ClusteringResult b = run_qc_kmeans(d, cfg, RngSpec{13});
    REQUIRE(a.sse == b.sse);
    REQUIRE(a.centroids.values == b.centroids.values);
    REQUIRE(a.total_shots == 0); // analytic mode never samples
    REQUIRE(a.q_peak == q_peak(3, 16));

    ClusteringResult c = run_qc_kmeans(d, cfg, RngSpec{14});
    REQUIRE(a.centroids.values != c.centroids.values);
}

TEST_CASE("sampled pipeline counts its shots and registers", "[pipeline]") {
    Dataset d = three_blobs(60, 15);
    PipelineConfig cfg;
    cfg.k = 2;
    cfg.candidates = 3;
    cfg.m = 6;
    cfg.subsample = 16;
    cfg.qff_shots = 32;
    cfg.qaoa_shots = 496; // 4 shots per evaluation
    cfg.refine = 1;
    ClusteringResult res = run_qc_kmeans(d, cfg, RngSpec{16});
    REQUIRE(res.total_shots > 0);
    REQUIRE(res.q_peak == q_peak(3, 16)); // index register wins: 5 qubits
    REQUIRE(res.observed_qubits == res.q_peak);
    REQUIRE(res.seconds > 0.0);
    REQUIRE(res.trace.size() == res.iterations);
}

TEST_CASE("refinement never lets the solver regress past the incumbent", "[pipeline]") {
    // with exact sketches and exhaustive selection, the chosen candidate
    // can only match or beat slot 0, which replays the previous centroid
    Dataset d = three_blobs(100, 17);
    PipelineConfig cfg;
    cfg.k = 3;
    cfg.candidates = 4;
    cfg.sketch = SketchMode::exact;
    cfg.solver = SolverMode::exhaustive;
    cfg.refine = 4;
    ClusteringResult res = run_qc_kmeans(d, cfg, RngSpec{18});
    bool saw_elite = false;
    for (const IterationRecord& it : res.trace)
        for (const GroupRecord& g : it.groups) {
            if (!g.solved || !g.elite_present)
                continue;
            saw_elite = true;
            REQUIRE(g.surrogate <= g.surrogate_elite + 1e-9);
            REQUIRE(g.delta == 0.0);
        }
    REQUIRE(saw_elite);
}

TEST_CASE("movement threshold stops the refinement loop", "[pipeline]") {
    Dataset d = three_blobs(90, 19);
    PipelineConfig cfg;
    cfg.k = 3;
    cfg.candidates = 3;
    cfg.sketch = SketchMode::exact;
    cfg.solver = SolverMode::exhaustive;
    cfg.refine = 30;
    cfg.tau = 1e9; // absurd threshold: stop at the first refinement step
    ClusteringResult res = run_qc_kmeans(d, cfg, RngSpec{20});
    REQUIRE(res.iterations == 2);
    REQUIRE(res.trace.back().movement <= 1e9);
}

TEST_CASE("coupled formulation solves one joint problem per iteration", "[pipeline]") {
    Dataset d = three_blobs(60, 21);
    PipelineConfig cfg;
    cfg.k = 2;
    cfg.candidates = 3;
    cfg.m = 6;
    cfg.subsample = 16;
    cfg.analytic = true;
    cfg.formulation = Formulation::coupled;
    cfg.refine = 2;
    ClusteringResult res = run_qc_kmeans(d, cfg, RngSpec{22});
    REQUIRE(res.sse > 0.0);
    for (const IterationRecord& it : res.trace) {
        REQUIRE(it.coupled);
        REQUIRE(it.joint_fit >= 0.0);
        REQUIRE(it.joint_delta >= -1e-12);
    }
    // joint register: k * D = 6 qubits, narrower than the 5-qubit index
    REQUIRE(res.q_peak == 6);
}
