#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include <qckm/core.hpp>

using namespace qckm;

TEST_CASE("dataset validation rejects bad shapes and values", "[core]") {
    Dataset d = Dataset::with_shape(2, 2);
    REQUIRE_NOTHROW(validate(d));

    Dataset empty;
    REQUIRE_THROWS_AS(validate(empty), std::invalid_argument);

    Dataset ragged = Dataset::with_shape(2, 2);
    ragged.values.pop_back();
    REQUIRE_THROWS_AS(validate(ragged), std::invalid_argument);

    Dataset nan = Dataset::with_shape(2, 2);
    nan.at(1, 1) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(validate(nan), std::invalid_argument);
}

TEST_CASE("dataset rows alias the flat buffer", "[core]") {
    Dataset d = Dataset::with_shape(3, 2);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            d.at(i, j) = 10.0 * static_cast<double>(i) + static_cast<double>(j);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            REQUIRE(d.row(i)[j] == d.at(i, j));
}

TEST_CASE("standardizer matches population moments", "[core]") {
    Dataset d = Dataset::with_shape(4, 2);
    double col0[] = {1.0, 2.0, 3.0, 6.0};
    for (std::size_t i = 0; i < 4; ++i) {
        d.at(i, 0) = col0[i];
        d.at(i, 1) = 5.0; // constant column
    }
    auto [sd, tr] = standardize(d);

    double mean = (1.0 + 2.0 + 3.0 + 6.0) / 4.0;
    double var = 0.0;
    for (double v : col0)
        var += (v - mean) * (v - mean);
    var /= 4.0; // population variance
    REQUIRE_THAT(tr.mean[0], Catch::Matchers::WithinAbs(mean, 1e-12));
    REQUIRE_THAT(tr.scale[0], Catch::Matchers::WithinAbs(std::sqrt(var), 1e-12));

    // constant column passes through untouched up to centering
    REQUIRE(tr.scale[1] == 1.0);
    for (std::size_t i = 0; i < 4; ++i)
        REQUIRE_THAT(sd.at(i, 1), Catch::Matchers::WithinAbs(0.0, 1e-12));

    // standardized column has mean 0, population variance 1
    double m0 = 0.0, v0 = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        m0 += sd.at(i, 0);
    m0 /= 4.0;
    for (std::size_t i = 0; i < 4; ++i)
        v0 += (sd.at(i, 0) - m0) * (sd.at(i, 0) - m0);
    v0 /= 4.0;
    REQUIRE_THAT(m0, Catch::Matchers::WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(v0, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("standardizer inversion round-trips centroids", "[core]") {
    Dataset d = Dataset::with_shape(5, 3);
    RngStream rng(RngSpec{7}, StreamLabel::synthesis);
    for (double& v : d.values)
        v = 3.0 * rng.normal() + 1.5;
    Standardizer tr = Standardizer::fit(d);

    Centroids c = Centroids::with_shape(2, 3);
    for (double& v : c.values)
        v = rng.normal();
    Centroids back = tr.invert(c);
    for (std::size_t g = 0; g < 2; ++g)
        for (std::size_t j = 0; j < 3; ++j)
            REQUIRE_THAT(back.at(g, j),
                         Catch::Matchers::WithinAbs(c.at(g, j) * tr.scale[j] + tr.mean[j],
                                                    1e-12));
}

TEST_CASE("frequency sampling is seeded and scales with sigma", "[core]") {
    RngStream a(RngSpec{11}, StreamLabel::frequencies);
    RngStream b(RngSpec{11}, StreamLabel::frequencies);
    FrequencyMatrix w1 = sample_frequencies(8, 3, 1.0, a);
    FrequencyMatrix w2 = sample_frequencies(8, 3, 2.0, b);
    for (std::size_t i = 0; i < w1.rows.size(); ++i)
        REQUIRE_THAT(w2.rows[i], Catch::Matchers::WithinAbs(2.0 * w1.rows[i], 1e-12));

    RngStream c(RngSpec{11}, StreamLabel::frequencies);
    FrequencyMatrix w3 = sample_frequencies(8, 3, 1.0, c);
    REQUIRE(w3.rows == w1.rows);
}

TEST_CASE("frequency sample moments match the target distribution", "[core]") {
    RngStream rng(RngSpec{5}, StreamLabel::frequencies);
    const double sigma = 1.7;
    FrequencyMatrix w = sample_frequencies(20000, 1, sigma, rng);
    double mean = 0.0, var = 0.0;
    for (double v : w.rows)
        mean += v;
    mean /= static_cast<double>(w.rows.size());
    for (double v : w.rows)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(w.rows.size());
    // 5 sigma of the sample-mean / sample-variance deviations
    REQUIRE(std::abs(mean) < 5.0 * sigma / std::sqrt(20000.0));
    REQUIRE(std::abs(var - sigma * sigma) <
            5.0 * sigma * sigma * std::sqrt(2.0 / 20000.0));
}

TEST_CASE("feature map has unit modulus and the right phases", "[core]") {
    FrequencyMatrix w;
    w.m = 2;
    w.dim = 2;
    w.rows = {0.5, -1.0, 2.0, 0.25};
    std::vector<double> x = {1.5, 4.0};
    auto phi = feature_map(x, w);
    REQUIRE(phi.size() == 2);
    double t0 = 0.5 * 1.5 + (-1.0) * 4.0;
    double t1 = 2.0 * 1.5 + 0.25 * 4.0;
    REQUIRE_THAT(std::abs(phi[0]), Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(std::abs(phi[1]), Catch::Matchers::WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(std::arg(phi[0]),
                 Catch::Matchers::WithinAbs(std::atan2(std::sin(t0), std::cos(t0)), 1e-12));
    REQUIRE_THAT(phi[1].real(), Catch::Matchers::WithinAbs(std::cos(t1), 1e-12));
    REQUIRE_THAT(phi[1].imag(), Catch::Matchers::WithinAbs(std::sin(t1), 1e-12));

    std::vector<double> bad = {1.0};
    REQUIRE_THROWS_AS(feature_map(bad, w), std::invalid_argument);
}

TEST_CASE("nearest assignment breaks ties toward the lower index", "[core]") {
    Dataset d = Dataset::with_shape(1, 1);
    d.at(0, 0) = 0.0;
    Centroids c = Centroids::with_shape(3, 1);
    c.at(0, 0) = 2.0;
    c.at(1, 0) = 1.0;
    c.at(2, 0) = -1.0; // same distance as centroid 1
    auto label = assign_nearest(d, c);
    REQUIRE(label[0] == 1);
}

TEST_CASE("sse matches a direct double loop", "[core]") {
    RngStream rng(RngSpec{3}, StreamLabel::synthesis);
    Dataset d = Dataset::with_shape(40, 3);
    for (double& v : d.values)
        v = rng.normal();
    Centroids c = Centroids::with_shape(4, 3);
    for (double& v : c.values)
        v = rng.normal();
    auto label = assign_nearest(d, c);

    double direct = 0.0;
    for (std::size_t i = 0; i < d.n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < c.k; ++g) {
            double acc = 0.0;
            for (std::size_t j = 0; j < 3; ++j) {
                double diff = d.at(i, j) - c.at(g, j);
                acc += diff * diff;
            }
            best = std::min(best, acc);
        }
        direct += best;
    }
    REQUIRE_THAT(sse(d, c, label), Catch::Matchers::WithinAbs(direct, 1e-9));
}

TEST_CASE("named rng streams are independent and reproducible", "[core]") {
    RngStream a(RngSpec{42}, StreamLabel::shots, 1, 2, 3);
    RngStream b(RngSpec{42}, StreamLabel::shots, 1, 2, 3);
    RngStream c(RngSpec{42}, StreamLabel::shots, 1, 2, 4);
    REQUIRE(a.next_u64() == b.next_u64());
    REQUIRE(a.next_u64() != c.next_u64());

    RngStream d(RngSpec{42}, StreamLabel::jitter, 1, 2, 3);
    RngStream e(RngSpec{42}, StreamLabel::shots, 1, 2, 3);
    REQUIRE(d.next_u64() != e.next_u64());
}

TEST_CASE("rng distributions stay in range", "[core]") {
    RngStream rng(RngSpec{9}, StreamLabel::synthesis);
    for (int i = 0; i < 1000; ++i) {
        double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        std::size_t ix = rng.index(7);
        REQUIRE(ix < 7);
    }
    int ones = 0;
    for (int i = 0; i < 2000; ++i)
        ones += rng.bernoulli(0.25) ? 1 : 0;
    REQUIRE(ones > 2000 * 0.25 - 5.0 * std::sqrt(2000 * 0.25 * 0.75));
    REQUIRE(ones < 2000 * 0.25 + 5.0 * std::sqrt(2000 * 0.25 * 0.75));
}
