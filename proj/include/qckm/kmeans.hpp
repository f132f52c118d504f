#ifndef QCKM_KMEANS_HPP
#define QCKM_KMEANS_HPP

// Plain Lloyd iterations with distance-weighted seeding. Used both as
// the classical reference baseline and, with a small iteration cap, to
// seed the quantum pipeline.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace qckm {

struct LloydConfig {
    std::size_t restarts = 5;
    std::size_t max_iter = 100;
};

struct LloydResult {
    Centroids centroids;
    std::vector<std::size_t> assignment;
    double sse = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

// Distance-weighted seeding: each next seed is drawn with probability
// proportional to the squared distance to the nearest seed so far.
// Duplicate points carry zero weight, so seeds stay distinct as long as
// distinct points remain; a fully-degenerate remainder falls back to the
// first unchosen index.
inline Centroids seed_plus_plus(const Dataset& data, std::size_t k, RngStream& rng) {
    Centroids c = Centroids::with_shape(k, data.dim);
    std::vector<bool> chosen(data.n, false);
    std::vector<double> dist(data.n, std::numeric_limits<double>::infinity());

    std::size_t first = rng.index(data.n);
    chosen[first] = true;
    for (std::size_t j = 0; j < data.dim; ++j)
        c.at(0, j) = data.at(first, j);

    for (std::size_t g = 1; g < k; ++g) {
        double total = 0.0;
        for (std::size_t i = 0; i < data.n; ++i) {
            double d = squared_distance(data.row(i), c.row(g - 1));
            if (d < dist[i])
                dist[i] = d;
            total += chosen[i] ? 0.0 : dist[i];
        }
        std::size_t pick = data.n;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < data.n; ++i) {
                if (chosen[i])
                    continue;
                acc += dist[i];
                if (acc > u) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == data.n)
            for (std::size_t i = 0; i < data.n; ++i)
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
        chosen[pick] = true;
        for (std::size_t j = 0; j < data.dim; ++j)
            c.at(g, j) = data.at(pick, j);
    }
    return c;
}

inline LloydResult lloyd_once(const Dataset& data, std::size_t k,
                              const LloydConfig& cfg, RngStream& rng) {
    LloydResult r;
    r.centroids = seed_plus_plus(data, k, rng);
    r.assignment = assign_nearest(data, r.centroids);
    for (std::size_t it = 0; it < cfg.max_iter; ++it) {
        ++r.iterations;
        Centroids next = r.centroids; // empty clusters keep their centroid
        std::vector<std::size_t> count(k, 0);
        std::vector<double> sum(k * data.dim, 0.0);
        for (std::size_t i = 0; i < data.n; ++i) {
            std::size_t g = r.assignment[i];
            ++count[g];
            for (std::size_t j = 0; j < data.dim; ++j)
                sum[g * data.dim + j] += data.at(i, j);
        }
        for (std::size_t g = 0; g < k; ++g)
            if (count[g] > 0)
                for (std::size_t j = 0; j < data.dim; ++j)
                    next.at(g, j) = sum[g * data.dim + j] / static_cast<double>(count[g]);
        std::vector<std::size_t> na = assign_nearest(data, next);
        bool same = na == r.assignment;
        r.centroids = std::move(next);
        r.assignment = std::move(na);
        if (same)
            break;
    }
    r.sse = sse(data, r.centroids, r.assignment);
    return r;
}

} // namespace detail

inline LloydResult lloyd_kmeans(const Dataset& data, std::size_t k,
                                const LloydConfig& cfg, RngSpec rng) {
    validate(data);
    if (k == 0 || k > data.n)
        throw std::invalid_argument("cluster count must lie in [1, n]");
    if (cfg.restarts == 0)
        throw std::invalid_argument("need at least one restart");
    LloydResult best;
    best.sse = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < cfg.restarts; ++t) {
        RngStream stream(rng, StreamLabel::seeding, t);
        LloydResult r = detail::lloyd_once(data, k, cfg, stream);
        if (r.sse < best.sse)
            best = std::move(r);
    }
    return best;
}

} // namespace qckm

#endif
