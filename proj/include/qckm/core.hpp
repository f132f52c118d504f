#ifndef QCKM_CORE_HPP
#define QCKM_CORE_HPP

// Data handling and the Fourier feature map shared by the whole pipeline.

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace qckm {

using cplx = std::complex<double>;

// Widest register the dense statevector simulator will allocate.
inline constexpr unsigned kMaxQubits = 20;

// A requested problem size exceeds a simulation cap (register width,
// enumeration count). Callers that sweep configurations catch this and
// record the arm as infeasible instead of aborting the sweep.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Row-major points, n x dim.
struct Dataset {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> values;

    static Dataset with_shape(std::size_t n, std::size_t dim) {
        Dataset d;
        d.n = n;
        d.dim = dim;
        d.values.assign(n * dim, 0.0);
        return d;
    }

    double at(std::size_t i, std::size_t j) const { return values[i * dim + j]; }
    double& at(std::size_t i, std::size_t j) { return values[i * dim + j]; }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * dim, dim};
    }
};

inline void validate(const Dataset& data) {
    if (data.n == 0 || data.dim == 0)
        throw std::invalid_argument("dataset is empty");
    if (data.values.size() != data.n * data.dim)
        throw std::invalid_argument("dataset buffer does not match its shape");
    for (double v : data.values)
        if (!std::isfinite(v))
            throw std::invalid_argument("dataset contains a non-finite value");
}

// Row-major centroid set, k x dim.
struct Centroids {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<double> values;

    static Centroids with_shape(std::size_t k, std::size_t dim) {
        Centroids c;
        c.k = k;
        c.dim = dim;
        c.values.assign(k * dim, 0.0);
        return c;
    }

    double at(std::size_t g, std::size_t j) const { return values[g * dim + j]; }
    double& at(std::size_t g, std::size_t j) { return values[g * dim + j]; }
    std::span<const double> row(std::size_t g) const {
        return {values.data() + g * dim, dim};
    }
    std::span<double> row(std::size_t g) {
        return {values.data() + g * dim, dim};
    }
};

// Per-column affine transform: x -> (x - mean) / scale.
// Scale is the population standard deviation; zero-variance columns pass
// through with scale 1 so constant features do not blow up.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Dataset& data) {
        Standardizer s;
        s.mean.assign(data.dim, 0.0);
        s.scale.assign(data.dim, 1.0);
        for (std::size_t i = 0; i < data.n; ++i)
            for (std::size_t j = 0; j < data.dim; ++j)
                s.mean[j] += data.at(i, j);
        for (std::size_t j = 0; j < data.dim; ++j)
            s.mean[j] /= static_cast<double>(data.n);
        std::vector<double> var(data.dim, 0.0);
        for (std::size_t i = 0; i < data.n; ++i)
            for (std::size_t j = 0; j < data.dim; ++j) {
                double d = data.at(i, j) - s.mean[j];
                var[j] += d * d;
            }
        for (std::size_t j = 0; j < data.dim; ++j) {
            double v = var[j] / static_cast<double>(data.n);
            if (v > 0.0)
                s.scale[j] = std::sqrt(v);
        }
        return s;
    }

    Dataset apply(const Dataset& data) const {
        Dataset out = data;
        for (std::size_t i = 0; i < data.n; ++i)
            for (std::size_t j = 0; j < data.dim; ++j)
                out.at(i, j) = (data.at(i, j) - mean[j]) / scale[j];
        return out;
    }

    // Map centroids found in standardized space back to the data's units.
    Centroids invert(const Centroids& c) const {
        Centroids out = c;
        for (std::size_t g = 0; g < c.k; ++g)
            for (std::size_t j = 0; j < c.dim; ++j)
                out.at(g, j) = c.at(g, j) * scale[j] + mean[j];
        return out;
    }
};

struct StandardizeResult {
    Dataset data;
    Standardizer transform;
};

inline StandardizeResult standardize(const Dataset& data) {
    validate(data);
    Standardizer t = Standardizer::fit(data);
    return {t.apply(data), t};
}

// Frequency rows for the feature map, m x dim, entries N(0, sigma^2).
struct FrequencyMatrix {
    std::size_t m = 0;
    std::size_t dim = 0;
    double sigma = 1.0;
    std::vector<double> rows;

    std::span<const double> row(std::size_t j) const {
        return {rows.data() + j * dim, dim};
    }
};

inline FrequencyMatrix sample_frequencies(std::size_t m, std::size_t dim, double sigma,
                                          RngStream& rng) {
    if (m == 0 || dim == 0)
        throw std::invalid_argument("frequency matrix needs m >= 1 and dim >= 1");
    if (!(sigma > 0.0))
        throw std::invalid_argument("frequency scale must be positive");
    FrequencyMatrix w;
    w.m = m;
    w.dim = dim;
    w.sigma = sigma;
    w.rows.resize(m * dim);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t c = 0; c < dim; ++c)
            w.rows[j * dim + c] = sigma * rng.normal();
    return w;
}

enum class SketchKind { exact, estimated };

// Complex m-vector summarizing a point set: mean of exp(i W x) rows.
struct Sketch {
    std::vector<cplx> z;
    SketchKind kind = SketchKind::exact;

    std::size_t m() const { return z.size(); }
};

// phi(x)_j = exp(i w_j . x); every entry has unit modulus.
inline std::vector<cplx> feature_map(std::span<const double> point,
                                     const FrequencyMatrix& w) {
    if (point.size() != w.dim)
        throw std::invalid_argument("point dimension does not match frequency rows");
    std::vector<cplx> phi(w.m);
    for (std::size_t j = 0; j < w.m; ++j) {
        double theta = 0.0;
        auto row = w.row(j);
        for (std::size_t c = 0; c < w.dim; ++c)
            theta += row[c] * point[c];
        phi[j] = cplx(std::cos(theta), std::sin(theta));
    }
    return phi;
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

// Nearest centroid per point; ties go to the lowest index.
inline std::vector<std::size_t> assign_nearest(const Dataset& data, const Centroids& c) {
    if (c.k == 0 || c.dim != data.dim)
        throw std::invalid_argument("centroid shape does not match data");
    std::vector<std::size_t> label(data.n, 0);
    for (std::size_t i = 0; i < data.n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t pick = 0;
        for (std::size_t g = 0; g < c.k; ++g) {
            double d = squared_distance(data.row(i), c.row(g));
            if (d < best) {
                best = d;
                pick = g;
            }
        }
        label[i] = pick;
    }
    return label;
}

inline double sse(const Dataset& data, const Centroids& c,
                  std::span<const std::size_t> assignment) {
    if (assignment.size() != data.n)
        throw std::invalid_argument("assignment length does not match data");
    double total = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        std::size_t g = assignment[i];
        if (g >= c.k)
            throw std::invalid_argument("assignment index out of range");
        total += squared_distance(data.row(i), c.row(g));
    }
    return total;
}

} // namespace qckm

#endif
