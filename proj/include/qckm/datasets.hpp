#ifndef QCKM_DATASETS_HPP
#define QCKM_DATASETS_HPP

// Synthetic 2-D benchmark families and CSV import/export.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "rng.hpp"

namespace qckm {

enum class Family { circles, moons, spiral, blobs };

inline Family family_from_name(const std::string& name) {
    if (name == "circles")
        return Family::circles;
    if (name == "moons")
        return Family::moons;
    if (name == "spiral")
        return Family::spiral;
    if (name == "blobs")
        return Family::blobs;
    throw std::invalid_argument("unknown dataset family: " + name);
}

inline const char* family_name(Family f) {
    switch (f) {
    case Family::circles: return "circles";
    case Family::moons: return "moons";
    case Family::spiral: return "spiral";
    default: return "blobs";
    }
}

struct SyntheticSpec {
    Family family = Family::blobs;
    std::size_t n = 300;
    double noise = 0.05;
    std::uint64_t seed = 0;
    // blobs only
    std::size_t blobs = 3;
    std::size_t dim = 2;
    double blob_spread = 0.75;
    double box = 4.0;
};

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;

} // namespace detail

inline Dataset generate(const SyntheticSpec& spec) {
    if (spec.n == 0)
        throw std::invalid_argument("dataset size must be positive");
    if (spec.noise < 0.0)
        throw std::invalid_argument("noise level cannot be negative");
    RngStream rng(RngSpec{spec.seed}, StreamLabel::synthesis);
    const std::size_t dim = spec.family == Family::blobs ? spec.dim : 2;
    Dataset data = Dataset::with_shape(spec.n, dim);

    switch (spec.family) {
    case Family::circles: {
        const std::size_t outer = spec.n / 2;
        for (std::size_t i = 0; i < spec.n; ++i) {
            double r = i < outer ? 1.0 : 0.5;
            double t = 2.0 * detail::kPi * rng.uniform();
            data.at(i, 0) = r * std::cos(t) + spec.noise * rng.normal();
            data.at(i, 1) = r * std::sin(t) + spec.noise * rng.normal();
        }
        break;
    }
    case Family::moons: {
        const std::size_t upper = spec.n / 2;
        for (std::size_t i = 0; i < spec.n; ++i) {
            double t = detail::kPi * rng.uniform();
            double x, y;
            if (i < upper) {
                x = std::cos(t);
                y = std::sin(t);
            } else {
                x = 1.0 - std::cos(t);
                y = 0.5 - std::sin(t);
            }
            data.at(i, 0) = x + spec.noise * rng.normal();
            data.at(i, 1) = y + spec.noise * rng.normal();
        }
        break;
    }
    case Family::spiral: {
        const std::size_t first = spec.n / 2;
        for (std::size_t i = 0; i < spec.n; ++i) {
            double arm = i < first ? 0.0 : detail::kPi;
            double t = 0.5 + 2.0 * detail::kPi * rng.uniform();
            double r = 0.12 * t;
            data.at(i, 0) = r * std::cos(t + arm) + spec.noise * rng.normal();
            data.at(i, 1) = r * std::sin(t + arm) + spec.noise * rng.normal();
        }
        break;
    }
    case Family::blobs: {
        if (spec.blobs == 0)
            throw std::invalid_argument("need at least one blob");
        std::vector<double> centers(spec.blobs * dim);
        for (double& v : centers)
            v = spec.box * (2.0 * rng.uniform() - 1.0);
        for (std::size_t i = 0; i < spec.n; ++i) {
            std::size_t b = i % spec.blobs;
            for (std::size_t j = 0; j < dim; ++j)
                data.at(i, j) = centers[b * dim + j] + spec.blob_spread * rng.normal();
        }
        break;
    }
    }
    return data;
}

struct CsvOptions {
    char delimiter = ',';
    std::vector<std::size_t> columns; // empty = all
};

namespace detail {

inline bool numeric_token(const std::string& tok) {
    char* end = nullptr;
    std::string t = tok;
    if (t.empty())
        return false;
    std::strtod(t.c_str(), &end);
    while (end != nullptr && *end != '\0' && std::isspace(static_cast<unsigned char>(*end)))
        ++end;
    return end != nullptr && *end == '\0';
}

inline std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string tok;
    std::istringstream in(line);
    while (std::getline(in, tok, delim))
        out.push_back(tok);
    if (!line.empty() && line.back() == delim)
        out.push_back("");
    return out;
}

} // namespace detail

// Numeric CSV, optional header row (detected by non-numeric tokens),
// optional column selection. Ragged or non-numeric rows are errors.
inline Dataset load_csv(const std::string& path, const CsvOptions& opt = {}) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> toks = detail::split_line(line, opt.delimiter);
        bool numeric = true;
        for (const std::string& t : toks)
            numeric = numeric && detail::numeric_token(t);
        if (!numeric) {
            if (rows.empty() && lineno == 1)
                continue; // header
            throw parse_error(path + ":" + std::to_string(lineno) +
                              ": non-numeric value");
        }
        std::vector<double> vals(toks.size());
        for (std::size_t j = 0; j < toks.size(); ++j)
            vals[j] = std::strtod(toks[j].c_str(), nullptr);
        if (width == 0)
            width = vals.size();
        else if (vals.size() != width)
            throw parse_error(path + ":" + std::to_string(lineno) +
                              ": expected " + std::to_string(width) + " columns, got " +
                              std::to_string(vals.size()));
        rows.push_back(std::move(vals));
    }
    if (rows.empty())
        throw parse_error(path + ": no data rows");

    std::vector<std::size_t> cols = opt.columns;
    if (cols.empty())
        for (std::size_t j = 0; j < width; ++j)
            cols.push_back(j);
    for (std::size_t c : cols)
        if (c >= width)
            throw parse_error(path + ": column " + std::to_string(c) +
                              " out of range");

    Dataset data = Dataset::with_shape(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            data.at(i, j) = rows[i][cols[j]];
    validate(data);
    return data;
}

inline void write_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out)
        throw parse_error("cannot write " + path);
    char buf[64];
    for (std::size_t i = 0; i < data.n; ++i) {
        for (std::size_t j = 0; j < data.dim; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", data.at(i, j));
            out << (j > 0 ? "," : "") << buf;
        }
        out << "\n";
    }
}

} // namespace qckm

#endif
