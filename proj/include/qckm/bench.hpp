#ifndef QCKM_BENCH_HPP
#define QCKM_BENCH_HPP

// Benchmark harness: classical baselines, JSON run manifests, and the
// CSV emitters behind the comparison tables and plot data.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "datasets.hpp"
#include "kmeans.hpp"
#include "pipeline.hpp"

namespace qckm {

// Same compressed pipeline but with exact sketches and exhaustive
// per-group selection: a no-quantum-resources reference point.
inline ClusteringResult classical_ckm(const Dataset& data, PipelineConfig cfg,
                                      RngSpec rng) {
    cfg.sketch = SketchMode::exact;
    cfg.solver = SolverMode::exhaustive;
    cfg.formulation = Formulation::grouped;
    cfg.analytic = false;
    cfg.noise = NoiseModel{};
    return run_qc_kmeans(data, cfg, rng);
}

struct ExperimentRow {
    std::string dataset;
    std::size_t n = 0;
    std::size_t d = 0;
    std::string method;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    double sse = 0.0;
    std::size_t m = 0;
    std::size_t q_peak = 0;
    double time_s = 0.0;
    std::uint64_t total_shots = 0;
};

inline const char* experiment_csv_header() {
    return "dataset,n,d,method,k,seed,sse,m,q_peak,time_s,total_shots";
}

namespace detail {

inline std::string fmt_double(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

} // namespace detail

inline std::string to_csv_row(const ExperimentRow& r) {
    std::string out;
    out += r.dataset;
    out += ',' + std::to_string(r.n);
    out += ',' + std::to_string(r.d);
    out += ',' + r.method;
    out += ',' + std::to_string(r.k);
    out += ',' + std::to_string(r.seed);
    out += ',' + detail::fmt_double(r.sse);
    out += ',' + std::to_string(r.m);
    out += ',' + std::to_string(r.q_peak);
    out += ',' + detail::fmt_double(r.time_s, "%.4f");
    out += ',' + std::to_string(r.total_shots);
    return out;
}

struct DatasetRef {
    std::string name;
    bool from_csv = false;
    std::string csv_path;
    SyntheticSpec spec;
};

struct AblationSpec {
    std::string dataset;
    std::size_t k = 3;
};

struct RunManifest {
    std::vector<DatasetRef> datasets;
    std::vector<std::string> methods{"lloyd", "classical-ckm", "qc-kmeans"};
    std::vector<std::size_t> ks{3};
    std::vector<std::uint64_t> seeds{1};
    std::vector<std::size_t> m_values; // optional sweep for sketch methods
    std::vector<AblationSpec> ablations;
    PipelineConfig config;
    unsigned workers = 1;
    bool analytic = false;
};

// --- JSON parsing ------------------------------------------------------

namespace detail {

inline void require_known_keys(const nlohmann::json& j,
                               std::initializer_list<const char*> known,
                               const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            ok = ok || it.key() == k;
        if (!ok)
            throw parse_error(std::string("unknown key '") + it.key() + "' in " + where);
    }
}

} // namespace detail

inline NoiseModel noise_from_json(const nlohmann::json& j) {
    detail::require_known_keys(j, {"p1", "p2", "readout"}, "noise");
    NoiseModel nm;
    nm.p1 = j.value("p1", 0.0);
    nm.p2 = j.value("p2", 0.0);
    nm.p_readout = j.value("readout", 0.0);
    validate(nm);
    return nm;
}

inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                                PipelineConfig cfg = {}) {
    detail::require_known_keys(
        j,
        {"k", "m", "candidates", "depth", "subsample", "shots", "qff_shots",
         "epsilon", "refine", "tau", "jitter", "jitter_decay", "sigma", "solver",
         "formulation", "sketch", "analytic", "noise", "seed_restarts", "seed_iters"},
        "config");
    cfg.k = j.value("k", cfg.k);
    cfg.m = j.value("m", cfg.m);
    cfg.candidates = j.value("candidates", cfg.candidates);
    cfg.layers = j.value("depth", cfg.layers);
    cfg.subsample = j.value("subsample", cfg.subsample);
    cfg.qaoa_shots = j.value("shots", cfg.qaoa_shots);
    cfg.qff_shots = j.value("qff_shots", cfg.qff_shots);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.refine = j.value("refine", cfg.refine);
    cfg.tau = j.value("tau", cfg.tau);
    cfg.jitter = j.value("jitter", cfg.jitter);
    cfg.jitter_decay = j.value("jitter_decay", cfg.jitter_decay);
    cfg.sigma = j.value("sigma", cfg.sigma);
    cfg.analytic = j.value("analytic", cfg.analytic);
    cfg.seed_restarts = j.value("seed_restarts", cfg.seed_restarts);
    cfg.seed_iters = j.value("seed_iters", cfg.seed_iters);
    if (j.contains("solver")) {
        std::string s = j.at("solver").get<std::string>();
        if (s == "qaoa")
            cfg.solver = SolverMode::qaoa;
        else if (s == "exhaustive")
            cfg.solver = SolverMode::exhaustive;
        else
            throw parse_error("unknown solver: " + s);
    }
    if (j.contains("formulation")) {
        std::string s = j.at("formulation").get<std::string>();
        if (s == "grouped")
            cfg.formulation = Formulation::grouped;
        else if (s == "coupled")
            cfg.formulation = Formulation::coupled;
        else
            throw parse_error("unknown formulation: " + s);
    }
    if (j.contains("sketch")) {
        std::string s = j.at("sketch").get<std::string>();
        if (s == "qff")
            cfg.sketch = SketchMode::qff;
        else if (s == "exact")
            cfg.sketch = SketchMode::exact;
        else
            throw parse_error("unknown sketch mode: " + s);
    }
    if (j.contains("noise"))
        cfg.noise = noise_from_json(j.at("noise"));
    return cfg;
}

inline SyntheticSpec synthetic_from_json(const nlohmann::json& j) {
    detail::require_known_keys(
        j, {"name", "family", "n", "noise", "seed", "blobs", "dim", "spread", "box"},
        "dataset");
    SyntheticSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());
    spec.n = j.value("n", spec.n);
    spec.noise = j.value("noise", spec.noise);
    spec.seed = j.value("seed", spec.seed);
    spec.blobs = j.value("blobs", spec.blobs);
    spec.dim = j.value("dim", spec.dim);
    spec.blob_spread = j.value("spread", spec.blob_spread);
    spec.box = j.value("box", spec.box);
    return spec;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
    detail::require_known_keys(j,
                               {"datasets", "methods", "ks", "seeds", "m_values",
                                "ablations", "config", "workers", "analytic"},
                               "manifest");
    RunManifest man;
    if (!j.contains("datasets") || !j.at("datasets").is_array() || j.at("datasets").empty())
        throw parse_error("manifest needs a non-empty 'datasets' array");
    for (const nlohmann::json& d : j.at("datasets")) {
        DatasetRef ref;
        if (d.contains("csv")) {
            detail::require_known_keys(d, {"name", "csv"}, "dataset");
            ref.from_csv = true;
            ref.csv_path = d.at("csv").get<std::string>();
            ref.name = d.value("name", std::filesystem::path(ref.csv_path).stem().string());
        } else {
            ref.spec = synthetic_from_json(d);
            ref.name = d.value("name", family_name(ref.spec.family));
        }
        man.datasets.push_back(std::move(ref));
    }
    if (j.contains("methods"))
        man.methods = j.at("methods").get<std::vector<std::string>>();
    if (j.contains("ks"))
        man.ks = j.at("ks").get<std::vector<std::size_t>>();
    if (j.contains("seeds"))
        man.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("m_values"))
        man.m_values = j.at("m_values").get<std::vector<std::size_t>>();
    if (j.contains("ablations"))
        for (const nlohmann::json& a : j.at("ablations")) {
            detail::require_known_keys(a, {"dataset", "k"}, "ablation");
            AblationSpec ab;
            ab.dataset = a.at("dataset").get<std::string>();
            ab.k = a.value("k", ab.k);
            man.ablations.push_back(ab);
        }
    if (j.contains("config"))
        man.config = pipeline_config_from_json(j.at("config"));
    man.workers = j.value("workers", man.workers);
    man.analytic = j.value("analytic", man.analytic);
    for (const std::string& mth : man.methods)
        if (mth != "lloyd" && mth != "classical-ckm" && mth != "qc-kmeans")
            throw parse_error("unknown method: " + mth);
    if (man.ks.empty() || man.seeds.empty())
        throw parse_error("manifest needs non-empty 'ks' and 'seeds'");
    return man;
}

inline RunManifest manifest_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
    try {
        return manifest_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
}

// --- Single runs -------------------------------------------------------

inline ExperimentRow run_method(const std::string& method, const std::string& name,
                                const Dataset& data, PipelineConfig cfg,
                                std::uint64_t seed, bool analytic) {
    ExperimentRow row;
    row.dataset = name;
    row.n = data.n;
    row.d = data.dim;
    row.method = method;
    row.k = cfg.k;
    row.seed = seed;
    if (analytic)
        cfg.analytic = true;
    if (method == "lloyd") {
        auto t0 = std::chrono::steady_clock::now();
        LloydResult res = lloyd_kmeans(data, cfg.k, LloydConfig{}, RngSpec{seed});
        row.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        row.sse = res.sse;
    } else if (method == "classical-ckm") {
        ClusteringResult res = classical_ckm(data, cfg, RngSpec{seed});
        row.sse = res.sse;
        row.m = res.m;
        row.time_s = res.seconds;
    } else if (method == "qc-kmeans") {
        ClusteringResult res = run_qc_kmeans(data, cfg, RngSpec{seed});
        row.sse = res.sse;
        row.m = res.m;
        row.q_peak = res.q_peak;
        row.time_s = res.seconds;
        row.total_shots = res.total_shots;
    } else {
        throw std::invalid_argument("unknown method: " + method);
    }
    if (analytic) { // keep reruns byte-identical
        row.time_s = 0.0;
        row.total_shots = 0;
    }
    return row;
}

// --- Ablation ----------------------------------------------------------

struct AblationRow {
    std::string dataset;
    std::size_t k = 0;
    std::string arm; // grouped | coupled | exhaustive
    std::uint64_t seed = 0;
    double sse = 0.0;
    bool ok = false;
    std::string error;
};

inline PipelineConfig ablation_arm_config(const std::string& arm, PipelineConfig cfg) {
    if (arm == "grouped") {
        cfg.formulation = Formulation::grouped;
        cfg.solver = SolverMode::qaoa;
    } else if (arm == "coupled") {
        cfg.formulation = Formulation::coupled;
        cfg.solver = SolverMode::qaoa;
    } else if (arm == "exhaustive") {
        cfg.formulation = Formulation::coupled;
        cfg.solver = SolverMode::exhaustive;
    } else {
        throw std::invalid_argument("unknown ablation arm: " + arm);
    }
    return cfg;
}

inline std::vector<AblationRow> run_ablation(const Dataset& data, const std::string& name,
                                             std::size_t k, const PipelineConfig& base,
                                             const std::vector<std::uint64_t>& seeds) {
    static const char* arms[] = {"grouped", "coupled", "exhaustive"};
    std::vector<AblationRow> rows;
    for (const char* arm : arms)
        for (std::uint64_t seed : seeds) {
            PipelineConfig cfg = ablation_arm_config(arm, base);
            cfg.k = k;
            AblationRow row;
            row.dataset = name;
            row.k = k;
            row.arm = arm;
            row.seed = seed;
            try {
                ClusteringResult res = run_qc_kmeans(data, cfg, RngSpec{seed});
                row.sse = res.sse;
                row.ok = true;
            } catch (const capacity_error& e) {
                row.error = e.what();
            }
            rows.push_back(std::move(row));
        }
    return rows;
}

// --- Full experiment grid ----------------------------------------------

namespace detail {

struct Cell {
    std::size_t dataset_index = 0;
    std::string method;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::size_t m = 0; // 0 = config default
};

inline double median(std::vector<double> v) {
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline void write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path);
    if (!out)
        throw parse_error("cannot write " + path.string());
    out << body;
}

} // namespace detail

struct ExperimentOutput {
    std::vector<ExperimentRow> rows;
    std::vector<AblationRow> ablation_rows;
};

// Runs the whole grid and writes results.csv plus plot-ready aggregates.
// Row order is the grid order, independent of worker scheduling.
inline ExperimentOutput run_experiment(const RunManifest& man,
                                       const std::string& out_dir) {
    std::vector<Dataset> data;
    data.reserve(man.datasets.size());
    for (const DatasetRef& ref : man.datasets)
        data.push_back(ref.from_csv ? load_csv(ref.csv_path) : generate(ref.spec));

    std::vector<std::size_t> sketch_ms = man.m_values;
    if (sketch_ms.empty())
        sketch_ms.push_back(man.config.m);

    std::vector<detail::Cell> cells;
    for (std::size_t di = 0; di < man.datasets.size(); ++di)
        for (const std::string& method : man.methods)
            for (std::size_t k : man.ks) {
                bool sweep = method != "lloyd" && sketch_ms.size() > 1;
                const std::vector<std::size_t> ms =
                    method == "lloyd" ? std::vector<std::size_t>{0}
                    : sweep          ? sketch_ms
                                     : std::vector<std::size_t>{man.config.m};
                for (std::size_t m : ms)
                    for (std::uint64_t seed : man.seeds)
                        cells.push_back({di, method, k, seed, m});
            }

    std::vector<ExperimentRow> rows(cells.size());
    auto run_cell = [&](std::size_t i) {
        const detail::Cell& c = cells[i];
        PipelineConfig cfg = man.config;
        cfg.k = c.k;
        cfg.m = c.m;
        rows[i] = run_method(c.method, man.datasets[c.dataset_index].name,
                             data[c.dataset_index], cfg, c.seed, man.analytic);
    };
    unsigned workers = std::min<unsigned>(man.workers, static_cast<unsigned>(cells.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= cells.size())
                        return;
                    run_cell(i);
                }
            });
        for (std::thread& t : pool)
            t.join();
    }

    ExperimentOutput out;
    out.rows = rows;

    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    std::string results = experiment_csv_header();
    results += '\n';
    for (const ExperimentRow& r : rows)
        results += to_csv_row(r) + '\n';
    detail::write_text(dir / "results.csv", results);

    // SSE against sketch size, median over seeds, in grid order.
    {
        std::string body = "dataset,method,k,m,sse_median\n";
        std::vector<std::string> seen;
        for (const ExperimentRow& r : rows) {
            if (r.method == "lloyd")
                continue;
            std::string key = r.dataset + ',' + r.method + ',' + std::to_string(r.k) +
                              ',' + std::to_string(r.m);
            if (std::find(seen.begin(), seen.end(), key) != seen.end())
                continue;
            seen.push_back(key);
            std::vector<double> sses;
            for (const ExperimentRow& s : rows)
                if (s.dataset == r.dataset && s.method == r.method && s.k == r.k &&
                    s.m == r.m)
                    sses.push_back(s.sse);
            body += key + ',' + detail::fmt_double(detail::median(sses)) + '\n';
        }
        detail::write_text(dir / "sse_vs_m.csv", body);
    }

    // Wall time against register width, median over seeds.
    {
        std::string body = "dataset,method,k,q_peak,time_s_median\n";
        std::vector<std::string> seen;
        for (const ExperimentRow& r : rows) {
            std::string key = r.dataset + ',' + r.method + ',' + std::to_string(r.k);
            if (std::find(seen.begin(), seen.end(), key) != seen.end())
                continue;
            seen.push_back(key);
            std::vector<double> times;
            std::size_t qp = 0;
            for (const ExperimentRow& s : rows)
                if (s.dataset == r.dataset && s.method == r.method && s.k == r.k) {
                    times.push_back(s.time_s);
                    qp = std::max(qp, s.q_peak);
                }
            body += key + ',' + std::to_string(qp) + ',' +
                    detail::fmt_double(detail::median(times), "%.4f") + '\n';
        }
        detail::write_text(dir / "time_vs_qpeak.csv", body);
    }

    if (!man.ablations.empty()) {
        std::string body = "dataset,k,arm,seed,sse,status\n";
        for (const AblationSpec& ab : man.ablations) {
            std::size_t di = man.datasets.size();
            for (std::size_t i = 0; i < man.datasets.size(); ++i)
                if (man.datasets[i].name == ab.dataset)
                    di = i;
            if (di == man.datasets.size())
                throw parse_error("ablation references unknown dataset: " + ab.dataset);
            PipelineConfig cfg = man.config;
            cfg.analytic = cfg.analytic || man.analytic;
            std::vector<AblationRow> arows =
                run_ablation(data[di], ab.dataset, ab.k, cfg, man.seeds);
            for (const AblationRow& a : arows) {
                body += a.dataset + ',' + std::to_string(a.k) + ',' + a.arm + ',' +
                        std::to_string(a.seed) + ',';
                body += a.ok ? detail::fmt_double(a.sse) : std::string("");
                body += ',';
                body += a.ok ? "ok" : "capacity_error";
                body += '\n';
            }
            for (const AblationRow& a : arows)
                out.ablation_rows.push_back(a);
        }
        detail::write_text(dir / "ablation.csv", body);
    }

    return out;
}

} // namespace qckm

#endif
