// Command line front end. Four subcommands:
//   generate  synthesize a dataset and write it as CSV
//   run       cluster one dataset with one method, emit a JSON report
//   bench     execute a benchmark manifest (grid of datasets x methods x seeds)
//   ablate    compare grouped / coupled / joint-exact selection on one dataset
//
// `run --config file.json` loads pipeline settings first; explicit flags
// still win. `run --dump-qubo file.json` also writes the first-round
// selection problem (dense symmetric Q, linear terms, penalty weight).

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <qckm/qckm.hpp>

namespace {

using namespace qckm;

struct DataFlags {
    std::string csv;
    std::string family;
    SyntheticSpec spec;
};

void add_data_flags(CLI::App* cmd, DataFlags& f,
                    const std::string& noise_name = "--gen-noise") {
    cmd->add_option("--csv", f.csv, "load points from a CSV file");
    cmd->add_option("--dataset", f.family,
                    "synthesize circles | moons | spiral | blobs");
    cmd->add_option("--n", f.spec.n, "synthetic point count")->capture_default_str();
    cmd->add_option(noise_name, f.spec.noise, "synthetic noise level")
        ->capture_default_str();
    cmd->add_option("--gen-seed", f.spec.seed, "synthesis seed")
        ->capture_default_str();
    cmd->add_option("--blobs", f.spec.blobs, "blob count (blobs family)")
        ->capture_default_str();
    cmd->add_option("--dim", f.spec.dim, "dimension (blobs family)")
        ->capture_default_str();
    cmd->add_option("--spread", f.spec.blob_spread, "blob spread")
        ->capture_default_str();
    cmd->add_option("--box", f.spec.box, "blob center box half-width")
        ->capture_default_str();
}

std::pair<Dataset, std::string> load_data(const DataFlags& f) {
    if (!f.csv.empty() && !f.family.empty())
        throw parse_error("pass either --csv or --dataset, not both");
    if (!f.csv.empty())
        return {load_csv(f.csv), std::filesystem::path(f.csv).stem().string()};
    if (f.family.empty())
        throw parse_error("no input: pass --csv FILE or --dataset FAMILY");
    SyntheticSpec spec = f.spec;
    spec.family = family_from_name(f.family);
    return {generate(spec), f.family};
}

void add_pipeline_flags(CLI::App* cmd, PipelineConfig& cfg, std::string& config_path,
                        std::string& noise_triple) {
    cmd->add_option("--config", config_path,
                    "JSON file with pipeline settings (flags override it)");
    cmd->add_option("--k", cfg.k, "cluster count")->capture_default_str();
    cmd->add_option("--m", cfg.m, "sketch components (0 = 4*k*d)")
        ->capture_default_str();
    cmd->add_option("--candidates", cfg.candidates, "candidates per cluster")
        ->capture_default_str();
    cmd->add_option("--depth", cfg.layers, "QAOA depth")->capture_default_str();
    cmd->add_option("--subsample", cfg.subsample, "estimation subsample size B")
        ->capture_default_str();
    cmd->add_option("--shots", cfg.qaoa_shots, "QAOA shot budget per solve")
        ->capture_default_str();
    cmd->add_option("--qff-shots", cfg.qff_shots, "shots per Hadamard-test basis")
        ->capture_default_str();
    cmd->add_option("--epsilon", cfg.epsilon, "penalty margin")->capture_default_str();
    cmd->add_option("--refine", cfg.refine, "refinement iterations")
        ->capture_default_str();
    cmd->add_option("--tau", cfg.tau, "centroid movement stop threshold")
        ->capture_default_str();
    cmd->add_option("--jitter", cfg.jitter, "candidate jitter scale")
        ->capture_default_str();
    cmd->add_option("--jitter-decay", cfg.jitter_decay, "per-iteration jitter decay")
        ->capture_default_str();
    cmd->add_option("--sigma", cfg.sigma, "frequency scale")->capture_default_str();
    cmd->add_option("--solver", cfg.solver, "selection solver")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, SolverMode>{{"qaoa", SolverMode::qaoa},
                                              {"exhaustive", SolverMode::exhaustive}},
            CLI::ignore_case));
    cmd->add_option("--formulation", cfg.formulation, "selection formulation")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, Formulation>{{"grouped", Formulation::grouped},
                                               {"coupled", Formulation::coupled}},
            CLI::ignore_case));
    cmd->add_option("--sketch", cfg.sketch, "sketch estimation mode")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, SketchMode>{{"qff", SketchMode::qff},
                                              {"exact", SketchMode::exact}},
            CLI::ignore_case));
    cmd->add_option("--noise", noise_triple,
                    "depolarizing + readout error rates, \"p1,p2,p_readout\"");
    cmd->add_flag("--analytic", cfg.analytic,
                  "expectation-value mode: no sampling, no noise");
}

void apply_noise_triple(const std::string& triple, PipelineConfig& cfg) {
    if (triple.empty())
        return;
    double p1 = 0.0, p2 = 0.0, pr = 0.0;
    if (std::sscanf(triple.c_str(), "%lf,%lf,%lf", &p1, &p2, &pr) != 3)
        throw parse_error("--noise expects three comma-separated rates");
    cfg.noise.p1 = p1;
    cfg.noise.p2 = p2;
    cfg.noise.p_readout = pr;
}

// flags are bound straight into cfg, so the config file has to be folded
// in before CLI11 assigns anything; scan argv by hand
void preload_config(int argc, char** argv, PipelineConfig& cfg) {
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        std::string path;
        if (arg == "--config" && i + 1 < argc)
            path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0)
            path = arg.substr(9);
        if (path.empty())
            continue;
        std::ifstream in(path);
        if (!in)
            throw parse_error("cannot open config file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw parse_error("config file " + path + ": " + e.what());
        }
        cfg = pipeline_config_from_json(j, cfg);
        return;
    }
}

nlohmann::json centroid_rows(const Centroids& c) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t g = 0; g < c.k; ++g) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < c.dim; ++j)
            row.push_back(c.at(g, j));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json config_json(const PipelineConfig& cfg) {
    return {
        {"k", cfg.k},
        {"m", cfg.m},
        {"candidates", cfg.candidates},
        {"depth", cfg.layers},
        {"subsample", cfg.subsample},
        {"shots", cfg.qaoa_shots},
        {"qff_shots", cfg.qff_shots},
        {"epsilon", cfg.epsilon},
        {"refine", cfg.refine},
        {"tau", cfg.tau},
        {"jitter", cfg.jitter},
        {"jitter_decay", cfg.jitter_decay},
        {"sigma", cfg.sigma},
        {"solver", cfg.solver == SolverMode::qaoa ? "qaoa" : "exhaustive"},
        {"formulation",
         cfg.formulation == Formulation::grouped ? "grouped" : "coupled"},
        {"sketch", cfg.sketch == SketchMode::qff ? "qff" : "exact"},
        {"analytic", cfg.analytic},
        {"noise",
         {{"p1", cfg.noise.p1}, {"p2", cfg.noise.p2}, {"readout", cfg.noise.p_readout}}},
    };
}

nlohmann::json group_qubo_json(const GroupQubo& q) {
    std::size_t d = q.d;
    std::vector<double> dense(d * d, 0.0);
    for (std::size_t r = 0; r < d; ++r)
        for (std::size_t s = 0; s < d; ++s)
            if (r != s)
                dense[r * d + s] = q.q(r, s);
    return {{"n", d},       {"Q", dense},           {"c", q.lin},
            {"lambda", q.lambda}, {"scale", q.s_coef}};
}

nlohmann::json joint_qubo_json(const JointQubo& q) {
    std::size_t n = q.n();
    std::vector<double> dense(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t s = 0; s < n; ++s)
            if (r != s)
                dense[r * n + s] = q.q(r, s);
    return {{"n", n},       {"sizes", q.sizes},     {"Q", dense},
            {"c", q.lin},   {"lambda", q.lambda},   {"scale", q.s_coef}};
}

// Rebuild the first-round selection problem exactly as the pipeline seeds
// it: standardize, sketch, short classical seeding, jittered candidates.
nlohmann::json dump_first_round_qubo(const Dataset& data, PipelineConfig cfg,
                                     std::uint64_t seed) {
    validate(cfg, data);
    if (cfg.m == 0)
        cfg.m = 4 * cfg.k * data.dim;
    auto [std_data, transform] = standardize(data);
    RngStream wrng(RngSpec{seed}, StreamLabel::frequencies);
    FrequencyMatrix w = sample_frequencies(cfg.m, data.dim, cfg.sigma, wrng);
    Centroids seeds = seed_centroids(std_data, cfg.k, RngSpec{seed},
                                     cfg.seed_restarts, cfg.seed_iters);
    CandidateSet cands = generate_candidates(seeds, cfg.candidates, cfg.jitter, w,
                                             false, RngSpec{seed}, 0);

    QffConfig qff;
    qff.subsample = cfg.subsample;
    qff.shots_per_basis = cfg.qff_shots;
    qff.analytic = cfg.analytic;
    const NoiseModel* noise = cfg.noise.any() && !cfg.analytic ? &cfg.noise : nullptr;

    nlohmann::json out;
    out["epsilon"] = cfg.epsilon;
    if (cfg.formulation == Formulation::coupled) {
        Sketch zx;
        if (cfg.sketch == SketchMode::exact)
            zx = exact_sketch(std_data, w);
        else
            zx = qff_estimate_sketch(std_data, w, qff, noise, {RngSpec{seed}, 0, 0});
        out["formulation"] = "coupled";
        out["qubo"] = joint_qubo_json(build_joint_qubo(zx, cands, cfg.epsilon));
        return out;
    }

    std::vector<std::size_t> assignment = assign_nearest(std_data, seeds);
    out["formulation"] = "grouped";
    nlohmann::json groups = nlohmann::json::array();
    for (std::size_t g = 0; g < cfg.k; ++g) {
        std::optional<Sketch> zg;
        if (cfg.sketch == SketchMode::exact) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < assignment.size(); ++i)
                if (assignment[i] == g)
                    members.push_back(i);
            if (!members.empty())
                zg = exact_sketch_subset(std_data, members, w);
        } else {
            zg = group_sketch(std_data, assignment, g, w, qff, noise,
                              {RngSpec{seed}, 0, 0});
        }
        if (!zg) {
            groups.push_back({{"empty", true}});
            continue;
        }
        groups.push_back(
            group_qubo_json(build_group_qubo(*zg, cands, g, cfg.epsilon)));
    }
    out["groups"] = groups;
    return out;
}

void write_json(const nlohmann::json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw parse_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

int cmd_generate(const DataFlags& flags, const std::string& out_path) {
    if (flags.family.empty())
        throw parse_error("generate needs --dataset FAMILY");
    SyntheticSpec spec = flags.spec;
    spec.family = family_from_name(flags.family);
    Dataset data = generate(spec);
    write_csv(out_path, data);
    std::fprintf(stderr, "wrote %zu x %zu points to %s\n", data.n, data.dim,
                 out_path.c_str());
    return 0;
}

int cmd_run(const DataFlags& flags, const PipelineConfig& cfg,
            const std::string& method, std::uint64_t seed, const std::string& out_path,
            const std::string& qubo_path, bool with_assignment, bool with_trace) {
    auto [data, name] = load_data(flags);

    nlohmann::json out;
    out["dataset"] = {{"name", name}, {"n", data.n}, {"d", data.dim}};
    out["method"] = method;
    out["seed"] = seed;
    out["config"] = config_json(cfg);

    std::vector<std::size_t> assignment;
    if (method == "lloyd") {
        auto t0 = std::chrono::steady_clock::now();
        LloydResult res = lloyd_kmeans(data, cfg.k, LloydConfig{}, RngSpec{seed});
        std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        out["sse"] = res.sse;
        out["iterations"] = res.iterations;
        out["time_s"] = dt.count();
        out["centroids"] = centroid_rows(res.centroids);
        assignment = res.assignment;
    } else if (method == "qc-kmeans" || method == "classical-ckm") {
        ClusteringResult res = method == "qc-kmeans"
                                   ? run_qc_kmeans(data, cfg, RngSpec{seed})
                                   : classical_ckm(data, cfg, RngSpec{seed});
        out["sse"] = res.sse;
        out["iterations"] = res.iterations;
        out["time_s"] = res.seconds;
        out["m"] = res.m;
        out["q_peak"] = res.q_peak;
        out["observed_qubits"] = res.observed_qubits;
        out["total_shots"] = res.total_shots;
        out["centroids"] = centroid_rows(res.centroids);
        assignment = res.assignment;
        if (with_trace) {
            nlohmann::json trace = nlohmann::json::array();
            for (const IterationRecord& it : res.trace) {
                nlohmann::json groups = nlohmann::json::array();
                for (const GroupRecord& g : it.groups)
                    groups.push_back({{"selected", g.selected},
                                      {"surrogate", g.surrogate},
                                      {"delta", g.delta},
                                      {"feasible_fraction", g.feasible_fraction},
                                      {"solved", g.solved},
                                      {"empty", g.empty_group}});
                trace.push_back({{"iteration", it.iteration},
                                 {"movement", it.movement},
                                 {"coupled", it.coupled},
                                 {"joint_fit", it.joint_fit},
                                 {"groups", groups}});
            }
            out["trace"] = trace;
        }
    } else {
        throw parse_error("unknown method: " + method);
    }
    if (with_assignment)
        out["assignment"] = assignment;

    if (!qubo_path.empty()) {
        if (method == "lloyd")
            throw parse_error("--dump-qubo needs a sketch-based method");
        write_json(dump_first_round_qubo(data, cfg, seed), qubo_path);
    }
    write_json(out, out_path);
    return 0;
}

int cmd_bench(const std::string& manifest_path, const std::string& out_dir,
              std::size_t workers) {
    RunManifest man = manifest_from_file(manifest_path);
    if (workers > 0)
        man.workers = workers;
    ExperimentOutput out = run_experiment(man, out_dir);
    std::fprintf(stderr, "wrote %zu result rows", out.rows.size());
    if (!out.ablation_rows.empty())
        std::fprintf(stderr, " and %zu ablation rows", out.ablation_rows.size());
    std::fprintf(stderr, " under %s\n", out_dir.c_str());
    return 0;
}

int cmd_ablate(const DataFlags& flags, const PipelineConfig& cfg,
               const std::vector<std::uint64_t>& seeds, const std::string& out_path) {
    auto [data, name] = load_data(flags);
    std::vector<AblationRow> rows = run_ablation(data, name, cfg.k, cfg, seeds);
    std::ostringstream csv;
    csv << "dataset,k,arm,seed,sse,status\n";
    for (const AblationRow& r : rows) {
        csv << r.dataset << ',' << r.k << ',' << r.arm << ',' << r.seed << ',';
        if (r.ok) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.10g", r.sse);
            csv << buf << ",ok\n";
        } else {
            csv << ',' << r.error << "\n";
        }
    }
    if (out_path.empty() || out_path == "-") {
        std::cout << csv.str();
    } else {
        std::ofstream out(out_path);
        if (!out)
            throw parse_error("cannot write " + out_path);
        out << csv.str();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourier-sketch k-means with simulated quantum estimation "
                 "and one-hot selection"};
    app.require_subcommand(1);

    DataFlags gen_flags;
    std::string gen_out = "dataset.csv";
    CLI::App* gen = app.add_subcommand("generate", "synthesize a dataset as CSV");
    add_data_flags(gen, gen_flags, "--noise");
    gen->add_option("--out", gen_out, "output CSV path")->capture_default_str();

    DataFlags run_flags;
    PipelineConfig cfg;
    std::string config_path, noise_triple;
    std::string method = "qc-kmeans";
    std::uint64_t seed = 1;
    std::string run_out = "-", qubo_path;
    bool with_assignment = false, with_trace = false;
    CLI::App* run = app.add_subcommand("run", "cluster one dataset");
    add_data_flags(run, run_flags);
    add_pipeline_flags(run, cfg, config_path, noise_triple);
    run->add_option("--method", method, "lloyd | classical-ckm | qc-kmeans")
        ->capture_default_str();
    run->add_option("--seed", seed, "run seed")->capture_default_str();
    run->add_option("--out", run_out, "JSON report path, - for stdout")
        ->capture_default_str();
    run->add_option("--dump-qubo", qubo_path,
                    "also write the first-round selection QUBO as JSON");
    run->add_flag("--assignment", with_assignment, "include per-point labels");
    run->add_flag("--trace", with_trace, "include the refinement trace");

    std::string manifest_path, bench_out = "bench_out";
    std::size_t workers = 0;
    CLI::App* bench = app.add_subcommand("bench", "execute a benchmark manifest");
    bench->add_option("--manifest", manifest_path, "manifest JSON path")->required();
    bench->add_option("--out", bench_out, "output directory")->capture_default_str();
    bench->add_option("--workers", workers, "override manifest worker count");

    DataFlags ab_flags;
    std::vector<std::uint64_t> ab_seeds = {1, 2, 3};
    std::string ab_out = "-";
    CLI::App* ablate =
        app.add_subcommand("ablate", "compare selection formulations");
    add_data_flags(ablate, ab_flags);
    std::string ab_config_path, ab_noise_triple;
    add_pipeline_flags(ablate, cfg, ab_config_path, ab_noise_triple);
    ablate->add_option("--seeds", ab_seeds, "comma-separated seed list")
        ->delimiter(',')
        ->capture_default_str();
    ablate->add_option("--out", ab_out, "CSV path, - for stdout")
        ->capture_default_str();

    try {
        preload_config(argc, argv, cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    CLI11_PARSE(app, argc, argv);

    try {
        apply_noise_triple(noise_triple, cfg);
        apply_noise_triple(ab_noise_triple, cfg);
        if (gen->parsed())
            return cmd_generate(gen_flags, gen_out);
        if (run->parsed())
            return cmd_run(run_flags, cfg, method, seed, run_out, qubo_path,
                           with_assignment, with_trace);
        if (bench->parsed())
            return cmd_bench(manifest_path, bench_out, workers);
        if (ablate->parsed())
            return cmd_ablate(ab_flags, cfg, ab_seeds, ab_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
