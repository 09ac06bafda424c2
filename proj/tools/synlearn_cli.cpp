// Command-line driver: build codes and circuits, generate noise, sample
// syndromes, learn error rates, evaluate logical error rates, and run the
// packaged experiment scenarios.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "synlearn/experiments.hpp"
#include "synlearn/rng.hpp"

using namespace synlearn;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitThreshold = 2;
constexpr int kExitValidation = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
}

SubsystemCode load_code(const std::string& spec, const std::vector<int>& params) {
    if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json") return code_from_json(slurp(spec));
    return named_code(spec, params);
}

CliffordCircuit load_circuit(const std::string& spec) {
    if (spec.size() > 5 && spec.substr(spec.size() - 5) == ".json")
        return CliffordCircuit::from_json(slurp(spec));
    // builder shorthand: surface:d:rounds or repetition:rounds
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts[0] == "surface" && parts.size() == 3)
        return surface_ec_circuit(std::stoul(parts[1]), std::stoul(parts[2]));
    if (parts[0] == "repetition" && parts.size() == 2) return repetition_ec_circuit(std::stoul(parts[1]));
    throw std::runtime_error("unknown circuit spec: " + spec + " (use a .json file, surface:d:r, or repetition:r)");
}

std::vector<double> strengths_from_spec(const std::string& spec, const NoiseModel& model,
                                        const CliffordCircuit* circuit) {
    if (spec == "uniform" || spec.empty()) return uniform_strengths(model);
    if (spec.rfind("typed:", 0) == 0) {
        if (!circuit) throw std::runtime_error("typed constraints need a circuit");
        std::vector<double> r;
        std::stringstream ss(spec.substr(6));
        std::string tok;
        while (std::getline(ss, tok, ',')) r.push_back(std::stod(tok));
        if (r.size() != 4) throw std::runtime_error("typed:<r-list> needs 4 entries (idle,1q,2q,meas)");
        return typed_strengths(model, *circuit, r[0], r[1], r[2], r[3]);
    }
    if (spec.rfind("file:", 0) == 0) {
        json j = json::parse(slurp(spec.substr(5)));
        return j.at("relative_strength").get<std::vector<double>>();
    }
    throw std::runtime_error("unknown constraint spec: " + spec);
}

struct LearnInputs {
    bool is_circuit = false;
    SubsystemCode code;
    CliffordCircuit circuit;
    SpacetimeCode st_code;
    NoiseModel model{0, {}};
    LearningProblem problem;
};

LearnInputs prepare_problem(const std::string& code_spec, const std::string& circuit_spec,
                            const std::string& noise_path, const std::string& stabilizer_set) {
    LearnInputs in;
    in.model = noise_from_json(slurp(noise_path));
    std::vector<PauliOperator> generators;
    if (!circuit_spec.empty()) {
        in.is_circuit = true;
        in.circuit = load_circuit(circuit_spec);
        auto parity = build_parity_structure(in.circuit);
        auto local = localize_generator_basis(
            parity, LocalizeStrategy::GreedyWindow, in.circuit);
        in.st_code = build_spacetime_code(in.circuit, local);
        generators = in.st_code.measured_gens;
        if (in.model.num_qubits() != in.st_code.n_st)
            throw std::runtime_error("noise model size does not match the spacetime code");
    } else {
        in.code = load_code(code_spec, {});
        generators = in.code.measured_gens;
        if (in.model.num_qubits() != in.code.n)
            throw std::runtime_error("noise model size does not match the code");
    }
    if (stabilizer_set == "analytic")
        in.problem = analytic_subset(generators, in.model);
    else if (stabilizer_set.rfind("file:", 0) == 0) {
        json j = json::parse(slurp(stabilizer_set.substr(5)));
        std::vector<Gf2Vector> subsets;
        for (const auto& row : j.at("rows")) {
            Gf2Vector v(generators.size());
            for (auto idx : row.get<std::vector<std::size_t>>()) v.set(idx, true);
            subsets.push_back(v);
        }
        in.problem = problem_for_rows(generators, in.model, subsets);
    } else {
        in.problem = minimal_subset(generators, in.model);
    }
    return in;
}

json learned_to_json(const LearnedRates& learned, const LearnInputs& in) {
    json j;
    j["nu"] = learned.nu;
    j["class_rates"] = learned.class_rates;
    j["detector_rates"] = learned.detector_rates;
    j["p_hat"] = learned.p_hat;
    j["diagnostics"] = {{"solver", learned.diagnostics.solver},
                        {"iterations", learned.diagnostics.iterations},
                        {"residual", learned.diagnostics.residual},
                        {"dropped_rows", learned.diagnostics.dropped_rows},
                        {"converged", learned.diagnostics.converged}};
    auto learned_model = in.model.with_rates(learned.p_hat);
    j["learned_model"] = json::parse(noise_to_json(learned_model));
    if (in.is_circuit) {
        std::vector<json> averages;
        for (const auto& avg : layer_averages(learned.p_hat, in.model, in.circuit))
            averages.push_back({{"layer", avg.layer},
                                {"arity", avg.arity},
                                {"average", avg.average},
                                {"locations", avg.locations}});
        j["layer_averages"] = averages;
    }
    return j;
}

int cmd_run(const std::string& config_path, int threads);

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pauli noise and logical error learning from syndrome data"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = all cores)");

    // codes show
    auto* codes = app.add_subcommand("codes", "stabilizer code utilities");
    auto* codes_show = codes->add_subcommand("show", "print the generators of a named code");
    std::string code_name;
    std::vector<int> code_params;
    std::string out_path;
    codes_show->add_option("name", code_name)->required();
    codes_show->add_option("--params", code_params, "builder parameters, e.g. distance");
    codes_show->add_option("--json", out_path, "also write the definition file");

    // noise gen
    auto* noise = app.add_subcommand("noise", "noise model utilities");
    auto* noise_gen = noise->add_subcommand("gen", "emit a noise model file");
    std::size_t noise_n = 0;
    std::string noise_preset = "single_qubit_gaussian";
    double noise_mean = 5e-3, noise_sigma = 1e-3, noise_rate = 1e-3;
    std::uint64_t noise_seed = 1;
    std::string noise_out = "noise.json";
    std::string noise_circuit;
    noise_gen->add_option("--n", noise_n, "qubit count (static codes)");
    noise_gen->add_option("--preset", noise_preset,
                          "single_qubit_gaussian | independent_gaussian | depolarizing1 | circuit_standard");
    noise_gen->add_option("--mean", noise_mean);
    noise_gen->add_option("--sigma", noise_sigma);
    noise_gen->add_option("--rate", noise_rate);
    noise_gen->add_option("--seed", noise_seed);
    noise_gen->add_option("--circuit", noise_circuit, "circuit spec for circuit_standard");
    noise_gen->add_option("--out", noise_out);

    // circuit build
    auto* circuit_cmd = app.add_subcommand("circuit", "circuit utilities");
    auto* circuit_build = circuit_cmd->add_subcommand("build", "emit a named experiment circuit");
    std::string circuit_kind = "surface";
    std::size_t circuit_distance = 3, circuit_rounds = 1;
    std::string circuit_out = "circuit.json";
    circuit_build->add_option("--kind", circuit_kind,
                              "surface | repetition | ghz_zz | ghz_xx | ghz_yy");
    circuit_build->add_option("--distance", circuit_distance);
    circuit_build->add_option("--rounds", circuit_rounds);
    circuit_build->add_option("--out", circuit_out);

    // spacetime map
    auto* st = app.add_subcommand("spacetime", "spacetime code mapping");
    auto* st_map = st->add_subcommand("map", "map a circuit to its spacetime code");
    std::string st_circuit, st_out = "spacetime.json", st_localize = "surface_recipe";
    st_map->add_option("--circuit", st_circuit)->required();
    st_map->add_option("--localize", st_localize, "surface_recipe | greedy | none");
    st_map->add_option("--out", st_out);

    // sample
    auto* sample = app.add_subcommand("sample", "draw syndrome/detector statistics");
    std::string sm_code, sm_circuit, sm_noise, sm_set = "minimal", sm_out = "dataset.json";
    std::size_t sm_shots = 100000;
    std::uint64_t sm_seed = 1;
    sample->add_option("--code", sm_code);
    sample->add_option("--circuit", sm_circuit);
    sample->add_option("--noise", sm_noise)->required();
    sample->add_option("--shots", sm_shots);
    sample->add_option("--seed", sm_seed);
    sample->add_option("--stabilizer-set", sm_set, "minimal | analytic | file:<rows.json>");
    sample->add_option("--out", sm_out);

    // learn
    auto* learn = app.add_subcommand("learn", "estimate error rates from expectations");
    std::string ln_code, ln_circuit, ln_noise, ln_dataset, ln_solver = "nonlinear";
    std::string ln_constraints = "uniform", ln_set = "minimal", ln_early = "", ln_out = "report.json";
    bool ln_exact = false;
    std::size_t ln_shots = 100000;
    std::uint64_t ln_seed = 1;
    learn->add_option("--code", ln_code);
    learn->add_option("--circuit", ln_circuit);
    learn->add_option("--noise", ln_noise, "noise model file (skeleton and prior)")->required();
    learn->add_option("--dataset", ln_dataset, "dataset file (static codes)");
    learn->add_flag("--exact", ln_exact, "use exact expectations from the noise file");
    learn->add_option("--shots", ln_shots, "sample this many shots when no dataset is given");
    learn->add_option("--seed", ln_seed);
    learn->add_option("--solver", ln_solver, "recursive | linear_lsq | nonlinear");
    learn->add_option("--constraints", ln_constraints, "uniform | typed:<i,1q,2q,m> | file:<json>");
    std::size_t ln_uniformity = 0;
    learn->add_option("--uniformity-rows", ln_uniformity,
                      "extra intraclass-uniformity constraint rows");
    learn->add_option("--stabilizer-set", ln_set, "minimal | analytic | file:<rows.json>");
    learn->add_option("--early-stop", ln_early, "auto | <iterations>");
    learn->add_option("--out", ln_out);

    // eval-logical
    auto* eval = app.add_subcommand("eval-logical", "logical error rates from learned rates");
    std::string ev_learned, ev_code, ev_circuit, ev_decoder = "lookup_mle", ev_method = "mc:1000000";
    std::string ev_basis = "z", ev_target, ev_out = "logical_report.json";
    std::uint64_t ev_seed = 1;
    eval->add_option("--learned", ev_learned, "learn report with the fitted model")->required();
    eval->add_option("--code", ev_code);
    eval->add_option("--circuit", ev_circuit);
    eval->add_option("--decoder", ev_decoder, "lookup_mle | min_weight | trivial");
    eval->add_option("--method", ev_method, "mc:<shots> | exhaustive");
    eval->add_option("--basis", ev_basis, "z | x | xz (static codes)");
    eval->add_option("--target", ev_target, "zero: fidelity of the all-|0_L> target");
    eval->add_option("--seed", ev_seed);
    eval->add_option("--out", ev_out);

    // run
    auto* run = app.add_subcommand("run", "run a packaged experiment scenario");
    std::string run_config;
    run->add_option("config", run_config)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (codes_show->parsed()) {
            auto code = named_code(code_name, code_params);
            code.validate();
            std::cout << "n = " << code.n << "\nstabilizers:\n";
            for (const auto& g : code.stabilizer_gens) std::cout << "  " << g.to_sparse_string() << "\n";
            std::cout << "logical_x:\n";
            for (const auto& g : code.logical_x) std::cout << "  " << g.to_sparse_string() << "\n";
            std::cout << "logical_z:\n";
            for (const auto& g : code.logical_z) std::cout << "  " << g.to_sparse_string() << "\n";
            if (!out_path.empty()) spit(out_path, code_to_json(code));
            return kExitOk;
        }
        if (noise_gen->parsed()) {
            NoiseModel model{0, {}};
            if (noise_preset == "single_qubit_gaussian")
                model = gaussian_single_qubit_model(noise_n, noise_mean, noise_sigma, noise_seed);
            else if (noise_preset == "independent_gaussian")
                model = gaussian_independent_model(noise_n, noise_mean, noise_sigma, noise_seed);
            else if (noise_preset == "depolarizing1") {
                std::vector<LocalChannel> chans;
                for (std::size_t q = 0; q < noise_n; ++q)
                    chans.push_back(depolarizing1_channel(q, noise_rate));
                model = NoiseModel(noise_n, std::move(chans));
            } else if (noise_preset == "circuit_standard") {
                auto circuit = load_circuit(noise_circuit);
                StandardNoiseParams params;
                params.seed = noise_seed;
                model = standard_circuit_noise(circuit, params);
            } else {
                throw std::runtime_error("unknown noise preset: " + noise_preset);
            }
            spit(noise_out, noise_to_json(model));
            std::cout << "wrote " << noise_out << " (" << model.channels().size() << " channels)\n";
            return kExitOk;
        }
        if (circuit_build->parsed()) {
            CliffordCircuit c;
            if (circuit_kind == "repetition") {
                c = repetition_ec_circuit(circuit_rounds);
            } else if (circuit_kind.rfind("ghz_", 0) == 0) {
                auto toy = make_ghz_toy();
                c = circuit_kind == "ghz_zz" ? toy.zz : circuit_kind == "ghz_xx" ? toy.xx : toy.yy;
            } else {
                c = surface_ec_circuit(circuit_distance, circuit_rounds);
            }
            spit(circuit_out, c.to_json());
            std::cout << "wrote " << circuit_out << " (n = " << c.n << ", depth = " << c.depth()
                      << ")\n";
            return kExitOk;
        }
        if (st_map->parsed()) {
            auto circuit = load_circuit(st_circuit);
            auto parity = build_parity_structure(circuit);
            if (st_localize == "surface_recipe")
                parity = localize_generator_basis(parity, LocalizeStrategy::SurfaceRecipe, circuit);
            else if (st_localize == "greedy")
                parity = localize_generator_basis(parity, LocalizeStrategy::GreedyWindow, circuit);
            auto code = build_spacetime_code(circuit, parity);
            code.check_support_bound();
            spit(st_out, code.to_json());
            std::cout << "wrote " << st_out << " (" << code.measured_gens.size() << " generators, "
                      << code.measured_logicals.size() << " logicals)\n";
            return kExitOk;
        }
        if (sample->parsed()) {
            auto in = prepare_problem(sm_code, sm_circuit, sm_noise, sm_set);
            SyndromeDataset ds;
            if (in.is_circuit) {
                std::vector<Gf2Vector> subsets;
                for (const auto& row : in.problem.rows) subsets.push_back(row.gen_subset);
                auto flips = sample_detector_flips(in.st_code, in.model, subsets, sm_shots, sm_seed,
                                                   threads);
                ds.shots = sm_shots;
                ds.flip_counts = flips;
                for (const auto& row : in.problem.rows) ds.tracked.push_back(row.op);
            } else {
                std::vector<PauliOperator> tracked;
                for (const auto& row : in.problem.rows) tracked.push_back(row.op);
                ds = sample_syndromes(in.code, in.model, sm_shots, tracked, sm_seed, threads);
            }
            spit(sm_out, ds.to_json());
            std::cout << "wrote " << sm_out << " (" << ds.tracked.size() << " tracked, " << sm_shots
                      << " shots)\n";
            return kExitOk;
        }
        if (learn->parsed()) {
            auto in = prepare_problem(ln_code, ln_circuit, ln_noise, ln_set);
            std::vector<double> expectations;
            if (ln_exact) {
                expectations = exact_problem_expectations(in.problem, in.model);
            } else if (!ln_dataset.empty()) {
                auto ds = SyndromeDataset::from_json(slurp(ln_dataset));
                if (ds.tracked.size() != in.problem.num_rows())
                    throw std::runtime_error("dataset rows do not match the stabilizer set");
                for (std::size_t i = 0; i < ds.tracked.size(); ++i)
                    if (ds.tracked[i] != in.problem.rows[i].op)
                        throw std::runtime_error("dataset tracked operators do not match");
                expectations = ds.expectations();
                ln_shots = ds.shots;
            } else if (in.is_circuit) {
                expectations = sampled_problem_expectations_circuit(in.st_code, in.model, in.problem,
                                                                    ln_shots, ln_seed, threads);
            } else {
                expectations = sampled_problem_expectations_static(in.code, in.model, in.problem,
                                                                   ln_shots, ln_seed, threads);
            }
            OptimizeOptions opt;
            opt.solver = ln_solver == "recursive"    ? SolverKind::Recursive
                         : ln_solver == "linear_lsq" ? SolverKind::LinearLsq
                                                     : SolverKind::Nonlinear;
            auto strengths = strengths_from_spec(ln_constraints, in.model,
                                                 in.is_circuit ? &in.circuit : nullptr);
            ConstraintOptions constraint_options;
            constraint_options.uniformity_rows = ln_uniformity;
            constraint_options.seed = ln_seed;
            if (!ln_early.empty() && ln_early != "none") {
                if (ln_early == "auto") {
                    auto sampler = [&](std::uint64_t seed) {
                        return in.is_circuit
                                   ? sampled_problem_expectations_circuit(in.st_code, in.model,
                                                                          in.problem, ln_shots, seed,
                                                                          threads)
                                   : sampled_problem_expectations_static(in.code, in.model, in.problem,
                                                                         ln_shots, seed, threads);
                    };
                    auto cal = calibrate_early_stopping(in.problem, in.model, sampler, strengths,
                                                        constraint_options, 20, ln_seed ^ 0xe5ull);
                    opt.fixed_iterations = static_cast<std::ptrdiff_t>(cal.median_iteration);
                    std::cout << "early stop calibrated at " << cal.median_iteration
                              << " iterations\n";
                } else {
                    opt.fixed_iterations = std::stol(ln_early);
                }
            }
            auto learned = optimize(in.problem, expectations, strengths, constraint_options, opt);
            json report = learned_to_json(learned, in);
            report["shots"] = ln_shots;
            spit(ln_out, report.dump(2));
            std::cout << "wrote " << ln_out << " (" << learned.nu.size() << " classes, solver "
                      << learned.diagnostics.solver << ")\n";
            return kExitOk;
        }
        if (eval->parsed()) {
            json learned = json::parse(slurp(ev_learned));
            auto model = noise_from_json(learned.at("learned_model").dump());
            std::vector<PauliOperator> gens, logicals;
            if (!ev_circuit.empty()) {
                auto circuit = load_circuit(ev_circuit);
                auto parity = build_parity_structure(circuit);
                auto code = build_spacetime_code(circuit, parity);
                gens = code.measured_gens;
                logicals = code.measured_logicals;
            } else {
                auto code = load_code(ev_code, {});
                gens = code.measured_gens;
                if (ev_basis == "z" || ev_basis == "xz")
                    for (const auto& l : code.logical_z) logicals.push_back(l);
                if (ev_basis == "x" || ev_basis == "xz")
                    for (const auto& l : code.logical_x) logicals.push_back(l);
            }
            SignatureMap sig(gens, logicals, model);
            std::unique_ptr<Decoder> decoder;
            if (ev_decoder == "trivial")
                decoder = std::make_unique<TrivialDecoder>();
            else if (ev_decoder == "min_weight")
                decoder = std::make_unique<MinWeightDecoder>(sig, model);
            else
                decoder = std::make_unique<LookupMleDecoder>(sig, model);
            PFailOptions opt;
            opt.seed = ev_seed;
            opt.threads = threads;
            if (ev_method == "exhaustive")
                opt.method = PFailOptions::Method::Exhaustive;
            else if (ev_method.rfind("mc:", 0) == 0) {
                opt.method = PFailOptions::Method::MonteCarlo;
                opt.mc_shots = std::stoul(ev_method.substr(3));
            } else {
                throw std::runtime_error("unknown method: " + ev_method);
            }
            auto report = estimate_p_fail(sig, model, *decoder, opt);
            json out;
            out["p_fail"] = report.p_fail;
            out["ci_half"] = report.ci_half;
            out["method"] = report.method;
            out["decoder"] = report.decoder;
            out["identifiability"] = report.identifiable;
            if (report.truncated_mass > 0) out["truncated_mass"] = report.truncated_mass;
            if (ev_target == "zero") {
                std::vector<FidelityTerm> terms;
                std::size_t k = logicals.size();
                for (std::uint64_t alpha = 0; alpha < (std::uint64_t{1} << k); ++alpha)
                    terms.push_back({alpha, 1.0});
                auto fid = logical_fidelity(report.p_fail, terms, k);
                out["fidelity"] = fid.value;
                out["fidelity_complete_basis"] = fid.complete_basis;
            }
            spit(ev_out, out.dump(2));
            std::cout << "wrote " << ev_out << " (decoder " << report.decoder << ", method "
                      << report.method << ")\n";
            return kExitOk;
        }
        if (run->parsed()) return cmd_run(run_config, threads);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

namespace {

// ------------------------------------------------------------- run scenarios

struct Summary {
    json j;
    bool pass = true;

    void threshold(const std::string& name, double value, double limit, bool below = true) {
        bool ok = below ? value <= limit : value >= limit;
        j["checks"][name] = {{"value", value}, {"limit", limit}, {"pass", ok}};
        pass = pass && ok;
    }
};

NoiseModel scenario_static_noise(const json& cfg, std::size_t n) {
    double mean = cfg.value("mean", 5e-3);
    double sigma = cfg.value("sigma", 1e-3);
    std::uint64_t seed = cfg.value("seed", std::uint64_t{1});
    return gaussian_single_qubit_model(n, mean, sigma, seed);
}

int scenario_static_code(const json& cfg, const std::string& prefix, int threads) {
    auto code = named_code(cfg.at("code").get<std::string>(),
                           cfg.value("params", std::vector<int>{}));
    auto model = scenario_static_noise(cfg.at("noise"), code.n);
    auto problem = minimal_subset(code.measured_gens, model);
    auto truth = model.rates();
    auto truth_sums = true_class_rates(problem.partition, truth);
    Summary summary;
    std::ostringstream csv;
    csv << "source,class,truth,learned,relative_error\n";

    auto run_one = [&](const std::string& tag, const std::vector<double>& expectations) {
        auto learned = optimize(problem, expectations, uniform_strengths(model), {},
                                {.solver = SolverKind::Nonlinear});
        double worst = 0;
        for (std::size_t c = 0; c < truth_sums.size(); ++c) {
            double sum = 0;
            for (std::size_t e : problem.partition.classes[c]) sum += learned.p_hat[e];
            double rel = std::abs(sum - truth_sums[c]) / truth_sums[c];
            worst = std::max(worst, rel);
            char line[160];
            std::snprintf(line, sizeof line, "%s,%zu,%.12g,%.12g,%.12g\n", tag.c_str(), c,
                          truth_sums[c], sum, rel);
            csv << line;
        }
        return worst;
    };

    double exact_worst = run_one("exact", exact_problem_expectations(problem, model));
    // The exact path must reproduce class sums up to the second-order bound.
    double bound = 0;
    for (std::size_t c = 0; c < truth_sums.size(); ++c) {
        double norm2 = 0;
        std::set<std::size_t> channels;
        for (std::size_t e : problem.partition.classes[c])
            channels.insert(model.errors()[e].channel_id);
        for (std::size_t ch : channels)
            for (std::size_t k = 1; k < model.channel(ch).probs.size(); ++k)
                norm2 += model.channel(ch).probs[k] * model.channel(ch).probs[k];
        bound = std::max(bound, 3 * kMuSecondOrderConstant * norm2 / truth_sums[c]);
    }
    summary.threshold("exact_max_relative_error", exact_worst, bound);
    for (auto n_shots : cfg.value("N", std::vector<std::size_t>{100000})) {
        auto expectations = sampled_problem_expectations_static(
            code, model, problem, n_shots, cfg.value("sample_seed", std::uint64_t{11}), threads);
        double worst = run_one("N" + std::to_string(n_shots), expectations);
        double sigma_rel = 3.0 / (std::sqrt(static_cast<double>(n_shots)) *
                                  std::sqrt(*std::min_element(truth_sums.begin(), truth_sums.end())));
        summary.threshold("sampled_worst_rel_N" + std::to_string(n_shots), worst,
                          sigma_rel + bound);
    }
    spit(prefix + "_classes.csv", csv.str());
    summary.j["scenario"] = "static_code";
    spit(prefix + "_summary.json", summary.j.dump(2));
    return summary.pass ? kExitOk : kExitThreshold;
}

int scenario_ec_circuit(const json& cfg, const std::string& prefix, int threads) {
    std::size_t d = cfg.value("distance", 3);
    std::size_t rounds = cfg.value("rounds", 2);
    auto circuit = surface_ec_circuit(d, rounds);
    StandardNoiseParams params;
    params.seed = cfg.value("seed", std::uint64_t{5});
    auto model = standard_circuit_noise(circuit, params);
    auto parity = build_parity_structure(circuit);
    auto local = localize_generator_basis(parity, LocalizeStrategy::SurfaceRecipe, circuit);
    auto st_code = build_spacetime_code(circuit, local);
    auto problem = minimal_subset(st_code.measured_gens, model);
    Summary summary;
    summary.j["generators"] = st_code.measured_gens.size();
    summary.j["classes"] = problem.partition.num_classes();
    summary.threshold("rank_equals_classes",
                      static_cast<double>(problem.rank_dp()),
                      static_cast<double>(problem.partition.num_classes()), false);

    std::ostringstream csv;
    csv << "N,class,truth,learned,relative_error\n";
    std::ostringstream layer_csv;
    layer_csv << "N,layer,arity,truth,learned\n";
    auto truth = model.rates();
    auto truth_sums = true_class_rates(problem.partition, truth);
    auto truth_layers = layer_averages(truth, model, circuit);
    double final_eta = 1e300;
    for (auto n_shots : cfg.value("N", std::vector<std::size_t>{10000})) {
        auto expectations = sampled_problem_expectations_circuit(
            st_code, model, problem, n_shots, cfg.value("sample_seed", std::uint64_t{17}), threads);
        auto learned = optimize(problem, expectations, uniform_strengths(model), {},
                                {.solver = SolverKind::Nonlinear});
        for (std::size_t c = 0; c < truth_sums.size(); ++c) {
            double sum = 0;
            for (std::size_t e : problem.partition.classes[c]) sum += learned.p_hat[e];
            char line[160];
            std::snprintf(line, sizeof line, "%zu,%zu,%.12g,%.12g,%.12g\n", n_shots, c,
                          truth_sums[c], sum, std::abs(sum - truth_sums[c]) / truth_sums[c]);
            csv << line;
        }
        auto learned_layers = layer_averages(learned.p_hat, model, circuit);
        for (std::size_t i = 0; i < truth_layers.size(); ++i) {
            char line[160];
            std::snprintf(line, sizeof line, "%zu,%zu,%zu,%.12g,%.12g\n", n_shots,
                          truth_layers[i].layer, truth_layers[i].arity, truth_layers[i].average,
                          learned_layers[i].average);
            layer_csv << line;
        }
        final_eta = mean_relative_class_error(problem.partition, truth, learned.class_rates);
    }
    summary.threshold("final_mean_relative_class_error", final_eta, 0.5);
    spit(prefix + "_classes.csv", csv.str());
    spit(prefix + "_layers.csv", layer_csv.str());
    summary.j["scenario"] = "ec_circuit";
    spit(prefix + "_summary.json", summary.j.dump(2));
    return summary.pass ? kExitOk : kExitThreshold;
}

int scenario_logical_eval(const json& cfg, const std::string& prefix, int threads) {
    std::size_t d = cfg.value("distance", 3);
    auto code = named_code("rotated_surface", {static_cast<int>(d)});
    auto model = scenario_static_noise(cfg.at("noise"), code.n);
    SignatureMap sig(code.measured_gens, {code.logical_z[0]}, model);
    MinWeightDecoder decoder(sig, model);
    PFailOptions exact_opt;
    exact_opt.method = PFailOptions::Method::Exhaustive;
    exact_opt.dense_qubit_limit = d == 3 ? 10 : 2;
    exact_opt.weight_cap = 4;
    exact_opt.threads = threads;
    auto truth_report = estimate_p_fail(sig, model, decoder, exact_opt);

    std::size_t n_shots = cfg.value("N", 3000);
    auto problem = minimal_subset(code.measured_gens, model);
    auto expectations = sampled_problem_expectations_static(
        code, model, problem, n_shots, cfg.value("sample_seed", std::uint64_t{23}), threads);
    auto learned = optimize(problem, expectations, uniform_strengths(model), {},
                            {.solver = SolverKind::Nonlinear});
    auto learned_report = estimate_p_fail(sig, model.with_rates(learned.p_hat), decoder, exact_opt);

    std::ostringstream csv;
    csv << "flip,truth,learned\n";
    for (std::size_t f = 0; f < truth_report.p_fail.size(); ++f) {
        char line[128];
        std::snprintf(line, sizeof line, "%zu,%.12g,%.12g\n", f, truth_report.p_fail[f],
                      learned_report.p_fail[f]);
        csv << line;
    }
    spit(prefix + "_pfail.csv", csv.str());
    Summary summary;
    summary.j["scenario"] = "logical_eval";
    double rel = std::abs(learned_report.p_fail[1] - truth_report.p_fail[1]) / truth_report.p_fail[1];
    summary.threshold("p_fail_relative_error", rel, 1.0);
    spit(prefix + "_summary.json", summary.j.dump(2));
    return summary.pass ? kExitOk : kExitThreshold;
}

int scenario_scaling_sweep(const json& cfg, const std::string& prefix, int threads) {
    auto distances = cfg.value("distances", std::vector<int>{3, 5, 7});
    auto shot_grid = cfg.value("N", std::vector<std::size_t>{2000, 8000, 32000});
    std::size_t reps = cfg.value("reps", 3);
    std::ostringstream csv;
    csv << "d,N,rep,mean_relative_error\n";
    Summary summary;
    for (int d : distances) {
        auto code = named_code("rotated_surface", {d});
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t count = 0;
        for (std::size_t gi = 0; gi < shot_grid.size(); ++gi) {
            for (std::size_t rep = 0; rep < reps; ++rep) {
                auto model = gaussian_single_qubit_model(
                    code.n, 5.0 / 3.0e3, 1.0 / 3.0e3,
                    cfg.value("seed", std::uint64_t{900}) + 31 * d + rep);
                auto problem = minimal_subset(code.measured_gens, model);
                auto expectations = sampled_problem_expectations_static(
                    code, model, problem, shot_grid[gi], 7000 + 17 * gi + rep, threads);
                auto learned = optimize(problem, expectations, uniform_strengths(model), {},
                                        {.solver = SolverKind::Nonlinear});
                double eta =
                    mean_relative_class_error(problem.partition, model.rates(), learned.class_rates);
                char line[128];
                std::snprintf(line, sizeof line, "%d,%zu,%zu,%.12g\n", d, shot_grid[gi], rep, eta);
                csv << line;
                double x = std::log(static_cast<double>(shot_grid[gi])), y = std::log(eta);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                ++count;
            }
        }
        double n = static_cast<double>(count);
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        summary.j["slopes"][std::to_string(d)] = slope;
        summary.threshold("slope_d" + std::to_string(d) + "_near_-0.5", std::abs(slope + 0.5), 0.1);
    }
    spit(prefix + "_sweep.csv", csv.str());
    summary.j["scenario"] = "scaling_sweep";
    spit(prefix + "_summary.json", summary.j.dump(2));
    return summary.pass ? kExitOk : kExitThreshold;
}

int scenario_drift_demo(const json& cfg, const std::string& prefix, int threads) {
    auto demo = make_drift_demo(cfg.value("distance", 3), cfg.value("rounds", 4),
                                cfg.value("p0_1q", 3e-4), cfg.value("p0_2q", 5e-3),
                                cfg.value("sigma_ratio", 0.1), cfg.value("seed", std::uint64_t{7}));
    auto parity = build_parity_structure(demo.circuit);
    auto local = localize_generator_basis(parity, LocalizeStrategy::SurfaceRecipe, demo.circuit);
    auto st_code = build_spacetime_code(demo.circuit, local);
    auto problem = minimal_subset(st_code.measured_gens, demo.truth);
    std::size_t n_shots = cfg.value("N", 10000);

    auto strengths = typed_strengths(demo.truth, demo.circuit, 1.0, 1.0,
                                     cfg.value("p0_2q", 5e-3) / cfg.value("p0_1q", 3e-4), 1.0);
    std::ostringstream csv;
    csv << "source,layer,true_2q,learned_2q,true_1q,learned_1q\n";
    Summary summary;
    for (const std::string tag : {std::string("exact"), std::string("sampled")}) {
        std::vector<double> expectations =
            tag == "exact" ? exact_problem_expectations(problem, demo.truth)
                           : sampled_problem_expectations_circuit(
                                 st_code, demo.truth, problem, n_shots,
                                 cfg.value("sample_seed", std::uint64_t{31}), threads);
        OptimizeOptions opt;
        opt.solver = SolverKind::Nonlinear;
        opt.max_iterations = cfg.value("max_iterations", 100000);
        auto learned = optimize(problem, expectations, strengths, {}, opt);
        auto averages = layer_averages(learned.p_hat, demo.truth, demo.circuit);
        std::vector<double> learned_1q(demo.circuit.depth(), 0.0), learned_2q(demo.circuit.depth(), 0.0);
        for (const auto& avg : averages) {
            if (avg.arity == 1) learned_1q[avg.layer - 1] = avg.average;
            if (avg.arity == 2) learned_2q[avg.layer - 1] = avg.average;
        }
        double rel_sum = 0;
        std::size_t rel_count = 0;
        for (std::size_t t = 0; t < demo.circuit.depth(); ++t) {
            char line[192];
            std::snprintf(line, sizeof line, "%s,%zu,%.12g,%.12g,%.12g,%.12g\n", tag.c_str(), t + 1,
                          demo.true_2q_per_layer[t], learned_2q[t], demo.true_1q_per_layer[t],
                          learned_1q[t]);
            csv << line;
            if (demo.true_2q_per_layer[t] > 0) {
                rel_sum += std::abs(learned_2q[t] - demo.true_2q_per_layer[t]) /
                           demo.true_2q_per_layer[t];
                ++rel_count;
            }
        }
        summary.threshold(tag + "_mean_2q_relative_error", rel_sum / rel_count, 0.5);
    }
    spit(prefix + "_layers.csv", csv.str());
    summary.j["scenario"] = "drift_demo";
    spit(prefix + "_summary.json", summary.j.dump(2));
    return summary.pass ? kExitOk : kExitThreshold;
}

int cmd_run(const std::string& config_path, int threads) {
    json cfg = json::parse(slurp(config_path));
    std::string scenario = cfg.at("scenario").get<std::string>();
    std::string prefix = cfg.value("out_prefix", scenario);
    if (cfg.contains("N")) {
        const auto& n = cfg.at("N");
        if (n.is_number() && n.get<long>() <= 0) throw std::runtime_error("N must be positive");
        if (n.is_array())
            for (const auto& v : n)
                if (v.get<long>() <= 0) throw std::runtime_error("N entries must be positive");
    }
    int rc = kExitValidation;
    if (scenario == "static_code")
        rc = scenario_static_code(cfg, prefix, threads);
    else if (scenario == "ec_circuit")
        rc = scenario_ec_circuit(cfg, prefix, threads);
    else if (scenario == "logical_eval")
        rc = scenario_logical_eval(cfg, prefix, threads);
    else if (scenario == "scaling_sweep")
        rc = scenario_scaling_sweep(cfg, prefix, threads);
    else if (scenario == "drift_demo")
        rc = scenario_drift_demo(cfg, prefix, threads);
    else
        throw std::runtime_error("unknown scenario: " + scenario);
    std::cout << scenario << " finished with exit code " << rc << "\n";
    return rc;
}

}  // namespace
