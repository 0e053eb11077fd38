#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <thread>

#include "relaybf/harness.hpp"
#include "relaybf/log.hpp"
#include "relaybf/optimizer.hpp"
#include "relaybf/scenario.hpp"
#include "relaybf/signal_model.hpp"

namespace {

using nlohmann::json;
using namespace relaybf;

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitSolverFailure = 3;

json complex_parts(const Eigen::VectorXcd& v, bool real) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(real ? v(i).real() : v(i).imag());
    return out;
}

json matrix_parts(const Eigen::MatrixXcd& m, bool real) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(real ? m(r, c).real() : m(r, c).imag());
        rows.push_back(std::move(row));
    }
    return rows;
}

json solution_to_json(const BeamSolution& sol) {
    json out;
    out["status"] = to_string(sol.status);
    out["gamma_star"] = sol.gamma_star;
    if (sol.gamma_star > 0.0)
        out["gamma_star_db"] = linear_to_db(sol.gamma_star);
    else
        out["gamma_star_db"] = nullptr;
    out["sinr_per_rx"] =
        std::vector<double>(sol.sinr_per_rx.begin(), sol.sinr_per_rx.end());
    out["pu_interference"] = sol.pu_interference;
    out["total_power"] = sol.total_power;
    out["weights_re"] = complex_parts(sol.weights, true);
    out["weights_im"] = complex_parts(sol.weights, false);
    out["bracket"] = {{"gamma_lo", sol.gamma_lo}, {"gamma_hi", sol.gamma_hi}};
    out["bisection_steps"] = sol.bisection_steps;
    if (!sol.message.empty()) out["message"] = sol.message;
    return out;
}

void dump_forms(const ScenarioConfig& config, const ChannelSet& channels,
                const ReceiverForms& forms, const std::string& path) {
    // Scenario schema plus a debug "forms" block with the same encoding.
    save_scenario(config, channels, path);
    std::ifstream in(path);
    json doc = json::parse(in);
    in.close();

    json fj;
    fj["receivers"] = json::array();
    for (size_t j = 0; j < forms.signal.size(); ++j) {
        json per_rx;
        per_rx["signal_re"] = matrix_parts(forms.signal[j], true);
        per_rx["signal_im"] = matrix_parts(forms.signal[j], false);
        per_rx["pu_interf_re"] = matrix_parts(forms.pu_interf[j], true);
        per_rx["pu_interf_im"] = matrix_parts(forms.pu_interf[j], false);
        per_rx["su_interf_re"] = matrix_parts(forms.su_interf[j], true);
        per_rx["su_interf_im"] = matrix_parts(forms.su_interf[j], false);
        per_rx["relay_noise_re"] = matrix_parts(forms.relay_noise[j], true);
        per_rx["relay_noise_im"] = matrix_parts(forms.relay_noise[j], false);
        per_rx["rx_noise"] = forms.rx_noise(j);
        fj["receivers"].push_back(std::move(per_rx));
    }
    fj["pu_total_re"] = matrix_parts(forms.pu_total, true);
    fj["pu_total_im"] = matrix_parts(forms.pu_total, false);
    doc["forms"] = std::move(fj);

    std::ofstream out(path);
    out << doc.dump(2) << "\n";
}

int run_solve(const std::string& scenario_path, double tol,
              const std::string& forms_path) {
    const auto [config, channels] = load_scenario(scenario_path);
    const ReceiverForms forms = build_receiver_forms(config, channels);
    if (!forms_path.empty()) dump_forms(config, channels, forms, forms_path);

    SolverSettings settings;
    settings.gamma_rel_tol = tol;
    const BeamSolution sol =
        maximize_min_sinr(forms, config.interference_cap, config.power_budget, settings);
    std::cout << solution_to_json(sol).dump(2) << "\n";
    return sol.status == BeamStatus::Converged ? kExitOk : kExitSolverFailure;
}

int run_sweep_cmd(const std::string& spec_path, const std::string& out_dir,
                  const std::string& format, int workers) {
    const SweepSpec spec = load_sweep_spec(spec_path);
    std::filesystem::create_directories(out_dir);
    const std::string stem = std::filesystem::path(spec_path).stem().string();
    const std::string out_path =
        (std::filesystem::path(out_dir) / (stem + "." + format)).string();

    const SweepResult result = run_sweep(spec, workers);
    emit(result, format, out_path);
    log::info("sweep written to " + out_path);

    // Sporadic failed trials are excluded from the means and reported in the
    // output; only a flagged point (more than 10% failures) is fatal.
    for (const SweepPoint& pt : result.points)
        if (pt.flagged) return kExitSolverFailure;
    return kExitOk;
}

int run_oracle(const std::string& scenario_path, long samples, std::uint64_t seed,
               int workers) {
    const auto [config, channels] = load_scenario(scenario_path);
    const ReceiverForms forms = build_receiver_forms(config, channels);
    const OracleResult oracle = grid_oracle(forms, config.interference_cap,
                                            config.power_budget, samples, seed, workers);
    json out;
    out["gamma_best"] = oracle.gamma_best;
    if (oracle.gamma_best > 0.0)
        out["gamma_best_db"] = linear_to_db(oracle.gamma_best);
    else
        out["gamma_best_db"] = nullptr;
    out["weights_re"] = complex_parts(oracle.w_best, true);
    out["weights_im"] = complex_parts(oracle.w_best, false);
    out["n_samples"] = samples;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int run_sample(int relays, int pairs, double pp_db, double ps_db, double noise_var,
               double ip_db, double pt_db, std::uint64_t seed, const std::string& out) {
    ScenarioConfig config;
    config.relay_count = relays;
    config.tx_count = config.rx_count = pairs;
    config.pu_power = db_to_linear(pp_db);
    config.su_power = db_to_linear(ps_db);
    config.noise_var = noise_var;
    config.interference_cap = db_to_linear(ip_db);
    config.power_budget = db_to_linear(pt_db);
    config.seed = seed;
    config.validate();
    save_scenario(config, sample_channels(config), out);
    log::info("scenario written to " + out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Max-min SINR relay beamforming for underlay spectrum sharing"};
    app.require_subcommand(1);

    std::string scenario_path, forms_path, spec_path, out_dir, out_file;
    std::string format = "csv";
    double tol = 1e-4;
    long samples = 1000000;
    std::uint64_t seed = 0;
    int workers = std::max(1u, std::thread::hardware_concurrency());
    int relays = 10, pairs = 3;
    double pp_db = 5.0, ps_db = 5.0, noise_var = 1.0, ip_db = 0.0, pt_db = 10.0;

    auto* solve_cmd = app.add_subcommand("solve", "Solve one scenario file");
    solve_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    solve_cmd->add_option("--tol", tol, "relative SINR bracket tolerance");
    solve_cmd->add_option("--dump-forms", forms_path,
                          "write scenario plus quadratic forms to this file");

    auto* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo parameter sweep");
    sweep_cmd->add_option("--spec", spec_path, "sweep spec JSON file")->required();
    sweep_cmd->add_option("--out", out_dir, "output directory")->required();
    sweep_cmd->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sweep_cmd->add_option("--workers", workers, "worker thread count");

    auto* oracle_cmd =
        app.add_subcommand("oracle", "Brute-force baseline (at most 3 relays)");
    oracle_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    oracle_cmd->add_option("--samples", samples, "number of sampled directions");
    oracle_cmd->add_option("--seed", seed, "oracle RNG seed");
    oracle_cmd->add_option("--workers", workers, "worker thread count");

    auto* sample_cmd = app.add_subcommand("sample", "Generate a random scenario file");
    sample_cmd->add_option("--relays", relays, "relay count");
    sample_cmd->add_option("--pairs", pairs, "secondary pair count");
    sample_cmd->add_option("--pp-db", pp_db, "PU-TX power, dB");
    sample_cmd->add_option("--ps-db", ps_db, "per SU-TX power, dB");
    sample_cmd->add_option("--noise-var", noise_var, "noise variance, linear");
    sample_cmd->add_option("--ip-db", ip_db, "PU-RX interference cap, dB");
    sample_cmd->add_option("--pt-db", pt_db, "relay power budget, dB");
    sample_cmd->add_option("--seed", seed, "channel RNG seed");
    sample_cmd->add_option("--out", out_file, "output scenario file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalidInput;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(scenario_path, tol, forms_path);
        if (sweep_cmd->parsed()) return run_sweep_cmd(spec_path, out_dir, format, workers);
        if (oracle_cmd->parsed()) return run_oracle(scenario_path, samples, seed, workers);
        if (sample_cmd->parsed())
            return run_sample(relays, pairs, pp_db, ps_db, noise_var, ip_db, pt_db, seed,
                              out_file);
    } catch (const std::exception& e) {
        log::error(e.what());
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    return kExitInvalidInput;
}
