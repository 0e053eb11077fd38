#include "relaybf/harness.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "relaybf/log.hpp"
#include "relaybf/rng.hpp"
#include "relaybf/signal_model.hpp"

namespace relaybf {

using nlohmann::json;

namespace {
constexpr const char* kCodeVersion = "relay-beamform 1.0.0";

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}
}  // namespace

std::string sweep_variable_name(SweepVariable variable) {
    switch (variable) {
        case SweepVariable::PowerBudget: return "power_budget";
        case SweepVariable::InterferenceCap: return "interference_cap";
        case SweepVariable::RelayCount: return "relays";
        case SweepVariable::PairCount: return "pairs";
    }
    return "unknown";
}

SweepVariable sweep_variable_from_name(const std::string& name) {
    if (name == "power_budget") return SweepVariable::PowerBudget;
    if (name == "interference_cap") return SweepVariable::InterferenceCap;
    if (name == "relays") return SweepVariable::RelayCount;
    if (name == "pairs") return SweepVariable::PairCount;
    throw std::invalid_argument("unknown sweep variable: " + name);
}

void SweepSpec::validate() const {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
    for (size_t i = 1; i < values.size(); ++i)
        if (!(values[i] > values[i - 1]))
            throw std::invalid_argument("sweep values must be strictly increasing");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    for (double v : values) config_for_value(*this, v).validate();
}

ScenarioConfig config_for_value(const SweepSpec& spec, double value) {
    ScenarioConfig config = spec.base;
    switch (spec.variable) {
        case SweepVariable::PowerBudget:
            config.power_budget = db_to_linear(value);
            break;
        case SweepVariable::InterferenceCap:
            config.interference_cap = db_to_linear(value);
            break;
        case SweepVariable::RelayCount:
            config.relay_count = static_cast<int>(std::lround(value));
            break;
        case SweepVariable::PairCount:
            config.tx_count = config.rx_count = static_cast<int>(std::lround(value));
            break;
    }
    return config;
}

std::uint64_t trial_seed(const SweepSpec& spec, double value, int trial) {
    const bool crn = spec.variable == SweepVariable::PowerBudget ||
                     spec.variable == SweepVariable::InterferenceCap;
    const std::uint64_t key = crn ? 0 : std::bit_cast<std::uint64_t>(value);
    return derive_seed(spec.seed_base, key, static_cast<std::uint64_t>(trial));
}

SweepResult run_sweep(const SweepSpec& spec, int workers) {
    spec.validate();
    const int n_values = static_cast<int>(spec.values.size());
    const int n_jobs = n_values * spec.trials;

    // Seeds must never repeat across trials of one point.
    for (double v : spec.values) {
        std::set<std::uint64_t> seen;
        for (int t = 0; t < spec.trials; ++t)
            if (!seen.insert(trial_seed(spec, v, t)).second)
                throw std::logic_error("derived seed collision within a sweep point");
    }

    struct TrialOutcome {
        bool ok = false;
        bool sound = true;
        double worst_db = 0.0;
    };
    std::vector<TrialOutcome> outcomes(n_jobs);
    std::atomic<int> next{0};

    auto work = [&] {
        for (;;) {
            const int job = next.fetch_add(1);
            if (job >= n_jobs) return;
            const int vi = job / spec.trials;
            const int trial = job % spec.trials;
            const double value = spec.values[vi];

            ScenarioConfig config = config_for_value(spec, value);
            config.seed = trial_seed(spec, value, trial);
            const ChannelSet channels = sample_channels(config);
            const ReceiverForms forms = build_receiver_forms(config, channels);
            const BeamSolution sol = maximize_min_sinr(forms, config.interference_cap,
                                                       config.power_budget, spec.solver);

            TrialOutcome& out = outcomes[job];
            if (sol.status == BeamStatus::SolverFailure) {
                out.ok = false;
                continue;
            }
            out.ok = true;
            out.worst_db = linear_to_db(std::max(sol.gamma_star, 1e-300));
            out.sound = sol.sinr_per_rx.minCoeff() >= sol.gamma_lo * (1.0 - 1e-6) &&
                        sol.pu_interference <= config.interference_cap * (1.0 + 1e-6) &&
                        sol.total_power <= config.power_budget * (1.0 + 1e-6);
        }
    };

    workers = std::max(1, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    SweepResult result;
    result.spec = spec;
    result.timestamp = utc_timestamp();
    result.code_version = kCodeVersion;
    result.points.resize(n_values);
    for (int vi = 0; vi < n_values; ++vi) {
        SweepPoint& pt = result.points[vi];
        pt.value = spec.values[vi];
        for (int trial = 0; trial < spec.trials; ++trial) {
            const TrialOutcome& out = outcomes[vi * spec.trials + trial];
            if (!out.ok) {
                ++pt.trials_failed;
                continue;
            }
            ++pt.trials_ok;
            pt.raw_db.push_back(out.worst_db);
            if (!out.sound) ++pt.soundness_violations;
        }
        if (pt.trials_ok > 0) {
            double sum = 0.0;
            for (double x : pt.raw_db) sum += x;
            pt.mean_worst_sinr_db = sum / pt.trials_ok;
            double ss = 0.0;
            for (double x : pt.raw_db) ss += (x - pt.mean_worst_sinr_db) *
                                             (x - pt.mean_worst_sinr_db);
            const double sample_std = pt.trials_ok > 1 ? std::sqrt(ss / (pt.trials_ok - 1)) : 0.0;
            pt.stderr_db = sample_std / std::sqrt(static_cast<double>(pt.trials_ok));
        } else {
            pt.mean_worst_sinr_db = std::numeric_limits<double>::quiet_NaN();
            pt.stderr_db = std::numeric_limits<double>::quiet_NaN();
        }
        pt.flagged = pt.trials_failed * 10 > spec.trials;
        if (pt.flagged) {
            std::ostringstream oss;
            oss << "sweep point " << sweep_variable_name(spec.variable) << "=" << pt.value
                << " had " << pt.trials_failed << "/" << spec.trials << " solver failures";
            log::error(oss.str());
        }
    }
    return result;
}

void emit_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "sweep_variable,value,mean_worst_sinr_db,stderr_db,trials_ok,trials_failed\n";
    const std::string var = sweep_variable_name(result.spec.variable);
    for (const SweepPoint& pt : result.points) {
        out << var << ',' << format_number(pt.value) << ','
            << format_number(pt.mean_worst_sinr_db) << ',' << format_number(pt.stderr_db)
            << ',' << pt.trials_ok << ',' << pt.trials_failed << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

json spec_to_json(const SweepSpec& spec) {
    return {{"base",
             {{"relay_count", spec.base.relay_count},
              {"tx_count", spec.base.tx_count},
              {"rx_count", spec.base.rx_count},
              {"pu_power", spec.base.pu_power},
              {"su_power", spec.base.su_power},
              {"noise_var", spec.base.noise_var},
              {"interference_cap", spec.base.interference_cap},
              {"power_budget", spec.base.power_budget},
              {"seed", spec.base.seed}}},
            {"variable", sweep_variable_name(spec.variable)},
            {"values", spec.values},
            {"trials", spec.trials},
            {"seed_base", spec.seed_base},
            {"note", spec.note},
            {"gamma_rel_tol", spec.solver.gamma_rel_tol}};
}

SweepSpec spec_from_json(const json& j) {
    SweepSpec spec;
    const json& b = j.at("base");
    spec.base.relay_count = b.at("relay_count").get<int>();
    spec.base.tx_count = b.at("tx_count").get<int>();
    spec.base.rx_count = b.at("rx_count").get<int>();
    spec.base.pu_power = b.at("pu_power").get<double>();
    spec.base.su_power = b.at("su_power").get<double>();
    spec.base.noise_var = b.at("noise_var").get<double>();
    spec.base.interference_cap = b.at("interference_cap").get<double>();
    spec.base.power_budget = b.at("power_budget").get<double>();
    spec.base.seed = b.at("seed").get<std::uint64_t>();
    spec.variable = sweep_variable_from_name(j.at("variable").get<std::string>());
    spec.values = j.at("values").get<std::vector<double>>();
    spec.trials = j.at("trials").get<int>();
    spec.seed_base = j.at("seed_base").get<std::uint64_t>();
    spec.note = j.value("note", std::string{});
    spec.solver.gamma_rel_tol = j.value("gamma_rel_tol", spec.solver.gamma_rel_tol);
    return spec;
}

}  // namespace

void emit_json(const SweepResult& result, const std::string& path) {
    json doc;
    doc["schema_version"] = 1;
    doc["spec"] = spec_to_json(result.spec);
    json points = json::array();
    for (const SweepPoint& pt : result.points) {
        points.push_back({{"value", pt.value},
                          {"mean_worst_sinr_db", pt.mean_worst_sinr_db},
                          {"stderr_db", pt.stderr_db},
                          {"trials_ok", pt.trials_ok},
                          {"trials_failed", pt.trials_failed},
                          {"flagged", pt.flagged},
                          {"soundness_violations", pt.soundness_violations},
                          {"raw_db", pt.raw_db}});
    }
    doc["points"] = std::move(points);
    doc["metadata"] = {{"timestamp", result.timestamp},
                       {"code_version", result.code_version},
                       {"note", result.spec.note}};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

void emit(const SweepResult& result, const std::string& format, const std::string& path) {
    if (format == "csv")
        emit_csv(result, path);
    else if (format == "json")
        emit_json(result, path);
    else
        throw std::invalid_argument("unknown output format: " + format);
}

SweepResult load_result_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    json doc = json::parse(in);
    if (doc.value("schema_version", 0) != 1)
        throw std::invalid_argument("result file: unsupported schema_version");

    SweepResult result;
    result.spec = spec_from_json(doc.at("spec"));
    for (const json& p : doc.at("points")) {
        SweepPoint pt;
        pt.value = p.at("value").get<double>();
        pt.mean_worst_sinr_db = p.at("mean_worst_sinr_db").get<double>();
        pt.stderr_db = p.at("stderr_db").get<double>();
        pt.trials_ok = p.at("trials_ok").get<int>();
        pt.trials_failed = p.at("trials_failed").get<int>();
        pt.flagged = p.at("flagged").get<bool>();
        pt.soundness_violations = p.at("soundness_violations").get<int>();
        pt.raw_db = p.at("raw_db").get<std::vector<double>>();
        result.points.push_back(std::move(pt));
    }
    result.timestamp = doc.at("metadata").at("timestamp").get<std::string>();
    result.code_version = doc.at("metadata").at("code_version").get<std::string>();
    return result;
}

SweepSpec load_sweep_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    json doc = json::parse(in);
    if (doc.value("schema_version", 0) != 1)
        throw std::invalid_argument("sweep spec: unsupported schema_version");

    SweepSpec spec;
    const json& b = doc.at("base");
    spec.base.relay_count = b.at("relays").get<int>();
    spec.base.tx_count = spec.base.rx_count = b.at("pairs").get<int>();
    spec.base.pu_power = db_to_linear(b.value("pu_power_db", 5.0));
    spec.base.su_power = db_to_linear(b.value("su_power_db", 5.0));
    spec.base.noise_var = b.value("noise_var", 1.0);
    spec.base.interference_cap = db_to_linear(b.value("interference_cap_db", 0.0));
    spec.base.power_budget = db_to_linear(b.value("power_budget_db", 10.0));
    spec.variable = sweep_variable_from_name(doc.at("sweep").get<std::string>());
    spec.values = doc.at("values").get<std::vector<double>>();
    spec.trials = doc.value("trials", 200);
    spec.seed_base = doc.value("seed_base", std::uint64_t{0});
    spec.note = doc.value("note", std::string{});
    spec.solver.gamma_rel_tol = doc.value("gamma_rel_tol", spec.solver.gamma_rel_tol);
    return spec;
}

}  // namespace relaybf
