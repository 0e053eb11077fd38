#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "relaybf/optimizer.hpp"
#include "relaybf/scenario.hpp"

namespace relaybf {

enum class SweepVariable { PowerBudget, InterferenceCap, RelayCount, PairCount };

std::string sweep_variable_name(SweepVariable variable);
SweepVariable sweep_variable_from_name(const std::string& name);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

struct SweepSpec {
    ScenarioConfig base;          // linear units; the swept field is overridden per value
    SweepVariable variable = SweepVariable::PowerBudget;
    std::vector<double> values;   // dB for power sweeps, integers for count sweeps
    int trials = 200;
    std::uint64_t seed_base = 0;
    std::string note;             // free-form, echoed into result metadata
    SolverSettings solver;

    void validate() const;
};

struct SweepPoint {
    double value = 0.0;
    double mean_worst_sinr_db = 0.0;
    double stderr_db = 0.0;            // sample std / sqrt(successes)
    int trials_ok = 0;
    int trials_failed = 0;
    bool flagged = false;              // more than 10% solver failures
    int soundness_violations = 0;      // solutions violating their own certificates
    std::vector<double> raw_db;        // per successful trial, in trial order
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepPoint> points;
    std::string timestamp;     // metadata only; never written to CSV
    std::string code_version;
};

/// Scenario parameters at one sweep value.
ScenarioConfig config_for_value(const SweepSpec& spec, double value);

/// Seed for one (value, trial) cell. Power-cap sweeps reuse the channel draw
/// across values at equal trial index (common random numbers); count sweeps
/// derive the seed from the value as well since dimensions change.
std::uint64_t trial_seed(const SweepSpec& spec, double value, int trial);

/// Deterministic for a fixed spec, regardless of worker count.
SweepResult run_sweep(const SweepSpec& spec, int workers = 1);

void emit_csv(const SweepResult& result, const std::string& path);
void emit_json(const SweepResult& result, const std::string& path);
void emit(const SweepResult& result, const std::string& format, const std::string& path);

SweepResult load_result_json(const std::string& path);

/// CLI-facing sweep description with powers in dB; see README for the schema.
SweepSpec load_sweep_spec(const std::string& path);

}  // namespace relaybf
