#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "relaybf/signal_model.hpp"
#include "relaybf/socp.hpp"

namespace relaybf {

struct SolverSettings {
    double gamma_rel_tol = 1e-4;  // relative width of the final SINR bracket
    int max_bisection = 64;
    SolveOptions cone;            // passed through to the cone solver
    int anchor_rx = 0;            // receiver whose effective channel pins the phase
};

enum class BeamStatus { Converged, InfeasibleAtZero, SolverFailure };

const char* to_string(BeamStatus status);

struct BisectionStep {
    double gamma = 0.0;     // tested SINR level
    double slack = 0.0;     // achieved max-slack t* at that level
    bool feasible = false;  // t* >= 0
};

struct BeamSolution {
    BeamVector weights;
    double gamma_star = 0.0;        // achieved worst-case SINR, recomputed from weights
    Eigen::VectorXd sinr_per_rx;
    double pu_interference = 0.0;
    double total_power = 0.0;
    double gamma_lo = 0.0;          // final bracket, gamma_lo certified feasible
    double gamma_hi = 0.0;
    int bisection_steps = 0;
    BeamStatus status = BeamStatus::Converged;
    std::vector<BisectionStep> trace;
    std::string message;
};

/// Certified upper bound on the worst-case SINR: drops every interference term
/// and spends the whole power budget on the weakest receiver's signal form.
double upper_bound_gamma(const ReceiverForms& forms, double power_budget);

/// Bisection over the SINR level gamma, testing a max-slack cone problem at
/// sqrt(gamma) per step. gamma = 0 is always feasible (w = 0), so the bracket
/// is never empty.
BeamSolution maximize_min_sinr(const ReceiverForms& forms, double interference_cap,
                               double power_budget, const SolverSettings& settings = {});

struct OracleResult {
    double gamma_best = 0.0;
    BeamVector w_best;
};

/// Brute-force lower bound on the optimum: uniform directions on the complex
/// sphere, a 100-point radial grid per direction plus the exact feasibility
/// boundary, infeasible points discarded. Guarded to R <= 3.
OracleResult grid_oracle(const ReceiverForms& forms, double interference_cap,
                         double power_budget, long n_samples = 1000000,
                         std::uint64_t seed = 0, int workers = 1);

}  // namespace relaybf
