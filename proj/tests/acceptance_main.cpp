// Acceptance suite: end-to-end checks of the solver, the physical-layer
// oracle agreement, and the qualitative behavior of the three sweep studies.
// Prints one PASS/FAIL line per criterion; exit code is the failure count.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "generators.hpp"
#include "helpers.hpp"
#include "relaybf/harness.hpp"
#include "relaybf/optimizer.hpp"
#include "relaybf/rng.hpp"
#include "relaybf/socp.hpp"

using namespace relaybf;
using namespace relaybf::testing;

namespace {

int g_workers = 1;
int g_soundness_violations = 0;  // accumulated across criteria 2, 3 and the sweep studies
int g_soundness_checks = 0;

struct Criterion {
    int id;
    std::string label;
    std::function<bool(std::string&)> run;
};

double quad(const Eigen::MatrixXcd& q, const BeamVector& w) {
    return std::max(0.0, (w.dot(q * w)).real());
}

void check_soundness(const BeamSolution& sol, double interference_cap,
                     double power_budget) {
    ++g_soundness_checks;
    const bool ok = sol.sinr_per_rx.minCoeff() >= sol.gamma_lo * (1.0 - 1e-6) &&
                    sol.pu_interference <= interference_cap * (1.0 + 1e-6) &&
                    sol.total_power <= power_budget * (1.0 + 1e-6);
    if (!ok) ++g_soundness_violations;
}

// --- criterion 1: analytic forms vs symbol-level simulation ------------------

bool run_oracle_equivalence(std::string& detail) {
    bool ok = true;
    double worst_rel = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ScenarioConfig config = make_config(4, 2, seed);
        const ChannelSet channels = sample_channels(config);
        const ReceiverForms forms = build_receiver_forms(config, channels);

        std::mt19937_64 rng(derive_seed(1, 0xACCE97ULL, seed));
        BeamVector w = random_complex_vector(4, rng);
        w *= std::sqrt(config.power_budget) / w.norm();

        const EmpiricalPowers est = empirical_powers(w, config, channels, 1000000, seed);
        for (int j = 0; j < 2; ++j) {
            const double s_ref = quad(forms.signal[j], w);
            const double in_ref = quad(forms.pu_interf[j], w) +
                                  quad(forms.su_interf[j], w) +
                                  quad(forms.relay_noise[j], w) + config.noise_var;
            const double s_rel = std::abs(est.signal(j) - s_ref) / s_ref;
            const double in_rel =
                std::abs(est.interference(j) + est.noise(j) - in_ref) / in_ref;
            worst_rel = std::max({worst_rel, s_rel, in_rel});
            ok = ok && s_rel <= 0.01 && in_rel <= 0.01;
        }
        const double pu_ref = pu_interference(w, forms);
        const double pu_rel = std::abs(est.pu_interference - pu_ref) / pu_ref;
        worst_rel = std::max(worst_rel, pu_rel);
        ok = ok && pu_rel <= 0.01;
    }
    std::ostringstream oss;
    oss << "20 scenarios (R=4, M=N=2), 1e6 samples, worst relative error "
        << worst_rel;
    detail = oss.str();
    return ok;
}

// --- criterion 2: closed-form scalar case ------------------------------------

bool run_closed_form(std::string& detail) {
    auto [config, channels] = unit_scalar_scenario();
    const ReceiverForms forms = build_receiver_forms(config, channels);

    const BeamSolution power_limited = maximize_min_sinr(forms, 2.0, 3.0);
    check_soundness(power_limited, 2.0, 3.0);
    const BeamSolution cap_limited = maximize_min_sinr(forms, 0.5, 3.0);
    check_soundness(cap_limited, 0.5, 3.0);

    const double err1 = std::abs(power_limited.gamma_star - 1.0 / 3.0);
    const double err2 = std::abs(cap_limited.gamma_star - 1.0 / 6.0);
    std::ostringstream oss;
    oss << "gamma*=" << power_limited.gamma_star << " (target 1/3), "
        << cap_limited.gamma_star << " (target 1/6)";
    detail = oss.str();
    return power_limited.status == BeamStatus::Converged &&
           cap_limited.status == BeamStatus::Converged && err1 <= 1e-3 && err2 <= 1e-3;
}

// --- criterion 3: single-receiver exactness against the grid oracle ----------

bool run_n1_exactness(std::string& detail) {
    bool ok = true;
    double worst_rel = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ScenarioConfig config = make_config(2, 1, seed);
        const ReceiverForms forms = build_receiver_forms(config, sample_channels(config));
        const BeamSolution sol = maximize_min_sinr(forms, config.interference_cap,
                                                   config.power_budget);
        if (sol.status != BeamStatus::Converged) {
            detail = "solver failure at seed " + std::to_string(seed);
            return false;
        }
        check_soundness(sol, config.interference_cap, config.power_budget);
        const OracleResult oracle =
            grid_oracle(forms, config.interference_cap, config.power_budget, 1000000,
                        seed, g_workers);
        const double rel = std::abs(oracle.gamma_best - sol.gamma_star) / sol.gamma_star;
        worst_rel = std::max(worst_rel, rel);
        ok = ok && rel <= 0.02;
    }
    std::ostringstream oss;
    oss << "20 instances (R=2, N=1), 1e6 samples, worst relative gap " << worst_rel;
    detail = oss.str();
    return ok;
}

// --- sweep studies -------------------------------------------------------------

SweepSpec study_base() {
    SweepSpec spec;
    spec.base = make_config(10, 3, 0, 5.0, 5.0, 0.0, 10.0);
    spec.trials = 200;
    spec.seed_base = 20260808;
    return spec;
}

// Sporadic solver failures are excluded from the means by design and only a
// flagged point (more than 10% failures) is disqualifying; soundness
// violations are never tolerated and feed criterion 4.
int count_sweep_violations(const SweepResult& result) {
    int bad = 0;
    for (const SweepPoint& pt : result.points) {
        bad += pt.soundness_violations + (pt.flagged ? 1 : 0);
        g_soundness_checks += pt.trials_ok;
        g_soundness_violations += pt.soundness_violations;
    }
    return bad;
}

bool run_power_budget_study(std::string& detail) {
    const std::vector<double> caps_db = {-10.0, -5.0, 0.0};
    std::vector<SweepResult> curves;
    for (double cap : caps_db) {
        SweepSpec spec = study_base();
        spec.base.interference_cap = db_to_linear(cap);
        spec.variable = SweepVariable::PowerBudget;
        spec.values = {0.0, 4.0, 8.0, 12.0, 16.0, 20.0};
        curves.push_back(run_sweep(spec, g_workers));
    }

    bool ok = true;
    std::ostringstream oss;
    for (size_t c = 0; c < curves.size(); ++c) {
        if (count_sweep_violations(curves[c]) > 0) ok = false;
        for (size_t i = 1; i < curves[c].points.size(); ++i) {
            if (!(curves[c].points[i].mean_worst_sinr_db >
                  curves[c].points[i - 1].mean_worst_sinr_db)) {
                ok = false;
                oss << " not increasing at I_p=" << caps_db[c] << " step " << i << ";";
            }
        }
    }
    // Pointwise ordering between caps with a two-standard-error margin.
    double worst_margin_ratio = 1e9;
    for (size_t c = 1; c < curves.size(); ++c) {
        for (size_t i = 0; i < curves[c].points.size(); ++i) {
            const SweepPoint& hi = curves[c].points[i];
            const SweepPoint& lo = curves[c - 1].points[i];
            const double margin = hi.mean_worst_sinr_db - lo.mean_worst_sinr_db;
            const double se = std::hypot(hi.stderr_db, lo.stderr_db);
            worst_margin_ratio = std::min(worst_margin_ratio, margin / (2.0 * se));
            if (!(margin > 2.0 * se)) {
                ok = false;
                oss << " ordering margin too small at step " << i << ";";
            }
        }
    }
    std::ostringstream head;
    head << "P_t 0..20 dB x I_p {-10,-5,0} dB, 200 trials; worst ordering margin "
         << worst_margin_ratio << "x the 2-SE bar;" << oss.str();
    detail = head.str();
    return ok;
}

bool run_pair_count_study(std::string& detail) {
    SweepSpec spec = study_base();
    spec.base.interference_cap = db_to_linear(10.0);
    spec.variable = SweepVariable::PairCount;
    spec.values = {2.0, 3.0, 4.0};
    spec.note = "interference cap 10 dB sits outside the 0..-10 dB grid of the "
                "power-budget study; kept as stated";
    const SweepResult result = run_sweep(spec, g_workers);

    bool ok = count_sweep_violations(result) == 0;
    double worst_ratio = 1e9;
    for (size_t i = 1; i < result.points.size(); ++i) {
        const double drop = result.points[i - 1].mean_worst_sinr_db -
                            result.points[i].mean_worst_sinr_db;
        const double se = std::hypot(result.points[i - 1].stderr_db,
                                     result.points[i].stderr_db);
        worst_ratio = std::min(worst_ratio, drop / (2.0 * se));
        ok = ok && drop > 2.0 * se;
    }
    std::ostringstream oss;
    oss << "pairs {2,3,4} at R=10, I_p=10 dB; worst decrease margin " << worst_ratio
        << "x the 2-SE bar";
    detail = oss.str();
    return ok;
}

bool run_relay_count_study(std::string& detail) {
    SweepSpec spec = study_base();
    spec.variable = SweepVariable::RelayCount;
    spec.values = {6.0, 8.0, 10.0, 12.0};
    const SweepResult result = run_sweep(spec, g_workers);

    bool ok = count_sweep_violations(result) == 0;
    for (size_t i = 1; i < result.points.size(); ++i)
        ok = ok && result.points[i].mean_worst_sinr_db >
                       result.points[i - 1].mean_worst_sinr_db;
    const double gain_low =
        result.points[1].mean_worst_sinr_db - result.points[0].mean_worst_sinr_db;
    const double gain_high =
        result.points[3].mean_worst_sinr_db - result.points[2].mean_worst_sinr_db;
    ok = ok && gain_high < gain_low;

    std::ostringstream oss;
    oss << "R {6,8,10,12} at M=N=3, I_p=0 dB; gains 6->8: " << gain_low
        << " dB, 10->12: " << gain_high << " dB";
    detail = oss.str();
    return ok;
}

// --- criterion 4: constraint soundness of every recorded solve ---------------

bool run_soundness(std::string& detail) {
    std::ostringstream oss;
    oss << g_soundness_violations << " violations across " << g_soundness_checks
        << " solves";
    detail = oss.str();
    return g_soundness_violations == 0 && g_soundness_checks > 0;
}

// --- criterion 8: cone solver unit suite --------------------------------------

bool run_cone_suite(std::string& detail) {
    std::mt19937_64 rng(314159);
    int solved = 0;
    double worst_margin = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 10);
        const int blocks = 1 + static_cast<int>(rng() % 5);
        const ConeProblem prob = random_feasible_problem(n, blocks, rng);
        const ConeSolution sol = solve(prob);
        if (sol.status != SolveStatus::Optimal) continue;
        double min_margin = 1e300;
        for (const auto& blk : prob.cones) {
            const Eigen::VectorXd v = blk.A * sol.x + blk.b;
            min_margin = std::min(
                min_margin, v(0) - (v.size() > 1 ? v.tail(v.size() - 1).norm() : 0.0));
        }
        worst_margin = std::min(worst_margin, min_margin);
        if (min_margin >= -1e-8) ++solved;
    }

    int infeasible_detected = 0;
    for (int trial = 0; trial < 100; ++trial) {
        double expected = 0.0;
        const ConeProblem prob =
            infeasible_max_slack_problem(3 + static_cast<int>(rng() % 6), rng, &expected);
        const ConeSolution sol = solve(prob);
        if (sol.status == SolveStatus::Optimal && sol.slack < 0.0) ++infeasible_detected;
    }

    std::ostringstream oss;
    oss << solved << "/100 feasible optimal (worst margin " << worst_margin << "), "
        << infeasible_detected << "/100 infeasible with t* < 0";
    detail = oss.str();
    return solved == 100 && infeasible_detected == 100;
}

// --- criterion 9: property suites ---------------------------------------------

bool run_properties(std::string& detail) {
    std::mt19937_64 rng(271828);
    int failures = 0;

    // Hermitian / PSD / rank-one structure of the forms.
    for (int trial = 0; trial < 1000; ++trial) {
        const int relays = 2 + static_cast<int>(rng() % 4);
        const int pairs = 1 + static_cast<int>(rng() % 3);
        const ScenarioConfig config = make_config(relays, pairs, 90000 + trial);
        const ReceiverForms forms = build_receiver_forms(config, sample_channels(config));
        for (int j = 0; j < pairs && failures == 0; ++j) {
            const Eigen::MatrixXcd& q = forms.signal[j];
            const double scale = std::max(q.cwiseAbs().maxCoeff(), 1e-300);
            if ((q - q.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) ++failures;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(
                forms.pu_interf[j] + forms.su_interf[j] + forms.relay_noise[j]);
            const double top = eig.eigenvalues().maxCoeff();
            if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(top, 1e-300)) ++failures;
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(q);
            if (svd.singularValues()(0) > 0.0 &&
                svd.singularValues()(1) > 1e-10 * svd.singularValues()(0))
                ++failures;
        }
    }

    // Lifting isometry.
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const Eigen::MatrixXcd q = random_hermitian(n, rng);
        const Eigen::VectorXcd w = random_complex_vector(n, rng);
        const double complex_form = (w.dot(q * w)).real();
        const double real_form = lift_vector(w).dot(lift_hermitian(q) * lift_vector(w));
        if (std::abs(real_form - complex_form) > 1e-12 * std::max(1.0, std::abs(complex_form)))
            ++failures;
        if (std::abs(lift_vector(w).norm() - w.norm()) > 1e-12 * w.norm()) ++failures;
    }

    // Phase invariance of the analytic powers.
    for (int trial = 0; trial < 1000; ++trial) {
        const ScenarioConfig config = make_config(3, 2, 95000 + trial);
        const ReceiverForms forms = build_receiver_forms(config, sample_channels(config));
        const BeamVector w = random_complex_vector(3, rng);
        const BeamVector rot = std::polar(1.0, 0.1 + 6.0 * uniform_open01(rng)) * w;
        for (int j = 0; j < 2; ++j)
            if (std::abs(sinr(w, forms, j) - sinr(rot, forms, j)) >
                1e-12 * std::max(1.0, sinr(w, forms, j)))
                ++failures;
        if (std::abs(pu_interference(w, forms) - pu_interference(rot, forms)) >
            1e-12 * std::max(1.0, pu_interference(w, forms)))
            ++failures;
    }

    // Bisection bracket invariant on small instances.
    for (int trial = 0; trial < 1000; ++trial) {
        const ScenarioConfig config = make_config(2, 1, 98000 + trial);
        const ReceiverForms forms = build_receiver_forms(config, sample_channels(config));
        const BeamSolution sol =
            maximize_min_sinr(forms, config.interference_cap, config.power_budget);
        if (sol.status != BeamStatus::Converged) {
            ++failures;
            continue;
        }
        double lo = 0.0, hi = upper_bound_gamma(forms, config.power_budget);
        for (const BisectionStep& step : sol.trace) {
            if (std::abs(step.gamma - 0.5 * (lo + hi)) > 1e-9 * std::max(hi, 1.0))
                ++failures;
            if (step.feasible && step.slack < 0.0) ++failures;
            (step.feasible ? lo : hi) = step.gamma;
        }
        if (lo > hi || sol.gamma_lo != lo || sol.gamma_hi != hi) ++failures;
    }

    std::ostringstream oss;
    oss << "forms/lifting/phase/bracket, 1000 cases each, " << failures << " failures";
    detail = oss.str();
    return failures == 0;
}

}  // namespace

int main(int argc, char** argv) {
    g_workers = argc > 1 ? std::atoi(argv[1])
                         : std::min(8u, std::max(1u, std::thread::hardware_concurrency()));

    std::vector<Criterion> criteria = {
        {1, "physical-layer oracle equivalence", run_oracle_equivalence},
        {2, "closed-form scalar optimum", run_closed_form},
        {3, "single-receiver exactness vs grid oracle", run_n1_exactness},
        {5, "power-budget study (interference-cap family)", run_power_budget_study},
        {6, "secondary-pair study", run_pair_count_study},
        {7, "relay-count study", run_relay_count_study},
        {4, "constraint soundness of recorded solves", run_soundness},
        {8, "cone solver unit suite", run_cone_suite},
        {9, "randomized property suites", run_properties},
    };

    int failures = 0;
    for (auto& crit : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = crit.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  criterion %d: %s (%s) [%.1fs]\n", ok ? "PASS" : "FAIL", crit.id,
                    crit.label.c_str(), detail.c_str(), elapsed);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("%d/9 criteria passed\n", 9 - failures);
    return failures;
}
