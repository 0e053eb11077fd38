#include "relaybf/optimizer.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "relaybf/log.hpp"
#include "relaybf/rng.hpp"

namespace relaybf {

const char* to_string(BeamStatus status) {
    switch (status) {
        case BeamStatus::Converged: return "converged";
        case BeamStatus::InfeasibleAtZero: return "infeasible_at_zero";
        case BeamStatus::SolverFailure: return "solver_failure";
    }
    return "unknown";
}

double upper_bound_gamma(const ReceiverForms& forms, double power_budget) {
    if (!(power_budget > 0.0)) throw std::invalid_argument("power budget must be positive");
    double bound = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < forms.signal_vec.size(); ++j) {
        // lambda_max of the rank-one signal form is |a_j|^2.
        const double lead = forms.signal_vec[j].squaredNorm();
        bound = std::min(bound, lead * power_budget / forms.rx_noise(j));
    }
    return bound;
}

BeamSolution maximize_min_sinr(const ReceiverForms& forms, double interference_cap,
                               double power_budget, const SolverSettings& settings) {
    if (!(interference_cap > 0.0) || !(power_budget > 0.0))
        throw std::invalid_argument("caps must be positive");
    if (!(settings.gamma_rel_tol > 0.0))
        throw std::invalid_argument("gamma_rel_tol must be positive");
    const int n_rx = static_cast<int>(forms.signal.size());
    const int r = static_cast<int>(forms.pu_total.rows());

    BeamSolution out;
    out.weights = BeamVector::Zero(r);
    out.gamma_hi = upper_bound_gamma(forms, power_budget);

    while (out.bisection_steps < settings.max_bisection &&
           out.gamma_hi - out.gamma_lo >
               settings.gamma_rel_tol * std::max(out.gamma_hi, 1e-12)) {
        const double gamma_mid = 0.5 * (out.gamma_lo + out.gamma_hi);
        const ConeProblem prob = build_feasibility(forms, std::sqrt(gamma_mid),
                                                   interference_cap, power_budget,
                                                   settings.anchor_rx);
        const ConeSolution csol = solve(prob, settings.cone);
        ++out.bisection_steps;

        if (csol.status == SolveStatus::Optimal) {
            bool feasible = csol.slack >= 0.0;
            BeamVector w_mid;
            if (feasible) {
                // Accept the level only when the extracted weights certify it
                // through the analytic forms; the slack sign alone is not
                // trusted near the feasibility boundary.
                w_mid = unlift_vector(csol.x.head(2 * r));
                for (int j = 0; j < n_rx && feasible; ++j)
                    feasible = sinr(w_mid, forms, j) >= gamma_mid * (1.0 - 1e-6);
                feasible = feasible &&
                           pu_interference(w_mid, forms) <=
                               interference_cap * (1.0 + 1e-6) &&
                           beam_power(w_mid) <= power_budget * (1.0 + 1e-6);
            }
            out.trace.push_back({gamma_mid, csol.slack, feasible});
            if (feasible) {
                out.gamma_lo = gamma_mid;
                out.weights = std::move(w_mid);
            } else {
                out.gamma_hi = gamma_mid;
            }
        } else if (csol.status == SolveStatus::Infeasible) {
            out.trace.push_back({gamma_mid, csol.slack, false});
            out.gamma_hi = gamma_mid;
        } else {
            out.status = BeamStatus::SolverFailure;
            std::ostringstream oss;
            oss << "cone solver " << to_string(csol.status) << " at gamma=" << gamma_mid
                << " (" << csol.message << ")";
            out.message = oss.str();
            log::error(out.message);
            break;
        }
    }

    // Re-verify the retained iterate through the analytic forms.
    out.sinr_per_rx.resize(n_rx);
    for (int j = 0; j < n_rx; ++j) out.sinr_per_rx(j) = sinr(out.weights, forms, j);
    out.gamma_star = n_rx > 0 ? out.sinr_per_rx.minCoeff() : 0.0;
    out.pu_interference = pu_interference(out.weights, forms);
    out.total_power = beam_power(out.weights);
    return out;
}

OracleResult grid_oracle(const ReceiverForms& forms, double interference_cap,
                         double power_budget, long n_samples, std::uint64_t seed,
                         int workers) {
    const int r = static_cast<int>(forms.pu_total.rows());
    if (r > 3) throw std::invalid_argument("grid_oracle is limited to 3 relays");
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    if (!(interference_cap > 0.0) || !(power_budget > 0.0))
        throw std::invalid_argument("caps must be positive");
    const int n_rx = static_cast<int>(forms.signal.size());

    std::vector<Eigen::MatrixXcd> interf(n_rx);
    for (int j = 0; j < n_rx; ++j)
        interf[j] = forms.pu_interf[j] + forms.su_interf[j] + forms.relay_noise[j];

    struct Best {
        double gamma = -1.0;
        double radius = 0.0;
        Eigen::VectorXcd dir;
    };

    // Fixed chunking keeps results independent of the worker count.
    constexpr int kChunks = 64;
    std::vector<Best> best(kChunks);
    std::atomic<int> next{0};

    auto work = [&] {
        for (;;) {
            const int chunk = next.fetch_add(1);
            if (chunk >= kChunks) return;
            const long begin = n_samples * chunk / kChunks;
            const long end = n_samples * (chunk + 1) / kChunks;
            std::mt19937_64 rng(derive_seed(seed, 0x6f7261636c65ULL, chunk));
            Best local;
            Eigen::VectorXcd v(r);
            for (long i = begin; i < end; ++i) {
                for (int k = 0; k < r; ++k) v(k) = complex_gaussian(rng);
                const double norm = v.norm();
                if (!(norm > 1e-300)) continue;
                const Eigen::VectorXcd dir = v / norm;

                const double leak = std::max(0.0, (dir.dot(forms.pu_total * dir)).real());
                double p2_max = power_budget;
                if (leak > 0.0) p2_max = std::min(p2_max, interference_cap / leak);

                Eigen::VectorXd sig(n_rx), intn(n_rx);
                for (int j = 0; j < n_rx; ++j) {
                    sig(j) = std::max(0.0, (dir.dot(forms.signal[j] * dir)).real());
                    intn(j) = std::max(0.0, (dir.dot(interf[j] * dir)).real());
                }

                auto eval = [&](double p2) {
                    double worst = std::numeric_limits<double>::infinity();
                    for (int j = 0; j < n_rx; ++j)
                        worst = std::min(worst, p2 * sig(j) / (p2 * intn(j) + forms.rx_noise(j)));
                    if (worst > local.gamma) {
                        local.gamma = worst;
                        local.radius = std::sqrt(p2);
                        local.dir = dir;
                    }
                };

                for (int k = 1; k <= 100; ++k) {
                    const double frac = static_cast<double>(k) / 100.0;
                    const double p2 = power_budget * frac * frac;
                    if (p2 > p2_max) break;  // PU-infeasible from here on
                    eval(p2);
                }
                eval(p2_max);  // the feasibility boundary itself
            }
            best[chunk] = std::move(local);
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

    OracleResult out;
    out.w_best = Eigen::VectorXcd::Zero(r);
    for (const Best& b : best) {
        if (b.gamma > out.gamma_best) {
            out.gamma_best = b.gamma;
            out.w_best = b.radius * b.dir;
        }
    }
    return out;
}

}  // namespace relaybf
