#pragma once

#include <Eigen/Dense>
#include <random>

#include "relaybf/scenario.hpp"
#include "relaybf/signal_model.hpp"
#include "relaybf/socp.hpp"

namespace relaybf::testing {

inline ScenarioConfig make_config(int relays, int pairs, std::uint64_t seed,
                                  double pu_power_db = 5.0, double su_power_db = 5.0,
                                  double interference_cap_db = 0.0,
                                  double power_budget_db = 10.0) {
    ScenarioConfig config;
    config.relay_count = relays;
    config.tx_count = config.rx_count = pairs;
    config.pu_power = std::pow(10.0, pu_power_db / 10.0);
    config.su_power = std::pow(10.0, su_power_db / 10.0);
    config.noise_var = 1.0;
    config.interference_cap = std::pow(10.0, interference_cap_db / 10.0);
    config.power_budget = std::pow(10.0, power_budget_db / 10.0);
    config.seed = seed;
    return config;
}

/// The single-relay instance with unit channels and unit powers used by the
/// hand-derived checks: d = sqrt(3), all forms equal 1/3, D_pu = 2/3.
inline std::pair<ScenarioConfig, ChannelSet> unit_scalar_scenario() {
    ScenarioConfig config;
    config.relay_count = config.tx_count = config.rx_count = 1;
    config.pu_power = config.su_power = config.noise_var = 1.0;
    config.interference_cap = 2.0;
    config.power_budget = 3.0;
    ChannelSet ch;
    ch.su_to_relay = Eigen::MatrixXcd::Ones(1, 1);
    ch.pu_to_relay = Eigen::VectorXcd::Ones(1);
    ch.relay_to_rx = Eigen::MatrixXcd::Ones(1, 1);
    ch.relay_to_pu = Eigen::VectorXcd::Ones(1);
    return {config, ch};
}

inline Eigen::MatrixXcd random_hermitian(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = {gauss(rng), gauss(rng)};
    return 0.5 * (a + a.adjoint());
}

inline Eigen::VectorXcd random_complex_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v(i) = {gauss(rng), gauss(rng)};
    return v;
}

}  // namespace relaybf::testing
