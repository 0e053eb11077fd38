#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>

namespace relaybf {

/// Scalar parameters of one network instance. All powers are linear watts;
/// dB-to-linear conversion happens at the CLI boundary only.
struct ScenarioConfig {
    int relay_count = 1;             // R
    int tx_count = 1;                // M, secondary transmitters
    int rx_count = 1;                // N, secondary receivers; pairing requires M == N
    double pu_power = 1.0;           // P_p, PU-TX transmit power
    double su_power = 1.0;           // P_s, per-SU-TX transmit power
    double noise_var = 1.0;          // sigma_n^2 at relays and receivers
    double interference_cap = 1.0;   // I_p, tolerated interference at the PU-RX
    double power_budget = 1.0;       // P_t, total relay transmit power
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument on any violated constraint.
    void validate() const;
};

/// One flat-fading channel realization. Entries are i.i.d. CN(0,1).
struct ChannelSet {
    Eigen::MatrixXcd su_to_relay;   // R x M, (r,m): SU-TX m -> relay r
    Eigen::VectorXcd pu_to_relay;   // R,     PU-TX -> relay r
    Eigen::MatrixXcd relay_to_rx;   // N x R, (j,r): relay r -> SU-RX j
    Eigen::VectorXcd relay_to_pu;   // R,     relay r -> PU-RX

    bool operator==(const ChannelSet&) const = default;
};

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

/// Pure function of the config (including its seed): same config, same channels.
ChannelSet sample_channels(const ScenarioConfig& config);

/// Lossless JSON round trip; see README for the file schema (schema_version 1).
void save_scenario(const ScenarioConfig& config, const ChannelSet& channels,
                   const std::string& path);
std::pair<ScenarioConfig, ChannelSet> load_scenario(const std::string& path);

}  // namespace relaybf
