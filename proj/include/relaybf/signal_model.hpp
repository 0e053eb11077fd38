#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "relaybf/scenario.hpp"

namespace relaybf {

/// Relay weight vector. Relay r transmits w(r) * y_r / d_r, i.e. the weight
/// applies to the power-normalized received signal, so |w|^2 is the total
/// transmitted relay power.
using BeamVector = Eigen::VectorXcd;

inline double beam_power(const BeamVector& w) { return w.squaredNorm(); }

/// Normalization factors and effective single-hop channels of the two-phase
/// amplify-and-forward link.
struct NormalizedModel {
    Eigen::VectorXd amp_denom;             // d_r = sqrt(P_p|g_r|^2 + P_s sum_m |h_rm|^2 + sigma^2)
    std::vector<Eigen::MatrixXcd> eff_su;  // per receiver j: M x R, (m,r) = hhat_jr h_rm / d_r
    Eigen::MatrixXcd eff_pu;               // N x R, (j,r) = hhat_jr g_r / d_r
    Eigen::VectorXcd eff_pu_rx;            // R, ghat_r / d_r
    Eigen::MatrixXcd eff_su_to_pu;         // M x R, (m,r) = ghat_r h_rm / d_r
    Eigen::MatrixXcd eff_relay_noise;      // N x R, (j,r) = hhat_jr sigma_n / d_r
    Eigen::VectorXd relay_noise_gain;      // sigma^2 / d_r^2, in (0,1)
};

/// Per-receiver Hermitian quadratic forms in w, plus the PU-RX interference
/// form. signal[j] is rank one: signal[j] == signal_vec[j] signal_vec[j]^H.
struct ReceiverForms {
    std::vector<Eigen::MatrixXcd> signal;      // Q_sig, w^H Q w = P_s |f_j^T w|^2
    std::vector<Eigen::VectorXcd> signal_vec;  // a_j = sqrt(P_s) conj(f_j)
    std::vector<Eigen::MatrixXcd> pu_interf;   // Q_ip
    std::vector<Eigen::MatrixXcd> su_interf;   // Q_is, cross-pair terms
    std::vector<Eigen::MatrixXcd> relay_noise; // Q_n, diagonal
    Eigen::VectorXd rx_noise;                  // c_j = sigma_n^2
    Eigen::MatrixXcd pu_total;                 // D_pu, w^H D w = interference at PU-RX
};

NormalizedModel build_normalized(const ScenarioConfig& config, const ChannelSet& channels);
ReceiverForms build_forms(const ScenarioConfig& config, const NormalizedModel& model);

/// Convenience: sample-free pipeline from a scenario to its forms.
ReceiverForms build_receiver_forms(const ScenarioConfig& config, const ChannelSet& channels);

/// SINR at receiver j; always finite and nonnegative.
double sinr(const BeamVector& w, const ReceiverForms& forms, int j);

/// w^H D_pu w, the SU-caused interference power at the PU-RX.
double pu_interference(const BeamVector& w, const ReceiverForms& forms);

/// Per-receiver power estimates from a symbol-level simulation of the two
/// transmission phases. Intentionally recomputes everything from the raw
/// channels so it can serve as an oracle for the quadratic forms.
struct EmpiricalPowers {
    Eigen::VectorXd signal;           // mean |desired part|^2 per receiver
    Eigen::VectorXd interference;     // mean |PU part + cross-SU part|^2
    Eigen::VectorXd noise;            // mean |forwarded + local noise|^2
    double pu_interference = 0.0;     // mean |SU-originated part at PU-RX|^2
    Eigen::VectorXd signal_se;        // standard errors of the means above
    Eigen::VectorXd interference_se;
    Eigen::VectorXd noise_se;
    double pu_interference_se = 0.0;
    long n_samples = 0;
};

EmpiricalPowers empirical_powers(const BeamVector& w, const ScenarioConfig& config,
                                 const ChannelSet& channels, long n_samples,
                                 std::uint64_t seed);

}  // namespace relaybf
