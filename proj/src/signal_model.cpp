#include "relaybf/signal_model.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

#include "relaybf/rng.hpp"

namespace relaybf {

namespace {

void check_dimensions(const ScenarioConfig& config, const ChannelSet& ch) {
    const int R = config.relay_count, M = config.tx_count, N = config.rx_count;
    if (ch.su_to_relay.rows() != R || ch.su_to_relay.cols() != M ||
        ch.pu_to_relay.size() != R || ch.relay_to_rx.rows() != N ||
        ch.relay_to_rx.cols() != R || ch.relay_to_pu.size() != R)
        throw std::invalid_argument("channel dimensions do not match config");
}

double real_quad_form(const Eigen::MatrixXcd& q, const BeamVector& w) {
    const std::complex<double> v = w.dot(q * w);  // w^H q w
    return std::max(0.0, v.real());
}

}  // namespace

NormalizedModel build_normalized(const ScenarioConfig& config, const ChannelSet& ch) {
    check_dimensions(config, ch);
    const int R = config.relay_count, M = config.tx_count, N = config.rx_count;
    const double sigma = std::sqrt(config.noise_var);

    NormalizedModel model;
    model.amp_denom.resize(R);
    for (int r = 0; r < R; ++r) {
        const double rx_power = config.pu_power * std::norm(ch.pu_to_relay(r)) +
                                config.su_power * ch.su_to_relay.row(r).squaredNorm() +
                                config.noise_var;
        model.amp_denom(r) = std::sqrt(rx_power);
    }

    model.eff_su.resize(N);
    model.eff_pu.resize(N, R);
    model.eff_pu_rx.resize(R);
    model.eff_su_to_pu.resize(M, R);
    model.eff_relay_noise.resize(N, R);
    model.relay_noise_gain.resize(R);

    for (int j = 0; j < N; ++j) {
        Eigen::MatrixXcd f(M, R);
        for (int m = 0; m < M; ++m)
            for (int r = 0; r < R; ++r)
                f(m, r) = ch.relay_to_rx(j, r) * ch.su_to_relay(r, m) / model.amp_denom(r);
        model.eff_su[j] = std::move(f);
        for (int r = 0; r < R; ++r) {
            model.eff_pu(j, r) = ch.relay_to_rx(j, r) * ch.pu_to_relay(r) / model.amp_denom(r);
            model.eff_relay_noise(j, r) = ch.relay_to_rx(j, r) * sigma / model.amp_denom(r);
        }
    }
    for (int r = 0; r < R; ++r) {
        model.eff_pu_rx(r) = ch.relay_to_pu(r) / model.amp_denom(r);
        model.relay_noise_gain(r) = config.noise_var / (model.amp_denom(r) * model.amp_denom(r));
        for (int m = 0; m < M; ++m)
            model.eff_su_to_pu(m, r) =
                ch.relay_to_pu(r) * ch.su_to_relay(r, m) / model.amp_denom(r);
    }
    return model;
}

ReceiverForms build_forms(const ScenarioConfig& config, const NormalizedModel& model) {
    const int R = config.relay_count, M = config.tx_count, N = config.rx_count;
    if (M != N) throw std::invalid_argument("build_forms requires paired sources (M == N)");
    if (static_cast<int>(model.eff_su.size()) != N || model.eff_pu.rows() != N ||
        model.eff_pu.cols() != R)
        throw std::invalid_argument("model dimensions do not match config");

    ReceiverForms forms;
    forms.signal.resize(N);
    forms.signal_vec.resize(N);
    forms.pu_interf.resize(N);
    forms.su_interf.resize(N);
    forms.relay_noise.resize(N);
    forms.rx_noise = Eigen::VectorXd::Constant(N, config.noise_var);

    const double sqrt_ps = std::sqrt(config.su_power);
    const double sqrt_pp = std::sqrt(config.pu_power);

    for (int j = 0; j < N; ++j) {
        // Desired source for receiver j is transmitter j.
        const Eigen::VectorXcd a = sqrt_ps * model.eff_su[j].row(j).conjugate().transpose();
        forms.signal_vec[j] = a;
        forms.signal[j] = a * a.adjoint();

        const Eigen::VectorXcd b = sqrt_pp * model.eff_pu.row(j).conjugate().transpose();
        forms.pu_interf[j] = b * b.adjoint();

        Eigen::MatrixXcd qis = Eigen::MatrixXcd::Zero(R, R);
        for (int m = 0; m < M; ++m) {
            if (m == j) continue;
            const Eigen::VectorXcd v = sqrt_ps * model.eff_su[j].row(m).conjugate().transpose();
            qis += v * v.adjoint();
        }
        forms.su_interf[j] = std::move(qis);

        const Eigen::VectorXd noise_diag = model.eff_relay_noise.row(j).cwiseAbs2().transpose();
        forms.relay_noise[j] = noise_diag.cast<std::complex<double>>().asDiagonal();
    }

    Eigen::MatrixXcd dpu = Eigen::MatrixXcd::Zero(R, R);
    for (int m = 0; m < M; ++m) {
        const Eigen::VectorXcd v = sqrt_ps * model.eff_su_to_pu.row(m).conjugate().transpose();
        dpu += v * v.adjoint();
    }
    const Eigen::VectorXd pu_noise_diag = config.noise_var * model.eff_pu_rx.cwiseAbs2();
    dpu += pu_noise_diag.cast<std::complex<double>>().asDiagonal().toDenseMatrix();
    forms.pu_total = std::move(dpu);
    return forms;
}

ReceiverForms build_receiver_forms(const ScenarioConfig& config, const ChannelSet& channels) {
    return build_forms(config, build_normalized(config, channels));
}

double sinr(const BeamVector& w, const ReceiverForms& forms, int j) {
    if (j < 0 || j >= static_cast<int>(forms.signal.size()))
        throw std::invalid_argument("receiver index out of range");
    const double num = real_quad_form(forms.signal[j], w);
    const double den = real_quad_form(forms.pu_interf[j], w) +
                       real_quad_form(forms.su_interf[j], w) +
                       real_quad_form(forms.relay_noise[j], w) + forms.rx_noise(j);
    return num / den;
}

double pu_interference(const BeamVector& w, const ReceiverForms& forms) {
    return real_quad_form(forms.pu_total, w);
}

EmpiricalPowers empirical_powers(const BeamVector& w, const ScenarioConfig& config,
                                 const ChannelSet& ch, long n_samples, std::uint64_t seed) {
    check_dimensions(config, ch);
    if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
    const int R = config.relay_count, M = config.tx_count, N = config.rx_count;
    if (w.size() != R) throw std::invalid_argument("weight vector length must equal relay count");

    const double sqrt_pp = std::sqrt(config.pu_power);
    const double sqrt_ps = std::sqrt(config.su_power);
    const double sigma = std::sqrt(config.noise_var);

    // AF normalization recomputed locally from the raw channels; this routine
    // must not share code with build_normalized / build_forms.
    Eigen::VectorXd denom(R);
    for (int r = 0; r < R; ++r)
        denom(r) = std::sqrt(config.pu_power * std::norm(ch.pu_to_relay(r)) +
                             config.su_power * ch.su_to_relay.row(r).squaredNorm() +
                             config.noise_var);

    // Relay-to-destination weighting applied in phase two.
    Eigen::MatrixXcd rx_weight(N, R);
    for (int j = 0; j < N; ++j)
        for (int r = 0; r < R; ++r) rx_weight(j, r) = w(r) * ch.relay_to_rx(j, r) / denom(r);
    Eigen::VectorXcd pu_weight(R);
    for (int r = 0; r < R; ++r) pu_weight(r) = w(r) * ch.relay_to_pu(r) / denom(r);

    std::mt19937_64 rng(seed);
    Eigen::VectorXd sum_s = Eigen::VectorXd::Zero(N), sum_s2 = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd sum_i = Eigen::VectorXd::Zero(N), sum_i2 = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd sum_n = Eigen::VectorXd::Zero(N), sum_n2 = Eigen::VectorXd::Zero(N);
    double sum_p = 0.0, sum_p2 = 0.0;

    Eigen::VectorXcd x_s(M);
    Eigen::MatrixXcd su_part(R, M);   // per-relay contribution of each SU symbol
    Eigen::VectorXcd pu_part(R), relay_noise(R);

    for (long it = 0; it < n_samples; ++it) {
        // Draw order per sample: x_p, x_1..x_M, relay noises, receiver noises.
        const std::complex<double> x_p = qpsk_symbol(rng);
        for (int m = 0; m < M; ++m) x_s(m) = qpsk_symbol(rng);
        for (int r = 0; r < R; ++r) relay_noise(r) = sigma * complex_gaussian(rng);

        // Phase one at each relay, kept per originating signal.
        for (int r = 0; r < R; ++r) {
            pu_part(r) = sqrt_pp * ch.pu_to_relay(r) * x_p;
            for (int m = 0; m < M; ++m)
                su_part(r, m) = sqrt_ps * ch.su_to_relay(r, m) * x_s(m);
        }

        // Phase two at each SU receiver, decomposed into desired / interference / noise.
        for (int j = 0; j < N; ++j) {
            std::complex<double> z_sig = 0, z_int = 0, z_noise = sigma * complex_gaussian(rng);
            for (int r = 0; r < R; ++r) {
                std::complex<double> cross = pu_part(r);
                for (int m = 0; m < M; ++m)
                    if (m != j) cross += su_part(r, m);
                z_sig += rx_weight(j, r) * su_part(r, j);
                z_int += rx_weight(j, r) * cross;
                z_noise += rx_weight(j, r) * relay_noise(r);
            }
            const double s = std::norm(z_sig), i = std::norm(z_int), n = std::norm(z_noise);
            sum_s(j) += s;
            sum_s2(j) += s * s;
            sum_i(j) += i;
            sum_i2(j) += i * i;
            sum_n(j) += n;
            sum_n2(j) += n * n;
        }

        // SU-originated part arriving at the PU-RX (its own signal excluded).
        std::complex<double> z_pu = 0;
        for (int r = 0; r < R; ++r) {
            std::complex<double> su_sum = relay_noise(r);
            for (int m = 0; m < M; ++m) su_sum += su_part(r, m);
            z_pu += pu_weight(r) * su_sum;
        }
        const double p = std::norm(z_pu);
        sum_p += p;
        sum_p2 += p * p;
    }

    const double n = static_cast<double>(n_samples);
    auto finish = [n](double sum, double sum2) {
        const double mean = sum / n;
        const double var = std::max(0.0, sum2 / n - mean * mean);
        return std::pair{mean, std::sqrt(var / n)};
    };

    EmpiricalPowers out;
    out.signal.resize(N);
    out.interference.resize(N);
    out.noise.resize(N);
    out.signal_se.resize(N);
    out.interference_se.resize(N);
    out.noise_se.resize(N);
    for (int j = 0; j < N; ++j) {
        std::tie(out.signal(j), out.signal_se(j)) = finish(sum_s(j), sum_s2(j));
        std::tie(out.interference(j), out.interference_se(j)) = finish(sum_i(j), sum_i2(j));
        std::tie(out.noise(j), out.noise_se(j)) = finish(sum_n(j), sum_n2(j));
    }
    std::tie(out.pu_interference, out.pu_interference_se) = finish(sum_p, sum_p2);
    out.n_samples = n_samples;
    return out;
}

}  // namespace relaybf
