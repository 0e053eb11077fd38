#include "relaybf/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <random>
#include <stdexcept>

#include "relaybf/rng.hpp"

namespace relaybf {

using nlohmann::json;

void ScenarioConfig::validate() const {
    if (relay_count < 1) throw std::invalid_argument("relay_count must be >= 1");
    if (tx_count < 1) throw std::invalid_argument("tx_count must be >= 1");
    if (rx_count < 1) throw std::invalid_argument("rx_count must be >= 1");
    if (tx_count != rx_count)
        throw std::invalid_argument("tx_count and rx_count must match (paired sources)");
    if (!(pu_power > 0.0)) throw std::invalid_argument("pu_power must be > 0");
    if (!(su_power > 0.0)) throw std::invalid_argument("su_power must be > 0");
    if (!(noise_var > 0.0)) throw std::invalid_argument("noise_var must be > 0");
    if (!(interference_cap > 0.0)) throw std::invalid_argument("interference_cap must be > 0");
    if (!(power_budget > 0.0)) throw std::invalid_argument("power_budget must be > 0");
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.relay_count == b.relay_count && a.tx_count == b.tx_count &&
           a.rx_count == b.rx_count && a.pu_power == b.pu_power && a.su_power == b.su_power &&
           a.noise_var == b.noise_var && a.interference_cap == b.interference_cap &&
           a.power_budget == b.power_budget && a.seed == b.seed;
}

ChannelSet sample_channels(const ScenarioConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    const int R = config.relay_count, M = config.tx_count, N = config.rx_count;

    ChannelSet ch;
    ch.su_to_relay.resize(R, M);
    ch.pu_to_relay.resize(R);
    ch.relay_to_rx.resize(N, R);
    ch.relay_to_pu.resize(R);

    // Fixed draw order: H row-major, then g, then Hhat row-major, then ghat.
    for (int r = 0; r < R; ++r)
        for (int m = 0; m < M; ++m) ch.su_to_relay(r, m) = complex_gaussian(rng);
    for (int r = 0; r < R; ++r) ch.pu_to_relay(r) = complex_gaussian(rng);
    for (int j = 0; j < N; ++j)
        for (int r = 0; r < R; ++r) ch.relay_to_rx(j, r) = complex_gaussian(rng);
    for (int r = 0; r < R; ++r) ch.relay_to_pu(r) = complex_gaussian(rng);
    return ch;
}

namespace {

json matrix_part(const Eigen::MatrixXcd& m, bool real) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back(real ? m(r, c).real() : m(r, c).imag());
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_part(const Eigen::VectorXcd& v, bool real) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(real ? v(i).real() : v(i).imag());
    return out;
}

Eigen::MatrixXcd parse_matrix(const json& re, const json& im, Eigen::Index rows,
                              Eigen::Index cols, const std::string& name) {
    if (!re.is_array() || !im.is_array() ||
        static_cast<Eigen::Index>(re.size()) != rows ||
        static_cast<Eigen::Index>(im.size()) != rows)
        throw std::invalid_argument("scenario file: " + name + " has wrong row count");
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& rre = re.at(r);
        const auto& rim = im.at(r);
        if (static_cast<Eigen::Index>(rre.size()) != cols ||
            static_cast<Eigen::Index>(rim.size()) != cols)
            throw std::invalid_argument("scenario file: " + name + " has wrong column count");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = {rre.at(c).get<double>(), rim.at(c).get<double>()};
    }
    return m;
}

Eigen::VectorXcd parse_vector(const json& re, const json& im, Eigen::Index n,
                              const std::string& name) {
    if (!re.is_array() || !im.is_array() ||
        static_cast<Eigen::Index>(re.size()) != n ||
        static_cast<Eigen::Index>(im.size()) != n)
        throw std::invalid_argument("scenario file: " + name + " has wrong length");
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = {re.at(i).get<double>(), im.at(i).get<double>()};
    return v;
}

}  // namespace

void save_scenario(const ScenarioConfig& config, const ChannelSet& channels,
                   const std::string& path) {
    config.validate();
    json doc;
    doc["schema_version"] = 1;
    doc["config"] = {{"relay_count", config.relay_count},
                     {"tx_count", config.tx_count},
                     {"rx_count", config.rx_count},
                     {"pu_power", config.pu_power},
                     {"su_power", config.su_power},
                     {"noise_var", config.noise_var},
                     {"interference_cap", config.interference_cap},
                     {"power_budget", config.power_budget},
                     {"seed", config.seed}};
    doc["channels"] = {{"H_re", matrix_part(channels.su_to_relay, true)},
                       {"H_im", matrix_part(channels.su_to_relay, false)},
                       {"g_re", vector_part(channels.pu_to_relay, true)},
                       {"g_im", vector_part(channels.pu_to_relay, false)},
                       {"Hhat_re", matrix_part(channels.relay_to_rx, true)},
                       {"Hhat_im", matrix_part(channels.relay_to_rx, false)},
                       {"ghat_re", vector_part(channels.relay_to_pu, true)},
                       {"ghat_im", vector_part(channels.relay_to_pu, false)}};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::pair<ScenarioConfig, ChannelSet> load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    json doc = json::parse(in);  // throws on malformed/truncated input

    if (!doc.contains("schema_version") || doc["schema_version"].get<int>() != 1)
        throw std::invalid_argument("scenario file: unsupported schema_version");

    const json& c = doc.at("config");
    ScenarioConfig config;
    config.relay_count = c.at("relay_count").get<int>();
    config.tx_count = c.at("tx_count").get<int>();
    config.rx_count = c.at("rx_count").get<int>();
    config.pu_power = c.at("pu_power").get<double>();
    config.su_power = c.at("su_power").get<double>();
    config.noise_var = c.at("noise_var").get<double>();
    config.interference_cap = c.at("interference_cap").get<double>();
    config.power_budget = c.at("power_budget").get<double>();
    config.seed = c.at("seed").get<std::uint64_t>();
    config.validate();

    const json& ch = doc.at("channels");
    const int R = config.relay_count, M = config.tx_count, N = config.rx_count;
    ChannelSet channels;
    channels.su_to_relay = parse_matrix(ch.at("H_re"), ch.at("H_im"), R, M, "H");
    channels.pu_to_relay = parse_vector(ch.at("g_re"), ch.at("g_im"), R, "g");
    channels.relay_to_rx = parse_matrix(ch.at("Hhat_re"), ch.at("Hhat_im"), N, R, "Hhat");
    channels.relay_to_pu = parse_vector(ch.at("ghat_re"), ch.at("ghat_im"), R, "ghat");

    if (!channels.su_to_relay.allFinite() || !channels.pu_to_relay.allFinite() ||
        !channels.relay_to_rx.allFinite() || !channels.relay_to_pu.allFinite())
        throw std::invalid_argument("scenario file: non-finite channel entry");

    return {config, channels};
}

}  // namespace relaybf
