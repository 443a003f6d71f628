#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdrelay {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// All scalar parameters of one system setup. Powers and variances are in
/// linear scale; the CLI converts from dB (0 dB = unit power).
struct SystemConfig {
    int n_pairs = 5;   ///< K source-destination pairs
    int n_rx = 64;     ///< relay receive antennas
    int n_tx = 64;     ///< relay transmit antennas
    int mod_order = 16;

    std::vector<double> p_source;  ///< per-source power; resized to K of 1.0 if empty
    double p_relay = 1.0;

    double sigma2_li = 1.0;  ///< residual loopback channel variance
    double sigma2_nr = 1.0;  ///< noise variance at the relay
    double sigma2_nd = 1.0;  ///< noise variance at each destination
    double eps2_h = 1e-3;    ///< channel estimation error variance
    double eps2_t = 1e-3;    ///< transmit hardware impairment variance

    int delay = 1;  ///< relay processing delay in symbol slots, >= 1

    /// Log-normal shadowing standard deviation in dB; 0 disables shadowing
    /// (all large-scale coefficients fixed to 1).
    double shadow_sigma_db = 0.0;

    std::uint64_t master_seed = 1;

    std::vector<double> source_powers() const {
        if (p_source.empty()) return std::vector<double>(static_cast<std::size_t>(n_pairs), 1.0);
        return p_source;
    }

    void validate() const {
        if (n_pairs < 1) throw std::invalid_argument("config: K must be >= 1");
        if (n_pairs >= n_rx || n_pairs >= n_tx)
            throw std::invalid_argument("config: K must be < min(N_rx, N_tx), got K=" +
                                        std::to_string(n_pairs) + ", N_rx=" + std::to_string(n_rx) +
                                        ", N_tx=" + std::to_string(n_tx));
        if (mod_order != 4 && mod_order != 16 && mod_order != 64)
            throw std::invalid_argument("config: modulation order must be 4, 16 or 64");
        if (!p_source.empty() && p_source.size() != static_cast<std::size_t>(n_pairs))
            throw std::invalid_argument("config: p_source length must equal K");
        for (double p : source_powers())
            if (!(p >= 0.0)) throw std::invalid_argument("config: source powers must be >= 0");
        if (!(p_relay >= 0.0)) throw std::invalid_argument("config: p_relay must be >= 0");
        if (!(sigma2_li >= 0.0) || !(sigma2_nr >= 0.0) || !(sigma2_nd >= 0.0) ||
            !(eps2_h >= 0.0) || !(eps2_t >= 0.0))
            throw std::invalid_argument("config: variances must be >= 0");
        if (delay < 1) throw std::invalid_argument("config: delay must be >= 1");
        if (shadow_sigma_db < 0.0)
            throw std::invalid_argument("config: shadowing std must be >= 0 dB");
    }
};

/// SNR at the relay, 10*log10(sum_k beta_SR_k * p_S_k / sigma2_nr).
/// With random shadowing the mean large-scale gain is 1 by construction, so
/// the expression uses E[beta] = 1 in every case.
inline double snr_relay_db(const SystemConfig& cfg) {
    if (cfg.sigma2_nr <= 0.0) throw std::domain_error("snr_relay: sigma2_nr must be > 0");
    double total = 0.0;
    for (double p : cfg.source_powers()) total += p;
    return linear_to_db(total / cfg.sigma2_nr);
}

/// Relay noise variance that realizes a target relay SNR for this config.
inline double sigma2_nr_for_snr_db(const SystemConfig& cfg, double snr_db) {
    double total = 0.0;
    for (double p : cfg.source_powers()) total += p;
    if (total <= 0.0) throw std::domain_error("sigma2_nr_for_snr_db: zero source power");
    return total / db_to_linear(snr_db);
}

}  // namespace fdrelay
