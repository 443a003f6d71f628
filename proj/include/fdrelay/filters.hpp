#pragma once

#include <armadillo>
#include <stdexcept>
#include <string>

#include "fdrelay/channel.hpp"
#include "fdrelay/config.hpp"

namespace fdrelay {

/// Raised when a Gram matrix is numerically rank deficient. Callers redraw
/// the realization and count the event.
struct SingularRealization : std::runtime_error {
    explicit SingularRealization(const std::string& what) : std::runtime_error(what) {}
};

enum class FilterMode { mmse, ni, hd };

inline const char* to_string(FilterMode m) {
    switch (m) {
        case FilterMode::mmse: return "mmse";
        case FilterMode::ni: return "ni";
        default: return "hd";
    }
}

namespace detail {
inline constexpr double kRcondFloor = 1e-12;

inline void require_well_conditioned(const arma::cx_mat& gram, const char* who) {
    const double rc = arma::rcond(gram);
    if (!std::isfinite(rc) || rc < kRcondFloor)
        throw SingularRealization(std::string(who) + ": Gram matrix rcond " +
                                  std::to_string(rc) + " below 1e-12");
}
}  // namespace detail

/// Zero-forcing detector, the left inverse of the estimated uplink channel:
/// W = (G^H G)^-1 G^H, so W * G = I.
inline arma::cx_mat zf_detector(const arma::cx_mat& ghat_sr) {
    const arma::cx_mat gram = ghat_sr.t() * ghat_sr;  // K x K
    detail::require_well_conditioned(gram, "zf_detector");
    return arma::solve(gram, ghat_sr.t(), arma::solve_opts::likely_sympd);
}

/// Power-normalization scalar of the ZF precoder,
/// sqrt((N_tx - K) / sum_k 1/(beta_RD_k (1 + eps2_h))).
/// Equals the inverse square root of the expected trace of the inverse
/// downlink Gram matrix (central Wishart identity).
inline double alpha_zf(const arma::vec& beta_rd, double eps2_h, int n_tx, int k) {
    if (n_tx <= k) throw std::domain_error("alpha_zf: requires N_tx > K");
    if (static_cast<int>(beta_rd.n_elem) != k)
        throw std::invalid_argument("alpha_zf: beta length must equal K");
    double denom = 0.0;
    for (arma::uword i = 0; i < beta_rd.n_elem; ++i) {
        if (!(beta_rd(i) > 0.0)) throw std::domain_error("alpha_zf: beta must be > 0");
        denom += 1.0 / (beta_rd(i) * (1.0 + eps2_h));
    }
    return std::sqrt(static_cast<double>(n_tx - k) / denom);
}

/// Zero-forcing precoder A = alpha * G^H (G G^H)^-1, so G * A = alpha * I.
inline arma::cx_mat zf_precoder(const arma::cx_mat& ghat_rd, double alpha) {
    const arma::cx_mat gram = ghat_rd * ghat_rd.t();  // K x K
    detail::require_well_conditioned(gram, "zf_precoder");
    // A = alpha * (solve(gram, ghat_rd))^H since gram is Hermitian
    return alpha * arma::solve(gram, ghat_rd, arma::solve_opts::likely_sympd).t();
}

/// Covariance of the relay transmit vector for unit-covariance forwarded
/// symbols: R_t = F_tx A A^H F_tx^H + eps2_t I. F_tx = I throughout.
inline arma::cx_mat transmit_covariance(const arma::cx_mat& a_zf, double eps2_t) {
    arma::cx_mat rt = a_zf * a_zf.t();
    rt.diag() += eps2_t;
    return rt;
}

/// MMSE receive filter suppressing loopback interference:
///   F = S (S + p_R Hli_hat R_t Hli_hat^H + sigma2_nr I)^-1,
/// with S = Ghat_sr D_ps Ghat_sr^H. Computed by solving the Hermitian
/// positive-definite system rather than forming an explicit inverse.
inline arma::cx_mat mmse_rx_filter(const arma::cx_mat& ghat_sr, const arma::vec& p_source,
                                   const arma::cx_mat& hhat_li, const arma::cx_mat& a_zf,
                                   double eps2_t, double sigma2_nr, double p_relay) {
    if (!(sigma2_nr > 0.0)) throw std::domain_error("mmse_rx_filter: sigma2_nr must be > 0");
    if (!ghat_sr.is_finite() || !hhat_li.is_finite())
        throw std::domain_error("mmse_rx_filter: non-finite channel estimate");

    arma::cx_mat gp = ghat_sr;  // Ghat_sr * D_ps^(1/2)
    for (arma::uword k = 0; k < p_source.n_elem; ++k) gp.col(k) *= std::sqrt(p_source(k));
    const arma::cx_mat s = gp * gp.t();

    arma::cx_mat denom = s;
    if (p_relay > 0.0) {
        const arma::cx_mat rt = transmit_covariance(a_zf, eps2_t);
        denom += p_relay * hhat_li * rt * hhat_li.t();
    }
    denom.diag() += sigma2_nr;

    // F = S * denom^-1;  F^H = denom^-1 * S because both factors are Hermitian
    return arma::solve(denom, s, arma::solve_opts::likely_sympd).t();
}

/// Trace of the residual error covariance of the filtered relay input:
/// tr{(I-F)S(I-F)^H + p_R F Hli R_t Hli^H F^H + sigma2_nr F F^H}.
inline double trace_error_covariance(const arma::cx_mat& f_rx, const arma::cx_mat& f_tx,
                                     const arma::cx_mat& ghat_sr, const arma::vec& p_source,
                                     const arma::cx_mat& hhat_li, const arma::cx_mat& a_zf,
                                     double eps2_t, double sigma2_nr, double p_relay) {
    const arma::uword n = f_rx.n_rows;
    if (f_rx.n_cols != ghat_sr.n_rows || hhat_li.n_rows != n)
        throw std::invalid_argument("trace_error_covariance: shape mismatch");

    arma::cx_mat gp = ghat_sr;
    for (arma::uword k = 0; k < p_source.n_elem; ++k) gp.col(k) *= std::sqrt(p_source(k));

    const arma::cx_mat imf = arma::eye<arma::cx_mat>(n, n) - f_rx;
    const arma::cx_mat sig_part = imf * gp;           // (I-F) * S * (I-F)^H = X X^H
    double tr = arma::accu(arma::square(arma::abs(sig_part)));

    if (p_relay > 0.0) {
        const arma::cx_mat ta = f_rx * hhat_li * f_tx * a_zf;  // forwarded-symbol leakage
        tr += p_relay * arma::accu(arma::square(arma::abs(ta)));
        if (eps2_t > 0.0) {
            const arma::cx_mat ti = f_rx * hhat_li;  // impairment leakage
            tr += p_relay * eps2_t * arma::accu(arma::square(arma::abs(ti)));
        }
    }
    tr += sigma2_nr * arma::accu(arma::square(arma::abs(f_rx)));
    return tr;
}

/// Frobenius norm of F_rx * Hli_hat * F_tx: distance-to-null-space-projection
/// diagnostic. Zero means the estimated loopback channel is fully nulled.
inline double nsp_residual(const arma::cx_mat& f_rx, const arma::cx_mat& hhat_li,
                           const arma::cx_mat& f_tx) {
    return arma::norm(f_rx * hhat_li * f_tx, "fro");
}

/// Per-realization filter bank. F_tx is the identity throughout; the HD
/// baseline is a flag consumed by the simulator (forces t = 0), not a
/// separate pipeline.
struct FilterSet {
    arma::cx_mat w_zf;   // K x N_rx
    arma::cx_mat a_zf;   // N_tx x K
    double alpha = 0.0;  // precoder normalization scalar
    arma::cx_mat f_rx;   // N_rx x N_rx
    arma::cx_mat f_tx;   // N_tx x N_tx (identity)
    FilterMode mode = FilterMode::mmse;
};

inline FilterSet build_filter_set(const SystemConfig& cfg, const ChannelSet& ch,
                                  FilterMode mode) {
    FilterSet fs;
    fs.mode = mode;
    fs.w_zf = zf_detector(ch.ghat_sr());
    fs.alpha = alpha_zf(ch.beta_rd, cfg.eps2_h, cfg.n_tx, cfg.n_pairs);
    fs.a_zf = zf_precoder(ch.ghat_rd(), fs.alpha);
    fs.f_tx = arma::eye<arma::cx_mat>(static_cast<arma::uword>(cfg.n_tx),
                                      static_cast<arma::uword>(cfg.n_tx));
    if (mode == FilterMode::mmse) {
        const arma::vec ps(cfg.source_powers());
        fs.f_rx = mmse_rx_filter(ch.ghat_sr(), ps, ch.hhat_li, fs.a_zf, cfg.eps2_t,
                                 cfg.sigma2_nr, cfg.p_relay);
    } else {
        fs.f_rx = arma::eye<arma::cx_mat>(static_cast<arma::uword>(cfg.n_rx),
                                          static_cast<arma::uword>(cfg.n_rx));
    }
    return fs;
}

}  // namespace fdrelay
