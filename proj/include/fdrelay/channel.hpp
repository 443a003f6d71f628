#pragma once

#include <armadillo>

#include "fdrelay/config.hpp"
#include "fdrelay/rng.hpp"

namespace fdrelay {

/// Large-scale fading coefficients, fixed over a coherence-block ensemble.
struct LargeScale {
    arma::vec beta_sr;  ///< beta_SR_k, strictly positive
    arma::vec beta_rd;  ///< beta_RD_k, strictly positive
};

/// One block-fading realization: true small-scale matrices, their estimates,
/// and the estimation-error draws connecting them.
///
/// Construction is estimate-first: the estimate is drawn with the variance
/// used by the filter formulas (1 + eps2_h for the access links, matching
/// the normalization of the precoder scaling), the error is drawn
/// independently with variance eps2_h, and the true matrix is their sum.
/// The identity H = Hhat + E therefore holds exactly per element.
struct ChannelSet {
    arma::cx_mat h_sr;  ///< true source->relay small-scale, N_rx x K
    arma::cx_mat h_rd;  ///< true relay->destination small-scale, K x N_tx
    arma::cx_mat h_li;  ///< true loopback channel, N_rx x N_tx

    arma::cx_mat hhat_sr, hhat_rd, hhat_li;  ///< estimates
    arma::cx_mat err_sr, err_rd, err_li;     ///< error draws (H - Hhat)

    arma::vec beta_sr, beta_rd;

    /// True composite channels including large-scale gains.
    arma::cx_mat g_sr() const { return scale_cols(h_sr, beta_sr); }
    arma::cx_mat g_rd() const { return scale_rows(h_rd, beta_rd); }

    /// Estimated composite channels (large-scale gains are error-free).
    arma::cx_mat ghat_sr() const { return scale_cols(hhat_sr, beta_sr); }
    arma::cx_mat ghat_rd() const { return scale_rows(hhat_rd, beta_rd); }

  private:
    static arma::cx_mat scale_cols(const arma::cx_mat& m, const arma::vec& beta) {
        arma::cx_mat out = m;
        for (arma::uword k = 0; k < beta.n_elem; ++k) out.col(k) *= std::sqrt(beta(k));
        return out;
    }
    static arma::cx_mat scale_rows(const arma::cx_mat& m, const arma::vec& beta) {
        arma::cx_mat out = m;
        for (arma::uword k = 0; k < beta.n_elem; ++k) out.row(k) *= std::sqrt(beta(k));
        return out;
    }
};

/// Fills a matrix with i.i.d. CN(0, variance) entries in column-major order.
inline void fill_cgaussian(arma::cx_mat& m, double variance, Rng& rng) {
    for (arma::uword i = 0; i < m.n_elem; ++i) m(i) = rng.cgaussian(variance);
}

/// Draws the large-scale coefficients. Log-normal with linear-scale mean 1:
/// beta = exp(mu + s*g), g ~ N(0,1), s = sigma_dB * ln(10)/10, mu = -s^2/2.
inline LargeScale draw_large_scale(const SystemConfig& cfg, Rng& rng) {
    const arma::uword k = static_cast<arma::uword>(cfg.n_pairs);
    LargeScale ls;
    ls.beta_sr.ones(k);
    ls.beta_rd.ones(k);
    if (cfg.shadow_sigma_db > 0.0) {
        const double s = cfg.shadow_sigma_db * std::log(10.0) / 10.0;
        const double mu = -0.5 * s * s;
        for (arma::uword i = 0; i < k; ++i) ls.beta_sr(i) = std::exp(mu + s * rng.gaussian());
        for (arma::uword i = 0; i < k; ++i) ls.beta_rd(i) = std::exp(mu + s * rng.gaussian());
    }
    return ls;
}

/// Draws one block-fading realization for fixed large-scale coefficients.
inline ChannelSet draw_channels(const SystemConfig& cfg, const LargeScale& ls, Rng& rng) {
    const arma::uword k = static_cast<arma::uword>(cfg.n_pairs);
    const arma::uword nrx = static_cast<arma::uword>(cfg.n_rx);
    const arma::uword ntx = static_cast<arma::uword>(cfg.n_tx);

    ChannelSet ch;
    ch.beta_sr = ls.beta_sr;
    ch.beta_rd = ls.beta_rd;

    ch.hhat_sr.set_size(nrx, k);
    ch.err_sr.set_size(nrx, k);
    ch.hhat_rd.set_size(k, ntx);
    ch.err_rd.set_size(k, ntx);
    ch.hhat_li.set_size(nrx, ntx);
    ch.err_li.set_size(nrx, ntx);

    // draw order is part of the reproducibility contract
    fill_cgaussian(ch.hhat_sr, 1.0 + cfg.eps2_h, rng);
    fill_cgaussian(ch.err_sr, cfg.eps2_h, rng);
    fill_cgaussian(ch.hhat_rd, 1.0 + cfg.eps2_h, rng);
    fill_cgaussian(ch.err_rd, cfg.eps2_h, rng);
    fill_cgaussian(ch.hhat_li, cfg.sigma2_li + cfg.eps2_h, rng);
    fill_cgaussian(ch.err_li, cfg.eps2_h, rng);

    ch.h_sr = ch.hhat_sr + ch.err_sr;
    ch.h_rd = ch.hhat_rd + ch.err_rd;
    ch.h_li = ch.hhat_li + ch.err_li;
    return ch;
}

/// Convenience overload drawing large-scale coefficients from the same stream.
inline ChannelSet draw_channels(const SystemConfig& cfg, Rng& rng) {
    return draw_channels(cfg, draw_large_scale(cfg, rng), rng);
}

/// Additive transmit hardware impairment: t = t_in + e, e ~ CN(0, eps2_t I),
/// drawn independently of t_in.
inline arma::cx_vec apply_tx_impairment(const arma::cx_vec& t_in, double eps2_t, Rng& rng) {
    if (eps2_t <= 0.0) return t_in;
    arma::cx_vec t = t_in;
    for (arma::uword i = 0; i < t.n_elem; ++i) t(i) += rng.cgaussian(eps2_t);
    return t;
}

}  // namespace fdrelay
