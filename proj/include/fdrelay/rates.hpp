#pragma once

#include <armadillo>
#include <cstdint>
#include <vector>

#include "fdrelay/channel.hpp"
#include "fdrelay/config.hpp"
#include "fdrelay/filters.hpp"
#include "fdrelay/parallel.hpp"
#include "fdrelay/rng.hpp"

namespace fdrelay {

/// Power operating point / optimizer output.
struct PowerAllocation {
    arma::vec p_source;   // length K, linear scale
    double p_relay = 0.0;
    enum class Status { feasible, infeasible, iteration_limit } status = Status::feasible;
    std::vector<int> violated_pairs;  // pairs whose rate constraint cannot be met
    int failed_iteration = -1;        // iteration at which infeasibility was detected

    double total() const { return p_relay + arma::accu(p_source); }
};

/// Channel-statistic coefficients of the per-pair SINR expressions, averaged
/// over block-fading realizations at a fixed power operating point.
///
/// Uplink, per pair k (a_kj = k-th row of W_zf*F_rx applied to true g_SR_j):
///   mv_sr  = |E a_kk|^2          v_sr = Var a_kk
///   mp_sr(k,j) = E|a_kj|^2       li_sr = E||row_k(W F) H_li F_tx A||^2
///   an_sr  = sigma2_nr E||row_k(W F)||^2
/// Downlink analogues use b_kj = true g_RD row k applied to column j of
/// F_tx*A_zf; mp_rd is already summed over j != k, and an_rd = sigma2_nd.
struct RateCoefficients {
    arma::vec mv_sr, v_sr, li_sr, an_sr;
    arma::mat mp_sr;  // K x K, diagonal zero
    arma::vec mv_rd, v_rd, mp_rd, an_rd;
    std::uint64_t n_samples = 0;
    std::uint32_t n_singular = 0;
};

namespace detail {

struct CoeffAccum {
    arma::cx_vec sum_a, sum_b;
    arma::vec sum_a2, sum_b2, sum_li, sum_wnorm;
    arma::mat sum_mp_sr, sum_mp_rd;
    std::uint64_t n = 0;
    std::uint32_t singular = 0;

    explicit CoeffAccum(arma::uword k)
        : sum_a(k, arma::fill::zeros),
          sum_b(k, arma::fill::zeros),
          sum_a2(k, arma::fill::zeros),
          sum_b2(k, arma::fill::zeros),
          sum_li(k, arma::fill::zeros),
          sum_wnorm(k, arma::fill::zeros),
          sum_mp_sr(k, k, arma::fill::zeros),
          sum_mp_rd(k, k, arma::fill::zeros) {}

    void merge(const CoeffAccum& o) {
        sum_a += o.sum_a;
        sum_b += o.sum_b;
        sum_a2 += o.sum_a2;
        sum_b2 += o.sum_b2;
        sum_li += o.sum_li;
        sum_wnorm += o.sum_wnorm;
        sum_mp_sr += o.sum_mp_sr;
        sum_mp_rd += o.sum_mp_rd;
        n += o.n;
        singular += o.singular;
    }
};

inline void accumulate_realization(const SystemConfig& cfg, const LargeScale& ls,
                                   const arma::vec& p_source, double p_relay, FilterMode mode,
                                   Rng& rng, CoeffAccum& acc) {
    const ChannelSet ch = draw_channels(cfg, ls, rng);
    FilterSet fs;
    try {
        SystemConfig c = cfg;
        c.p_relay = p_relay;
        c.p_source = arma::conv_to<std::vector<double>>::from(p_source);
        fs = build_filter_set(c, ch, mode);
    } catch (const SingularRealization&) {
        acc.singular += 1;
        return;
    }

    const arma::uword k = static_cast<arma::uword>(cfg.n_pairs);
    const arma::cx_mat wf = fs.w_zf * fs.f_rx;          // K x N_rx
    const arma::cx_mat c_sr = wf * ch.g_sr();           // true uplink gains
    const arma::cx_mat m_li = (wf * ch.h_li) * fs.a_zf; // loopback leakage, F_tx = I
    const arma::cx_mat c_rd = ch.g_rd() * fs.a_zf;      // true downlink gains

    for (arma::uword i = 0; i < k; ++i) {
        acc.sum_a(i) += c_sr(i, i);
        acc.sum_a2(i) += std::norm(c_sr(i, i));
        acc.sum_b(i) += c_rd(i, i);
        acc.sum_b2(i) += std::norm(c_rd(i, i));
        double li = 0.0, wn = 0.0;
        for (arma::uword j = 0; j < m_li.n_cols; ++j) li += std::norm(m_li(i, j));
        for (arma::uword j = 0; j < wf.n_cols; ++j) wn += std::norm(wf(i, j));
        acc.sum_li(i) += li;
        acc.sum_wnorm(i) += wn;
        for (arma::uword j = 0; j < k; ++j) {
            if (j == i) continue;
            acc.sum_mp_sr(i, j) += std::norm(c_sr(i, j));
            acc.sum_mp_rd(i, j) += std::norm(c_rd(i, j));
        }
    }
    acc.n += 1;
}

}  // namespace detail

/// Monte Carlo estimate of the rate coefficients at the given powers.
/// Realizations are drawn in fixed-size chunks and partial sums are merged
/// in chunk order, so the result is independent of thread count. Singular
/// realizations are skipped and counted.
inline RateCoefficients estimate_coefficients(const SystemConfig& cfg, const LargeScale& ls,
                                              const arma::vec& p_source, double p_relay,
                                              FilterMode mode, std::uint32_t n_it,
                                              std::uint64_t stream_seed, unsigned threads = 1) {
    if (n_it < 1) throw std::invalid_argument("estimate_coefficients: n_it must be >= 1");
    const arma::uword k = static_cast<arma::uword>(cfg.n_pairs);

    constexpr std::uint32_t kChunk = 32;
    const std::uint32_t n_chunks = (n_it + kChunk - 1) / kChunk;
    std::vector<detail::CoeffAccum> partials(n_chunks, detail::CoeffAccum(k));

    parallel_for(n_chunks, threads, [&](std::size_t ci) {
        auto& acc = partials[ci];
        const std::uint32_t i0 = static_cast<std::uint32_t>(ci) * kChunk;
        const std::uint32_t i1 = std::min(n_it, i0 + kChunk);
        for (std::uint32_t i = i0; i < i1; ++i) {
            Rng rng(derive_seed(stream_seed, {i}));
            detail::accumulate_realization(cfg, ls, p_source, p_relay, mode, rng, acc);
        }
    });

    detail::CoeffAccum total(k);
    for (const auto& p : partials) total.merge(p);
    if (total.n == 0) throw SingularRealization("estimate_coefficients: all realizations singular");

    const double n = static_cast<double>(total.n);
    RateCoefficients out;
    out.n_samples = total.n;
    out.n_singular = total.singular;
    out.mv_sr.set_size(k);
    out.v_sr.set_size(k);
    out.li_sr = total.sum_li / n;
    out.an_sr = cfg.sigma2_nr * total.sum_wnorm / n;
    out.mp_sr = total.sum_mp_sr / n;
    out.mv_rd.set_size(k);
    out.v_rd.set_size(k);
    out.mp_rd.set_size(k);
    out.an_rd.set_size(k);
    for (arma::uword i = 0; i < k; ++i) {
        const std::complex<double> ma = total.sum_a(i) / n;
        const std::complex<double> mb = total.sum_b(i) / n;
        out.mv_sr(i) = std::norm(ma);
        out.v_sr(i) = std::max(0.0, total.sum_a2(i) / n - std::norm(ma));
        out.mv_rd(i) = std::norm(mb);
        out.v_rd(i) = std::max(0.0, total.sum_b2(i) / n - std::norm(mb));
        out.mp_rd(i) = arma::accu(total.sum_mp_rd.row(i)) / n;
        out.an_rd(i) = cfg.sigma2_nd;
    }
    return out;
}

/// Achievable uplink rate of pair k, log2(1 + SINR_SR_k).
inline double rate_sr(int k, const RateCoefficients& c, const arma::vec& p_source,
                      double p_relay) {
    const arma::uword i = static_cast<arma::uword>(k);
    const double num = p_source(i) * c.mv_sr(i);
    double den = p_source(i) * c.v_sr(i) + p_relay * c.li_sr(i) + c.an_sr(i);
    for (arma::uword j = 0; j < p_source.n_elem; ++j)
        if (j != i) den += p_source(j) * c.mp_sr(i, j);
    if (num <= 0.0) return 0.0;
    if (den <= 0.0) return 0.0;  // degenerate 0/0; treated as no information
    return std::log2(1.0 + num / den);
}

/// Achievable downlink rate of pair k, log2(1 + SINR_RD_k). Both the signal
/// and the interference terms scale with the relay power.
inline double rate_rd(int k, const RateCoefficients& c, double p_relay) {
    const arma::uword i = static_cast<arma::uword>(k);
    const double num = p_relay * c.mv_rd(i);
    const double den = p_relay * (c.v_rd(i) + c.mp_rd(i)) + c.an_rd(i);
    if (num <= 0.0 || den <= 0.0) return 0.0;
    return std::log2(1.0 + num / den);
}

inline double energy_efficiency(double sum_rate, const arma::vec& p_source, double p_relay) {
    const double total = p_relay + arma::accu(p_source);
    if (!(total > 0.0)) throw std::domain_error("energy_efficiency: total power must be > 0");
    return sum_rate / total;
}

/// Per-pair rates at one operating point; the link rate is the minimum of
/// the two hops.
struct RateReport {
    arma::vec r_sr, r_rd, r_link;
    double sum_rate = 0.0;
    double ee = 0.0;
};

inline RateReport make_rate_report(const RateCoefficients& c, const arma::vec& p_source,
                                   double p_relay) {
    const arma::uword k = c.mv_sr.n_elem;
    RateReport rep;
    rep.r_sr.set_size(k);
    rep.r_rd.set_size(k);
    rep.r_link.set_size(k);
    for (arma::uword i = 0; i < k; ++i) {
        rep.r_sr(i) = rate_sr(static_cast<int>(i), c, p_source, p_relay);
        rep.r_rd(i) = rate_rd(static_cast<int>(i), c, p_relay);
        rep.r_link(i) = std::min(rep.r_sr(i), rep.r_rd(i));
    }
    rep.sum_rate = arma::accu(rep.r_link);
    const double total = p_relay + arma::accu(p_source);
    rep.ee = total > 0.0 ? rep.sum_rate / total : 0.0;
    return rep;
}

inline double energy_efficiency(const RateReport& rep, const PowerAllocation& p) {
    return energy_efficiency(rep.sum_rate, p.p_source, p.p_relay);
}

}  // namespace fdrelay
