#pragma once

#include <armadillo>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "fdrelay/channel.hpp"
#include "fdrelay/config.hpp"
#include "fdrelay/constellation.hpp"
#include "fdrelay/filters.hpp"
#include "fdrelay/parallel.hpp"
#include "fdrelay/rng.hpp"

namespace fdrelay {

/// Accumulated error counts for one sweep cell.
struct SimResult {
    FilterMode mode = FilterMode::mmse;
    int n_antennas = 0;
    double p_relay_db = 0.0;
    double sigma2_nd = 1.0;

    std::uint64_t relay_bit_errors = 0, relay_bits = 0;
    std::uint64_t relay_symbol_errors = 0, relay_symbols = 0;
    std::uint64_t e2e_bit_errors = 0, e2e_bits = 0;
    std::uint64_t e2e_symbol_errors = 0, e2e_symbols = 0;

    std::uint32_t trials_done = 0;
    std::uint32_t singular_redraws = 0;

    double relay_ber() const {
        return relay_bits ? static_cast<double>(relay_bit_errors) / static_cast<double>(relay_bits)
                          : 0.0;
    }
    double e2e_ber() const {
        return e2e_bits ? static_cast<double>(e2e_bit_errors) / static_cast<double>(e2e_bits) : 0.0;
    }

    void merge(const SimResult& o) {
        relay_bit_errors += o.relay_bit_errors;
        relay_bits += o.relay_bits;
        relay_symbol_errors += o.relay_symbol_errors;
        relay_symbols += o.relay_symbols;
        e2e_bit_errors += o.e2e_bit_errors;
        e2e_bits += o.e2e_bits;
        e2e_symbol_errors += o.e2e_symbol_errors;
        e2e_symbols += o.e2e_symbols;
        trials_done += o.trials_done;
        singular_redraws += o.singular_redraws;
    }
};

/// One coherence block of the full-duplex loop.
///
/// Per slot i: sources emit fresh symbols x[i]; the relay transmits the
/// symbols it detected d slots earlier through the ZF precoder (zero until
/// the pipeline fills, always zero in HD mode); the relay receives through
/// the true channels, filters with F_rx, detects with W_zf and quantizes;
/// destinations scale by the known mean link gain 1/(sqrt(p_R)*alpha) and
/// quantize. The first d slots are excluded from both error counters.
inline void run_block(const SystemConfig& cfg, const ChannelSet& ch, const FilterSet& fs,
                      int n_symbols, Rng& rng, SimResult& out) {
    const int k = cfg.n_pairs;
    const int d = cfg.delay;
    if (n_symbols <= d) throw std::invalid_argument("run_block: n_symbols must exceed delay");

    const Constellation con = Constellation::make(cfg.mod_order);
    const int bps = con.bits_per_symbol();
    const bool hd = fs.mode == FilterMode::hd;
    const double sqrt_pr = std::sqrt(cfg.p_relay);

    const arma::vec ps(cfg.source_powers());
    arma::cx_mat g_ps = ch.g_sr();  // true uplink channel with source power scaling
    for (int j = 0; j < k; ++j) g_ps.col(static_cast<arma::uword>(j)) *= std::sqrt(ps(j));
    const arma::cx_mat g_rd = ch.g_rd();

    // detector applied to the filtered receive vector in one shot
    const arma::cx_mat w_eff = fs.w_zf * fs.f_rx;

    const double dest_gain = sqrt_pr * fs.alpha;
    const bool count_e2e = !hd && dest_gain > 0.0;

    std::vector<std::vector<unsigned>> tx_labels(static_cast<std::size_t>(n_symbols));
    std::vector<arma::cx_vec> detected(static_cast<std::size_t>(n_symbols));
    std::vector<std::vector<unsigned>> detected_labels(static_cast<std::size_t>(n_symbols));

    arma::cx_vec x(static_cast<arma::uword>(k));
    arma::cx_vec t(static_cast<arma::uword>(cfg.n_tx), arma::fill::zeros);

    for (int i = 0; i < n_symbols; ++i) {
        auto& labels = tx_labels[static_cast<std::size_t>(i)];
        labels.resize(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            unsigned lab = 0;
            for (int b = 0; b < bps; ++b) lab = (lab << 1) | static_cast<unsigned>(rng.bit());
            labels[static_cast<std::size_t>(j)] = lab;
            x(static_cast<arma::uword>(j)) = con.point_of_label(lab);
        }

        if (!hd && i >= d) {
            t = fs.f_tx * (fs.a_zf * detected[static_cast<std::size_t>(i - d)]);
            t = apply_tx_impairment(t, cfg.eps2_t, rng);
        } else {
            t.zeros();
        }

        // relay input through the true channels; the loopback term uses the
        // true H_li and the impaired t, which is what keeps residual
        // interference nonzero after filtering
        arma::cx_vec r = g_ps * x;
        if (!hd && cfg.p_relay > 0.0) r += sqrt_pr * (ch.h_li * t);
        for (arma::uword n = 0; n < r.n_elem; ++n) r(n) += rng.cgaussian(cfg.sigma2_nr);

        arma::cx_vec z = w_eff * r;
        auto& det = detected[static_cast<std::size_t>(i)];
        auto& det_labels = detected_labels[static_cast<std::size_t>(i)];
        det.set_size(static_cast<arma::uword>(k));
        det_labels.resize(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) {
            cxd zj = z(static_cast<arma::uword>(j));
            if (ps(j) > 0.0) zj /= std::sqrt(ps(j));
            const int idx = con.nearest_index(zj);
            det(static_cast<arma::uword>(j)) = con.point(idx);
            det_labels[static_cast<std::size_t>(j)] = con.label(idx);
        }

        if (i >= d) {
            // relay-side errors, slot-aligned
            for (int j = 0; j < k; ++j) {
                const unsigned diff = labels[static_cast<std::size_t>(j)] ^
                                      det_labels[static_cast<std::size_t>(j)];
                out.relay_bit_errors += static_cast<std::uint64_t>(std::popcount(diff));
                out.relay_symbol_errors += diff != 0 ? 1 : 0;
            }
            out.relay_bits += static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(bps);
            out.relay_symbols += static_cast<std::uint64_t>(k);
        }

        if (count_e2e && i >= d) {
            arma::cx_vec y = sqrt_pr * (g_rd * t);
            for (arma::uword n = 0; n < y.n_elem; ++n) y(n) += rng.cgaussian(cfg.sigma2_nd);
            const auto& ref = tx_labels[static_cast<std::size_t>(i - d)];
            for (int j = 0; j < k; ++j) {
                const int idx = con.nearest_index(y(static_cast<arma::uword>(j)) / dest_gain);
                const unsigned diff = con.label(idx) ^ ref[static_cast<std::size_t>(j)];
                out.e2e_bit_errors += static_cast<std::uint64_t>(std::popcount(diff));
                out.e2e_symbol_errors += diff != 0 ? 1 : 0;
            }
            out.e2e_bits += static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(bps);
            out.e2e_symbols += static_cast<std::uint64_t>(k);
        }
    }
}

struct SweepGrid {
    std::vector<int> n_antennas;
    std::vector<double> p_relay_db;
    std::vector<FilterMode> modes;
    std::vector<double> sigma2_nd;  // optional extra axis; defaults to cfg value

    std::size_t n_cells() const {
        const std::size_t nd = sigma2_nd.empty() ? 1 : sigma2_nd.size();
        return n_antennas.size() * p_relay_db.size() * modes.size() * nd;
    }
};

namespace detail {

/// Content-derived cell identifier: permuting the grid does not change any
/// cell's random stream.
inline std::uint64_t cell_uid(FilterMode mode, int n, double pr_db, double s2nd) {
    return derive_seed(0x5eedcell,
                       {static_cast<std::uint64_t>(mode), static_cast<std::uint64_t>(n),
                        seed_key(pr_db), seed_key(s2nd)});
}

inline void run_trial(const SystemConfig& cfg, FilterMode mode, std::uint64_t cell,
                      std::uint32_t trial, int n_symbols, SimResult& acc) {
    for (std::uint32_t attempt = 0;; ++attempt) {
        Rng rng(derive_seed(cfg.master_seed, {cell, trial, attempt}));
        const LargeScale ls = draw_large_scale(cfg, rng);
        const ChannelSet ch = draw_channels(cfg, ls, rng);
        try {
            const FilterSet fs = build_filter_set(cfg, ch, mode);
            run_block(cfg, ch, fs, n_symbols, rng, acc);
            acc.trials_done += 1;
            return;
        } catch (const SingularRealization&) {
            acc.singular_redraws += 1;
            if (attempt >= 32) throw;  // persistent breakdown, not chance
        }
    }
}

}  // namespace detail

/// Monte Carlo BER sweep over (mode, N, p_R[, sigma2_nd]). Each trial owns a
/// random stream derived from (master seed, cell content, trial index), so
/// per-cell results do not depend on grid order, execution order, or thread
/// count; cell aggregation is an integer sum.
inline std::vector<SimResult> sweep(const SystemConfig& base, const SweepGrid& grid,
                                    std::uint32_t trials, int symbols_per_trial,
                                    unsigned threads) {
    if (grid.n_cells() == 0) throw std::invalid_argument("sweep: empty grid");
    base.validate();

    struct Cell {
        SystemConfig cfg;
        FilterMode mode;
        std::uint64_t uid;
        SimResult shape;
    };
    std::vector<Cell> cells;
    const std::vector<double> s2nd_axis =
        grid.sigma2_nd.empty() ? std::vector<double>{base.sigma2_nd} : grid.sigma2_nd;
    for (FilterMode mode : grid.modes)
        for (int n : grid.n_antennas)
            for (double s2nd : s2nd_axis)
                for (double pr_db : grid.p_relay_db) {
                    Cell c;
                    c.cfg = base;
                    c.cfg.n_rx = c.cfg.n_tx = n;
                    c.cfg.p_relay = db_to_linear(pr_db);
                    c.cfg.sigma2_nd = s2nd;
                    c.cfg.validate();
                    c.mode = mode;
                    c.uid = detail::cell_uid(mode, n, pr_db, s2nd);
                    c.shape.mode = mode;
                    c.shape.n_antennas = n;
                    c.shape.p_relay_db = pr_db;
                    c.shape.sigma2_nd = s2nd;
                    cells.push_back(std::move(c));
                }

    constexpr std::uint32_t kChunk = 16;  // trials per task
    const std::uint32_t chunks_per_cell = (trials + kChunk - 1) / kChunk;
    const std::size_t n_tasks = cells.size() * chunks_per_cell;
    std::vector<SimResult> partials(n_tasks);

    parallel_for(n_tasks, threads, [&](std::size_t task) {
        const std::size_t ci = task / chunks_per_cell;
        const std::uint32_t chunk = static_cast<std::uint32_t>(task % chunks_per_cell);
        const Cell& cell = cells[ci];
        SimResult& acc = partials[task];
        acc.mode = cell.shape.mode;
        const std::uint32_t t0 = chunk * kChunk;
        const std::uint32_t t1 = std::min(trials, t0 + kChunk);
        for (std::uint32_t t = t0; t < t1; ++t)
            detail::run_trial(cell.cfg, cell.mode, cell.uid, t, symbols_per_trial, acc);
    });

    std::vector<SimResult> results;
    results.reserve(cells.size());
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        SimResult r = cells[ci].shape;
        for (std::uint32_t chunk = 0; chunk < chunks_per_cell; ++chunk)
            r.merge(partials[ci * chunks_per_cell + chunk]);
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace fdrelay
