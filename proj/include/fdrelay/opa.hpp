#pragma once

#include <armadillo>
#include <cmath>
#include <cstdint>
#include <vector>

#include "fdrelay/config.hpp"
#include "fdrelay/rates.hpp"
#include "fdrelay/simplex.hpp"

namespace fdrelay {

/// Power-minimization instance: coefficients plus per-pair rate requirements
/// and peak powers.
struct OpaProblem {
    RateCoefficients coeffs;
    arma::vec required_rates;  // R_0_k, bits/s/Hz
    arma::vec peak_source;     // per-source peak power, linear
    double peak_relay = 0.0;   // relay peak power, linear
};

struct LinearizedOpa {
    LpStandardForm lp;
    std::vector<int> infeasible_pairs;  // unsatisfiable at any power within the model
    bool uniform = false;
};

/// Splits each min-rate requirement into its two per-hop SINR constraints
/// with gamma_k = 2^R0_k - 1; both are linear in (p_S, p_R):
///   uplink:  p_Sk(MV - g V) - g sum_j p_Sj MP_kj - g p_R LI >= g AN
///   downlink: p_R (MV - g (V + MP)) >= g AN.
/// This is exact, not a relaxation: the link rate is the minimum of the two
/// hops, so both must hold. With uniform=true a single shared source power
/// replaces the per-pair variables (two-variable program).
inline LinearizedOpa linearize_constraints(const OpaProblem& pr, bool uniform = false) {
    const arma::uword k = pr.required_rates.n_elem;
    if (pr.coeffs.mv_sr.n_elem != k || pr.peak_source.n_elem != k)
        throw std::invalid_argument("linearize_constraints: dimension mismatch");
    if (!(pr.peak_relay > 0.0)) throw std::invalid_argument("linearize_constraints: peak_relay <= 0");

    LinearizedOpa out;
    out.uniform = uniform;
    const arma::uword nv = uniform ? 2 : k + 1;  // [p_S..., p_R] or [p_S, p_R]
    const arma::uword pr_col = nv - 1;

    std::vector<arma::rowvec> rows;
    std::vector<double> bounds;
    for (arma::uword i = 0; i < k; ++i) {
        const double r0 = pr.required_rates(i);
        if (!(r0 >= 0.0)) throw std::invalid_argument("linearize_constraints: negative rate target");
        if (r0 == 0.0) continue;  // satisfied by any p >= 0
        const double g = std::exp2(r0) - 1.0;

        arma::rowvec sr(nv, arma::fill::zeros);
        const double self = pr.coeffs.mv_sr(i) - g * pr.coeffs.v_sr(i);
        if (uniform) {
            double c0 = self;
            for (arma::uword j = 0; j < k; ++j)
                if (j != i) c0 -= g * pr.coeffs.mp_sr(i, j);
            sr(0) = c0;
        } else {
            sr(i) = self;
            for (arma::uword j = 0; j < k; ++j)
                if (j != i) sr(j) = -g * pr.coeffs.mp_sr(i, j);
        }
        sr(pr_col) = -g * pr.coeffs.li_sr(i);
        const double sr_rhs = g * pr.coeffs.an_sr(i);

        arma::rowvec rd(nv, arma::fill::zeros);
        const double rd_coef = pr.coeffs.mv_rd(i) - g * (pr.coeffs.v_rd(i) + pr.coeffs.mp_rd(i));
        rd(pr_col) = rd_coef;
        const double rd_rhs = g * pr.coeffs.an_rd(i);

        // a non-positive downlink coefficient cannot meet a positive
        // requirement at any relay power
        if (rd_coef <= 0.0 && rd_rhs > 0.0) out.infeasible_pairs.push_back(static_cast<int>(i));
        // same for the uplink when even interference-free power cannot help
        if (self <= 0.0 && sr_rhs > 0.0) out.infeasible_pairs.push_back(static_cast<int>(i));

        rows.push_back(sr);
        bounds.push_back(sr_rhs);
        rows.push_back(rd);
        bounds.push_back(rd_rhs);
    }

    out.lp.objective.set_size(nv);
    if (uniform) {
        out.lp.objective(0) = static_cast<double>(k);  // total source power K*p_S
        out.lp.objective(1) = 1.0;
        out.lp.upper = {pr.peak_source.min(), pr.peak_relay};
    } else {
        out.lp.objective.ones();
        out.lp.upper.set_size(nv);
        for (arma::uword i = 0; i < k; ++i) out.lp.upper(i) = pr.peak_source(i);
        out.lp.upper(pr_col) = pr.peak_relay;
    }
    out.lp.ge_matrix.set_size(rows.size(), nv);
    out.lp.ge_bounds.set_size(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.lp.ge_matrix.row(r) = rows[r];
        out.lp.ge_bounds(r) = bounds[r];
    }
    return out;
}

/// Expands an LP solution into a per-pair allocation.
inline PowerAllocation allocation_from_lp(const LpSolution& sol, arma::uword k, bool uniform) {
    PowerAllocation p;
    if (sol.status != LpSolution::Status::optimal) {
        p.status = PowerAllocation::Status::infeasible;
        p.p_source.zeros(k);
        return p;
    }
    p.status = PowerAllocation::Status::feasible;
    if (uniform) {
        p.p_source = arma::vec(k, arma::fill::value(sol.x(0)));
        p.p_relay = sol.x(1);
    } else {
        p.p_source = sol.x.head(k);
        p.p_relay = sol.x(k);
    }
    return p;
}

struct IterationRecord {
    int iteration = 0;
    arma::vec p_source;
    double p_relay = 0.0;
    RateReport report;         // rates at this iteration's coefficients and new powers
    double power_delta = 0.0;  // ||p_i - p_{i-1}||_2, convergence diagnostic
    std::uint32_t singular_skipped = 0;
};

struct Algorithm1Result {
    PowerAllocation allocation;
    std::vector<IterationRecord> trace;
};

/// Iterative power allocation: starting from the peak powers, alternately
/// (1) estimate rate coefficients at the current powers over n_it channel
/// realizations, (2) solve the linearized power-minimization program, and
/// (3) adopt the solution; runs exactly n_iterations rounds. With
/// uniform_source=true all pairs share one source power (the OUPA variant).
inline Algorithm1Result run_algorithm1(const SystemConfig& cfg, const LargeScale& ls,
                                       const arma::vec& required_rates,
                                       const arma::vec& peak_source, double peak_relay,
                                       FilterMode mode, std::uint32_t n_it, int n_iterations,
                                       std::uint64_t stream_seed, unsigned threads = 1,
                                       bool uniform_source = false) {
    if (n_iterations < 1) throw std::invalid_argument("run_algorithm1: need >= 1 iteration");
    const arma::uword k = static_cast<arma::uword>(cfg.n_pairs);
    if (required_rates.n_elem != k || peak_source.n_elem != k)
        throw std::invalid_argument("run_algorithm1: dimension mismatch");

    Algorithm1Result out;
    arma::vec p_s = uniform_source ? arma::vec(k, arma::fill::value(peak_source.min()))
                                   : peak_source;
    double p_r = peak_relay;

    for (int it = 1; it <= n_iterations; ++it) {
        const RateCoefficients coeffs = estimate_coefficients(
            cfg, ls, p_s, p_r, mode, n_it, derive_seed(stream_seed, {static_cast<std::uint64_t>(it)}),
            threads);

        OpaProblem problem{coeffs, required_rates, peak_source, peak_relay};
        const LinearizedOpa lz = linearize_constraints(problem, uniform_source);
        if (!lz.infeasible_pairs.empty()) {
            out.allocation.status = PowerAllocation::Status::infeasible;
            out.allocation.violated_pairs = lz.infeasible_pairs;
            out.allocation.failed_iteration = it;
            out.allocation.p_source.zeros(k);
            return out;
        }
        const LpSolution sol = solve_lp(lz.lp);
        PowerAllocation alloc = allocation_from_lp(sol, k, uniform_source);
        if (alloc.status != PowerAllocation::Status::feasible) {
            out.allocation = alloc;
            out.allocation.failed_iteration = it;
            return out;
        }

        IterationRecord rec;
        rec.iteration = it;
        rec.power_delta = std::sqrt(arma::accu(arma::square(alloc.p_source - p_s)) +
                                    (alloc.p_relay - p_r) * (alloc.p_relay - p_r));
        p_s = alloc.p_source;
        p_r = alloc.p_relay;
        rec.p_source = p_s;
        rec.p_relay = p_r;
        rec.report = make_rate_report(coeffs, p_s, p_r);
        rec.singular_skipped = coeffs.n_singular;
        out.trace.push_back(std::move(rec));
    }

    out.allocation.p_source = p_s;
    out.allocation.p_relay = p_r;
    out.allocation.status = PowerAllocation::Status::feasible;
    return out;
}

inline Algorithm1Result run_oupa(const SystemConfig& cfg, const LargeScale& ls,
                                 const arma::vec& required_rates, const arma::vec& peak_source,
                                 double peak_relay, FilterMode mode, std::uint32_t n_it,
                                 int n_iterations, std::uint64_t stream_seed,
                                 unsigned threads = 1) {
    return run_algorithm1(cfg, ls, required_rates, peak_source, peak_relay, mode, n_it,
                          n_iterations, stream_seed, threads, /*uniform_source=*/true);
}

}  // namespace fdrelay
