// Command-line front end: experiment selection, config file + flag overrides,
// CSV output. Flags win over the config file; the config file wins over the
// per-experiment defaults.

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "fdrelay/experiment.hpp"

extern "C" void openblas_set_num_threads(int);

int main(int argc, char** argv) {
    // trial-level parallelism only; nested BLAS threading would make cell
    // timing erratic without changing any result
    openblas_set_num_threads(1);

    CLI::App app{"Monte Carlo simulator and power-allocation toolkit for a "
                 "multipair full-duplex massive MIMO relay"};

    std::string experiment = "relay-ber";
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::uint32_t trials = 0;
    int symbols = 0;
    int k_pairs = 0;
    std::vector<int> n_list;
    std::vector<double> pr_db;
    double snr_db = std::numeric_limits<double>::quiet_NaN();
    int mod_order = 0;
    double eps_h2 = -1.0, eps_t2 = -1.0, sigma_li2 = -1.0;
    std::vector<double> sigma_nd2;
    std::vector<std::string> modes;
    std::vector<double> sum_rates;
    int instances = 0;
    std::uint32_t n_it = 0;
    int iters = 0;
    double peak_source_db = std::numeric_limits<double>::quiet_NaN();
    double peak_relay_db = std::numeric_limits<double>::quiet_NaN();
    int delay = 0;
    double shadow_db = -1.0;
    bool no_timestamp = false;

    app.add_option("--experiment", experiment,
                   "relay-ber | e2e-ber | opa-ee | custom-sweep")
        ->default_val("relay-ber");
    app.add_option("--config", config_path, "JSON config file (flags override it)");
    app.add_option("--seed", seed, "master RNG seed");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_option("--trials", trials, "Monte Carlo trials per cell");
    app.add_option("--symbols", symbols, "symbol slots per trial");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--K", k_pairs, "number of source-destination pairs");
    app.add_option("--N", n_list, "relay antenna counts (N_rx = N_tx)");
    app.add_option("--pr-db", pr_db, "relay power grid in dB (0 dB = unit power)");
    app.add_option("--snr-db", snr_db, "relay SNR in dB (sets the relay noise level)");
    app.add_option("--mod-order", mod_order, "QAM order: 4, 16 or 64");
    app.add_option("--eps-h2", eps_h2, "channel estimation error variance");
    app.add_option("--eps-t2", eps_t2, "transmit impairment variance");
    app.add_option("--sigma-li2", sigma_li2, "residual loopback variance");
    app.add_option("--sigma-nd2", sigma_nd2, "destination noise variance grid");
    app.add_option("--mode", modes, "filter modes: mmse ni hd");
    app.add_option("--sum-rates", sum_rates, "sum-rate targets (opa-ee)");
    app.add_option("--instances", instances, "shadowing/rate draws (opa-ee)");
    app.add_option("--n-it", n_it, "channel realizations per algorithm iteration");
    app.add_option("--iters", iters, "algorithm iterations");
    app.add_option("--peak-source-db", peak_source_db, "per-source peak power, dB");
    app.add_option("--peak-relay-db", peak_relay_db, "relay peak power, dB");
    app.add_option("--delay", delay, "relay processing delay in slots");
    app.add_option("--shadow-db", shadow_db, "log-normal shadowing std in dB (0 = off)");
    app.add_flag("--no-timestamp", no_timestamp, "suppress the timestamp comment line");

    CLI11_PARSE(app, argc, argv);

    try {
        const fdrelay::ExperimentKind cli_kind = fdrelay::experiment_kind_from(experiment);
        fdrelay::ExperimentSpec spec;
        if (!config_path.empty()) {
            spec = fdrelay::parse_config_file(config_path, cli_kind);
            if (app.count("--experiment") && spec.kind != cli_kind)
                throw std::invalid_argument("--experiment conflicts with config file");
        } else {
            spec = fdrelay::make_default_spec(cli_kind);
        }

        if (app.count("--seed")) spec.base.master_seed = seed;
        if (app.count("--threads")) spec.threads = threads;
        if (app.count("--trials")) spec.trials = trials;
        if (app.count("--symbols")) spec.symbols = symbols;
        if (app.count("--out")) spec.out_dir = out_dir;
        if (app.count("--K")) spec.base.n_pairs = k_pairs;
        if (app.count("--N")) spec.n_list = n_list;
        if (app.count("--pr-db")) spec.p_relay_db_list = pr_db;
        if (app.count("--snr-db")) spec.snr_relay_db = snr_db;
        if (app.count("--mod-order")) spec.base.mod_order = mod_order;
        if (app.count("--eps-h2")) spec.base.eps2_h = eps_h2;
        if (app.count("--eps-t2")) spec.base.eps2_t = eps_t2;
        if (app.count("--sigma-li2")) spec.base.sigma2_li = sigma_li2;
        if (app.count("--sigma-nd2")) spec.sigma2_nd_list = sigma_nd2;
        if (app.count("--mode")) {
            spec.modes.clear();
            for (const auto& m : modes) spec.modes.push_back(fdrelay::filter_mode_from(m));
        }
        if (app.count("--sum-rates")) spec.sum_rate_targets = sum_rates;
        if (app.count("--instances")) spec.instances = instances;
        if (app.count("--n-it")) spec.n_it = n_it;
        if (app.count("--iters")) spec.iterations = iters;
        if (app.count("--peak-source-db")) spec.peak_source_db = peak_source_db;
        if (app.count("--peak-relay-db")) spec.peak_relay_db = peak_relay_db;
        if (app.count("--delay")) spec.base.delay = delay;
        if (app.count("--shadow-db")) spec.base.shadow_sigma_db = shadow_db;
        if (no_timestamp) spec.timestamp = false;

        const fdrelay::ExperimentOutput out = fdrelay::run_experiment(spec);
        for (const auto& f : out.files) std::printf("wrote %s\n", f.c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
