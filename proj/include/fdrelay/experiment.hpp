#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "fdrelay/config.hpp"
#include "fdrelay/csv.hpp"
#include "fdrelay/opa.hpp"
#include "fdrelay/relay_sim.hpp"

namespace fdrelay {

enum class ExperimentKind { relay_ber, e2e_ber, opa_ee, custom_sweep };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::relay_ber: return "relay-ber";
        case ExperimentKind::e2e_ber: return "e2e-ber";
        case ExperimentKind::opa_ee: return "opa-ee";
        default: return "custom-sweep";
    }
}

inline ExperimentKind experiment_kind_from(const std::string& s) {
    if (s == "relay-ber") return ExperimentKind::relay_ber;
    if (s == "e2e-ber") return ExperimentKind::e2e_ber;
    if (s == "opa-ee") return ExperimentKind::opa_ee;
    if (s == "custom-sweep") return ExperimentKind::custom_sweep;
    throw std::invalid_argument("unknown experiment kind: " + s);
}

inline FilterMode filter_mode_from(const std::string& s) {
    if (s == "mmse") return FilterMode::mmse;
    if (s == "ni") return FilterMode::ni;
    if (s == "hd") return FilterMode::hd;
    throw std::invalid_argument("unknown filter mode: " + s);
}

/// Fully resolved experiment description. Defaults reproduce the reference
/// setups; any field can be overridden from a config file or CLI flags.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::relay_ber;
    SystemConfig base;
    double snr_relay_db = 8.0;  // sets sigma2_nr from the nominal source powers

    std::vector<int> n_list{32, 64, 128};
    std::vector<double> p_relay_db_list{-9, -6, -3, 0, 3, 6, 9, 12, 15, 18};
    std::vector<double> sigma2_nd_list{1.0};
    std::vector<FilterMode> modes{FilterMode::mmse, FilterMode::ni, FilterMode::hd};

    // power-allocation experiment
    std::vector<double> sum_rate_targets{2.5, 5.0, 7.5, 10.0};
    std::vector<double> r0_weights{1.0, 2.0, 3.0, 4.0};  // discrete-uniform support, scaled
    int instances = 24;
    std::uint32_t n_it = 1000;
    int iterations = 5;
    double peak_source_db = 3.0;
    double peak_relay_db = 10.0;

    std::uint32_t trials = 500;
    int symbols = 200;
    unsigned threads = 0;  // 0 = all hardware threads
    std::string out_dir = ".";
    bool timestamp = true;

    /// Relay noise level implied by the target relay SNR at nominal powers.
    double resolved_sigma2_nr() const { return sigma2_nr_for_snr_db(base, snr_relay_db); }

    void validate() const {
        SystemConfig probe = base;
        probe.sigma2_nr = resolved_sigma2_nr();
        if (n_list.empty()) throw std::invalid_argument("experiment: empty antenna list");
        probe.n_rx = probe.n_tx = *std::min_element(n_list.begin(), n_list.end());
        probe.validate();
        if (p_relay_db_list.empty()) throw std::invalid_argument("experiment: empty p_R grid");
        if (modes.empty()) throw std::invalid_argument("experiment: no modes selected");
        if (sigma2_nd_list.empty()) throw std::invalid_argument("experiment: empty sigma2_nd list");
        if (kind == ExperimentKind::opa_ee) {
            if (sum_rate_targets.empty()) throw std::invalid_argument("experiment: no rate targets");
            if (r0_weights.empty()) throw std::invalid_argument("experiment: empty rate support");
            if (instances < 1) throw std::invalid_argument("experiment: instances must be >= 1");
            if (iterations < 1 || n_it < 1)
                throw std::invalid_argument("experiment: bad algorithm parameters");
        } else {
            if (trials < 1 || symbols <= base.delay)
                throw std::invalid_argument("experiment: trials/symbols too small");
        }
    }
};

/// Paper-style defaults per experiment kind.
inline ExperimentSpec make_default_spec(ExperimentKind kind) {
    ExperimentSpec s;
    s.kind = kind;
    s.base.mod_order = 16;
    s.base.sigma2_li = 1.0;
    s.base.eps2_h = 1e-3;
    s.base.eps2_t = 1e-3;
    s.base.delay = 1;
    switch (kind) {
        case ExperimentKind::relay_ber:
            s.base.n_pairs = 5;
            s.snr_relay_db = 8.0;
            break;
        case ExperimentKind::e2e_ber:
            s.base.n_pairs = 5;
            s.snr_relay_db = 8.0;
            s.modes = {FilterMode::mmse};
            s.sigma2_nd_list = {1.0, 4.0};
            break;
        case ExperimentKind::opa_ee:
            s.base.n_pairs = 10;
            s.snr_relay_db = 16.0;
            s.base.sigma2_nd = 1.0;
            s.base.shadow_sigma_db = 6.0;
            s.n_list = {64};
            break;
        case ExperimentKind::custom_sweep:
            s.base.n_pairs = 5;
            s.snr_relay_db = 8.0;
            break;
    }
    return s;
}

namespace detail {

template <typename T>
std::vector<T> json_list(const nlohmann::json& j) {
    if (j.is_array()) return j.get<std::vector<T>>();
    return {j.get<T>()};
}

}  // namespace detail

/// Applies a JSON configuration document to a spec. Unknown keys are
/// rejected. The "experiment" key, if present, must agree with the spec kind
/// already selected (defaults are per-kind).
inline void apply_config_json(ExperimentSpec& spec, const nlohmann::json& j) {
    using nlohmann::json;
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "experiment") spec.kind = experiment_kind_from(value.get<std::string>());
        else if (key == "seed") spec.base.master_seed = value.get<std::uint64_t>();
        else if (key == "threads") spec.threads = value.get<unsigned>();
        else if (key == "trials") spec.trials = value.get<std::uint32_t>();
        else if (key == "symbols") spec.symbols = value.get<int>();
        else if (key == "out") spec.out_dir = value.get<std::string>();
        else if (key == "K") spec.base.n_pairs = value.get<int>();
        else if (key == "N") spec.n_list = detail::json_list<int>(value);
        else if (key == "pr_db") spec.p_relay_db_list = detail::json_list<double>(value);
        else if (key == "snr_db") spec.snr_relay_db = value.get<double>();
        else if (key == "mod_order") spec.base.mod_order = value.get<int>();
        else if (key == "eps_h2") spec.base.eps2_h = value.get<double>();
        else if (key == "eps_t2") spec.base.eps2_t = value.get<double>();
        else if (key == "sigma_li2") spec.base.sigma2_li = value.get<double>();
        else if (key == "sigma_nd2") spec.sigma2_nd_list = detail::json_list<double>(value);
        else if (key == "delay") spec.base.delay = value.get<int>();
        else if (key == "shadow_db") spec.base.shadow_sigma_db = value.get<double>();
        else if (key == "modes") {
            spec.modes.clear();
            for (const auto& ms : detail::json_list<std::string>(value))
                spec.modes.push_back(filter_mode_from(ms));
        } else if (key == "sum_rates") spec.sum_rate_targets = detail::json_list<double>(value);
        else if (key == "r0_weights") spec.r0_weights = detail::json_list<double>(value);
        else if (key == "instances") spec.instances = value.get<int>();
        else if (key == "n_it") spec.n_it = value.get<std::uint32_t>();
        else if (key == "iters") spec.iterations = value.get<int>();
        else if (key == "peak_source_db") spec.peak_source_db = value.get<double>();
        else if (key == "peak_relay_db") spec.peak_relay_db = value.get<double>();
        else if (key == "timestamp") spec.timestamp = value.get<bool>();
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

inline ExperimentSpec parse_config_file(const std::string& path,
                                        ExperimentKind default_kind = ExperimentKind::relay_ber) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: malformed JSON in " + path + ": " + e.what());
    }
    ExperimentKind kind = default_kind;
    if (j.contains("experiment")) kind = experiment_kind_from(j["experiment"].get<std::string>());
    ExperimentSpec spec = make_default_spec(kind);
    apply_config_json(spec, j);
    return spec;
}

/// One emitted row of the power-allocation experiment.
struct OpaRow {
    std::string scheme;
    double sum_rate_target = 0.0;
    int instance = 0;
    int iteration = 0;
    double p_relay = 0.0;
    double p_source_total = 0.0;
    double ee = 0.0;
    bool feasible = false;
};

struct ExperimentOutput {
    std::vector<std::string> files;
    std::vector<SimResult> ber_rows;
    std::vector<OpaRow> opa_rows;
};

namespace detail {

inline constexpr std::uint64_t kTagOpaInstance = 0xA110C;

inline nlohmann::json spec_to_json(const ExperimentSpec& s) {
    nlohmann::json j;
    j["experiment"] = to_string(s.kind);
    j["seed"] = s.base.master_seed;
    j["threads"] = s.threads;
    j["K"] = s.base.n_pairs;
    j["N"] = s.n_list;
    j["mod_order"] = s.base.mod_order;
    j["snr_db"] = s.snr_relay_db;
    j["resolved_sigma2_nr"] = s.resolved_sigma2_nr();
    j["sigma_li2"] = s.base.sigma2_li;
    j["sigma_nd2"] = s.sigma2_nd_list;
    j["eps_h2"] = s.base.eps2_h;
    j["eps_t2"] = s.base.eps2_t;
    j["delay"] = s.base.delay;
    j["shadow_db"] = s.base.shadow_sigma_db;
    j["pr_db"] = s.p_relay_db_list;
    std::vector<std::string> modes;
    for (auto m : s.modes) modes.emplace_back(to_string(m));
    j["modes"] = modes;
    j["trials"] = s.trials;
    j["symbols"] = s.symbols;
    if (s.kind == ExperimentKind::opa_ee) {
        j["sum_rates"] = s.sum_rate_targets;
        j["r0_weights"] = s.r0_weights;
        j["instances"] = s.instances;
        j["n_it"] = s.n_it;
        j["iters"] = s.iterations;
        j["peak_source_db"] = s.peak_source_db;
        j["peak_relay_db"] = s.peak_relay_db;
    }
    return j;
}

inline std::string timestamp_comment(const ExperimentSpec& s) {
    if (!s.timestamp) return {};
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof buf, "generated %Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    return buf;
}

inline void write_meta(const ExperimentSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << spec_to_json(spec).dump(2) << "\n";
}

inline ExperimentOutput run_ber_experiment(const ExperimentSpec& spec) {
    SystemConfig cfg = spec.base;
    cfg.sigma2_nr = spec.resolved_sigma2_nr();

    SweepGrid grid;
    grid.n_antennas = spec.n_list;
    grid.p_relay_db = spec.p_relay_db_list;
    grid.modes = spec.modes;
    if (spec.kind != ExperimentKind::relay_ber) grid.sigma2_nd = spec.sigma2_nd_list;

    ExperimentOutput out;
    out.ber_rows = sweep(cfg, grid, spec.trials, spec.symbols, spec.threads);

    std::filesystem::create_directories(spec.out_dir);
    const std::string stem = spec.out_dir + "/" + to_string(spec.kind);
    const std::string csv_path = stem + ".csv";
    const std::string k = csv_num(cfg.n_pairs);
    const std::string snr = csv_num(spec.snr_relay_db);
    const std::string trials = csv_num(static_cast<std::uint64_t>(spec.trials));
    const std::string symbols = csv_num(spec.symbols);

    if (spec.kind == ExperimentKind::relay_ber) {
        CsvWriter w(csv_path,
                    {"mode", "N", "K", "p_R_dB", "snr_dB", "trials", "symbols", "bit_errors",
                     "bits", "ber"},
                    timestamp_comment(spec));
        for (const auto& r : out.ber_rows)
            w.write_row({to_string(r.mode), csv_num(r.n_antennas), k, csv_num(r.p_relay_db), snr,
                         trials, symbols, csv_num(r.relay_bit_errors), csv_num(r.relay_bits),
                         csv_num(r.relay_ber())});
    } else if (spec.kind == ExperimentKind::e2e_ber) {
        CsvWriter w(csv_path,
                    {"mode", "N", "K", "sigma2_nd", "p_R_dB", "snr_dB", "trials", "symbols",
                     "bit_errors", "bits", "ber"},
                    timestamp_comment(spec));
        for (const auto& r : out.ber_rows)
            w.write_row({to_string(r.mode), csv_num(r.n_antennas), k, csv_num(r.sigma2_nd),
                         csv_num(r.p_relay_db), snr, trials, symbols, csv_num(r.e2e_bit_errors),
                         csv_num(r.e2e_bits), csv_num(r.e2e_ber())});
    } else {
        CsvWriter w(csv_path,
                    {"mode", "N", "K", "sigma2_nd", "p_R_dB", "snr_dB", "trials", "symbols",
                     "relay_bit_errors", "relay_bits", "relay_ber", "e2e_bit_errors", "e2e_bits",
                     "e2e_ber"},
                    timestamp_comment(spec));
        for (const auto& r : out.ber_rows)
            w.write_row({to_string(r.mode), csv_num(r.n_antennas), k, csv_num(r.sigma2_nd),
                         csv_num(r.p_relay_db), snr, trials, symbols, csv_num(r.relay_bit_errors),
                         csv_num(r.relay_bits), csv_num(r.relay_ber()),
                         csv_num(r.e2e_bit_errors), csv_num(r.e2e_bits), csv_num(r.e2e_ber())});
    }
    write_meta(spec, stem + ".meta.json");
    out.files = {csv_path, stem + ".meta.json"};
    return out;
}

struct OpaScheme {
    const char* name;
    FilterMode mode;
    bool uniform;
};

inline ExperimentOutput run_opa_experiment(const ExperimentSpec& spec) {
    SystemConfig cfg = spec.base;
    cfg.sigma2_nr = spec.resolved_sigma2_nr();
    cfg.n_rx = cfg.n_tx = spec.n_list.front();
    cfg.validate();

    // "oupa" is the fully uniform baseline: one shared source power and no
    // loopback filtering
    const std::vector<OpaScheme> schemes{{"opa-mmse", FilterMode::mmse, false},
                                         {"opa-ni", FilterMode::ni, false},
                                         {"oupa", FilterMode::ni, true}};

    const arma::uword k = static_cast<arma::uword>(cfg.n_pairs);
    const arma::vec peak_source(static_cast<std::size_t>(cfg.n_pairs),
                                arma::fill::value(db_to_linear(spec.peak_source_db)));
    const double peak_relay = db_to_linear(spec.peak_relay_db);

    struct Instance {
        LargeScale ls;
        arma::vec weights;
    };
    std::vector<Instance> inst(static_cast<std::size_t>(spec.instances));
    for (int i = 0; i < spec.instances; ++i) {
        Rng rng(derive_seed(cfg.master_seed, {kTagOpaInstance, static_cast<std::uint64_t>(i)}));
        inst[static_cast<std::size_t>(i)].ls = draw_large_scale(cfg, rng);
        arma::vec w(k);
        for (arma::uword p = 0; p < k; ++p)
            w(p) = spec.r0_weights[rng.below(spec.r0_weights.size())];
        inst[static_cast<std::size_t>(i)].weights = w;
    }

    // task = (target, instance, scheme); each runs the full algorithm
    const std::size_t n_targets = spec.sum_rate_targets.size();
    const std::size_t n_schemes = schemes.size();
    const std::size_t n_tasks = n_targets * static_cast<std::size_t>(spec.instances) * n_schemes;
    std::vector<Algorithm1Result> results(n_tasks);

    parallel_for(n_tasks, spec.threads, [&](std::size_t task) {
        const std::size_t ti = task / (static_cast<std::size_t>(spec.instances) * n_schemes);
        const std::size_t rest = task % (static_cast<std::size_t>(spec.instances) * n_schemes);
        const std::size_t ii = rest / n_schemes;
        const std::size_t si = rest % n_schemes;
        const double target = spec.sum_rate_targets[ti];
        const Instance& in = inst[ii];
        const arma::vec r0 = target * in.weights / arma::accu(in.weights);
        const std::uint64_t seed = derive_seed(
            cfg.master_seed, {kTagOpaInstance, static_cast<std::uint64_t>(ii), seed_key(target),
                              static_cast<std::uint64_t>(si)});
        results[task] = run_algorithm1(cfg, in.ls, r0, peak_source, peak_relay, schemes[si].mode,
                                       spec.n_it, spec.iterations, seed, /*threads=*/1,
                                       schemes[si].uniform);
    });

    ExperimentOutput out;
    std::filesystem::create_directories(spec.out_dir);
    const std::string stem = spec.out_dir + "/" + to_string(spec.kind);
    const std::string csv_path = stem + ".csv";
    CsvWriter w(csv_path,
                {"scheme", "sum_rate_target", "iteration", "p_R", "p_S_total", "EE", "feasible"},
                timestamp_comment(spec));

    for (std::size_t si = 0; si < n_schemes; ++si) {
        for (std::size_t ti = 0; ti < n_targets; ++ti) {
            for (std::size_t ii = 0; ii < static_cast<std::size_t>(spec.instances); ++ii) {
                const std::size_t task = (ti * static_cast<std::size_t>(spec.instances) +
                                          ii) * n_schemes + si;
                const Algorithm1Result& res = results[task];
                for (const auto& rec : res.trace) {
                    OpaRow row;
                    row.scheme = schemes[si].name;
                    row.sum_rate_target = spec.sum_rate_targets[ti];
                    row.instance = static_cast<int>(ii);
                    row.iteration = rec.iteration;
                    row.p_relay = rec.p_relay;
                    row.p_source_total = arma::accu(rec.p_source);
                    row.ee = rec.report.ee;
                    row.feasible = true;
                    out.opa_rows.push_back(row);
                }
                if (res.allocation.status != PowerAllocation::Status::feasible) {
                    OpaRow row;
                    row.scheme = schemes[si].name;
                    row.sum_rate_target = spec.sum_rate_targets[ti];
                    row.instance = static_cast<int>(ii);
                    row.iteration = res.allocation.failed_iteration;
                    row.feasible = false;
                    out.opa_rows.push_back(row);
                }
            }
        }
    }
    for (const auto& r : out.opa_rows)
        w.write_row({r.scheme, csv_num(r.sum_rate_target), csv_num(r.iteration),
                     csv_num(r.p_relay), csv_num(r.p_source_total), csv_num(r.ee),
                     csv_num(static_cast<int>(r.feasible))});

    write_meta(spec, stem + ".meta.json");
    out.files = {csv_path, stem + ".meta.json"};
    return out;
}

}  // namespace detail

/// Runs the experiment and writes `<kind>.csv` plus a `<kind>.meta.json`
/// sidecar with the fully resolved configuration into the output directory.
/// Re-running with the same seed and spec reproduces the CSV payload
/// byte-identically (the optional timestamp is a comment line).
inline ExperimentOutput run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.kind == ExperimentKind::opa_ee) return detail::run_opa_experiment(spec);
    return detail::run_ber_experiment(spec);
}

}  // namespace fdrelay
