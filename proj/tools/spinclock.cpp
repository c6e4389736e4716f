// spinclock: entanglement-enhanced optical clock simulator, CLI front end.
//
// Subcommands: squeeze, satin, clock, differential, ceiling, tomography, sweep.
// Configuration comes from `key = value` files (see README for the key table);
// --seed and --cycles override the config, SPINCLOCK_SEED and SPINCLOCK_WORKERS
// override seed and worker count from the environment.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical-guard abort.

#include "spinclock/clock.hpp"
#include "spinclock/config.hpp"
#include "spinclock/csv.hpp"
#include "spinclock/decoherence.hpp"
#include "spinclock/dicke.hpp"
#include "spinclock/metrics.hpp"
#include "spinclock/satin.hpp"
#include "spinclock/squeezing.hpp"
#include "spinclock/version.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <atomic>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

using namespace spinclock;

struct CommonOpts {
    std::string config_path;
    std::string out_prefix = "out";
    std::optional<std::uint64_t> seed_override;
    std::optional<long> cycles_override;
};

ParsedConfig load_config(const CommonOpts& opts) {
    ParsedConfig cfg;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw ConfigError(0, "cannot open config file '" + opts.config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = parse_config(ss.str());
    }
    if (opts.cycles_override) {
        if (*opts.cycles_override < 2) throw ConfigError(0, "n_cycles out of range: must be >= 2");
        cfg.clock.n_cycles = *opts.cycles_override;
    }
    if (opts.seed_override) cfg.clock.seed = *opts.seed_override;
    if (const char* env = std::getenv("SPINCLOCK_SEED")) {
        char* end = nullptr;
        const long long s = std::strtoll(env, &end, 10);
        if (end == env || *end != '\0' || s < 0)
            throw ConfigError(0, "SPINCLOCK_SEED must be a nonnegative integer");
        cfg.clock.seed = static_cast<std::uint64_t>(s);
    }
    return cfg;
}

int worker_count(std::size_t n_points) {
    unsigned n = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("SPINCLOCK_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = static_cast<unsigned>(v);
    }
    if (n < 1) n = 1;
    return static_cast<int>(std::min<std::size_t>(n, n_points));
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-stable newlines
    if (!out) throw ConfigError(0, "cannot open output file '" + path + "'");
    return out;
}

// ---- per-subcommand runners --------------------------------------------------

std::string squeeze_row(const ParsedConfig& cfg) {
    if (cfg.clock.input_state == InputStateKind::measurement) {
        const MeasurementModel model = measurement_model(
            cfg.clock.n_atoms, cfg.clock.light_qfi * cfg.clock.efficiency, cfg.clock.efficiency);
        const ConditionalState cs =
            measurement_squeeze(cfg.clock.n_atoms, model, cfg.clock.seed);
        SqueezingReport rep;
        rep.n_atoms = cfg.clock.n_atoms;
        rep.xi_minus_sq = cs.xi_minus_sq();
        rep.xi_plus_sq = cs.xi_plus_sq();
        rep.contrast = cs.contrast;
        rep.wineland_inv_sq = rep.contrast * rep.contrast / rep.xi_minus_sq;
        rep.qfi = cfg.clock.n_atoms * rep.wineland_inv_sq;  // Gaussian-model saturation
        rep.gain_db = db_from_linear(rep.wineland_inv_sq);
        return metrics_csv_row(rep);
    }
    SqueezingReport rep;
    if (cfg.clock.shear > 0.0) {
        rep = squeezing_report(oat_evolve(css(cfg.clock.n_atoms, 0.5 * kPi, 0.0), cfg.clock.shear));
    } else {
        rep = oat_squeeze_optimal(cfg.clock.n_atoms).report;
    }
    return metrics_csv_row(rep);
}

int run_squeeze(const CommonOpts& opts) {
    const ParsedConfig cfg = load_config(opts);
    auto out = open_output(opts.out_prefix + "_metrics.csv");
    write_output_header(out, "squeeze", cfg.clock.seed, cfg);
    out << metrics_csv_header() << "\n" << squeeze_row(cfg) << "\n";
    return 0;
}

int run_satin(const CommonOpts& opts, bool optimal_shear) {
    const ParsedConfig cfg = load_config(opts);
    SatinEngine engine(cfg.clock.n_atoms);
    SatinResult res;
    if (optimal_shear) {
        res = satin_optimal(engine, cfg.detection_sigma);
        res = engine.run(res.shear, cfg.phase, cfg.detection_sigma);
    } else {
        res = engine.run(cfg.clock.shear, cfg.phase, cfg.detection_sigma);
    }
    auto out = open_output(opts.out_prefix + "_satin.csv");
    write_output_header(out, "satin", cfg.clock.seed, cfg);
    out << satin_csv_header() << "\n" << satin_csv_row(res) << "\n";
    return 0;
}

void write_allan_csv(std::ostream& out, const AllanSeries& allan) {
    out << "tau,adev,ci_half_width\n";
    for (std::size_t i = 0; i < allan.tau.size(); ++i)
        out << format_double(allan.tau[i]) << ',' << format_double(allan.adev[i]) << ','
            << format_double(allan.ci_half_width[i]) << "\n";
}

int run_clock_cmd(const CommonOpts& opts) {
    const ParsedConfig cfg = load_config(opts);
    const ClockRun run = run_clock(cfg.clock, cfg.noise);

    auto rec = open_output(opts.out_prefix + "_record.csv");
    write_output_header(rec, "clock", cfg.clock.seed, cfg);
    rec << "cycle,true_phase,est_phase,sz,steering,wrap\n";
    for (std::size_t k = 0; k < run.record.cycles(); ++k) {
        rec << k << ',' << format_double(run.record.true_phase[k]) << ','
            << format_double(run.record.est_phase[k]) << ','
            << format_double(run.record.sz_outcome[k]) << ','
            << format_double(run.record.steering[k]) << ',' << int(run.record.wrap[k]) << "\n";
    }
    auto allan = open_output(opts.out_prefix + "_allan.csv");
    write_output_header(allan, "clock", cfg.clock.seed, cfg);
    write_allan_csv(allan, run.allan);

    if (run.record.aborted)
        throw numerical_guard_error("servo lost the fringe; partial record written");
    return 0;
}

int run_differential_cmd(const CommonOpts& opts, const std::string& config_b_path) {
    const ParsedConfig cfg_a = load_config(opts);
    ParsedConfig cfg_b = cfg_a;
    if (!config_b_path.empty()) {
        CommonOpts opts_b = opts;
        opts_b.config_path = config_b_path;
        cfg_b = load_config(opts_b);
    }
    const DifferentialRun run = run_differential(cfg_a.clock, cfg_b.clock, cfg_a.noise);

    auto rec = open_output(opts.out_prefix + "_record.csv");
    write_output_header(rec, "differential", cfg_a.clock.seed, cfg_a);
    rec << "cycle,true_phase,est_phase_a,est_phase_b,diff_phase,wrap_a,wrap_b\n";
    for (std::size_t k = 0; k < run.record_a.cycles(); ++k) {
        rec << k << ',' << format_double(run.record_a.true_phase[k]) << ','
            << format_double(run.record_a.est_phase[k]) << ','
            << format_double(run.record_b.est_phase[k]) << ','
            << format_double(run.diff_phase[k]) << ',' << int(run.record_a.wrap[k]) << ','
            << int(run.record_b.wrap[k]) << "\n";
    }
    auto allan = open_output(opts.out_prefix + "_allan.csv");
    write_output_header(allan, "differential", cfg_a.clock.seed, cfg_a);
    write_allan_csv(allan, run.allan);
    return 0;
}

int run_ceiling(const CommonOpts& opts, const std::string& rates_csv, const std::string& tau_list,
                const std::string& n_list) {
    const ParsedConfig cfg = load_config(opts);
    double gn = cfg.noise.gamma_nat, gd = cfg.noise.gamma_deph, gl = cfg.noise.gamma_loss;
    if (!rates_csv.empty()) {
        double a, b, c;
        if (std::sscanf(rates_csv.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
            throw ConfigError(0, "--rates expects gamma_nat,gamma_deph,gamma_loss");
        gn = a;
        gd = b;
        gl = c;
    }
    auto parse_list = [](const std::string& text, const char* what) {
        std::vector<double> vals;
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            vals.push_back(std::strtod(tok.c_str(), nullptr));
        }
        if (vals.empty()) throw ConfigError(0, std::string(what) + " list is empty");
        return vals;
    };
    const std::vector<double> taus = parse_list(tau_list, "--tau-list");
    const std::vector<double> ns = parse_list(n_list, "--n-list");

    auto out = open_output(opts.out_prefix + "_ceiling.csv");
    write_output_header(out, "ceiling", cfg.clock.seed, cfg);
    out << ceiling_csv_header() << "\n";
    for (double n : ns)
        for (double tau : taus)
            out << ceiling_csv_row(gain_ceiling(static_cast<int>(n), tau, gn, gd, gl)) << "\n";
    return 0;
}

int run_tomography(const CommonOpts& opts, bool ghz_state, bool dump) {
    const ParsedConfig cfg = load_config(opts);
    DickeState psi;
    if (ghz_state) {
        psi = ghz(cfg.clock.n_atoms);
    } else {
        switch (cfg.clock.input_state) {
            case InputStateKind::css:
                psi = css(cfg.clock.n_atoms, 0.5 * kPi, 0.0);
                break;
            case InputStateKind::oat:
                psi = oat_evolve(css(cfg.clock.n_atoms, 0.5 * kPi, 0.0), cfg.clock.shear);
                break;
            case InputStateKind::satin:
                psi = SatinEngine(cfg.clock.n_atoms).echoed_state(cfg.clock.shear, cfg.phase);
                break;
            case InputStateKind::measurement:
                throw ConfigError(0, "tomography requires a Dicke-backed input state");
        }
    }
    const HusimiGrid grid = husimi_q(psi, cfg.resolution, 2 * cfg.resolution);
    auto out = open_output(opts.out_prefix + "_husimi.csv");
    write_output_header(out, "tomography", cfg.clock.seed, cfg);
    out << "theta,phi,q\n";
    for (std::size_t i = 0; i < grid.theta.size(); ++i)
        for (std::size_t j = 0; j < grid.phi.size(); ++j)
            out << format_double(grid.theta[i]) << ',' << format_double(grid.phi[j]) << ','
                << format_double(grid.q[i * grid.phi.size() + j]) << "\n";
    if (dump) {
        auto st = open_output(opts.out_prefix + "_state.txt");
        dump_state(st, psi);
    }
    return 0;
}

struct SweepCli {
    std::string param;
    std::string run = "squeeze";
    std::string values_csv;
    double min = 0.0, max = 0.0;
    int count = 0;
    bool log_spacing = false;
};

int run_sweep(const CommonOpts& opts, const SweepCli& sw) {
    const ParsedConfig base = load_config(opts);
    SweepSpec spec;
    if (!sw.values_csv.empty()) {
        std::vector<double> vals;
        std::stringstream ss(sw.values_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::strtod(tok.c_str(), nullptr));
        spec = make_sweep(sw.param, vals);
    } else {
        spec = make_sweep(sw.param, sw.min, sw.max, sw.count, sw.log_spacing);
    }

    std::string header;
    if (sw.run == "squeeze")
        header = metrics_csv_header();
    else if (sw.run == "satin")
        header = satin_csv_header();
    else if (sw.run == "clock")
        header = "N,ramsey_time,gamma_lo,adev_ref,tau_ref,wrap_fraction";
    else
        throw ConfigError(0, "--run must be one of squeeze|satin|clock");

    // independent points, deterministic per-point seeds, results kept in order
    std::vector<std::string> rows(spec.values.size());
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    const int workers = worker_count(spec.values.size());
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= spec.values.size()) return;
            ParsedConfig cfg = base;
            apply_sweep_value(cfg, spec.param, spec.values[i]);
            cfg.clock.seed = base.clock.seed + i;
            if (sw.run == "squeeze") {
                rows[i] = squeeze_row(cfg);
            } else if (sw.run == "satin") {
                SatinEngine engine(cfg.clock.n_atoms);
                SatinResult r = satin_optimal(engine, cfg.detection_sigma);
                r = engine.run(r.shear, cfg.phase, cfg.detection_sigma);
                rows[i] = satin_csv_row(r);
            } else {
                const ClockRun run = run_clock(cfg.clock, cfg.noise);
                double adev = 0.0, tau_ref = 0.0;
                if (!run.allan.tau.empty()) {
                    const std::size_t mid = run.allan.tau.size() / 2;
                    adev = run.allan.adev[mid];
                    tau_ref = run.allan.tau[mid];
                }
                char buf[192];
                std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g",
                              cfg.clock.n_atoms, cfg.clock.ramsey_time, cfg.noise.gamma_lo, adev,
                              tau_ref, run.record.wrap_fraction());
                rows[i] = buf;
            }
        }
    };
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    auto out = open_output(opts.out_prefix + "_sweep.csv");
    write_output_header(out, "sweep", base.clock.seed, base);
    out << header << "\n";
    for (const auto& row : rows) out << row << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spinclock: entanglement-enhanced optical clock simulator"};
    app.set_version_flag("--version", std::string("spinclock ") + spinclock::kVersion);
    app.require_subcommand(1);

    CommonOpts opts;
    std::uint64_t seed_flag = 0;
    long cycles_flag = 0;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "configuration file (key = value lines)");
        sub->add_option("--out-prefix", opts.out_prefix, "output file prefix");
        sub->add_option("--seed", seed_flag, "master seed override")->check(CLI::NonNegativeNumber);
        sub->add_option("--cycles", cycles_flag, "n_cycles override");
    };

    CLI::App* squeeze = app.add_subcommand("squeeze", "squeezing-protocol metrics report");
    add_common(squeeze);

    CLI::App* satin = app.add_subcommand("satin", "time-reversal echo run");
    bool satin_optimal_flag = false;
    add_common(satin);
    satin->add_flag("--optimal-shear", satin_optimal_flag, "scan for the best shear first");

    CLI::App* clock = app.add_subcommand("clock", "closed-loop Ramsey clock Monte Carlo");
    add_common(clock);

    CLI::App* diff = app.add_subcommand("differential", "two-ensemble common-LO comparison");
    std::string config_b;
    add_common(diff);
    diff->add_option("--config-b", config_b, "configuration for the second ensemble");

    CLI::App* ceiling = app.add_subcommand("ceiling", "decoherence-limited gain ceiling curves");
    std::string rates_csv, tau_list = "1", n_list = "100";
    add_common(ceiling);
    ceiling->add_option("--rates", rates_csv, "gamma_nat,gamma_deph,gamma_loss (s^-1)");
    ceiling->add_option("--tau-list", tau_list, "comma-separated Ramsey times (s)");
    ceiling->add_option("--n-list", n_list, "comma-separated atom numbers");

    CLI::App* tomo = app.add_subcommand("tomography", "Husimi Q data for the prepared state");
    bool ghz_flag = false, dump_flag = false;
    add_common(tomo);
    tomo->add_flag("--ghz", ghz_flag, "use a GHZ state instead of the configured input");
    tomo->add_flag("--dump-state", dump_flag, "also write the amplitude dump");

    CLI::App* sweep = app.add_subcommand("sweep", "sweep one config key across runs");
    SweepCli sw;
    add_common(sweep);
    sweep->add_option("--param", sw.param, "config key to sweep")->required();
    sweep->add_option("--run", sw.run, "subcommand per point: squeeze|satin|clock");
    sweep->add_option("--values", sw.values_csv, "explicit comma-separated values");
    sweep->add_option("--min", sw.min, "range minimum");
    sweep->add_option("--max", sw.max, "range maximum");
    sweep->add_option("--count", sw.count, "number of points");
    sweep->add_flag("--log", sw.log_spacing, "log-spaced range");

    std::string cmd = "none";
    std::uint64_t seed_used = 0;
    try {
        app.parse(argc, argv);
        CLI::App* sub = app.get_subcommands().front();
        cmd = sub->get_name();
        if (sub->count("--seed") > 0) opts.seed_override = seed_flag;
        if (sub->count("--cycles") > 0) opts.cycles_override = cycles_flag;
        seed_used = load_config(opts).clock.seed;

        int rc = 0;
        if (cmd == "squeeze")
            rc = run_squeeze(opts);
        else if (cmd == "satin")
            rc = run_satin(opts, satin_optimal_flag);
        else if (cmd == "clock")
            rc = run_clock_cmd(opts);
        else if (cmd == "differential")
            rc = run_differential_cmd(opts, config_b);
        else if (cmd == "ceiling")
            rc = run_ceiling(opts, rates_csv, tau_list, n_list);
        else if (cmd == "tomography")
            rc = run_tomography(opts, ghz_flag, dump_flag);
        else if (cmd == "sweep")
            rc = run_sweep(opts, sw);
        std::fprintf(stderr, "status=ok cmd=%s seed=%llu\n", cmd.c_str(),
                     static_cast<unsigned long long>(seed_used));
        return rc;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        if (rc == 0) return 0;  // --help / --version
        std::fprintf(stderr, "status=error cmd=%s seed=%llu\n", cmd.c_str(),
                     static_cast<unsigned long long>(seed_used));
        return 2;
    } catch (const spinclock::numerical_guard_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr, "status=error cmd=%s seed=%llu\n", cmd.c_str(),
                     static_cast<unsigned long long>(seed_used));
        return 3;
    } catch (const spinclock::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr, "status=error cmd=%s seed=%llu\n", cmd.c_str(),
                     static_cast<unsigned long long>(seed_used));
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr, "status=error cmd=%s seed=%llu\n", cmd.c_str(),
                     static_cast<unsigned long long>(seed_used));
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr, "status=error cmd=%s seed=%llu\n", cmd.c_str(),
                     static_cast<unsigned long long>(seed_used));
        return 3;
    }
}
