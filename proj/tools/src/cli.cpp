// Copyright 2026 The qloc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qloc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qloc/network.hpp"
#include "qloc/probe_stats.hpp"
#include "qloc/qcd.hpp"
#include "qloc/simharness.hpp"
#include "qloc/tomography.hpp"
#include "qloc/topologies.hpp"
#include "qloc/topology_io.hpp"

#ifndef QLOC_VERSION
#define QLOC_VERSION "0.0.0"
#endif

namespace qloc::cli {
namespace {

using nlohmann::json;

std::string fmt(double v, int digits = 10) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string utc_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// "lo:hi:steps" -> steps evenly spaced values from lo to hi inclusive.
std::vector<double> parse_grid(const std::string &spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string part; std::getline(ss, part, ':');) {
        parts.push_back(part);
    }
    if (parts.size() != 3) {
        throw CLI::ValidationError("grid '" + spec + "' must have the form lo:hi:steps");
    }
    double lo = 0.0;
    double hi = 0.0;
    int steps = 0;
    try {
        std::size_t pos = 0;
        lo = std::stod(parts[0], &pos);
        if (pos != parts[0].size()) throw std::invalid_argument("");
        hi = std::stod(parts[1], &pos);
        if (pos != parts[1].size()) throw std::invalid_argument("");
        steps = std::stoi(parts[2], &pos);
        if (pos != parts[2].size()) throw std::invalid_argument("");
    } catch (const std::exception &) {
        throw CLI::ValidationError("grid '" + spec + "' must have the form lo:hi:steps");
    }
    if (steps < 1) {
        throw CLI::ValidationError("grid '" + spec + "' needs at least one step");
    }
    if (steps > 1 && !(hi > lo)) {
        throw CLI::ValidationError("grid '" + spec + "' needs hi > lo");
    }
    std::vector<double> values;
    for (int i = 0; i < steps; ++i) {
        values.push_back(steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1));
    }
    return values;
}

std::ostream &open_output(const std::optional<std::string> &path, std::ofstream &file, std::ostream &fallback) {
    if (!path) {
        return fallback;
    }
    file.open(*path);
    if (!file) {
        throw std::runtime_error("cannot open '" + *path + "' for writing");
    }
    return file;
}

void add_topology_command(CLI::App &app, std::ostream &out, std::function<void()> &action) {
    auto *cmd = app.add_subcommand("topology", "Write a preset topology file with its probes");
    auto preset = std::make_shared<std::string>();
    auto eta = std::make_shared<double>(0.9);
    auto output = std::make_shared<std::optional<std::string>>();
    cmd->add_option("--preset", *preset, "line5 or fattree3")->required()->check(CLI::IsMember({"line5", "fattree3"}));
    cmd->add_option("--eta", *eta, "Per-link transmissivity")->capture_default_str();
    cmd->add_option("-o,--output", *output, "Output file (default: standard output)");
    cmd->callback([&out, &action, preset, eta, output] {
        action = [&out, preset, eta, output] {
            Topology topo = build_preset(*preset, *eta);
            std::ofstream file;
            write_topology(open_output(*output, file, out), topo.network, topo.probes);
        };
    });
}

struct KlArgs {
    double signal = 100.0;
    std::optional<double> augmentation;
    std::optional<double> squeeze_db;
    int block_size = 1;
    double eta = 0.9;
    double eta_d = 0.95;
    std::optional<std::string> sweep;

    double resolved_augmentation() const {
        if (augmentation) {
            return *augmentation;
        }
        return augmentation_from_squeeze_db(squeeze_db.value_or(6.0));
    }
};

void print_kl_table(std::ostream &out, const KlArgs &a) {
    ProbeParams quantum = ProbeParams::quantum(a.signal, a.resolved_augmentation(), a.block_size);
    ProbeParams classical = quantum.classical_comparator();
    double q = speedup_ratio(quantum, a.eta, a.eta_d);
    double kl_c = classical_kl(classical, a.eta, a.eta_d);
    double kl_q = quantum_kl_per_pulse(quantum, a.eta, a.eta_d);
    SpeedupProfile profile = speedup_profile(quantum, a.eta, a.eta_d);

    auto row = [&out](const std::string &label, const std::string &value) {
        out << std::left << std::setw(26) << label << value << '\n';
    };
    auto optional_row = [&](const std::string &label, const std::optional<double> &v, const char *hypothesis) {
        row(label, v ? fmt(*v) : std::string("n/a (requires ") + hypothesis + ")");
    };
    row("quantity", "value");
    row("N", fmt(a.signal));
    row("N_a", fmt(quantum.augmentation()));
    row("n", std::to_string(a.block_size));
    row("eta", fmt(a.eta));
    row("eta_d", fmt(a.eta_d));
    row("classical_kl_per_pulse", fmt(kl_c));
    row("quantum_kl_per_pulse", fmt(kl_q));
    row("q_n", fmt(q));
    row("b_d", fmt(profile.drop_asymmetry));
    row("q_limit_eta_to_0", fmt(profile.limit_low_eta));
    row("q_limit_eta_d_to_1", fmt(profile.limit_weak_drop));
    row("q_limit_N_to_inf", fmt(profile.limit_large_signal));
    row("q_limit_n_to_inf", fmt(profile.limit_large_block));
    row("N_monotone_floor", fmt(profile.signal_monotone_floor));
    optional_row("n_threshold", profile.block_size_threshold, "N*eta > b_d*N_a*(1-eta)");
    optional_row("N_a_threshold", profile.augmentation_threshold, "8*N*n*(1-eta) > eta*b_d*(1-eta_d)");
}

void print_kl_sweep(std::ostream &out, const KlArgs &base, const std::string &spec) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) {
        throw CLI::ValidationError("--sweep expects var=lo:hi:steps");
    }
    std::string var = spec.substr(0, eq);
    std::vector<double> grid = parse_grid(spec.substr(eq + 1));
    std::function<void(KlArgs &, double)> apply;
    if (var == "eta") {
        apply = [](KlArgs &a, double v) { a.eta = v; };
    } else if (var == "eta-d" || var == "eta_d") {
        apply = [](KlArgs &a, double v) { a.eta_d = v; };
    } else if (var == "N") {
        apply = [](KlArgs &a, double v) { a.signal = v; };
    } else if (var == "Na") {
        apply = [](KlArgs &a, double v) {
            a.augmentation = v;
            a.squeeze_db.reset();
        };
    } else if (var == "n") {
        apply = [](KlArgs &a, double v) {
            if (v != std::round(v)) {
                throw CLI::ValidationError("--sweep n needs integer grid points");
            }
            a.block_size = static_cast<int>(v);
        };
    } else {
        throw CLI::ValidationError("--sweep variable must be one of eta, eta-d, N, Na, n");
    }

    std::ostringstream rows;
    for (double v : grid) {
        KlArgs a = base;
        apply(a, v);
        ProbeParams quantum = ProbeParams::quantum(a.signal, a.resolved_augmentation(), a.block_size);
        double q = speedup_ratio(quantum, a.eta, a.eta_d);
        rows << fmt(v) << ',' << fmt(classical_kl(quantum.classical_comparator(), a.eta, a.eta_d)) << ','
             << fmt(quantum_kl_per_pulse(quantum, a.eta, a.eta_d)) << ',' << fmt(q) << '\n';
    }
    out << var << ",classical_kl_per_pulse,quantum_kl_per_pulse,q_n\n" << rows.str();
}

void add_analyze_kl_command(CLI::App &app, std::ostream &out, std::function<void()> &action) {
    auto *cmd = app.add_subcommand("analyze-kl", "Divergences and quantum-to-classical ratio of a single channel");
    auto a = std::make_shared<KlArgs>();
    cmd->add_option("--N", a->signal, "Signal photons per pulse")->capture_default_str();
    auto *na = cmd->add_option("--Na", a->augmentation, "Augmentation photon budget N_a");
    auto *db = cmd->add_option("--squeeze-db", a->squeeze_db, "Squeezing in dB (default 6 when --Na is absent)");
    na->excludes(db);
    cmd->add_option("--n", a->block_size, "Pulses per entangled block")->capture_default_str();
    cmd->add_option("--eta", a->eta, "Channel transmissivity")->capture_default_str();
    cmd->add_option("--eta-d", a->eta_d, "Transmissivity drop factor")->capture_default_str();
    cmd->add_option("--sweep", a->sweep, "var=lo:hi:steps with var in {eta, eta-d, N, Na, n}; emits CSV");
    cmd->callback([&out, &action, a] {
        action = [&out, a] {
            std::ostringstream buffer;
            if (a->sweep) {
                print_kl_sweep(buffer, *a, *a->sweep);
            } else {
                print_kl_table(buffer, *a);
            }
            out << buffer.str();
        };
    });
}

void add_build_probes_command(CLI::App &app, std::ostream &out, std::function<void()> &action) {
    auto *cmd = app.add_subcommand("build-probes", "Build or check a probe set for a topology file");
    auto path = std::make_shared<std::string>();
    auto mode = std::make_shared<std::string>("construct");
    auto output = std::make_shared<std::optional<std::string>>();
    cmd->add_option("topology", *path, "Topology file")->required();
    cmd->add_option("--probes", *mode, "construct: build a min-max probe set; builtin: use the file's probes")
        ->check(CLI::IsMember({"construct", "builtin"}))
        ->capture_default_str();
    cmd->add_option("-o,--output", *output, "Probe file (default: standard output)");
    cmd->callback([&out, &action, path, mode, output] {
        action = [&out, path, mode, output] {
            Topology topo = read_topology_file(*path);
            FaultFamily family = FaultFamily::singletons_with_empty(topo.network);
            std::vector<Probe> probes;
            if (*mode == "construct") {
                probes = construct_probes(topo.network, family);
            } else {
                if (topo.probes.empty()) {
                    throw std::invalid_argument("'" + *path + "' has no probe lines");
                }
                auto report = check_identifiable(topo.probes, family);
                if (!report.identifiable) {
                    const auto [i, j] = *report.conflict;
                    throw std::invalid_argument("probe set cannot tell " +
                                                describe_fault_set(topo.network, family.members()[i]) + " from " +
                                                describe_fault_set(topo.network, family.members()[j]));
                }
                probes = topo.probes;
            }
            std::ofstream file;
            std::ostream &dest = open_output(*output, file, out);
            write_probes(dest, probes);
            out << "# probes=" << probes.size() << " max_length_nats=" << fmt(max_probe_length(probes))
                << " max_traversals=" << max_probe_traversals(probes) << '\n';
        };
    });
}

struct SimulateArgs {
    std::string scenario = "line5";
    std::optional<std::string> topology_file;
    std::optional<double> eta;
    std::vector<std::string> families{"classical", "quantum"};
    std::optional<std::string> h_grid;
    std::vector<double> gammas;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> fault_edge;
    std::optional<double> eta_d;
    std::optional<std::uint64_t> nu;
    std::optional<double> signal;
    std::optional<double> augmentation;
    std::optional<double> squeeze_db;
    std::optional<int> block_size;
    std::optional<std::uint64_t> horizon;
    unsigned threads = 0;
    std::optional<std::string> output;
    std::optional<std::string> manifest;
    std::optional<std::string> config_file;
};

// Fills options absent from the command line with values from an INI-style file.
void apply_config_file(CLI::App &cmd, const std::string &path, const CLI::Option *self) {
    std::ifstream in(path);
    if (!in) {
        throw CLI::FileError::Missing(path);
    }
    for (const CLI::ConfigItem &item : CLI::ConfigINI().from_config(in)) {
        if (item.name == "++" || item.name == "--") {
            continue;  // section markers
        }
        if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == "simulate")) {
            throw CLI::ConfigError::NotConfigurable(item.fullname());
        }
        CLI::Option *opt = cmd.get_option_no_throw("--" + item.name);
        if (opt == nullptr || opt == self) {
            throw CLI::ConfigError::Extras(item.fullname());
        }
        if (opt->count() > 0) {
            continue;
        }
        for (const std::string &value : item.inputs) {
            opt->add_result(value);
        }
        opt->run_callback();
    }
}

EdgeId parse_edge(const Network &net, const std::string &spec) {
    auto dash = spec.find('-');
    try {
        if (dash == std::string::npos) throw std::invalid_argument("");
        std::size_t p1 = 0;
        std::size_t p2 = 0;
        long long u = std::stoll(spec.substr(0, dash), &p1);
        long long v = std::stoll(spec.substr(dash + 1), &p2);
        if (p1 != dash || p2 != spec.size() - dash - 1) throw std::invalid_argument("");
        return net.edge_id(u, v);
    } catch (const std::out_of_range &) {
        throw std::invalid_argument("fault edge " + spec + " is not in the network");
    } catch (const std::invalid_argument &) {
        throw CLI::ValidationError("--fault-edge expects u-v or none, got '" + spec + "'");
    }
}

ScenarioConfig resolve_scenario(const SimulateArgs &a) {
    ScenarioConfig config = ScenarioConfig::preset(a.scenario);
    if (a.topology_file) {
        config.topology = read_topology_file(*a.topology_file);
        if (config.topology.probes.empty()) {
            throw std::invalid_argument("'" + *a.topology_file + "' has no probe lines");
        }
        config.fault.reset();
    } else if (a.eta) {
        config.topology = build_preset(a.scenario, *a.eta);
    }
    if (a.fault_edge) {
        if (*a.fault_edge == "none") {
            config.fault.reset();
        } else {
            config.fault = FaultInjection{parse_edge(config.topology.network, *a.fault_edge), 1000};
        }
    }
    if (a.nu) {
        if (!config.fault) {
            throw CLI::ValidationError("--nu needs a fault edge");
        }
        config.fault->change_point = *a.nu;
    }
    if (a.eta_d) config.eta_d = *a.eta_d;
    if (a.signal) config.signal = *a.signal;
    if (a.augmentation) config.augmentation = *a.augmentation;
    if (a.squeeze_db) config.augmentation = augmentation_from_squeeze_db(*a.squeeze_db);
    if (a.block_size) config.block_size = *a.block_size;
    if (a.trials) config.trials = *a.trials;
    if (a.seed) config.seed = *a.seed;
    if (a.horizon) config.horizon = *a.horizon;
    config.threads = a.threads;
    config.families.clear();
    for (const auto &f : a.families) {
        config.families.push_back(parse_family(f));
    }
    if (a.h_grid) {
        config.thresholds = parse_grid(*a.h_grid);
    } else if (!a.gammas.empty()) {
        config.thresholds.clear();
        for (double g : a.gammas) {
            config.thresholds.push_back(threshold_from_gamma(g, config.topology.network.num_edges()));
        }
    }
    return config;
}

json config_echo(const SimulateArgs &a, const ScenarioConfig &c) {
    json j;
    if (a.topology_file) {
        j["topology_file"] = *a.topology_file;
    } else {
        j["scenario"] = a.scenario;
        j["eta"] = a.eta.value_or(0.9);
    }
    std::vector<std::string> families;
    for (Family f : c.families) {
        families.emplace_back(family_name(f));
    }
    j["families"] = families;
    j["h"] = c.thresholds;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["N"] = c.signal;
    j["Na"] = c.augmentation;
    j["n"] = c.block_size;
    j["eta_d"] = c.eta_d;
    if (c.fault) {
        const Edge &e = c.topology.network.edge(c.fault->edge);
        j["fault_edge"] = std::to_string(e.u) + "-" + std::to_string(e.v);
        j["nu"] = c.fault->change_point;
    } else {
        j["fault_edge"] = "none";
    }
    j["horizon"] = c.effective_horizon();
    return j;
}

void add_simulate_command(CLI::App &app, std::ostream &out, std::ostream &err, std::function<void()> &action,
                          const std::vector<std::string> &argv) {
    auto *cmd = app.add_subcommand("simulate", "Monte Carlo sweep of FL-CUSUM latency and error rates");
    auto a = std::make_shared<SimulateArgs>();
    // --h names the threshold grid, so help is long-form only here.
    cmd->set_help_flag("--help", "Print this help message and exit");
    auto *config_opt = cmd->add_option("--config", a->config_file, "key=value file of simulate options; flags override it")
                           ->check(CLI::ExistingFile);
    auto *scenario = cmd->add_option("--scenario", a->scenario, "line5 or fattree3")
                         ->check(CLI::IsMember({"line5", "fattree3"}))
                         ->capture_default_str();
    cmd->add_option("--topology", a->topology_file, "Topology file with probe lines")->excludes(scenario);
    cmd->add_option("--eta", a->eta, "Per-link transmissivity of a preset (default 0.9)");
    cmd->add_option("--families", a->families, "Comma-separated probe families")
        ->delimiter(',')
        ->check(CLI::IsMember({"classical", "quantum"}));
    auto *h = cmd->add_option("--h", a->h_grid, "Threshold grid lo:hi:steps (default 10:50:5)");
    cmd->add_option("--gamma", a->gammas, "Comma-separated false-alarm run lengths, converted to thresholds")
        ->delimiter(',')
        ->excludes(h);
    cmd->add_option("--trials", a->trials, "Trials per family (default 1000)");
    cmd->add_option("--seed", a->seed, "64-bit master seed (default 0)");
    cmd->add_option("--fault-edge", a->fault_edge, "Faulty link u-v, or none");
    cmd->add_option("--eta-d", a->eta_d, "Transmissivity drop factor (default 0.95)");
    cmd->add_option("--nu", a->nu, "Change point, first post-change step (default 1000)");
    cmd->add_option("--N", a->signal, "Signal photons per pulse (default 100)");
    auto *na = cmd->add_option("--Na", a->augmentation, "Augmentation photon budget");
    cmd->add_option("--squeeze-db", a->squeeze_db, "Squeezing in dB (default 6)")->excludes(na);
    cmd->add_option("--n", a->block_size, "Pulses per entangled block (default 1)");
    cmd->add_option("--horizon", a->horizon, "Maximum steps per trial");
    cmd->add_option("--threads", a->threads, "Worker threads, 0 for all cores")->capture_default_str();
    cmd->add_option("-o,--output", a->output, "CSV file (default: standard output)");
    cmd->add_option("--manifest", a->manifest, "Run manifest path (default: <output>.manifest.json)");
    cmd->callback([cmd, config_opt, &out, &err, &action, a, argv] {
        if (a->config_file) {
            apply_config_file(*cmd, *a->config_file, config_opt);
        }
        action = [&out, &err, a, argv] {
            ScenarioConfig config = resolve_scenario(*a);
            std::string started = utc_timestamp();
            SweepResult result = run_sweep(config);
            std::string finished = utc_timestamp();

            std::ofstream file;
            std::ostream &dest = open_output(a->output, file, out);
            result.write_csv(dest);

            json fits = json::object();
            for (Family f : config.families) {
                try {
                    LinearFit fit = fit_latency_slope(result, f);
                    fits[std::string(family_name(f))] = {
                        {"slope", fit.slope}, {"intercept", fit.intercept}, {"r_squared", fit.r_squared}};
                } catch (const std::invalid_argument &) {
                    // Fewer than two thresholds with error-free trials.
                }
            }

            std::optional<std::string> manifest_path = a->manifest;
            if (!manifest_path && a->output) {
                manifest_path = *a->output + ".manifest.json";
            }
            if (manifest_path) {
                json manifest = {{"tool", "qloc"},
                                 {"version", QLOC_VERSION},
                                 {"command", "simulate"},
                                 {"argv", argv},
                                 {"config", config_echo(*a, config)},
                                 {"seed", config.seed},
                                 {"started_at", started},
                                 {"finished_at", finished},
                                 {"outputs", json::array({a->output.value_or("-")})},
                                 {"latency_fits", fits}};
                std::ofstream mf(*manifest_path);
                if (!mf) {
                    throw std::runtime_error("cannot open '" + *manifest_path + "' for writing");
                }
                mf << manifest.dump(2) << '\n';
            }
            if (fits.contains("classical") && fits.contains("quantum")) {
                err << "latency slope ratio classical/quantum: "
                    << fmt(fits["classical"]["slope"].get<double>() / fits["quantum"]["slope"].get<double>(), 6)
                    << '\n';
            }
        };
    });
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Quantum-augmented link fault localization toolkit", "qloc"};
    app.set_version_flag("--version", QLOC_VERSION);
    app.require_subcommand(1);
    std::function<void()> action;

    add_topology_command(app, out, action);
    add_analyze_kl_command(app, out, action);
    add_build_probes_command(app, out, action);
    add_simulate_command(app, out, err, action, args);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (action) {
            action();
        }
    } catch (const CLI::ParseError &e) {
        err << "qloc: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception &e) {
        err << "qloc: error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace qloc::cli
