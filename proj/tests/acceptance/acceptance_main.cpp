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

// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../unit/test_support.hpp"
#include "qloc/probe_stats.hpp"
#include "qloc/qcd.hpp"
#include "qloc/simharness.hpp"
#include "qloc/tomography.hpp"
#include "qloc/topologies.hpp"

#ifdef QLOC_HAVE_CLI
#include "qloc/cli.hpp"
#endif

namespace {

using namespace qloc;
using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(const char *format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double rel_err(double a, double b) {
    double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

const std::vector<double> kGridN{1.0, 10.0, 100.0};
const std::vector<double> kGridNa{0.1, 1.0, 10.0};
const std::vector<int> kGridBlock{1, 2, 4, 8};
const std::vector<double> kGridEta{0.1, 0.5, 0.9};
const std::vector<double> kGridEtaD{0.5, 0.8, 0.95, 0.99};

Eigen::MatrixXd dense(const ObsModel &m) {
    auto flat = m.dense_covariance();
    Eigen::MatrixXd out(m.dim(), m.dim());
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) out(i, j) = flat[static_cast<std::size_t>(i * m.dim() + j)];
    return out;
}

// D(post || pre) for equal-mean-vector Gaussians, straight from the matrices.
double dense_kl(const ObsModel &pre, const ObsModel &post) {
    Eigen::MatrixXd s0 = dense(pre);
    Eigen::MatrixXd s1 = dense(post);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(s0);
    Eigen::VectorXd d = Eigen::VectorXd::Constant(pre.dim(), pre.mean() - post.mean());
    double trace = lu.solve(s1).trace();
    double quad = d.dot(lu.solve(d));
    return 0.5 * (trace + quad - pre.dim() + std::log(s0.determinant() / s1.determinant()));
}

Verdict kl_oracle() {
    double worst = 0.0;
    int points = 0;
    for (double big_n : kGridN)
        for (double na : kGridNa)
            for (int n : kGridBlock)
                for (double eta : kGridEta)
                    for (double eta_d : kGridEtaD) {
                        auto q = ProbeParams::quantum(big_n, na, n);
                        auto pre = ObsModel::for_channel(q, eta);
                        auto post = ObsModel::for_channel(q, eta * eta_d);
                        worst = std::max(worst, rel_err(n * quantum_kl_per_pulse(q, eta, eta_d), dense_kl(pre, post)));
                        ++points;
                    }
    return {worst <= 1e-9, fmt("%d grid points, max relative error %.3g (limit 1e-9)", points, worst)};
}

Verdict sherman_morrison() {
    std::mt19937_64 rng(20260101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int n : {1, 2, 4, 8}) {
        for (int draw = 0; draw < 100; ++draw) {
            auto q = ProbeParams::quantum(1.0 + 199.0 * u(rng), 0.01 + 20.0 * u(rng), n);
            ObsModel m = ObsModel::for_channel(q, 0.01 + 0.98 * u(rng));
            Eigen::MatrixXd cov = dense(m);
            worst = std::max(worst, rel_err(m.det(), cov.determinant()));
            worst = std::max(worst, rel_err(m.log_det(), std::log(cov.determinant())));
            Eigen::MatrixXd inv = cov.inverse();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    worst = std::max(worst, rel_err(i == j ? m.inv_diag() : m.inv_offdiag(), inv(i, j)));
        }
    }
    return {worst <= 1e-10, fmt("400 draws, max relative error %.3g (limit 1e-10)", worst)};
}

Verdict speedup_properties() {
    std::vector<std::string> failures;
    auto q_of = [](double big_n, double na, int n, double eta, double eta_d) {
        return speedup_ratio(ProbeParams::quantum(big_n, na, n), eta, eta_d);
    };

    int mono_fail = 0;
    for (double big_n : kGridN)
        for (double na : kGridNa)
            for (int n : kGridBlock) {
                for (double eta_d : kGridEtaD)
                    for (std::size_t i = 1; i < kGridEta.size(); ++i)
                        if (!(q_of(big_n, na, n, kGridEta[i], eta_d) > q_of(big_n, na, n, kGridEta[i - 1], eta_d)))
                            ++mono_fail;
                for (double eta : kGridEta)
                    for (std::size_t i = 1; i < kGridEtaD.size(); ++i)
                        if (!(q_of(big_n, na, n, eta, kGridEtaD[i]) > q_of(big_n, na, n, eta, kGridEtaD[i - 1])))
                            ++mono_fail;
            }
    if (mono_fail) failures.push_back(fmt("(a) %d non-increasing steps", mono_fail));

    double worst_b = 0.0;
    double worst_c = 0.0;
    double worst_d = 0.0;
    for (double na : kGridNa)
        for (int n : kGridBlock)
            for (double eta_d : kGridEtaD) {
                for (double big_n : kGridN) {
                    worst_b = std::max(worst_b, std::abs(q_of(big_n, na, n, 1e-8, eta_d) - big_n / (big_n + na)));
                }
                for (double eta : kGridEta) {
                    double c = ProbeParams::quantum(1.0, na, n).squeeze_contrast();
                    worst_c = std::max(worst_c, std::abs(q_of(1e9, na, n, eta, eta_d) - 1.0 / (1.0 - c * eta)));
                }
            }
    for (double big_n : kGridN)
        for (double na : kGridNa)
            for (double eta : kGridEta)
                for (double eta_d : kGridEtaD) {
                    double limit = big_n / ((big_n + na) * (1.0 - eta));
                    worst_d = std::max(worst_d, std::abs(q_of(big_n, na, 1 << 20, eta, eta_d) - limit));
                }
    if (worst_b > 1e-4) failures.push_back(fmt("(b) gap %.3g", worst_b));
    if (worst_c > 1e-4) failures.push_back(fmt("(c) gap %.3g", worst_c));
    if (worst_d > 1e-3) failures.push_back(fmt("(d) gap %.3g", worst_d));

    double na0 = augmentation_threshold(ProbeParams::quantum(100.0, 1.0, 1), 0.9, 0.8);
    if (std::abs(na0 - 20.9) > 0.1) failures.push_back(fmt("(e) N_a0 = %.4f", na0));

    double q_min = INFINITY;
    for (int k = 0; k <= 20000; ++k) {
        double na = 0.01 * std::pow(890.0 / 0.01, k / 20000.0);
        q_min = std::min(q_min, q_of(100.0, na, 1, 0.9, 0.8));
    }
    if (!(q_min > 1.0)) failures.push_back(fmt("(f) min q_1 = %.6f", q_min));

    std::string detail = fmt("(a) ok=%s (b) %.2g (c) %.2g (d) %.2g (e) N_a0=%.4f (f) min q_1=%.4f",
                             mono_fail ? "no" : "yes", worst_b, worst_c, worst_d, na0, q_min);
    for (const auto &f : failures) detail += "; failed " + f;
    return {failures.empty(), detail};
}

Verdict probe_optimality() {
    std::mt19937_64 rng(4);
    int matched = 0;
    int mismatched = 0;
    int skipped = 0;
    while (matched + mismatched < 200) {
        Network net = qloc::testing::random_connected_network(rng, 6, 2, 3);
        auto family = FaultFamily::singletons_with_empty(net);
        std::vector<Probe> probes;
        try {
            probes = construct_probes(net, family);
        } catch (const IndistinguishablePairError &) {
            ++skipped;
            continue;
        }
        double wmin = kUnreachable;
        for (EdgeId e = 0; e < net.num_edges(); ++e) wmin = std::min(wmin, net.edge_weight(e));
        double got = max_probe_length(probes);
        int cap = static_cast<int>(std::ceil(got / wmin)) + 1;
        bool ok = std::abs(got - brute_force_minmax(net, family, cap)) <= 1e-9 &&
                  check_identifiable(probes, family).identifiable;
        ok ? ++matched : ++mismatched;
    }

    Topology line = build_line5_scenario(0.9);
    auto line_family = FaultFamily::singletons_with_empty(line.network);
    auto line_probes = construct_probes(line.network, line_family);
    bool line_ok = line_probes.size() == 5 &&
                   std::abs(max_probe_length(line_probes) - 5.0 * -std::log(0.9)) <= 1e-9 &&
                   check_identifiable(line_probes, line_family).identifiable;

    Topology ft = build_fattree_topology(0.9);
    bool ft_ok = ft.probes.size() == 48 &&
                 check_identifiable(ft.probes, FaultFamily::singletons_with_empty(ft.network)).identifiable;

    return {mismatched == 0 && line_ok && ft_ok,
            fmt("%d/200 random graphs optimal (%d non-identifiable draws skipped); line-5 %s; fat-tree 48 probes %s",
                matched, skipped, line_ok ? "ok" : "FAILED", ft_ok ? "ok" : "FAILED")};
}

Verdict engine_oracle() {
    Topology line = build_line5_scenario(0.9);
    auto q = ProbeParams::quantum(100.0, augmentation_from_squeeze_db(6.0), 1);
    auto bank = std::make_shared<FaultModelBank>(line.network, line.probes, q, 0.95);
    const double h = 8.0;
    int bad = 0;
    int stops = 0;
    double worst = 0.0;
    for (std::uint64_t traj = 0; traj < 50; ++traj) {
        Rng rng = trial_rng(99, traj, Family::quantum);
        std::uniform_int_distribution<int> pick_edge(0, 4);
        std::uniform_int_distribution<int> pick_nu(1, 150);
        EdgeId fault = static_cast<EdgeId>(pick_edge(rng));
        int nu = pick_nu(rng);

        FlCusumEngine tracker(bank, 1e300);
        FlCusumEngine stopper(bank, h);
        std::optional<StoppingResult> stop;
        std::uint64_t oracle_tau = 0;
        std::optional<EdgeId> oracle_lambda;
        std::vector<ObservationFrame> history;
        for (int t = 1; t <= 200; ++t) {
            ObservationFrame frame(bank->num_probes(), bank->dim());
            for (std::size_t p = 0; p < bank->num_probes(); ++p) {
                sample_observation(t >= nu ? bank->post_for_edge(p, fault) : bank->pre(p), rng, frame.block(p));
            }
            history.push_back(frame);
            tracker.step(frame);
            if (!stop && !stopper.finished()) stop = stopper.step(frame);
            auto oracle = glr_edge_statistics(history, *bank);
            for (EdgeId e = 0; e < oracle.size(); ++e) {
                worst = std::max(worst, std::abs(oracle[e] - tracker.statistics()[e]));
            }
            if (oracle_tau == 0) {
                GlrResult g = glr_statistic(history, *bank);
                if (g.statistic >= h) {
                    oracle_tau = static_cast<std::uint64_t>(t);
                    oracle_lambda = g.edge;
                }
            }
        }
        bool engine_stopped = stop && stop->stopped;
        if (engine_stopped != (oracle_tau != 0)) {
            ++bad;
        } else if (engine_stopped) {
            ++stops;
            if (stop->tau != oracle_tau || stop->lambda != oracle_lambda) ++bad;
        }
    }
    return {bad == 0 && worst <= 1e-9,
            fmt("50 trajectories, max statistic gap %.3g (limit 1e-9), %d stops, %d stop/location mismatches", worst,
                stops, bad)};
}

Verdict false_alarm() {
    ScenarioConfig config = ScenarioConfig::preset("line5");
    config.fault.reset();
    config.thresholds = {std::log(300.0)};
    config.trials = 1000;
    config.seed = 6;
    SweepResult r = run_sweep(config);
    bool ok = true;
    std::string detail;
    for (const SweepRow &row : r.rows) {
        double lower = row.mean_stop_time - 1.645 * row.stop_time_stddev / std::sqrt(static_cast<double>(row.trials));
        ok = ok && lower >= 50.0 && row.horizon == 0;
        detail += fmt("%s mean tau %.1f, 95%% lower bound %.1f; ", std::string(family_name(row.family)).c_str(),
                      row.mean_stop_time, lower);
    }
    return {ok, detail + "required >= 50"};
}

ScenarioConfig delay_config() {
    ScenarioConfig config = ScenarioConfig::preset("line5");
    config.fault = FaultInjection{config.topology.network.edge_id(1, 2), 1};
    config.eta_d = 0.95;
    config.trials = 500;
    config.seed = 7;
    return config;
}

struct DelayRun {
    SweepResult result;
    LinearFit classical;
    LinearFit quantum;
};

const DelayRun &delay_run() {
    static const DelayRun run = [] {
        DelayRun r;
        r.result = run_sweep(delay_config());
        r.classical = fit_latency_slope(r.result, Family::classical);
        r.quantum = fit_latency_slope(r.result, Family::quantum);
        return r;
    }();
    return run;
}

Verdict delay_scaling() {
    const DelayRun &r = delay_run();
    return {r.classical.r_squared >= 0.95 && r.quantum.r_squared >= 0.95,
            fmt("R^2 classical %.5f (slope %.4f), quantum %.5f (slope %.4f); required >= 0.95", r.classical.r_squared,
                r.classical.slope, r.quantum.r_squared, r.quantum.slope)};
}

Verdict speedup() {
    const DelayRun &r = delay_run();
    ScenarioConfig line = delay_config();
    double ratio = r.classical.slope / r.quantum.slope;
    double s1 = network_speedup(line.topology.probes, line.fault->edge, line.params(Family::quantum), line.eta_d);
    bool line_ok = std::abs(ratio - s1) <= 0.35 * s1 && ratio >= 1.5;

    ScenarioConfig ft = ScenarioConfig::preset("fattree3");
    ft.thresholds = {50.0};
    ft.seed = 8;
    SweepResult fr = run_sweep(ft);
    double classical = 0.0;
    double quantum = 0.0;
    for (const SweepRow &row : fr.rows) {
        (row.family == Family::classical ? classical : quantum) = row.mean_latency.value_or(NAN);
    }
    double ft_ratio = classical / quantum;
    double ft_s1 = network_speedup(ft.topology.probes, ft.fault->edge, ft.params(Family::quantum), ft.eta_d);
    bool ft_ok = ft_ratio >= 2.5;
    return {line_ok && ft_ok,
            fmt("line-5 slope ratio %.3f vs s_1 %.3f (band %.3f..%.3f, floor 1.5) %s; fat-tree h=50 latency "
                "%.1f/%.1f = %.3f (s_1 %.3f, required >= 2.5) %s",
                ratio, s1, 0.65 * s1, 1.35 * s1, line_ok ? "ok" : "FAILED", classical, quantum, ft_ratio, ft_s1,
                ft_ok ? "ok" : "FAILED")};
}

Verdict localization_trend() {
    bool ok = true;
    std::string detail;
    for (const char *name : {"line5", "fattree3"}) {
        ScenarioConfig config = ScenarioConfig::preset(name);
        config.seed = 9;
        SweepResult r = run_sweep(config);
        for (Family f : {Family::classical, Family::quantum}) {
            double e10 = NAN;
            double e30 = NAN;
            double e50 = NAN;
            for (const SweepRow &row : r.rows) {
                if (row.family != f) continue;
                if (row.h == 10.0) e10 = row.error_prob;
                if (row.h == 30.0) e30 = row.error_prob;
                if (row.h == 50.0) e50 = row.error_prob;
            }
            bool trend = e50 <= e10;
            bool level = true;
            if (std::string(name) == "line5" && f == Family::quantum) level = e30 <= 0.01;
            ok = ok && trend && level;
            detail += fmt("%s/%s err h10 %.3f h30 %.3f h50 %.3f%s; ", name, std::string(family_name(f)).c_str(), e10,
                          e30, e50, trend && level ? "" : " FAILED");
        }
    }
    return {ok, detail + "required line5/quantum h30 <= 0.01 and h50 <= h10"};
}

Verdict determinism() {
#ifdef QLOC_HAVE_CLI
    const std::vector<std::string> args{"simulate",   "--scenario", "line5",   "--families", "quantum,classical",
                                        "--h",        "10:50:5",    "--trials", "500",        "--seed",
                                        "7",          "--nu",       "1",       "--eta-d",    "0.95",
                                        "--fault-edge", "1-2"};
    auto once = [&] {
        std::ostringstream out;
        std::ostringstream err;
        int code = cli::run(args, out, err);
        return std::make_pair(code, out.str());
    };
    auto [code_a, first] = once();
    auto [code_b, second] = once();
    bool same = code_a == 0 && code_b == 0 && first == second && !first.empty();
    bool matches_library = first == delay_run().result.to_csv();
    return {same && matches_library, fmt("two CLI runs: %zu bytes, identical=%s, equal to library sweep=%s",
                                         first.size(), first == second ? "yes" : "no", matches_library ? "yes" : "no")};
#else
    std::string first = run_sweep(delay_config()).to_csv();
    std::string second = run_sweep(delay_config()).to_csv();
    return {first == second, fmt("two library runs: %zu bytes, identical=%s", first.size(), first == second ? "yes" : "no")};
#endif
}

struct Criterion {
    int id;
    const char *name;
    double budget_seconds;
    std::function<Verdict()> check;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "kl-oracle-equivalence", 1.0, kl_oracle},
        {2, "sherman-morrison-identities", 1.0, sherman_morrison},
        {3, "speedup-properties", 5.0, speedup_properties},
        {4, "probe-construction-optimality", 120.0, probe_optimality},
        {5, "engine-oracle-equivalence", 30.0, engine_oracle},
        {6, "false-alarm-run-length", 60.0, false_alarm},
        {7, "delay-scaling", 0.0, delay_scaling},
        {8, "speedup-reproduction", 600.0, speedup},
        {9, "localization-accuracy-trend", 0.0, localization_trend},
        {10, "determinism", 0.0, determinism},
    };
    int failed = 0;
    double delay_seconds = 0.0;
    for (const Criterion &c : criteria) {
        auto start = Clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception &e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        if (c.id == 7) delay_seconds = seconds;
        // The shared line-5 sweep is charged to criterion 8's budget as well.
        double charged = c.id == 8 ? seconds + delay_seconds : seconds;
        bool in_budget = c.budget_seconds == 0.0 || charged <= c.budget_seconds;
        bool pass = v.pass && in_budget;
        if (!pass) ++failed;
        std::string budget = c.budget_seconds == 0.0 ? "" : fmt(" (budget %.0f s)", c.budget_seconds);
        std::printf("criterion %2d %-31s %s  %s [%.2f s%s]\n", c.id, c.name, pass ? "PASS" : "FAIL", v.detail.c_str(),
                    charged, budget.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
