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

#include "qloc/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace qloc {

std::string_view family_name(Family family) {
    return family == Family::classical ? "classical" : "quantum";
}

Family parse_family(std::string_view name) {
    if (name == "classical") {
        return Family::classical;
    }
    if (name == "quantum") {
        return Family::quantum;
    }
    throw std::invalid_argument("unknown probe family '" + std::string(name) + "' (expected classical or quantum)");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// x = mean + (1/2 I + (kappa/n) J) z reproduces 1/4 I + offdiag J exactly.
class Sampler {
   public:
    explicit Sampler(Rng &rng) : rng_(rng) {}

    void draw(const ObsModel &model, std::span<double> out) {
        const int n = model.dim();
        if (out.size() != static_cast<std::size_t>(n)) {
            throw std::invalid_argument("output span does not match the model dimension");
        }
        if (n == 1) {
            out[0] = model.mean() + std::sqrt(model.diag()) * normal_(rng_);
            return;
        }
        double kappa = std::sqrt(0.25 + n * model.offdiag()) - 0.5;
        double total = 0.0;
        for (double &v : out) {
            v = normal_(rng_);
            total += v;
        }
        double shared = kappa * total / n;
        for (double &v : out) {
            v = model.mean() + 0.5 * v + shared;
        }
    }

   private:
    Rng &rng_;
    std::normal_distribution<double> normal_;
};

}  // namespace

void sample_observation(const ObsModel &model, Rng &rng, std::span<double> out) {
    Sampler(rng).draw(model, out);
}

std::vector<double> sample_observation(const ObsModel &model, Rng &rng) {
    std::vector<double> out(static_cast<std::size_t>(model.dim()));
    sample_observation(model, rng, out);
    return out;
}

Rng trial_rng(std::uint64_t seed, std::uint64_t trial, Family family) {
    std::uint64_t state = splitmix64(seed);
    state = splitmix64(state ^ trial);
    state = splitmix64(state ^ (family == Family::classical ? 0x636cULL : 0x7175ULL));
    return Rng(state);
}

ScenarioConfig ScenarioConfig::preset(std::string_view name) {
    constexpr double kEta = 0.9;
    ScenarioConfig config(build_preset(name, kEta));
    const Network &net = config.topology.network;
    EdgeId fault_edge = name == "line5" ? net.edge_id(1, 2) : net.edge_id(1, 16);
    config.signal = 100.0;
    config.augmentation = augmentation_from_squeeze_db(6.0);
    config.block_size = 1;
    config.eta_d = 0.95;
    config.fault = FaultInjection{fault_edge, 1000};
    config.thresholds = {10.0, 20.0, 30.0, 40.0, 50.0};
    config.trials = 1000;
    return config;
}

ProbeParams ScenarioConfig::params(Family family) const {
    if (family == Family::classical) {
        return ProbeParams::classical(signal, augmentation);
    }
    return ProbeParams::quantum(signal, augmentation, block_size);
}

std::uint64_t ScenarioConfig::default_horizon() const {
    std::uint64_t nu = fault ? fault->change_point : 1;
    return std::max<std::uint64_t>(50 * nu, 100000);
}

void ScenarioConfig::validate() const {
    if (thresholds.empty()) {
        throw std::invalid_argument("threshold grid is empty");
    }
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] > 0.0) || !std::isfinite(thresholds[i])) {
            throw std::invalid_argument("thresholds must be positive and finite");
        }
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
            throw std::invalid_argument("threshold grid must be strictly increasing");
        }
    }
    if (trials == 0) {
        throw std::invalid_argument("trials must be at least 1");
    }
    if (families.empty()) {
        throw std::invalid_argument("no probe family selected");
    }
    if (!(eta_d > 0.0 && eta_d < 1.0)) {
        throw std::invalid_argument("eta_d must lie in (0, 1)");
    }
    if (fault) {
        if (fault->change_point == 0) {
            throw std::invalid_argument("change point must be at least 1");
        }
        if (fault->edge >= topology.network.num_edges()) {
            throw std::invalid_argument("fault edge is not in the network");
        }
    }
    for (Family f : families) {
        (void)params(f);
    }
    auto report = check_identifiable(topology.probes, FaultFamily::singletons_with_empty(topology.network));
    if (!report.identifiable) {
        const auto &members = FaultFamily::singletons_with_empty(topology.network).members();
        const auto [a, b] = *report.conflict;
        throw std::invalid_argument("probe set cannot tell " + describe_fault_set(topology.network, members[a]) +
                                    " from " + describe_fault_set(topology.network, members[b]));
    }
}

std::string_view trial_error_name(TrialError error) {
    switch (error) {
        case TrialError::none:
            return "none";
        case TrialError::early:
            return "early";
        case TrialError::wrong_edge:
            return "wrong-edge";
        case TrialError::horizon:
            return "horizon";
    }
    return "unknown";
}

TrialOutcome classify_outcome(bool stopped, std::uint64_t tau, std::optional<EdgeId> lambda,
                              const std::optional<FaultInjection> &fault) {
    TrialOutcome out{stopped, tau, lambda, TrialError::none};
    if (!stopped) {
        out.error = TrialError::horizon;
    } else if (!fault || tau < fault->change_point) {
        out.error = TrialError::early;
    } else if (lambda != fault->edge) {
        out.error = TrialError::wrong_edge;
    }
    return out;
}

namespace {

std::vector<TrialOutcome> simulate(const ScenarioConfig &config, const std::shared_ptr<const FaultModelBank> &bank,
                                   Family family, std::uint64_t trial) {
    const auto &h = config.thresholds;
    const std::uint64_t horizon = config.effective_horizon();
    const std::size_t num_probes = bank->num_probes();

    std::vector<const ObsModel *> post(num_probes);
    for (std::size_t p = 0; p < num_probes; ++p) {
        post[p] = config.fault ? &bank->post_for_edge(p, config.fault->edge) : &bank->pre(p);
    }
    const std::uint64_t change_point = config.fault ? config.fault->change_point : 0;

    Rng rng = trial_rng(config.seed, trial, family);
    Sampler sampler(rng);
    FlCusumEngine engine(bank, h.back(), {horizon, false});
    ObservationFrame frame(num_probes, bank->dim());
    std::vector<TrialOutcome> outcomes(h.size());
    std::size_t next = 0;

    while (true) {
        const std::uint64_t t = engine.step_count() + 1;
        const bool changed = config.fault && t >= change_point;
        for (std::size_t p = 0; p < num_probes; ++p) {
            sampler.draw(changed ? *post[p] : bank->pre(p), frame.block(p));
        }
        auto result = engine.step(frame);
        while (next < h.size() && engine.max_statistic() >= h[next]) {
            outcomes[next] = classify_outcome(true, t, engine.argmax_edge(), config.fault);
            ++next;
        }
        if (result) {
            break;
        }
    }
    for (; next < h.size(); ++next) {
        outcomes[next] = classify_outcome(false, engine.step_count(), std::nullopt, config.fault);
    }
    return outcomes;
}

std::shared_ptr<const FaultModelBank> make_bank(const ScenarioConfig &config, Family family) {
    return std::make_shared<const FaultModelBank>(config.topology.network, config.topology.probes,
                                                  config.params(family), config.eta_d);
}

}  // namespace

std::vector<TrialOutcome> run_trial_grid(const ScenarioConfig &config, Family family, std::uint64_t trial) {
    config.validate();
    return simulate(config, make_bank(config, family), family, trial);
}

TrialOutcome run_trial(const ScenarioConfig &config, Family family, std::uint64_t trial, double h) {
    ScenarioConfig single = config;
    single.thresholds = {h};
    return run_trial_grid(single, family, trial).front();
}

SweepResult run_sweep(const ScenarioConfig &config) {
    config.validate();

    std::vector<Family> families = config.families;
    std::sort(families.begin(), families.end());
    families.erase(std::unique(families.begin(), families.end()), families.end());

    const std::size_t trials = config.trials;
    const std::size_t jobs = families.size() * trials;
    std::vector<std::shared_ptr<const FaultModelBank>> banks;
    for (Family f : families) {
        banks.push_back(make_bank(config, f));
    }

    std::vector<std::vector<TrialOutcome>> outcomes(jobs);
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        try {
            for (std::size_t job = cursor++; job < jobs; job = cursor++) {
                std::size_t fi = job / trials;
                outcomes[job] = simulate(config, banks[fi], families[fi], job % trials);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) {
                failure = std::current_exception();
            }
            cursor = jobs;
        }
    };

    unsigned threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 1; i < threads; ++i) {
            pool.emplace_back(worker);
        }
        worker();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    const std::size_t num_edges = config.topology.network.num_edges();
    const std::uint64_t change_point = config.fault ? config.fault->change_point : 0;
    SweepResult result;
    for (std::size_t fi = 0; fi < families.size(); ++fi) {
        for (std::size_t k = 0; k < config.thresholds.size(); ++k) {
            SweepRow row;
            row.family = families[fi];
            row.h = config.thresholds[k];
            row.gamma = gamma_from_threshold(row.h, num_edges);
            row.trials = trials;
            double latency_sum = 0.0;
            double tau_sum = 0.0;
            double tau_sq_sum = 0.0;
            for (std::size_t i = 0; i < trials; ++i) {
                const TrialOutcome &o = outcomes[fi * trials + i][k];
                auto tau = static_cast<double>(o.tau);
                tau_sum += tau;
                tau_sq_sum += tau * tau;
                switch (o.error) {
                    case TrialError::none:
                        ++row.error_free;
                        latency_sum += static_cast<double>(o.tau - change_point);
                        break;
                    case TrialError::early:
                        ++row.early;
                        break;
                    case TrialError::wrong_edge:
                        ++row.wrong_edge;
                        break;
                    case TrialError::horizon:
                        ++row.horizon;
                        break;
                }
            }
            if (row.error_free > 0) {
                row.mean_latency = latency_sum / static_cast<double>(row.error_free);
            }
            auto n = static_cast<double>(trials);
            row.error_prob = static_cast<double>(trials - row.error_free) / n;
            row.mean_stop_time = tau_sum / n;
            if (trials > 1) {
                double var = (tau_sq_sum - n * row.mean_stop_time * row.mean_stop_time) / (n - 1.0);
                row.stop_time_stddev = std::sqrt(std::max(0.0, var));
            }
            result.rows.push_back(row);
        }
    }
    return result;
}

namespace {

std::string format_g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void SweepResult::write_csv(std::ostream &out) const {
    out << "family,h,gamma,trials,errorfree,mean_latency,error_prob\n";
    for (const SweepRow &row : rows) {
        out << family_name(row.family) << ',' << format_g6(row.h) << ',' << format_g6(row.gamma) << ','
            << row.trials << ',' << row.error_free << ','
            << (row.mean_latency ? format_g6(*row.mean_latency) : std::string()) << ','
            << format_g6(row.error_prob) << '\n';
    }
}

std::string SweepResult::to_csv() const {
    std::ostringstream out;
    write_csv(out);
    return out.str();
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("x and y differ in length");
    }
    if (x.size() < 2) {
        throw std::invalid_argument("a line fit needs at least two points");
    }
    auto n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("a line fit needs two distinct x values");
    }
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = syy - fit.slope * sxy;
    fit.r_squared = syy > 0.0 ? 1.0 - std::max(0.0, ss_res) / syy : 1.0;
    return fit;
}

LinearFit fit_latency_slope(const SweepResult &result, Family family) {
    std::vector<double> x;
    std::vector<double> y;
    for (const SweepRow &row : result.rows) {
        if (row.family == family && row.mean_latency) {
            x.push_back(row.h);
            y.push_back(*row.mean_latency);
        }
    }
    return fit_line(x, y);
}

}  // namespace qloc
