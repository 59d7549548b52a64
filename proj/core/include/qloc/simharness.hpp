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

// Seeded Monte Carlo driver for the FL-CUSUM detector.
//
// Every (seed, trial, family) triple owns an independent random stream, so
// adding trials or threads never changes earlier results. All thresholds of a
// sweep share one trajectory per trial: the engine runs up to the largest h and
// each smaller h records the first step its own level was reached.

#ifndef QLOC_SIMHARNESS_HPP
#define QLOC_SIMHARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qloc/network.hpp"
#include "qloc/probe_stats.hpp"
#include "qloc/qcd.hpp"
#include "qloc/topologies.hpp"

namespace qloc {

using Rng = std::mt19937_64;

enum class Family { classical, quantum };

std::string_view family_name(Family family);
/// "classical" or "quantum"; throws std::invalid_argument otherwise.
Family parse_family(std::string_view name);

/// Draws one observation vector from model into out (size model.dim()).
void sample_observation(const ObsModel &model, Rng &rng, std::span<double> out);
std::vector<double> sample_observation(const ObsModel &model, Rng &rng);

/// Independent stream for one trial of one family.
Rng trial_rng(std::uint64_t seed, std::uint64_t trial, Family family);

struct FaultInjection {
    EdgeId edge;
    /// First step drawn from the post-change models (1-based).
    std::uint64_t change_point = 1;
};

struct ScenarioConfig {
    explicit ScenarioConfig(Topology topo) : topology(std::move(topo)) {}

    Topology topology;
    double signal = 100.0;
    double augmentation = 0.0;
    int block_size = 1;
    double eta_d = 0.95;
    std::optional<FaultInjection> fault;
    std::vector<double> thresholds;
    std::size_t trials = 1;
    std::uint64_t seed = 0;
    /// 0 selects default_horizon().
    std::uint64_t horizon = 0;
    std::vector<Family> families{Family::classical, Family::quantum};
    /// 0 uses the hardware concurrency.
    unsigned threads = 0;

    /// Figure-style scenario: "line5" (fault on (1,2)) or "fattree3" (fault on
    /// (1,16)), eta = 0.9, eta_d = 0.95, N = 100, 6 dB squeezing, n = 1,
    /// change point 1000, h in {10, 20, 30, 40, 50}, 1000 trials.
    static ScenarioConfig preset(std::string_view name);

    ProbeParams params(Family family) const;
    /// max(50 * change point, 100000).
    std::uint64_t default_horizon() const;
    std::uint64_t effective_horizon() const { return horizon != 0 ? horizon : default_horizon(); }

    /// Throws std::invalid_argument on an empty or non-increasing threshold
    /// grid, zero trials, a zero change point, an unknown fault edge, or a probe
    /// set that cannot localize every single-edge fault.
    void validate() const;
};

enum class TrialError { none, early, wrong_edge, horizon };
std::string_view trial_error_name(TrialError error);

struct TrialOutcome {
    bool stopped = false;
    std::uint64_t tau = 0;
    std::optional<EdgeId> lambda;
    TrialError error = TrialError::none;
    bool is_error() const { return error != TrialError::none; }
};

/// Classifies a stop (or its absence) against the injected fault. With no
/// fault, every stop is a false alarm.
TrialOutcome classify_outcome(bool stopped, std::uint64_t tau, std::optional<EdgeId> lambda,
                              const std::optional<FaultInjection> &fault);

/// One trial at every threshold of the config, sharing a trajectory.
std::vector<TrialOutcome> run_trial_grid(const ScenarioConfig &config, Family family, std::uint64_t trial);

/// One trial at a single threshold h.
TrialOutcome run_trial(const ScenarioConfig &config, Family family, std::uint64_t trial, double h);

struct SweepRow {
    Family family;
    double h;
    double gamma;
    std::size_t trials = 0;
    std::size_t error_free = 0;
    /// Mean of tau - change point over error-free trials; absent when there are none.
    std::optional<double> mean_latency;
    double error_prob = 0.0;
    std::size_t early = 0;
    std::size_t wrong_edge = 0;
    std::size_t horizon = 0;
    /// Mean and sample standard deviation of tau over all trials, with unstopped
    /// trials counted at the horizon.
    double mean_stop_time = 0.0;
    double stop_time_stddev = 0.0;
};

struct SweepResult {
    /// Ordered by family (classical first), then h ascending.
    std::vector<SweepRow> rows;
    void write_csv(std::ostream &out) const;
    std::string to_csv() const;
};

SweepResult run_sweep(const ScenarioConfig &config);

struct LinearFit {
    double slope;
    double intercept;
    double r_squared;
};

/// Ordinary least squares; needs at least two distinct x values.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Latency-vs-h fit over the family's rows that have a mean latency.
LinearFit fit_latency_slope(const SweepResult &result, Family family);

}  // namespace qloc

#endif
