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

#ifndef QLOC_QCD_HPP
#define QLOC_QCD_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qloc/network.hpp"
#include "qloc/probe_stats.hpp"

namespace qloc {

/// max(0, stat + llr).
inline double cusum_step(double stat, double llr) {
    double next = stat + llr;
    return next > 0.0 ? next : 0.0;
}

/// ln((num_edges + 1) * gamma): the detector threshold that keeps the mean time
/// to false alarm at or above gamma. Requires gamma >= 1.
double threshold_from_gamma(double gamma, std::size_t num_edges);

/// Inverse of threshold_from_gamma.
double gamma_from_threshold(double threshold, std::size_t num_edges);

/// One time step of probe observations: a block of dim() values per probe, probe-major.
class ObservationFrame {
   public:
    ObservationFrame() = default;
    ObservationFrame(std::size_t num_probes, int dim)
        : num_probes_(num_probes), dim_(dim), values_(num_probes * static_cast<std::size_t>(dim), 0.0) {}

    /// Builds a frame from a probe-index keyed map. Throws std::invalid_argument
    /// if any probe in [0, num_probes) is missing or a block has the wrong size.
    static ObservationFrame from_map(const std::map<std::size_t, std::vector<double>> &blocks,
                                     std::size_t num_probes, int dim);

    std::size_t num_probes() const { return num_probes_; }
    int dim() const { return dim_; }
    std::span<const double> block(std::size_t probe) const {
        return {values_.data() + probe * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    std::span<double> block(std::size_t probe) {
        return {values_.data() + probe * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }

   private:
    std::size_t num_probes_ = 0;
    int dim_ = 1;
    std::vector<double> values_;
};

/// Pre-change model of every probe and its post-change models under a drop on
/// each edge, keyed by how many times the probe crosses that edge. Built once
/// from probe geometry; immutable and shareable across engines.
class FaultModelBank {
   public:
    struct Term {
        std::size_t probe;
        std::size_t variant;  ///< index into the probe's post-change variants
    };

    FaultModelBank(const Network &network, std::span<const Probe> probes, const ProbeParams &params, double eta_d);

    std::size_t num_probes() const { return pre_.size(); }
    std::size_t num_edges() const { return edge_terms_.size(); }
    int dim() const { return dim_; }
    double eta_d() const { return eta_d_; }
    const ProbeParams &params() const { return params_; }

    const ObsModel &pre(std::size_t probe) const { return pre_[probe]; }
    /// Distinct crossing counts of a probe, ascending; variant i uses multiplicities(p)[i].
    std::span<const int> multiplicities(std::size_t probe) const { return multiplicities_[probe]; }
    const ObsModel &post(std::size_t probe, std::size_t variant) const { return post_[probe][variant]; }
    const LlrKernel &kernel(std::size_t probe, std::size_t variant) const { return kernels_[probe][variant]; }
    /// Probes crossing edge e, with the variant matching their crossing count.
    std::span<const Term> edge_terms(EdgeId e) const { return edge_terms_[e]; }

    /// Model of probe p when the drop sits on edge e (pre-change model when p misses e).
    const ObsModel &post_for_edge(std::size_t probe, EdgeId e) const;

   private:
    ProbeParams params_;
    double eta_d_;
    int dim_;
    std::vector<ObsModel> pre_;
    std::vector<std::vector<int>> multiplicities_;
    std::vector<std::vector<ObsModel>> post_;
    std::vector<std::vector<LlrKernel>> kernels_;
    std::vector<std::vector<Term>> edge_terms_;
    std::vector<std::vector<std::pair<EdgeId, std::size_t>>> probe_edge_variant_;
};

struct StoppingResult {
    /// False when the horizon ran out first.
    bool stopped = false;
    /// Step at which the detector halted (or the horizon, when not stopped).
    std::uint64_t tau = 0;
    /// Edge with the largest statistic at tau; ties go to the smallest edge id.
    std::optional<EdgeId> lambda;
    /// Largest per-edge statistic after every step, when tracing is enabled.
    std::vector<double> max_trace;
};

/// Bank of per-edge CUSUM statistics over joint probe observations.
///
/// Each step adds, for every edge, the sum of the per-probe log-likelihood
/// ratios of the probes crossing it; probes off the edge contribute nothing.
/// The first time any statistic reaches the threshold the engine halts and
/// localizes the drop to the edge with the largest statistic. Single writer.
class FlCusumEngine {
   public:
    struct Options {
        /// Maximum number of steps before reporting "not stopped"; 0 means unbounded.
        std::uint64_t horizon = 0;
        bool record_trace = false;
    };

    FlCusumEngine(std::shared_ptr<const FaultModelBank> bank, double threshold);
    FlCusumEngine(std::shared_ptr<const FaultModelBank> bank, double threshold, Options options);

    /// Consumes one frame; returns a result when the engine halts or the
    /// horizon is reached. Throws std::logic_error once finished.
    std::optional<StoppingResult> step(const ObservationFrame &frame);
    std::optional<StoppingResult> step(const std::map<std::size_t, std::vector<double>> &blocks);

    std::span<const double> statistics() const { return stats_; }
    std::uint64_t step_count() const { return t_; }
    double threshold() const { return threshold_; }
    double max_statistic() const { return max_stat_; }
    EdgeId argmax_edge() const { return argmax_; }
    bool finished() const { return finished_; }
    const FaultModelBank &bank() const { return *bank_; }

   private:
    std::shared_ptr<const FaultModelBank> bank_;
    double threshold_;
    Options options_;
    std::vector<double> stats_;
    std::vector<std::vector<double>> llr_scratch_;
    std::vector<double> trace_;
    std::uint64_t t_ = 0;
    double max_stat_ = 0.0;
    EdgeId argmax_ = 0;
    bool finished_ = false;
};

/// Joint log-likelihood ratio of one frame for a drop on edge e, summed over
/// the probes crossing e and evaluated from the models directly.
double joint_llr(const FaultModelBank &bank, EdgeId e, const ObservationFrame &frame);

struct GlrResult {
    double statistic = 0.0;
    std::optional<EdgeId> edge;
    /// 1-based first step of the maximizing window; 0 when the statistic is 0.
    std::size_t start = 0;
};

/// Per-edge max over 1 <= j <= t of sum_{i=j}^{t} joint LLR, clipped at 0, by
/// direct enumeration of every window. Reference for the recursive engine.
std::vector<double> glr_edge_statistics(std::span<const ObservationFrame> history, const FaultModelBank &bank);

/// Max over windows and edges; ties go to the smallest edge id, then the earliest start.
GlrResult glr_statistic(std::span<const ObservationFrame> history, const FaultModelBank &bank);

struct DelayBounds {
    double lower;   ///< ln(gamma) / sum KL
    double upper;   ///< ln((|E|+1) gamma) / sum KL
    double kl_sum;  ///< block divergences summed over probes crossing the fault
};

/// First-order detection-delay bounds; both omit their (1 + o(1)) factors and
/// are only meaningful as gamma grows.
DelayBounds delay_bounds(const Network &network, std::span<const Probe> probes, EdgeId fault_edge,
                         const ProbeParams &params, double eta_d, double gamma);

}  // namespace qloc

#endif
