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

#include "qloc/qcd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qloc {

double threshold_from_gamma(double gamma, std::size_t num_edges) {
    if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("gamma must be a finite value >= 1");
    }
    return std::log(static_cast<double>(num_edges + 1)) + std::log(gamma);
}

double gamma_from_threshold(double threshold, std::size_t num_edges) {
    return std::exp(threshold) / static_cast<double>(num_edges + 1);
}

ObservationFrame ObservationFrame::from_map(const std::map<std::size_t, std::vector<double>> &blocks,
                                            std::size_t num_probes, int dim) {
    ObservationFrame frame(num_probes, dim);
    for (std::size_t p = 0; p < num_probes; ++p) {
        auto it = blocks.find(p);
        if (it == blocks.end()) {
            throw std::invalid_argument("missing observation for probe " + std::to_string(p));
        }
        if (it->second.size() != static_cast<std::size_t>(dim)) {
            throw std::invalid_argument("observation for probe " + std::to_string(p) + " has " +
                                        std::to_string(it->second.size()) + " values, expected " +
                                        std::to_string(dim));
        }
        std::copy(it->second.begin(), it->second.end(), frame.block(p).begin());
    }
    if (blocks.size() != num_probes) {
        throw std::invalid_argument("observation for unknown probe " + std::to_string(blocks.rbegin()->first));
    }
    return frame;
}

FaultModelBank::FaultModelBank(const Network &network, std::span<const Probe> probes, const ProbeParams &params,
                               double eta_d)
    : params_(params), eta_d_(eta_d), dim_(params.block_size()), edge_terms_(network.num_edges()) {
    if (!(eta_d > 0.0 && eta_d < 1.0)) {
        throw std::invalid_argument("eta_d must lie in (0, 1)");
    }
    if (probes.empty()) {
        throw std::invalid_argument("at least one probe is required");
    }
    pre_.reserve(probes.size());
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const Probe &probe = probes[p];
        pre_.push_back(ObsModel::for_channel(params, probe_transmissivity(probe)));

        std::vector<int> counts;
        for (const auto &[e, m] : probe.multiplicities()) {
            if (e >= network.num_edges()) {
                throw std::invalid_argument("probe " + std::to_string(p) + " uses an edge outside the network");
            }
            counts.push_back(m);
        }
        std::sort(counts.begin(), counts.end());
        counts.erase(std::unique(counts.begin(), counts.end()), counts.end());

        std::vector<ObsModel> posts;
        std::vector<LlrKernel> kernels;
        for (int m : counts) {
            double eta_post = probe_transmissivity(probe) * std::pow(eta_d, m);
            posts.push_back(ObsModel::for_channel(params, eta_post));
            kernels.emplace_back(pre_.back(), posts.back());
        }

        std::vector<std::pair<EdgeId, std::size_t>> edge_variant;
        for (const auto &[e, m] : probe.multiplicities()) {
            auto variant = static_cast<std::size_t>(std::lower_bound(counts.begin(), counts.end(), m) - counts.begin());
            edge_terms_[e].push_back({p, variant});
            edge_variant.emplace_back(e, variant);
        }

        multiplicities_.push_back(std::move(counts));
        post_.push_back(std::move(posts));
        kernels_.push_back(std::move(kernels));
        probe_edge_variant_.push_back(std::move(edge_variant));
    }
}

const ObsModel &FaultModelBank::post_for_edge(std::size_t probe, EdgeId e) const {
    const auto &row = probe_edge_variant_[probe];
    auto it = std::lower_bound(row.begin(), row.end(), e,
                               [](const std::pair<EdgeId, std::size_t> &entry, EdgeId key) { return entry.first < key; });
    if (it == row.end() || it->first != e) {
        return pre_[probe];
    }
    return post_[probe][it->second];
}

FlCusumEngine::FlCusumEngine(std::shared_ptr<const FaultModelBank> bank, double threshold)
    : FlCusumEngine(std::move(bank), threshold, Options{}) {}

FlCusumEngine::FlCusumEngine(std::shared_ptr<const FaultModelBank> bank, double threshold, Options options)
    : bank_(std::move(bank)), threshold_(threshold), options_(options) {
    if (!bank_) {
        throw std::invalid_argument("model bank is null");
    }
    if (!(threshold > 0.0) || !std::isfinite(threshold)) {
        throw std::invalid_argument("threshold must be positive and finite");
    }
    stats_.assign(bank_->num_edges(), 0.0);
    llr_scratch_.resize(bank_->num_probes());
    for (std::size_t p = 0; p < bank_->num_probes(); ++p) {
        llr_scratch_[p].assign(bank_->multiplicities(p).size(), 0.0);
    }
}

std::optional<StoppingResult> FlCusumEngine::step(const std::map<std::size_t, std::vector<double>> &blocks) {
    return step(ObservationFrame::from_map(blocks, bank_->num_probes(), bank_->dim()));
}

std::optional<StoppingResult> FlCusumEngine::step(const ObservationFrame &frame) {
    if (finished_) {
        throw std::logic_error("detector already halted");
    }
    if (frame.num_probes() != bank_->num_probes() || frame.dim() != bank_->dim()) {
        throw std::invalid_argument("frame shape does not match the probe set");
    }

    for (std::size_t p = 0; p < bank_->num_probes(); ++p) {
        auto block = frame.block(p);
        double sum_x = std::accumulate(block.begin(), block.end(), 0.0);
        auto &row = llr_scratch_[p];
        for (std::size_t v = 0; v < row.size(); ++v) {
            row[v] = bank_->kernel(p, v)(sum_x);
        }
    }

    max_stat_ = 0.0;
    argmax_ = 0;
    for (EdgeId e = 0; e < stats_.size(); ++e) {
        double llr = 0.0;
        for (const auto &term : bank_->edge_terms(e)) {
            llr += llr_scratch_[term.probe][term.variant];
        }
        stats_[e] = cusum_step(stats_[e], llr);
        if (stats_[e] > max_stat_) {
            max_stat_ = stats_[e];
            argmax_ = e;
        }
    }
    ++t_;
    if (options_.record_trace) {
        trace_.push_back(max_stat_);
    }

    bool crossed = max_stat_ >= threshold_;
    if (!crossed && (options_.horizon == 0 || t_ < options_.horizon)) {
        return std::nullopt;
    }
    finished_ = true;
    StoppingResult result;
    result.stopped = crossed;
    result.tau = t_;
    if (crossed) {
        result.lambda = argmax_;
    }
    result.max_trace = std::move(trace_);
    return result;
}

double joint_llr(const FaultModelBank &bank, EdgeId e, const ObservationFrame &frame) {
    double total = 0.0;
    for (const auto &term : bank.edge_terms(e)) {
        total += log_likelihood_ratio(bank.pre(term.probe), bank.post_for_edge(term.probe, e), frame.block(term.probe));
    }
    return total;
}

namespace {

struct EdgeWindow {
    double value = 0.0;
    std::size_t start = 0;
};

EdgeWindow best_window(std::span<const ObservationFrame> history, const FaultModelBank &bank, EdgeId e) {
    std::vector<double> llr(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) {
        llr[i] = joint_llr(bank, e, history[i]);
    }
    EdgeWindow best;
    double suffix = 0.0;
    for (std::size_t j = history.size(); j-- > 0;) {
        suffix += llr[j];
        if (suffix >= best.value && suffix > 0.0) {
            best.value = suffix;
            best.start = j + 1;
        }
    }
    return best;
}

}  // namespace

std::vector<double> glr_edge_statistics(std::span<const ObservationFrame> history, const FaultModelBank &bank) {
    std::vector<double> out(bank.num_edges(), 0.0);
    for (EdgeId e = 0; e < bank.num_edges(); ++e) {
        out[e] = best_window(history, bank, e).value;
    }
    return out;
}

GlrResult glr_statistic(std::span<const ObservationFrame> history, const FaultModelBank &bank) {
    GlrResult result;
    for (EdgeId e = 0; e < bank.num_edges(); ++e) {
        EdgeWindow w = best_window(history, bank, e);
        if (w.value > result.statistic) {
            result.statistic = w.value;
            result.edge = e;
            result.start = w.start;
        }
    }
    return result;
}

DelayBounds delay_bounds(const Network &network, std::span<const Probe> probes, EdgeId fault_edge,
                         const ProbeParams &params, double eta_d, double gamma) {
    double kl = covering_kl_sum(probes, fault_edge, params, eta_d);
    double h = threshold_from_gamma(gamma, network.num_edges());
    return {std::log(gamma) / kl, h / kl, kl};
}

}  // namespace qloc
