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

// Homodyne observation models for classical and quantum-augmented probes, and
// the Kullback-Leibler analytics built on them. All divergences are in nats.
// "Per pulse" quantities divide a block divergence by the block size n; the
// detector consumes one block (one observation vector) per time step.

#ifndef QLOC_PROBE_STATS_HPP
#define QLOC_PROBE_STATS_HPP

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qloc/network.hpp"

namespace qloc {

/// Raised when a ratio is requested at a drop factor too close to 1 to be meaningful.
class DegenerateDropError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

/// Raised when a closed-form threshold is requested outside the hypothesis it is derived under.
class HypothesisError : public std::domain_error {
   public:
    using std::domain_error::domain_error;
};

enum class ProbeKind { classical, quantum };

/// Physical knobs of one probe family.
///
/// signal: mean signal photon number N per pulse. augmentation: the quantum
/// photon budget N_a. block_size: pulses per entangled block (1 means a
/// displaced squeezed state). A classical probe spends N + N_a photons on a
/// plain coherent state so that both families use the same energy.
class ProbeParams {
   public:
    static ProbeParams classical(double signal, double augmentation);
    static ProbeParams quantum(double signal, double augmentation, int block_size);

    ProbeKind kind() const { return kind_; }
    bool is_quantum() const { return kind_ == ProbeKind::quantum; }
    double signal() const { return signal_; }
    double augmentation() const { return augmentation_; }
    /// Classical probes observe one pulse per step.
    int block_size() const { return block_size_; }

    /// Coherent amplitude squared: N + N_a (classical) or N (quantum).
    double alpha_squared() const;
    /// Squeeze parameter s with sinh^2(s) = n N_a; zero for classical probes.
    double squeeze() const;
    /// 1 - e^{-2s} = 2 sqrt(nN_a) / (sqrt(nN_a + 1) + sqrt(nN_a)); zero for classical probes.
    double squeeze_contrast() const;

    /// The equal-energy classical family this quantum family is compared against.
    ProbeParams classical_comparator() const { return classical(signal_, augmentation_); }

   private:
    ProbeParams(ProbeKind kind, double signal, double augmentation, int block_size);

    ProbeKind kind_;
    double signal_;
    double augmentation_;
    int block_size_;
};

/// N_a of a single-mode squeezed state whose quadrature variance is reduced by `db` decibels.
double augmentation_from_squeeze_db(double db);

/// n-dimensional Gaussian with mean m*(1,...,1) and covariance 1/4 I + offdiag J.
///
/// offdiag <= 0 for every physical probe; the covariance is positive definite
/// iff 1 + 4 n offdiag > 0.
class ObsModel {
   public:
    ObsModel(int dim, double mean, double offdiag);

    /// Model for a probe family observing a channel of transmissivity eta.
    static ObsModel for_channel(const ProbeParams &params, double eta);

    int dim() const { return dim_; }
    double mean() const { return mean_; }
    double diag() const { return 0.25 + offdiag_; }
    double offdiag() const { return offdiag_; }

    /// det = (1 + 4 n offdiag) / 4^n.
    double log_det() const;
    double det() const;
    /// Covariance inverse is inv_diag() on the diagonal and inv_offdiag() elsewhere.
    double inv_offdiag() const;
    double inv_diag() const { return 4.0 + inv_offdiag(); }

    /// Row-major dense covariance; used by reference computations and tests.
    std::vector<double> dense_covariance() const;

    bool operator==(const ObsModel &) const = default;

   private:
    int dim_;
    double mean_;
    double offdiag_;
};

struct ObsModelPair {
    ObsModel pre;
    ObsModel post;
};

/// Per-pulse divergence of a classical probe: 2(N + N_a) eta (1 - sqrt(eta_d))^2.
double classical_kl(const ProbeParams &params, double eta, double eta_d);

/// Closed-form per-pulse divergence of an n-pulse quantum block.
double quantum_kl_per_pulse(const ProbeParams &params, double eta, double eta_d);

/// Divergence of one observation (one block) of either family.
double block_kl(const ProbeParams &params, double eta, double eta_d);

/// D(post || pre) via dense linear algebra, with no structure exploited.
/// Reference path for the closed forms. Throws std::domain_error when a
/// covariance is not positive definite.
double generic_gaussian_kl(const ObsModel &pre, const ObsModel &post);

/// Quantum-to-classical per-pulse divergence ratio q_n, from the two divergences.
/// Throws DegenerateDropError when eta_d > 1 - 1e-9.
double speedup_ratio(const ProbeParams &quantum, double eta, double eta_d);

/// The same ratio from its single closed-form expression.
double speedup_ratio_closed_form(const ProbeParams &quantum, double eta, double eta_d);

/// (1 + sqrt(eta_d)) / (1 - sqrt(eta_d)).
double drop_asymmetry(double eta_d);

/// Asymptotes of q_n along each parameter and the closed-form thresholds that
/// bound its monotone regimes.
struct SpeedupProfile {
    double drop_asymmetry;      ///< b_d
    double limit_low_eta;       ///< eta -> 0
    double limit_weak_drop;     ///< eta_d -> 1
    double limit_large_signal;  ///< N -> infinity
    double limit_large_block;   ///< n -> infinity
    /// Lower bound on N for q_n to increase in N. Not sufficient on its own:
    /// growth also needs 4 n N_a (1 - c eta eta_d) > c^2 (1 + sqrt(eta_d))^2,
    /// and where that fails q_n decreases in N everywhere.
    double signal_monotone_floor;
    /// q_n increases in n for n >= this value; absent when its hypothesis fails.
    std::optional<double> block_size_threshold;
    /// q_n decreases in N_a for N_a >= this value; absent when its hypothesis fails.
    std::optional<double> augmentation_threshold;
};

/// Requires N eta > b_d N_a (1 - eta); throws HypothesisError otherwise.
double block_size_threshold(const ProbeParams &quantum, double eta, double eta_d);

/// Requires 8 N n (1 - eta) > eta b_d (1 - eta_d); throws HypothesisError otherwise.
double augmentation_threshold(const ProbeParams &quantum, double eta, double eta_d);

SpeedupProfile speedup_profile(const ProbeParams &quantum, double eta, double eta_d);

/// Like speedup_profile, but throws HypothesisError naming the first failed
/// hypothesis instead of leaving a threshold empty.
SpeedupProfile speedup_thresholds(const ProbeParams &quantum, double eta, double eta_d);

/// Pre- and post-change models of a probe. The pre-change channel is
/// exp(-l(P)); the post-change channel multiplies in eta_d once per traversal
/// of the faulty edge. post == pre when there is no fault or it is off the walk.
ObsModelPair build_obs_models(const Probe &probe, const ProbeParams &params,
                              std::optional<LinkFault> fault = std::nullopt);

/// ln f_post(x) - ln f_pre(x), precompiled for repeated evaluation in O(n).
///
/// The shared 1/4 I part of both covariances cancels, leaving
/// constant + slope * sum(x) + curvature * sum(x)^2.
class LlrKernel {
   public:
    LlrKernel(const ObsModel &pre, const ObsModel &post);

    double operator()(std::span<const double> x) const;
    double operator()(double sum_x) const { return constant_ + sum_x * (slope_ + curvature_ * sum_x); }

    int dim() const { return dim_; }
    bool is_zero() const { return constant_ == 0.0 && slope_ == 0.0 && curvature_ == 0.0; }

   private:
    int dim_;
    double constant_;
    double slope_;
    double curvature_;
};

double log_likelihood_ratio(const ObsModel &pre, const ObsModel &post, std::span<const double> x);

/// Network speedup estimate s_n(e*): summed quantum block divergences over the
/// probes crossing the fault, divided by n times the summed classical ones.
/// Throws std::invalid_argument when no probe crosses the edge.
double network_speedup(std::span<const Probe> probes, EdgeId fault_edge, const ProbeParams &quantum, double eta_d);

/// Sum over the probes crossing fault_edge of their block divergences.
double covering_kl_sum(std::span<const Probe> probes, EdgeId fault_edge, const ProbeParams &params, double eta_d);

}  // namespace qloc

#endif
