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

#include "qloc/probe_stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace qloc {

namespace {

constexpr double kMaxDropFactor = 1.0 - 1e-9;

void require_transmissivity(double eta, const char *what) {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in (0,1), got " + std::to_string(eta));
    }
}

void require_drop(double eta_d) {
    if (!(eta_d > 0.0 && eta_d <= 1.0)) {
        throw std::invalid_argument("drop factor eta_d must lie in (0,1], got " + std::to_string(eta_d));
    }
}

void require_nondegenerate_drop(double eta_d) {
    require_drop(eta_d);
    if (eta_d > kMaxDropFactor) {
        throw DegenerateDropError("degenerate drop: eta_d = " + std::to_string(eta_d) +
                                  " leaves both divergences at zero");
    }
}

// 1 - sqrt(eta_d) without cancellation near eta_d = 1.
double one_minus_sqrt(double eta_d) {
    return (1.0 - eta_d) / (1.0 + std::sqrt(eta_d));
}

const ProbeParams &require_quantum(const ProbeParams &params) {
    if (!params.is_quantum()) {
        throw std::invalid_argument("expected quantum probe parameters");
    }
    return params;
}

}  // namespace

ProbeParams::ProbeParams(ProbeKind kind, double signal, double augmentation, int block_size)
    : kind_(kind), signal_(signal), augmentation_(augmentation), block_size_(block_size) {
    if (!(signal > 0.0) || !std::isfinite(signal)) {
        throw std::invalid_argument("signal photon number N must be positive");
    }
    if (!(augmentation > 0.0) || !std::isfinite(augmentation)) {
        throw std::invalid_argument("augmentation photon number N_a must be positive");
    }
    if (block_size < 1) {
        throw std::invalid_argument("block size n must be a positive integer");
    }
}

ProbeParams ProbeParams::classical(double signal, double augmentation) {
    return ProbeParams(ProbeKind::classical, signal, augmentation, 1);
}

ProbeParams ProbeParams::quantum(double signal, double augmentation, int block_size) {
    return ProbeParams(ProbeKind::quantum, signal, augmentation, block_size);
}

double ProbeParams::alpha_squared() const {
    return is_quantum() ? signal_ : signal_ + augmentation_;
}

double ProbeParams::squeeze() const {
    if (!is_quantum()) {
        return 0.0;
    }
    return std::asinh(std::sqrt(block_size_ * augmentation_));
}

double ProbeParams::squeeze_contrast() const {
    if (!is_quantum()) {
        return 0.0;
    }
    double x = block_size_ * augmentation_;
    return 2.0 * std::sqrt(x) / (std::sqrt(x + 1.0) + std::sqrt(x));
}

double augmentation_from_squeeze_db(double db) {
    if (!(db > 0.0) || !std::isfinite(db)) {
        throw std::invalid_argument("squeezing must be a positive number of dB");
    }
    // e^{-2r} = 10^{-db/10}
    double r = db * std::log(10.0) / 20.0;
    double s = std::sinh(r);
    return s * s;
}

ObsModel::ObsModel(int dim, double mean, double offdiag) : dim_(dim), mean_(mean), offdiag_(offdiag) {
    if (dim < 1) {
        throw std::invalid_argument("observation dimension must be positive");
    }
    if (!std::isfinite(mean) || !std::isfinite(offdiag) || !(1.0 + 4.0 * dim * offdiag > 0.0) ||
        !(0.25 + offdiag > 0.0)) {
        throw std::domain_error("observation covariance is not positive definite");
    }
}

ObsModel ObsModel::for_channel(const ProbeParams &params, double eta) {
    require_transmissivity(eta, "channel transmissivity");
    double mean = std::sqrt(eta * params.alpha_squared());
    if (!params.is_quantum()) {
        return ObsModel(1, mean, 0.0);
    }
    int n = params.block_size();
    return ObsModel(n, mean, -eta * params.squeeze_contrast() / (4.0 * n));
}

double ObsModel::log_det() const {
    return -dim_ * std::log(4.0) + std::log1p(4.0 * dim_ * offdiag_);
}

double ObsModel::det() const {
    return std::exp(log_det());
}

double ObsModel::inv_offdiag() const {
    return -16.0 * offdiag_ / (1.0 + 4.0 * dim_ * offdiag_);
}

std::vector<double> ObsModel::dense_covariance() const {
    std::vector<double> out(static_cast<std::size_t>(dim_) * dim_, offdiag_);
    for (int i = 0; i < dim_; i++) {
        out[static_cast<std::size_t>(i) * dim_ + i] = diag();
    }
    return out;
}

double classical_kl(const ProbeParams &params, double eta, double eta_d) {
    if (params.is_quantum()) {
        throw std::invalid_argument("classical_kl expects classical probe parameters");
    }
    require_transmissivity(eta, "eta");
    require_drop(eta_d);
    double gap = one_minus_sqrt(eta_d);
    return 2.0 * params.alpha_squared() * eta * gap * gap;
}

double quantum_kl_per_pulse(const ProbeParams &params, double eta, double eta_d) {
    require_quantum(params);
    require_transmissivity(eta, "eta");
    require_drop(eta_d);
    double n = params.block_size();
    double c = params.squeeze_contrast();
    double residual = 1.0 - c * eta;
    double trace_term = c * eta * (1.0 - eta_d) / residual;
    // ln((1 - c eta eta_d) / (1 - c eta)) == log1p(trace_term)
    double logdet_term = -std::log1p(trace_term);
    double gap = one_minus_sqrt(eta_d);
    double mean_term = 4.0 * params.signal() * n * eta * gap * gap / residual;
    return (trace_term + logdet_term + mean_term) / (2.0 * n);
}

double block_kl(const ProbeParams &params, double eta, double eta_d) {
    if (params.is_quantum()) {
        return params.block_size() * quantum_kl_per_pulse(params, eta, eta_d);
    }
    return classical_kl(params, eta, eta_d);
}

double generic_gaussian_kl(const ObsModel &pre, const ObsModel &post) {
    if (pre.dim() != post.dim()) {
        throw std::invalid_argument("models have different dimensions");
    }
    const int n = pre.dim();
    auto dense = [n](const ObsModel &m) {
        std::vector<double> flat = m.dense_covariance();
        Eigen::MatrixXd out(n, n);
        for (int i = 0; i < n; i++) {
            for (int j = 0; j < n; j++) {
                out(i, j) = flat[static_cast<std::size_t>(i) * n + j];
            }
        }
        return out;
    };
    Eigen::MatrixXd cov0 = dense(pre);
    Eigen::MatrixXd cov1 = dense(post);
    Eigen::LLT<Eigen::MatrixXd> llt0(cov0);
    Eigen::LLT<Eigen::MatrixXd> llt1(cov1);
    if (llt0.info() != Eigen::Success || llt1.info() != Eigen::Success) {
        throw std::domain_error("covariance is not positive definite");
    }
    Eigen::MatrixXd inv0 = llt0.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::VectorXd diff = Eigen::VectorXd::Constant(n, pre.mean() - post.mean());
    double trace = (inv0 * cov1).trace();
    double quad = diff.dot(inv0 * diff);
    auto log_det = [](const Eigen::LLT<Eigen::MatrixXd> &llt) {
        return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    };
    return 0.5 * (trace + quad - n + log_det(llt0) - log_det(llt1));
}

double speedup_ratio(const ProbeParams &quantum, double eta, double eta_d) {
    require_quantum(quantum);
    require_nondegenerate_drop(eta_d);
    return quantum_kl_per_pulse(quantum, eta, eta_d) / classical_kl(quantum.classical_comparator(), eta, eta_d);
}

double speedup_ratio_closed_form(const ProbeParams &quantum, double eta, double eta_d) {
    require_quantum(quantum);
    require_transmissivity(eta, "eta");
    require_nondegenerate_drop(eta_d);
    double n = quantum.block_size();
    double big_n = quantum.signal();
    double na = quantum.augmentation();
    double c = quantum.squeeze_contrast();
    double residual = 1.0 - c * eta;
    double gap = one_minus_sqrt(eta_d);
    double gap2 = gap * gap;
    double first = c / residual * (1.0 - eta_d) / gap2;
    double second = -std::log1p(c * eta * (1.0 - eta_d) / residual) / (eta * gap2);
    double third = 4.0 * big_n * n / residual;
    return (first + second + third) / (4.0 * (big_n + na) * n);
}

double drop_asymmetry(double eta_d) {
    if (!(eta_d >= 0.0 && eta_d < 1.0)) {
        throw std::invalid_argument("drop factor must lie in [0,1)");
    }
    double r = std::sqrt(eta_d);
    return (1.0 + r) / (1.0 - r);
}

double block_size_threshold(const ProbeParams &quantum, double eta, double eta_d) {
    require_quantum(quantum);
    require_transmissivity(eta, "eta");
    double bd = drop_asymmetry(eta_d);
    double big_n = quantum.signal();
    double na = quantum.augmentation();
    double margin = big_n * eta - bd * na * (1.0 - eta);
    if (!(margin > 0.0)) {
        throw HypothesisError("block-size threshold requires N*eta > b_d*N_a*(1-eta)");
    }
    double floor_term = 1.0 / (4.0 * na * (1.0 - eta));
    double lead = eta < 0.5 ? bd * (3.0 - 4.0 * eta) / (4.0 * margin) : bd / (4.0 * margin);
    return std::max(lead, floor_term);
}

double augmentation_threshold(const ProbeParams &quantum, double eta, double eta_d) {
    require_quantum(quantum);
    require_transmissivity(eta, "eta");
    double bd = drop_asymmetry(eta_d);
    double nn = quantum.signal() * quantum.block_size();  // N n
    double n = quantum.block_size();
    double k = 8.0 * nn * (1.0 - eta) - eta * bd * (1.0 - eta_d);
    if (!(k > 0.0)) {
        throw HypothesisError("augmentation threshold requires 8*N*n*(1-eta) > eta*b_d*(1-eta_d)");
    }
    double a = 8.0 * nn * (3.0 * eta - 1.0) + bd * (4.0 * eta - 1.0);
    double disc = 8.0 * nn * (bd + 4.0 * nn * eta) * k + (a + 4.0) * (a + 4.0);
    return (a + std::sqrt(disc)) / (4.0 * n * k);
}

SpeedupProfile speedup_profile(const ProbeParams &quantum, double eta, double eta_d) {
    require_quantum(quantum);
    require_transmissivity(eta, "eta");
    require_drop(eta_d);
    double n = quantum.block_size();
    double big_n = quantum.signal();
    double na = quantum.augmentation();
    double c = quantum.squeeze_contrast();
    double residual = 1.0 - c * eta;
    double root = 1.0 + std::sqrt(eta_d);

    SpeedupProfile out{};
    out.drop_asymmetry = eta_d < 1.0 ? drop_asymmetry(eta_d) : std::numeric_limits<double>::infinity();
    out.limit_low_eta = big_n / (big_n + na);
    out.limit_weak_drop = (c * c * eta / residual + 2.0 * n * big_n) / (2.0 * n * (big_n + na) * residual);
    out.limit_large_signal = 1.0 / residual;
    out.limit_large_block = big_n / ((big_n + na) * (1.0 - eta));
    out.signal_monotone_floor = c * c * eta * root * root / (4.0 * n * na * (1.0 - c * eta * eta_d));
    if (eta_d < 1.0) {
        try {
            out.block_size_threshold = block_size_threshold(quantum, eta, eta_d);
        } catch (const HypothesisError &) {
        }
        try {
            out.augmentation_threshold = augmentation_threshold(quantum, eta, eta_d);
        } catch (const HypothesisError &) {
        }
    }
    return out;
}

SpeedupProfile speedup_thresholds(const ProbeParams &quantum, double eta, double eta_d) {
    SpeedupProfile out = speedup_profile(quantum, eta, eta_d);
    out.block_size_threshold = block_size_threshold(quantum, eta, eta_d);
    out.augmentation_threshold = augmentation_threshold(quantum, eta, eta_d);
    return out;
}

ObsModelPair build_obs_models(const Probe &probe, const ProbeParams &params, std::optional<LinkFault> fault) {
    double eta0 = probe_transmissivity(probe);
    ObsModel pre = ObsModel::for_channel(params, eta0);
    if (!fault.has_value() || !probe.traverses(fault->edge)) {
        return {pre, pre};
    }
    return {pre, ObsModel::for_channel(params, probe_transmissivity(probe, fault))};
}

LlrKernel::LlrKernel(const ObsModel &pre, const ObsModel &post) : dim_(pre.dim()) {
    if (pre.dim() != post.dim()) {
        throw std::invalid_argument("models have different dimensions");
    }
    const double n = dim_;
    const double m0 = pre.mean();
    const double m1 = post.mean();
    const double b0 = pre.inv_offdiag();
    const double b1 = post.inv_offdiag();
    // Quadratic forms Q_j = 4|x - m_j u|^2 + b_j (sum x - n m_j)^2; the |x|^2 parts cancel.
    double log_det_gap = std::log1p(4.0 * n * post.offdiag()) - std::log1p(4.0 * n * pre.offdiag());
    double quad_const = 4.0 * n * (m1 * m1 - m0 * m0) + n * n * (b1 * m1 * m1 - b0 * m0 * m0);
    double quad_slope = 8.0 * (m0 - m1) + 2.0 * n * (b0 * m0 - b1 * m1);
    double quad_curv = b1 - b0;
    constant_ = -0.5 * (log_det_gap + quad_const);
    slope_ = -0.5 * quad_slope;
    curvature_ = -0.5 * quad_curv;
}

double LlrKernel::operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) {
        throw std::invalid_argument("observation has wrong dimension");
    }
    return (*this)(std::accumulate(x.begin(), x.end(), 0.0));
}

double log_likelihood_ratio(const ObsModel &pre, const ObsModel &post, std::span<const double> x) {
    return LlrKernel(pre, post)(x);
}

double covering_kl_sum(std::span<const Probe> probes, EdgeId fault_edge, const ProbeParams &params, double eta_d) {
    double total = 0.0;
    bool covered = false;
    for (const Probe &p : probes) {
        int m = p.multiplicity(fault_edge);
        if (m == 0) {
            continue;
        }
        covered = true;
        total += block_kl(params, probe_transmissivity(p), std::pow(eta_d, m));
    }
    if (!covered) {
        throw std::invalid_argument("unidentifiable edge: no probe crosses edge id " + std::to_string(fault_edge));
    }
    return total;
}

double network_speedup(std::span<const Probe> probes, EdgeId fault_edge, const ProbeParams &quantum, double eta_d) {
    require_quantum(quantum);
    require_nondegenerate_drop(eta_d);
    double quantum_sum = covering_kl_sum(probes, fault_edge, quantum, eta_d);
    double classical_sum = covering_kl_sum(probes, fault_edge, quantum.classical_comparator(), eta_d);
    return quantum_sum / (quantum.block_size() * classical_sum);
}

}  // namespace qloc
