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

#include "qloc/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace qloc {

namespace {

std::string pair_label(VertexId a, VertexId b) {
    std::ostringstream out;
    out << "(" << a << "," << b << ")";
    return out.str();
}

}  // namespace

Network::Network(std::vector<VertexId> vertices, std::vector<Edge> edges, std::vector<VertexId> monitors)
    : vertices_(std::move(vertices)), edges_(std::move(edges)), monitors_(std::move(monitors)) {
    std::sort(vertices_.begin(), vertices_.end());
    if (std::adjacent_find(vertices_.begin(), vertices_.end()) != vertices_.end()) {
        throw ValidationError("duplicate vertex id");
    }
    for (VertexId v : vertices_) {
        if (v < 0) {
            throw ValidationError("vertex ids must be non-negative, got " + std::to_string(v));
        }
    }

    adjacency_.resize(vertices_.size());
    for (EdgeId e = 0; e < edges_.size(); e++) {
        Edge &edge = edges_[e];
        if (edge.u == edge.v) {
            throw ValidationError("self-loop on vertex " + std::to_string(edge.u));
        }
        if (edge.u > edge.v) {
            std::swap(edge.u, edge.v);
        }
        if (!has_vertex(edge.u) || !has_vertex(edge.v)) {
            throw ValidationError("edge " + pair_label(edge.u, edge.v) + " references an unknown vertex");
        }
        // Rejects NaN as well as the closed endpoints.
        if (!(edge.eta > 0.0 && edge.eta < 1.0)) {
            throw ValidationError("edge " + pair_label(edge.u, edge.v) + " transmissivity must lie in (0,1)");
        }
        size_t iu = index_of(edge.u);
        size_t iv = index_of(edge.v);
        for (const auto &[other, id] : adjacency_[iu]) {
            if (other == iv) {
                throw ValidationError("duplicate edge " + pair_label(edge.u, edge.v));
            }
        }
        adjacency_[iu].emplace_back(iv, e);
        adjacency_[iv].emplace_back(iu, e);
    }

    std::sort(monitors_.begin(), monitors_.end());
    monitors_.erase(std::unique(monitors_.begin(), monitors_.end()), monitors_.end());
    if (monitors_.empty()) {
        throw ValidationError("network has no monitors");
    }
    for (VertexId m : monitors_) {
        if (!has_vertex(m)) {
            throw ValidationError("monitor " + std::to_string(m) + " is not a vertex");
        }
    }
}

bool Network::has_vertex(VertexId v) const {
    return std::binary_search(vertices_.begin(), vertices_.end(), v);
}

bool Network::is_monitor(VertexId v) const {
    return std::binary_search(monitors_.begin(), monitors_.end(), v);
}

std::size_t Network::index_of(VertexId v) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), v);
    if (it == vertices_.end() || *it != v) {
        throw std::out_of_range("unknown vertex " + std::to_string(v));
    }
    return static_cast<std::size_t>(it - vertices_.begin());
}

std::optional<EdgeId> Network::find_edge(VertexId a, VertexId b) const {
    if (!has_vertex(a) || !has_vertex(b)) {
        return std::nullopt;
    }
    size_t ib = index_of(b);
    for (const auto &[other, id] : adjacency_[index_of(a)]) {
        if (other == ib) {
            return id;
        }
    }
    return std::nullopt;
}

EdgeId Network::edge_id(VertexId a, VertexId b) const {
    auto e = find_edge(a, b);
    if (!e.has_value()) {
        throw std::out_of_range("unknown edge " + pair_label(a, b));
    }
    return *e;
}

const Edge &Network::edge(EdgeId e) const {
    if (e >= edges_.size()) {
        throw std::out_of_range("unknown edge id " + std::to_string(e));
    }
    return edges_[e];
}

double Network::edge_weight(EdgeId e) const {
    return -std::log(edge(e).eta);
}

std::string Network::edge_label(EdgeId e) const {
    const Edge &ed = edge(e);
    return pair_label(ed.u, ed.v);
}

bool Network::operator==(const Network &other) const {
    return vertices_ == other.vertices_ && edges_ == other.edges_ && monitors_ == other.monitors_;
}

Probe Probe::from_vertices(const Network &network, std::vector<VertexId> walk) {
    if (walk.size() < 2) {
        throw ValidationError("a probe needs at least one edge");
    }
    for (VertexId v : walk) {
        if (!network.has_vertex(v)) {
            throw ValidationError("probe visits unknown vertex " + std::to_string(v));
        }
    }
    if (!network.is_monitor(walk.front()) || !network.is_monitor(walk.back())) {
        throw ValidationError("probe endpoints " + std::to_string(walk.front()) + " and " +
                              std::to_string(walk.back()) + " must both be monitors");
    }

    Probe probe;
    probe.traversals_.reserve(walk.size() - 1);
    for (size_t i = 1; i < walk.size(); i++) {
        auto e = network.find_edge(walk[i - 1], walk[i]);
        if (!e.has_value()) {
            throw ValidationError("probe step " + pair_label(walk[i - 1], walk[i]) + " is not an edge");
        }
        probe.traversals_.push_back(*e);
        probe.length_ += network.edge_weight(*e);
    }
    std::vector<EdgeId> sorted = probe.traversals_;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size();) {
        size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) {
            j++;
        }
        probe.multiplicities_.emplace_back(sorted[i], static_cast<int>(j - i));
        i = j;
    }
    probe.vertices_ = std::move(walk);
    return probe;
}

int Probe::multiplicity(EdgeId e) const {
    auto it = std::lower_bound(multiplicities_.begin(), multiplicities_.end(), e,
                               [](const std::pair<EdgeId, int> &entry, EdgeId key) { return entry.first < key; });
    if (it == multiplicities_.end() || it->first != e) {
        return 0;
    }
    return it->second;
}

FaultFamily::FaultFamily(const Network &network, std::vector<FaultSet> faults) : faults_(std::move(faults)) {
    for (FaultSet &f : faults_) {
        std::sort(f.begin(), f.end());
        f.erase(std::unique(f.begin(), f.end()), f.end());
        for (EdgeId e : f) {
            if (e >= network.num_edges()) {
                throw ValidationError("fault set references unknown edge id " + std::to_string(e));
            }
        }
    }
}

FaultFamily FaultFamily::singletons_with_empty(const Network &network) {
    std::vector<FaultSet> faults;
    faults.reserve(network.num_edges() + 1);
    faults.emplace_back();
    for (EdgeId e = 0; e < network.num_edges(); e++) {
        faults.push_back({e});
    }
    return FaultFamily(network, std::move(faults));
}

FaultFamily FaultFamily::canonical() const {
    FaultFamily out = *this;
    std::stable_sort(out.faults_.begin(), out.faults_.end(), [](const FaultSet &a, const FaultSet &b) {
        if (a.size() != b.size()) {
            return a.size() < b.size();
        }
        return a < b;
    });
    return out;
}

double probe_transmissivity(const Probe &probe, std::optional<LinkFault> fault) {
    double eta = std::exp(-probe.length());
    if (fault.has_value()) {
        if (!(fault->eta_d > 0.0 && fault->eta_d < 1.0)) {
            throw std::invalid_argument("drop factor eta_d must lie in (0,1)");
        }
        int m = probe.multiplicity(fault->edge);
        if (m > 0) {
            eta *= std::pow(fault->eta_d, m);
        }
    }
    return eta;
}

std::vector<std::size_t> probes_covering(std::span<const Probe> probes, EdgeId e) {
    std::vector<std::size_t> out;
    for (size_t i = 0; i < probes.size(); i++) {
        if (probes[i].traverses(e)) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> probes_covering(std::span<const Probe> probes, const FaultSet &faults) {
    std::vector<std::size_t> out;
    for (size_t i = 0; i < probes.size(); i++) {
        for (EdgeId e : faults) {
            if (probes[i].traverses(e)) {
                out.push_back(i);
                break;
            }
        }
    }
    return out;
}

IdentifiabilityReport check_identifiable(std::span<const Probe> probes, const FaultFamily &family) {
    std::vector<std::vector<std::size_t>> signatures;
    signatures.reserve(family.size());
    for (const FaultSet &f : family.members()) {
        signatures.push_back(probes_covering(probes, f));
    }
    IdentifiabilityReport report;
    for (size_t i = 0; i < signatures.size(); i++) {
        for (size_t j = i + 1; j < signatures.size(); j++) {
            if (family.members()[i] != family.members()[j] && signatures[i] == signatures[j]) {
                report.identifiable = false;
                report.conflict = std::make_pair(i, j);
                return report;
            }
        }
    }
    return report;
}

std::string describe_fault_set(const Network &network, const FaultSet &faults) {
    if (faults.empty()) {
        return "{}";
    }
    std::string out = "{";
    for (size_t i = 0; i < faults.size(); i++) {
        if (i > 0) {
            out += ",";
        }
        out += network.edge_label(faults[i]);
    }
    return out + "}";
}

}  // namespace qloc
