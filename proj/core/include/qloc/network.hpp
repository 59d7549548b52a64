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

#ifndef QLOC_NETWORK_HPP
#define QLOC_NETWORK_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qloc {

using VertexId = std::int64_t;
using EdgeId = std::size_t;

/// Thrown when a network, probe or fault family violates its structural invariants.
class ValidationError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// An undirected optical link. Endpoints are stored with u < v.
struct Edge {
    VertexId u;
    VertexId v;
    double eta;  ///< transmissivity, strictly inside (0, 1)

    bool operator==(const Edge &) const = default;
};

/// Weighted undirected graph with per-link transmissivity and a monitor set.
///
/// Vertex ids are arbitrary non-negative integers; internally every vertex also
/// has a dense index in [0, num_vertices()) following ascending id order. Edge
/// ids are positions in edges(), in the order the edges were supplied.
/// Immutable after construction.
class Network {
   public:
    Network(std::vector<VertexId> vertices, std::vector<Edge> edges, std::vector<VertexId> monitors);

    std::span<const VertexId> vertices() const { return vertices_; }
    std::span<const Edge> edges() const { return edges_; }
    /// Sorted ascending.
    std::span<const VertexId> monitors() const { return monitors_; }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    bool has_vertex(VertexId v) const;
    bool is_monitor(VertexId v) const;
    /// Dense index of a vertex id; throws std::out_of_range for unknown ids.
    std::size_t index_of(VertexId v) const;

    std::optional<EdgeId> find_edge(VertexId a, VertexId b) const;
    /// Throws std::out_of_range naming the pair when no such edge exists.
    EdgeId edge_id(VertexId a, VertexId b) const;
    const Edge &edge(EdgeId e) const;

    /// Incident (neighbor, edge id) pairs of a vertex, by dense index.
    std::span<const std::pair<std::size_t, EdgeId>> incident(std::size_t vertex_index) const {
        return adjacency_[vertex_index];
    }

    /// -ln(eta_e), in nats.
    double edge_weight(EdgeId e) const;

    std::string edge_label(EdgeId e) const;

    bool operator==(const Network &other) const;

   private:
    std::vector<VertexId> vertices_;
    std::vector<Edge> edges_;
    std::vector<VertexId> monitors_;
    std::vector<std::vector<std::pair<std::size_t, EdgeId>>> adjacency_;
};

/// A walk v0, e1, v1, ..., ek, vk whose endpoints are monitors.
///
/// Length and transmissivity count every traversal, so an edge crossed twice
/// contributes twice.
class Probe {
   public:
    /// Validates incidence and monitor endpoints; edges are inferred from
    /// consecutive vertices. Throws ValidationError.
    static Probe from_vertices(const Network &network, std::vector<VertexId> walk);

    std::span<const VertexId> vertices() const { return vertices_; }
    /// Edge traversal sequence, one entry per step of the walk.
    std::span<const EdgeId> traversals() const { return traversals_; }
    /// (edge, traversal count) pairs sorted by edge id.
    std::span<const std::pair<EdgeId, int>> multiplicities() const { return multiplicities_; }

    int multiplicity(EdgeId e) const;
    bool traverses(EdgeId e) const { return multiplicity(e) > 0; }
    std::size_t num_traversals() const { return traversals_.size(); }

    /// l(P) = sum over traversals of -ln(eta_e).
    double length() const { return length_; }

    bool operator==(const Probe &other) const { return vertices_ == other.vertices_; }

   private:
    Probe() = default;

    std::vector<VertexId> vertices_;
    std::vector<EdgeId> traversals_;
    std::vector<std::pair<EdgeId, int>> multiplicities_;
    double length_ = 0.0;
};

/// A set of simultaneously faulty edges, kept sorted and duplicate free.
using FaultSet = std::vector<EdgeId>;

/// The family of fault sets a probe set must tell apart.
class FaultFamily {
   public:
    FaultFamily() = default;
    /// Normalizes each member (sort + dedupe) and checks edge ids against the network.
    FaultFamily(const Network &network, std::vector<FaultSet> faults);

    /// Every single edge plus the empty set; the configuration the detector runs with.
    static FaultFamily singletons_with_empty(const Network &network);

    std::span<const FaultSet> members() const { return faults_; }
    std::size_t size() const { return faults_.size(); }

    /// Same members, ordered by (cardinality, lexicographic edge ids).
    FaultFamily canonical() const;

   private:
    std::vector<FaultSet> faults_;
};

/// A drop of one link's transmissivity by a factor eta_d, applied per traversal.
struct LinkFault {
    EdgeId edge;
    double eta_d;
};

/// exp(-l(P)) times eta_d^m when the fault sits on an edge the probe crosses m times.
double probe_transmissivity(const Probe &probe, std::optional<LinkFault> fault = std::nullopt);

/// Indices of the probes that traverse e at least once.
std::vector<std::size_t> probes_covering(std::span<const Probe> probes, EdgeId e);

/// Indices of the probes that traverse any edge of the fault set.
std::vector<std::size_t> probes_covering(std::span<const Probe> probes, const FaultSet &faults);

struct IdentifiabilityReport {
    bool identifiable = true;
    /// First pair (family indices, i < j) with equal probe signatures.
    std::optional<std::pair<std::size_t, std::size_t>> conflict;
};

/// True iff every two distinct members of the family are hit by different probe subsets.
IdentifiabilityReport check_identifiable(std::span<const Probe> probes, const FaultFamily &family);

std::string describe_fault_set(const Network &network, const FaultSet &faults);

}  // namespace qloc

#endif
