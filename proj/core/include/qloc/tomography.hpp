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

#ifndef QLOC_TOMOGRAPHY_HPP
#define QLOC_TOMOGRAPHY_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qloc/network.hpp"

namespace qloc {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

/// All-pairs shortest distances (nats) and penultimate-vertex table, indexed by
/// dense vertex index. Unreachable pairs carry kUnreachable and no predecessor.
class ShortestPathTables {
   public:
    static constexpr std::size_t kNoPredecessor = std::numeric_limits<std::size_t>::max();

    ShortestPathTables(std::size_t n, std::vector<double> dist, std::vector<std::size_t> pred)
        : n_(n), dist_(std::move(dist)), pred_(std::move(pred)) {}

    std::size_t size() const { return n_; }
    double distance(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
    std::size_t predecessor(std::size_t i, std::size_t j) const { return pred_[i * n_ + j]; }
    bool reachable(std::size_t i, std::size_t j) const { return dist_[i * n_ + j] != kUnreachable; }

    /// Dense vertex indices from i to j inclusive; empty when unreachable.
    std::vector<std::size_t> path(std::size_t i, std::size_t j) const;

   private:
    std::size_t n_;
    std::vector<double> dist_;
    std::vector<std::size_t> pred_;
};

/// Floyd-Warshall with path reconstruction on the network minus excluded_edges.
ShortestPathTables floyd_warshall_with_paths(const Network &network, const FaultSet &excluded_edges = {});

/// Shortest probe crossing at least one target edge, built as
/// monitor ~> u -> v ~> monitor from the tables. The tables must come from the
/// subgraph the probe is allowed to use. Ties are broken by (length, edge id,
/// monitor ids) ascending. Returns nullopt when no candidate has finite length.
std::optional<Probe> find_opt_probe(const Network &network, const FaultSet &target_edges,
                                    const ShortestPathTables &tables);

/// Raised when a pair of fault sets cannot be told apart by any probe.
class IndistinguishablePairError : public std::runtime_error {
   public:
    IndistinguishablePairError(FaultSet first, FaultSet second, const std::string &message)
        : std::runtime_error(message), first_(std::move(first)), second_(std::move(second)) {}
    const FaultSet &first() const { return first_; }
    const FaultSet &second() const { return second_; }

   private:
    FaultSet first_;
    FaultSet second_;
};

/// Shortest probe that is hit by exactly one of the two fault sets: either it
/// crosses first\second while avoiding second, or the mirror case. The first
/// case wins ties.
Probe find_probe(const Network &network, const FaultSet &first, const FaultSet &second);

/// Builds a probe set that distinguishes every pair in the family and minimizes
/// the longest probe. Pairs are visited in canonical order (fault sets sorted by
/// cardinality then edge ids, pairs lexicographic), so the output is
/// deterministic. Throws IndistinguishablePairError for the first pair no probe
/// can separate.
std::vector<Probe> construct_probes(const Network &network, const FaultFamily &family);

struct SubfamilyFilter {
    FaultFamily kept;
    /// Members removed because some earlier member cannot be told apart from them.
    std::vector<FaultSet> dropped;
};

/// Drops the later member of every indistinguishable pair (canonical order), so
/// that construct_probes succeeds on `kept`.
SubfamilyFilter filter_identifiable_subfamily(const Network &network, const FaultFamily &family);

/// Raised by brute_force_minmax when no walk set within the cap identifies the family.
class CapExhaustedError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Exhaustive reference for the min-max probe length.
///
/// Enumerates every monitor-to-monitor walk of at most walk_length_cap
/// traversals (collapsed to the cheapest walk per covered edge set), then finds
/// the smallest length L such that the walks no longer than L identify the
/// family. Intended for tiny graphs (at most 20 edges).
double brute_force_minmax(const Network &network, const FaultFamily &family, int walk_length_cap);

double max_probe_length(std::span<const Probe> probes);
std::size_t max_probe_traversals(std::span<const Probe> probes);

}  // namespace qloc

#endif
