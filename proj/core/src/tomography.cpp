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

#include "qloc/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

namespace qloc {

namespace {

// Relative slack for length comparisons so that sums taken in different orders
// do not flip a tie.
bool strictly_shorter(double a, double b) {
    if (b == kUnreachable) {
        return a != kUnreachable;
    }
    return a < b - 1e-12 * std::max(1.0, std::abs(b));
}

FaultSet set_difference(const FaultSet &a, const FaultSet &b) {
    FaultSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Floyd-Warshall tables keyed by the excluded edge set.
class TableCache {
   public:
    explicit TableCache(const Network &network) : network_(network) {}

    const ShortestPathTables &get(const FaultSet &excluded) {
        auto it = cache_.find(excluded);
        if (it == cache_.end()) {
            it = cache_.emplace(excluded, floyd_warshall_with_paths(network_, excluded)).first;
        }
        return it->second;
    }

   private:
    const Network &network_;
    std::map<FaultSet, ShortestPathTables> cache_;
};

std::optional<Probe> best_separating_probe(const Network &network, const FaultSet &first, const FaultSet &second,
                                           TableCache &cache) {
    std::optional<Probe> p1;
    std::optional<Probe> p2;
    FaultSet only_first = set_difference(first, second);
    FaultSet only_second = set_difference(second, first);
    if (!only_first.empty()) {
        p1 = find_opt_probe(network, only_first, cache.get(second));
    }
    if (!only_second.empty()) {
        p2 = find_opt_probe(network, only_second, cache.get(first));
    }
    if (p1.has_value() && p2.has_value()) {
        return strictly_shorter(p2->length(), p1->length()) ? p2 : p1;
    }
    return p1.has_value() ? p1 : p2;
}

IndistinguishablePairError indistinguishable(const Network &network, const FaultSet &a, const FaultSet &b) {
    return IndistinguishablePairError(a, b,
                                      "fault sets " + describe_fault_set(network, a) + " and " +
                                          describe_fault_set(network, b) + " cannot be distinguished by any probe");
}

}  // namespace

std::vector<std::size_t> ShortestPathTables::path(std::size_t i, std::size_t j) const {
    if (!reachable(i, j)) {
        return {};
    }
    std::vector<std::size_t> out{j};
    std::size_t cur = j;
    while (cur != i) {
        cur = predecessor(i, cur);
        out.push_back(cur);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

ShortestPathTables floyd_warshall_with_paths(const Network &network, const FaultSet &excluded_edges) {
    const std::size_t n = network.num_vertices();
    std::vector<double> dist(n * n, kUnreachable);
    std::vector<std::size_t> pred(n * n, ShortestPathTables::kNoPredecessor);
    for (std::size_t i = 0; i < n; i++) {
        dist[i * n + i] = 0.0;
    }
    for (EdgeId e = 0; e < network.num_edges(); e++) {
        if (std::binary_search(excluded_edges.begin(), excluded_edges.end(), e)) {
            continue;
        }
        const Edge &edge = network.edge(e);
        std::size_t u = network.index_of(edge.u);
        std::size_t v = network.index_of(edge.v);
        double w = network.edge_weight(e);
        dist[u * n + v] = w;
        dist[v * n + u] = w;
        pred[u * n + v] = u;
        pred[v * n + u] = v;
    }
    for (std::size_t k = 0; k < n; k++) {
        for (std::size_t i = 0; i < n; i++) {
            double dik = dist[i * n + k];
            if (dik == kUnreachable) {
                continue;
            }
            for (std::size_t j = 0; j < n; j++) {
                double candidate = dik + dist[k * n + j];
                if (candidate < dist[i * n + j]) {
                    dist[i * n + j] = candidate;
                    pred[i * n + j] = pred[k * n + j];
                }
            }
        }
    }
    return ShortestPathTables(n, std::move(dist), std::move(pred));
}

std::optional<Probe> find_opt_probe(const Network &network, const FaultSet &target_edges,
                                    const ShortestPathTables &tables) {
    double best_length = kUnreachable;
    std::vector<VertexId> best_walk;

    auto closest_monitor = [&](std::size_t vertex, bool towards_vertex) {
        double best = kUnreachable;
        std::size_t best_index = ShortestPathTables::kNoPredecessor;
        for (VertexId m : network.monitors()) {
            std::size_t mi = network.index_of(m);
            double d = towards_vertex ? tables.distance(mi, vertex) : tables.distance(vertex, mi);
            if (strictly_shorter(d, best)) {
                best = d;
                best_index = mi;
            }
        }
        return std::make_pair(best, best_index);
    };

    for (EdgeId e : target_edges) {
        const Edge &edge = network.edge(e);
        std::size_t u = network.index_of(edge.u);
        std::size_t v = network.index_of(edge.v);
        auto [du, mu] = closest_monitor(u, true);
        auto [dv, mv] = closest_monitor(v, false);
        if (du == kUnreachable || dv == kUnreachable) {
            continue;
        }
        double length = du + network.edge_weight(e) + dv;
        if (!strictly_shorter(length, best_length)) {
            continue;
        }
        best_length = length;
        best_walk.clear();
        for (std::size_t x : tables.path(mu, u)) {
            best_walk.push_back(network.vertices()[x]);
        }
        for (std::size_t x : tables.path(v, mv)) {
            best_walk.push_back(network.vertices()[x]);
        }
    }
    if (best_walk.empty()) {
        return std::nullopt;
    }
    return Probe::from_vertices(network, std::move(best_walk));
}

Probe find_probe(const Network &network, const FaultSet &first, const FaultSet &second) {
    FaultSet a = first;
    FaultSet b = second;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a == b) {
        throw std::invalid_argument("find_probe needs two distinct fault sets");
    }
    TableCache cache(network);
    auto probe = best_separating_probe(network, a, b, cache);
    if (!probe.has_value()) {
        throw indistinguishable(network, a, b);
    }
    return *std::move(probe);
}

std::vector<Probe> construct_probes(const Network &network, const FaultFamily &family) {
    FaultFamily ordered = family.canonical();
    auto members = ordered.members();
    TableCache cache(network);

    // tags[i] holds, per probe added so far, whether it crosses members[i].
    std::vector<std::vector<bool>> tags(members.size());
    std::vector<Probe> probes;
    for (std::size_t i = 0; i < members.size(); i++) {
        for (std::size_t j = i + 1; j < members.size(); j++) {
            if (members[i] == members[j] || tags[i] != tags[j]) {
                continue;
            }
            auto probe = best_separating_probe(network, members[i], members[j], cache);
            if (!probe.has_value()) {
                throw indistinguishable(network, members[i], members[j]);
            }
            for (std::size_t f = 0; f < members.size(); f++) {
                bool hit = std::any_of(members[f].begin(), members[f].end(),
                                       [&](EdgeId e) { return probe->traverses(e); });
                tags[f].push_back(hit);
            }
            probes.push_back(*std::move(probe));
        }
    }
    return probes;
}

SubfamilyFilter filter_identifiable_subfamily(const Network &network, const FaultFamily &family) {
    FaultFamily ordered = family.canonical();
    auto members = ordered.members();
    TableCache cache(network);
    std::vector<bool> dropped(members.size(), false);
    for (std::size_t i = 0; i < members.size(); i++) {
        if (dropped[i]) {
            continue;
        }
        for (std::size_t j = i + 1; j < members.size(); j++) {
            if (dropped[j]) {
                continue;
            }
            if (members[i] == members[j] ||
                !best_separating_probe(network, members[i], members[j], cache).has_value()) {
                dropped[j] = true;
            }
        }
    }
    SubfamilyFilter out;
    std::vector<FaultSet> kept;
    for (std::size_t i = 0; i < members.size(); i++) {
        (dropped[i] ? out.dropped : kept).push_back(members[i]);
    }
    out.kept = FaultFamily(network, std::move(kept));
    return out;
}

double brute_force_minmax(const Network &network, const FaultFamily &family, int walk_length_cap) {
    const std::size_t num_edges = network.num_edges();
    if (num_edges > 16) {
        throw std::invalid_argument("brute_force_minmax is limited to networks with at most 16 edges");
    }
    if (walk_length_cap < 1) {
        throw std::invalid_argument("walk_length_cap must be positive");
    }
    auto members = family.members();
    std::vector<std::uint32_t> fault_masks;
    for (const FaultSet &f : members) {
        std::uint32_t mask = 0;
        for (EdgeId e : f) {
            mask |= 1u << e;
        }
        fault_masks.push_back(mask);
    }
    bool anything_to_separate = false;
    for (std::size_t i = 0; i < fault_masks.size() && !anything_to_separate; i++) {
        for (std::size_t j = i + 1; j < fault_masks.size(); j++) {
            if (fault_masks[i] != fault_masks[j]) {
                anything_to_separate = true;
                break;
            }
        }
    }
    if (!anything_to_separate) {
        return 0.0;
    }

    // best[v][mask]: cheapest walk of at most s traversals that starts at a
    // monitor, ends at v and crosses exactly the edges in mask.
    const std::size_t n = network.num_vertices();
    const std::size_t num_masks = std::size_t{1} << num_edges;
    std::vector<double> best(n * num_masks, kUnreachable);
    for (VertexId m : network.monitors()) {
        best[network.index_of(m) * num_masks] = 0.0;
    }
    for (int step = 0; step < walk_length_cap; step++) {
        std::vector<double> next = best;
        for (std::size_t v = 0; v < n; v++) {
            for (std::size_t mask = 0; mask < num_masks; mask++) {
                double here = best[v * num_masks + mask];
                if (here == kUnreachable) {
                    continue;
                }
                for (const auto &[w, e] : network.incident(v)) {
                    std::size_t to = w * num_masks + (mask | (std::size_t{1} << e));
                    next[to] = std::min(next[to], here + network.edge_weight(e));
                }
            }
        }
        best = std::move(next);
    }

    std::vector<double> cheapest(num_masks, kUnreachable);
    for (VertexId m : network.monitors()) {
        std::size_t mi = network.index_of(m);
        for (std::size_t mask = 1; mask < num_masks; mask++) {
            cheapest[mask] = std::min(cheapest[mask], best[mi * num_masks + mask]);
        }
    }
    std::vector<double> levels;
    for (double c : cheapest) {
        if (c != kUnreachable) {
            levels.push_back(c);
        }
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    for (double limit : levels) {
        std::vector<std::vector<bool>> signatures;
        for (std::uint32_t fm : fault_masks) {
            std::vector<bool> sig;
            for (std::size_t mask = 1; mask < num_masks; mask++) {
                if (cheapest[mask] <= limit) {
                    sig.push_back((mask & fm) != 0);
                }
            }
            signatures.push_back(std::move(sig));
        }
        bool ok = true;
        for (std::size_t i = 0; i < signatures.size() && ok; i++) {
            for (std::size_t j = i + 1; j < signatures.size(); j++) {
                if (fault_masks[i] != fault_masks[j] && signatures[i] == signatures[j]) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) {
            return limit;
        }
    }
    throw CapExhaustedError("no set of walks with at most " + std::to_string(walk_length_cap) +
                            " traversals identifies the fault family");
}

double max_probe_length(std::span<const Probe> probes) {
    double out = 0.0;
    for (const Probe &p : probes) {
        out = std::max(out, p.length());
    }
    return out;
}

std::size_t max_probe_traversals(std::span<const Probe> probes) {
    std::size_t out = 0;
    for (const Probe &p : probes) {
        out = std::max(out, p.num_traversals());
    }
    return out;
}

}  // namespace qloc
