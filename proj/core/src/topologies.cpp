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

#include "qloc/topologies.hpp"

#include <stdexcept>
#include <string>

namespace qloc {

Network build_line_topology(int num_links, double eta) {
    if (num_links < 1) {
        throw std::invalid_argument("line topology needs at least one link");
    }
    std::vector<VertexId> vertices;
    std::vector<Edge> edges;
    for (int i = 0; i <= num_links; i++) {
        vertices.push_back(i);
    }
    for (int i = 0; i < num_links; i++) {
        edges.push_back({i, i + 1, eta});
    }
    return Network(std::move(vertices), std::move(edges), {0, num_links});
}

Topology build_line5_scenario(double eta) {
    Network network = build_line_topology(5, eta);
    std::vector<Probe> probes;
    probes.push_back(Probe::from_vertices(network, {0, 1, 0}));
    probes.push_back(Probe::from_vertices(network, {0, 1, 2, 1, 0}));
    probes.push_back(Probe::from_vertices(network, {5, 4, 5}));
    probes.push_back(Probe::from_vertices(network, {5, 4, 3, 4, 5}));
    probes.push_back(Probe::from_vertices(network, {0, 1, 2, 3, 4, 5}));
    return Topology{std::move(network), std::move(probes)};
}

Topology build_fattree_topology(double eta) {
    std::vector<VertexId> vertices;
    for (VertexId v = 0; v < 36; v++) {
        vertices.push_back(v);
    }
    std::vector<Edge> edges;
    // Edge layer: two monitors per tier-1 switch.
    for (VertexId i = 0; i < 16; i++) {
        edges.push_back({i, 16 + i / 2, eta});
    }
    // Each pod fully connects its two tier-1 and two tier-2 switches.
    for (VertexId pod = 0; pod < 4; pod++) {
        VertexId a = 16 + 2 * pod;
        VertexId s = 24 + 2 * pod;
        for (VertexId agg : {a, a + 1}) {
            for (VertexId spine : {s, s + 1}) {
                edges.push_back({agg, spine, eta});
            }
        }
    }
    // Even tier-2 switches reach cores 32/33, odd ones reach 34/35.
    for (VertexId spine = 24; spine < 32; spine += 2) {
        edges.push_back({spine, 32, eta});
        edges.push_back({spine, 33, eta});
    }
    for (VertexId spine = 25; spine < 32; spine += 2) {
        edges.push_back({spine, 34, eta});
        edges.push_back({spine, 35, eta});
    }
    std::vector<VertexId> monitors;
    for (VertexId i = 0; i < 16; i++) {
        monitors.push_back(i);
    }
    Network network(std::move(vertices), std::move(edges), std::move(monitors));

    // Outbound half of each length-6 loop: monitor, tier-1, tier-2, core.
    std::vector<std::vector<VertexId>> routes;
    for (VertexId i = 0; i < 8; i += 2) {
        routes.push_back({2 * i, i + 16, i + 24, 32});
        routes.push_back({2 * i + 1, i + 16, i + 25, 34});
    }
    for (VertexId i = 1; i < 8; i += 2) {
        routes.push_back({2 * i, i + 16, i + 23, 33});
        routes.push_back({2 * i + 1, i + 16, i + 24, 35});
    }

    auto loop_back = [](const std::vector<VertexId> &route, size_t hops) {
        std::vector<VertexId> walk(route.begin(), route.begin() + static_cast<std::ptrdiff_t>(hops) + 1);
        for (size_t k = hops; k-- > 0;) {
            walk.push_back(route[k]);
        }
        return walk;
    };

    std::vector<Probe> probes;
    for (size_t hops : {3, 2, 1}) {
        for (const auto &route : routes) {
            probes.push_back(Probe::from_vertices(network, loop_back(route, hops)));
        }
    }
    return Topology{std::move(network), std::move(probes)};
}

Topology build_preset(std::string_view name, double eta) {
    if (name == "line5") {
        return build_line5_scenario(eta);
    }
    if (name == "fattree3") {
        return build_fattree_topology(eta);
    }
    throw std::invalid_argument("unknown scenario preset '" + std::string(name) + "' (expected line5 or fattree3)");
}

}  // namespace qloc
