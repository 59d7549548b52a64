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

#ifndef QLOC_TOPOLOGIES_HPP
#define QLOC_TOPOLOGIES_HPP

#include <string_view>
#include <vector>

#include "qloc/network.hpp"

namespace qloc {

/// A network together with a probe set routed over it.
struct Topology {
    Network network;
    std::vector<Probe> probes;
};

/// Path graph 0-1-...-num_links with uniform transmissivity; monitors at both ends.
Network build_line_topology(int num_links, double eta);

/// The five-link line with its five hand-routed probes, in this order:
/// 0-1-0, 0-1-2-1-0, 5-4-5, 5-4-3-4-5, 0-1-2-3-4-5.
Topology build_line5_scenario(double eta);

/// 48-link three-tier fat-tree with 16 edge-layer monitors (0-15), tier-1
/// switches 16-23, tier-2 switches 24-31 and core switches 32-35, plus 48
/// loop-back probes: for every monitor a length-6 loop through a core switch and
/// the nested length-2 and length-4 loops that share its first hops.
Topology build_fattree_topology(double eta);

/// "line5" or "fattree3"; throws std::invalid_argument otherwise.
Topology build_preset(std::string_view name, double eta);

}  // namespace qloc

#endif
