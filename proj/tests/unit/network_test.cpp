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

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "qloc/network.hpp"
#include "qloc/topologies.hpp"
#include "test_support.hpp"

namespace qloc {
namespace {

using boost::multiprecision::cpp_dec_float_50;

Network tiny_triangle() {
    return Network({0, 1, 2}, {{0, 1, 0.9}, {1, 2, 0.8}, {0, 2, 0.7}}, {0});
}

TEST(EdgeWeight, MatchesHighPrecisionLog) {
    Network net = build_line_topology(1, 0.9);
    cpp_dec_float_50 exact = -boost::multiprecision::log(cpp_dec_float_50("0.9"));
    // 0.9 is not representable; compare against the log of the stored double.
    cpp_dec_float_50 of_stored = -boost::multiprecision::log(cpp_dec_float_50(0.9));
    EXPECT_NEAR(net.edge_weight(0), of_stored.convert_to<double>(), 1e-16);
    EXPECT_NEAR(net.edge_weight(0), exact.convert_to<double>(), 1e-15);
    EXPECT_NEAR(net.edge_weight(0), 0.105360515657826, 1e-14);
}

TEST(EdgeWeight, InverseOfExponential) {
    Network net({0, 1}, {{0, 1, std::exp(-1.0)}}, {0, 1});
    EXPECT_DOUBLE_EQ(net.edge_weight(0), 1.0);
}

TEST(EdgeWeight, UnknownEdgeIsLookupError) {
    Network net = build_line_topology(2, 0.9);
    EXPECT_THROW(net.edge_weight(7), std::out_of_range);
    EXPECT_THROW(net.edge_id(0, 2), std::out_of_range);
}

TEST(NetworkValidation, RejectsDegenerateTransmissivity) {
    EXPECT_THROW(Network({0, 1}, {{0, 1, 1.0}}, {0}), ValidationError);
    EXPECT_THROW(Network({0, 1}, {{0, 1, 0.0}}, {0}), ValidationError);
    EXPECT_THROW(Network({0, 1}, {{0, 1, -0.2}}, {0}), ValidationError);
    EXPECT_THROW(Network({0, 1}, {{0, 1, std::numeric_limits<double>::quiet_NaN()}}, {0}), ValidationError);
}

TEST(NetworkValidation, RejectsStructuralDefects) {
    EXPECT_THROW(Network({0, 1}, {{0, 1, 0.9}}, {}), ValidationError);
    EXPECT_THROW(Network({0, 1}, {{0, 1, 0.9}}, {5}), ValidationError);
    EXPECT_THROW(Network({0, 0}, {}, {0}), ValidationError);
    EXPECT_THROW(Network({0, 1}, {{0, 0, 0.9}}, {0}), ValidationError);
    EXPECT_THROW(Network({0, 1}, {{0, 1, 0.9}, {1, 0, 0.8}}, {0}), ValidationError);
    EXPECT_THROW(Network({0, 1}, {{0, 3, 0.9}}, {0}), ValidationError);
}

TEST(NetworkValidation, UndirectedEdgesNormalize) {
    Network net({0, 1}, {{1, 0, 0.9}}, {0});
    EXPECT_EQ(net.edge(0).u, 0);
    EXPECT_EQ(net.edge(0).v, 1);
    EXPECT_EQ(net.edge_id(1, 0), net.edge_id(0, 1));
}

TEST(ProbeTransmissivity, EndToEndLineProbe) {
    Topology line = build_line5_scenario(0.9);
    EXPECT_NEAR(probe_transmissivity(line.probes[4]), 0.59049, 1e-15);
}

TEST(ProbeTransmissivity, LoopBackUnderFaultCountsBothTraversals) {
    Topology line = build_line5_scenario(0.9);
    EdgeId e12 = line.network.edge_id(1, 2);
    double got = probe_transmissivity(line.probes[1], LinkFault{e12, 0.95});
    EXPECT_NEAR(got, std::pow(0.9, 4) * 0.95 * 0.95, 1e-15);
}

TEST(ProbeTransmissivity, OffPathFaultChangesNothing) {
    Topology line = build_line5_scenario(0.9);
    EdgeId e34 = line.network.edge_id(3, 4);
    EXPECT_EQ(probe_transmissivity(line.probes[0], LinkFault{e34, 0.5}), probe_transmissivity(line.probes[0]));
}

TEST(ProbeTransmissivity, RejectsBadDropFactor) {
    Topology line = build_line5_scenario(0.9);
    EXPECT_THROW(probe_transmissivity(line.probes[0], LinkFault{0, 1.5}), std::invalid_argument);
    EXPECT_THROW(probe_transmissivity(line.probes[0], LinkFault{0, 0.0}), std::invalid_argument);
}

TEST(Probe, RejectsInvalidWalks) {
    Network net = build_line_topology(3, 0.9);
    EXPECT_THROW(Probe::from_vertices(net, {0}), ValidationError);
    EXPECT_THROW(Probe::from_vertices(net, {0, 2, 3}), ValidationError);
    EXPECT_THROW(Probe::from_vertices(net, {0, 1, 2}), ValidationError);
    EXPECT_THROW(Probe::from_vertices(net, {1, 0}), ValidationError);
    EXPECT_THROW(Probe::from_vertices(net, {0, 9}), ValidationError);
}

TEST(Probe, MultisetLengthAndMultiplicities) {
    Network net = build_line_topology(3, 0.9);
    Probe p = Probe::from_vertices(net, {0, 1, 2, 1, 0});
    EXPECT_EQ(p.num_traversals(), 4u);
    EXPECT_EQ(p.multiplicity(net.edge_id(0, 1)), 2);
    EXPECT_EQ(p.multiplicity(net.edge_id(1, 2)), 2);
    EXPECT_EQ(p.multiplicity(net.edge_id(2, 3)), 0);
    EXPECT_NEAR(p.length(), -4 * std::log(0.9), 1e-15);
}

TEST(ProbesCovering, LineScenarioSets) {
    Topology line = build_line5_scenario(0.9);
    EXPECT_EQ(probes_covering(line.probes, line.network.edge_id(1, 2)), (std::vector<std::size_t>{1, 4}));
    EXPECT_EQ(probes_covering(line.probes, line.network.edge_id(0, 1)), (std::vector<std::size_t>{0, 1, 4}));
    EXPECT_EQ(probes_covering(line.probes, line.network.edge_id(2, 3)), (std::vector<std::size_t>{4}));
    EXPECT_EQ(probes_covering(line.probes, line.network.edge_id(3, 4)), (std::vector<std::size_t>{3, 4}));
    EXPECT_EQ(probes_covering(line.probes, line.network.edge_id(4, 5)), (std::vector<std::size_t>{2, 3, 4}));
    EXPECT_TRUE(probes_covering(std::span<const Probe>{}, 0).empty());
}

TEST(CheckIdentifiable, LineScenarioIsIdentifiable) {
    Topology line = build_line5_scenario(0.9);
    auto family = FaultFamily::singletons_with_empty(line.network);
    EXPECT_TRUE(check_identifiable(line.probes, family).identifiable);
}

TEST(CheckIdentifiable, SingleEndToEndProbeIsNot) {
    Topology line = build_line5_scenario(0.9);
    std::vector<Probe> only{line.probes[4]};
    auto family = FaultFamily::singletons_with_empty(line.network);
    auto report = check_identifiable(only, family);
    ASSERT_FALSE(report.identifiable);
    // Member 0 is the empty set; members 1 and 2 are {(0,1)} and {(1,2)}.
    EXPECT_EQ(report.conflict, (std::pair<std::size_t, std::size_t>{1, 2}));
}

TEST(CheckIdentifiable, SingleMemberFamilyIsVacuous) {
    Topology line = build_line5_scenario(0.9);
    FaultFamily family(line.network, {{2}});
    EXPECT_TRUE(check_identifiable(std::span<const Probe>{}, family).identifiable);
}

TEST(CheckIdentifiable, AgreesWithSignatureEnumeration) {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 100; ++round) {
        Network net = testing::random_connected_network(rng, 6, 2, 3);
        std::vector<Probe> probes;
        // Random monitor-to-monitor walks.
        auto monitors = net.monitors();
        std::uniform_int_distribution<std::size_t> pick_monitor(0, monitors.size() - 1);
        for (int k = 0; k < 3; ++k) {
            std::vector<VertexId> walk{monitors[pick_monitor(rng)]};
            for (int step = 0; step < 8; ++step) {
                auto inc = net.incident(net.index_of(walk.back()));
                walk.push_back(net.vertices()[inc[rng() % inc.size()].first]);
                if (step >= 1 && net.is_monitor(walk.back())) break;
            }
            if (net.is_monitor(walk.back())) probes.push_back(Probe::from_vertices(net, walk));
        }
        auto family = FaultFamily::singletons_with_empty(net);
        EXPECT_EQ(check_identifiable(probes, family).identifiable, testing::signatures_distinct(probes, family));
    }
}

TEST(FaultFamily, NormalizesAndValidates) {
    Network net = build_line_topology(3, 0.9);
    FaultFamily family(net, {{2, 0, 2}, {}});
    EXPECT_EQ(family.members()[0], (FaultSet{0, 2}));
    EXPECT_THROW(FaultFamily(net, {{5}}), ValidationError);
    auto canon = family.canonical();
    EXPECT_TRUE(canon.members()[0].empty());
}

TEST(FaultFamily, SingletonsWithEmptyPutsEmptyFirst) {
    Network net = build_line_topology(3, 0.9);
    auto family = FaultFamily::singletons_with_empty(net);
    ASSERT_EQ(family.size(), 4u);
    EXPECT_TRUE(family.members()[0].empty());
    EXPECT_EQ(family.members()[3], (FaultSet{2}));
}

TEST(LineTopology, Shapes) {
    Network one = build_line_topology(1, 0.9);
    EXPECT_EQ(one.num_edges(), 1u);
    EXPECT_TRUE(one.is_monitor(0));
    EXPECT_TRUE(one.is_monitor(1));
    Network two = build_line_topology(2, 0.9);
    EXPECT_EQ(two.num_vertices(), 3u);
    EXPECT_EQ(std::vector<VertexId>(two.monitors().begin(), two.monitors().end()), (std::vector<VertexId>{0, 2}));
    EXPECT_THROW(build_line_topology(0, 0.9), std::invalid_argument);
}

TEST(FatTree, EdgeAndProbeCountsAndIdentifiability) {
    Topology ft = build_fattree_topology(0.9);
    EXPECT_EQ(ft.network.num_vertices(), 36u);
    EXPECT_EQ(ft.network.num_edges(), 48u);
    EXPECT_EQ(ft.network.monitors().size(), 16u);
    ASSERT_EQ(ft.probes.size(), 48u);
    auto family = FaultFamily::singletons_with_empty(ft.network);
    EXPECT_TRUE(check_identifiable(ft.probes, family).identifiable);
    EXPECT_TRUE(testing::signatures_distinct(ft.probes, family));
    std::size_t loops_of_six = 0;
    for (const Probe &p : ft.probes) {
        EXPECT_EQ(p.vertices().front(), p.vertices().back());
        EXPECT_LE(p.num_traversals(), 6u);
        loops_of_six += p.num_traversals() == 6 ? 1 : 0;
    }
    EXPECT_EQ(loops_of_six, 16u);
}

TEST(FatTree, EveryTierHasTheExpectedDegree) {
    Topology ft = build_fattree_topology(0.9);
    for (VertexId v = 0; v < 16; ++v) EXPECT_EQ(ft.network.incident(ft.network.index_of(v)).size(), 1u);
    for (VertexId v = 16; v < 24; ++v) EXPECT_EQ(ft.network.incident(ft.network.index_of(v)).size(), 4u);
    for (VertexId v = 24; v < 32; ++v) EXPECT_EQ(ft.network.incident(ft.network.index_of(v)).size(), 4u);
    for (VertexId v = 32; v < 36; ++v) EXPECT_EQ(ft.network.incident(ft.network.index_of(v)).size(), 4u);
}

TEST(Builders, AreDeterministic) {
    EXPECT_EQ(build_fattree_topology(0.9).network, build_fattree_topology(0.9).network);
    EXPECT_EQ(build_fattree_topology(0.9).probes, build_fattree_topology(0.9).probes);
    EXPECT_EQ(build_line5_scenario(0.8).probes, build_line5_scenario(0.8).probes);
    EXPECT_THROW(build_preset("ring9", 0.9), std::invalid_argument);
}

TEST(ProbeProperties, LengthMatchesTransmissivityOnRandomWalks) {
    Topology ft = build_fattree_topology(0.87);
    for (const Probe &p : ft.probes) {
        EXPECT_LE(testing::rel_err(std::exp(-p.length()), probe_transmissivity(p)), 1e-12);
        double sum = 0.0;
        for (const auto &[e, m] : p.multiplicities()) sum += m * ft.network.edge_weight(e);
        EXPECT_LE(testing::rel_err(sum, p.length()), 1e-12);
        for (EdgeId e = 0; e < ft.network.num_edges(); ++e) {
            auto cover = probes_covering(std::span<const Probe>(&p, 1), e);
            EXPECT_EQ(!cover.empty(), p.multiplicity(e) >= 1);
        }
    }
}

TEST(DescribeFaultSet, Labels) {
    Network net = tiny_triangle();
    EXPECT_EQ(describe_fault_set(net, {}), "{}");
    EXPECT_EQ(describe_fault_set(net, {0, 2}), "{(0,1),(0,2)}");
}

}  // namespace
}  // namespace qloc
