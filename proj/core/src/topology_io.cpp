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

#include "qloc/topology_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

namespace qloc {

namespace {

std::vector<std::string> tokenize(const std::string &line) {
    std::vector<std::string> tokens;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        tokens.push_back(tok);
    }
    return tokens;
}

VertexId parse_vertex(const std::string &tok, std::size_t line) {
    VertexId value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || value < 0) {
        throw ParseError(line, "invalid node id '" + tok + "'");
    }
    return value;
}

double parse_eta(const std::string &tok, std::size_t line) {
    double value = 0;
    try {
        size_t used = 0;
        value = std::stod(tok, &used);
        if (used != tok.size()) {
            throw std::invalid_argument(tok);
        }
    } catch (const std::exception &) {
        throw ParseError(line, "invalid transmissivity '" + tok + "'");
    }
    if (!(value > 0.0 && value < 1.0)) {
        throw ParseError(line, "transmissivity " + tok + " outside (0,1)");
    }
    return value;
}

struct PendingProbe {
    std::size_t line;
    std::vector<VertexId> walk;
};

}  // namespace

ParseError::ParseError(std::size_t line, const std::string &message)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

Topology parse_topology(std::istream &in) {
    std::vector<VertexId> vertices;
    std::set<VertexId> declared;
    std::vector<VertexId> monitors;
    std::vector<Edge> edges;
    std::set<std::pair<VertexId, VertexId>> seen_edges;
    std::vector<PendingProbe> pending;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        line_no++;
        auto hash = raw.find('#');
        if (hash != std::string::npos) {
            raw.resize(hash);
        }
        auto tokens = tokenize(raw);
        if (tokens.empty()) {
            continue;
        }
        const std::string &kw = tokens[0];
        if (kw == "node") {
            if (tokens.size() < 2 || tokens.size() > 3) {
                throw ParseError(line_no, "expected 'node <id> [monitor]'");
            }
            VertexId v = parse_vertex(tokens[1], line_no);
            if (!declared.insert(v).second) {
                throw ParseError(line_no, "node " + tokens[1] + " declared twice");
            }
            vertices.push_back(v);
            if (tokens.size() == 3) {
                if (tokens[2] != "monitor") {
                    throw ParseError(line_no, "unexpected node attribute '" + tokens[2] + "'");
                }
                monitors.push_back(v);
            }
        } else if (kw == "edge") {
            if (tokens.size() != 4) {
                throw ParseError(line_no, "expected 'edge <u> <v> <eta>'");
            }
            VertexId u = parse_vertex(tokens[1], line_no);
            VertexId v = parse_vertex(tokens[2], line_no);
            for (VertexId x : {u, v}) {
                if (!declared.contains(x)) {
                    throw ParseError(line_no, "edge references undeclared node " + std::to_string(x));
                }
            }
            if (u == v) {
                throw ParseError(line_no, "self-loop on node " + std::to_string(u));
            }
            if (!seen_edges.insert({std::min(u, v), std::max(u, v)}).second) {
                throw ParseError(line_no, "duplicate edge " + tokens[1] + "-" + tokens[2]);
            }
            edges.push_back({u, v, parse_eta(tokens[3], line_no)});
        } else if (kw == "probe") {
            if (tokens.size() < 3) {
                throw ParseError(line_no, "a probe needs at least two nodes");
            }
            PendingProbe p{line_no, {}};
            for (size_t i = 1; i < tokens.size(); i++) {
                VertexId v = parse_vertex(tokens[i], line_no);
                if (!declared.contains(v)) {
                    throw ParseError(line_no, "probe references undeclared node " + tokens[i]);
                }
                p.walk.push_back(v);
            }
            pending.push_back(std::move(p));
        } else {
            throw ParseError(line_no, "unknown keyword '" + kw + "'");
        }
    }

    if (monitors.empty()) {
        throw ParseError(line_no, "no monitor nodes declared");
    }
    Network network(std::move(vertices), std::move(edges), std::move(monitors));

    std::vector<Probe> probes;
    for (auto &p : pending) {
        try {
            probes.push_back(Probe::from_vertices(network, std::move(p.walk)));
        } catch (const ValidationError &ex) {
            throw ParseError(p.line, ex.what());
        }
    }
    return Topology{std::move(network), std::move(probes)};
}

Topology parse_topology(const std::string &text) {
    std::istringstream in(text);
    return parse_topology(in);
}

Topology read_topology_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open topology file '" + path + "'");
    }
    return parse_topology(in);
}

void write_topology(std::ostream &out, const Network &network, std::span<const Probe> probes) {
    for (VertexId v : network.vertices()) {
        out << "node " << v;
        if (network.is_monitor(v)) {
            out << " monitor";
        }
        out << "\n";
    }
    char buf[32];
    for (const Edge &e : network.edges()) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), e.eta);
        out << "edge " << e.u << " " << e.v << " " << std::string(buf, end) << "\n";
    }
    write_probes(out, probes);
}

void write_probes(std::ostream &out, std::span<const Probe> probes) {
    for (const Probe &p : probes) {
        out << "probe";
        for (VertexId v : p.vertices()) {
            out << " " << v;
        }
        out << "\n";
    }
}

}  // namespace qloc
