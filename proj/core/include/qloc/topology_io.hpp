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

// Line-oriented topology text format:
//
//   # comment
//   node <id> [monitor]
//   edge <u> <v> <eta>
//   probe <v0> <v1> ... <vk>
//
// Parsing is strict. Unknown keywords, references to undeclared nodes, invalid
// transmissivities and probes that do not start and end at monitors are all
// reported as ParseError with the offending line number.

#ifndef QLOC_TOPOLOGY_IO_HPP
#define QLOC_TOPOLOGY_IO_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>

#include "qloc/network.hpp"
#include "qloc/topologies.hpp"

namespace qloc {

class ParseError : public std::runtime_error {
   public:
    ParseError(std::size_t line, const std::string &message);
    std::size_t line() const { return line_; }

   private:
    std::size_t line_;
};

Topology parse_topology(std::istream &in);
Topology parse_topology(const std::string &text);
Topology read_topology_file(const std::string &path);

/// Writes node, edge and probe records. Transmissivities round-trip exactly.
void write_topology(std::ostream &out, const Network &network, std::span<const Probe> probes);
void write_probes(std::ostream &out, std::span<const Probe> probes);

}  // namespace qloc

#endif
