#pragma once

#include <iosfwd>

#include "netcode/network.hpp"

namespace netcode {

// Line-oriented network description. '#' starts a comment. Section order is
// fixed: field, dim, node, source, link, {coef,zero,channel}, sink.
//
//   field GF(2)
//   dim 1
//   node a b c
//   source s1 @ a
//   link l1 a c
//   coef l1 s1 1
//   zero l9
//   channel l3 symmetric 0.1
//   sink t1 observes l5 l8
Network parse_network(std::istream& in);
Network parse_network_file(const std::string& path);

// Observation lines: `obs l5 = 1,0`. The sink is inferred from the observed
// links' head node.
Observation parse_observations(std::istream& in, const Network& net);
Observation parse_observations_file(const std::string& path, const Network& net);

// Source value lines: `src s1 = 1,0`.
std::map<std::string, FVector> parse_sources(std::istream& in, const Network& net);
std::map<std::string, FVector> parse_sources_file(const std::string& path, const Network& net);

} // namespace netcode
