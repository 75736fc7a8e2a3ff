#pragma once

#include <cstdint>
#include <string>

namespace procex::testing {

struct RandomProcessOptions {
    int max_gateways = 6;
    int max_attributes = 5;
    int max_depth = 3;
};

/// DSL text of a random valid, block-structured process.
///
/// Gateway branches rejoin at the gateway's continuation, except in tail
/// position where every branch runs to its own end node. Each attribute is
/// read by at most one xor gateway, each guard reads an attribute at most once,
/// and every threshold lies strictly inside its attribute's bounds, so each
/// guard is neither constant true nor constant false. A gateway with no
/// attribute left to read becomes a choice gateway.
std::string random_process_text(std::uint64_t seed, const RandomProcessOptions& options = {});

}  // namespace procex::testing
