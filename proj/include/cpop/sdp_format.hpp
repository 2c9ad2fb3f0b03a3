#pragma once

#include <string>

#include <json.hpp>

#include "cpop/sdp.hpp"
#include "cpop/sdp_problem.hpp"

namespace cpop {

// Interchange format, see docs/sdp-format.md. Indices are 0-based.
nlohmann::json sdp_to_json(const SdpProblem& sdp);
SdpProblem sdp_from_json(const nlohmann::json& j);

nlohmann::json solution_to_json(const SdpSolution& sol);
// Block dual sizes are checked against `sdp`. Throws ParseError.
SdpSolution solution_from_json(const nlohmann::json& j, const SdpProblem& sdp);

SdpStatus status_from_string(const std::string& s);

}  // namespace cpop
