#pragma once

#include <nlohmann/json.hpp>

#include "flowcouple/model.hpp"
#include "flowcouple/ordering.hpp"

namespace flowcouple {

nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const ClosureReport& report);
nlohmann::json to_json(const TailOrderReport& report);
nlohmann::json to_json(const MeanOrderReport& report);
nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const std::vector<FlowOrderViolation>& violations, const NetworkSpec& spec);

std::string to_string(ClosureVerdict verdict);
std::string to_string(OrderKind kind);

}  // namespace flowcouple
