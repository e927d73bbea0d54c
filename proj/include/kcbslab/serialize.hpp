// JSON adapters (nlohmann) for the domain types, plus the CSV export of
// count tables and joint distributions.

#pragma once

#include "kcbslab/core.hpp"
#include "kcbslab/inequality.hpp"
#include "kcbslab/photonic.hpp"
#include "kcbslab/sequential.hpp"
#include "kcbslab/stochastic.hpp"

#include <json.hpp>

#include <string>

namespace kcbs {

using nlohmann::json;

json to_json(const StateVector& v);
StateVector state_from_json(const json& j);

json to_json(const Pentagram& p);
Pentagram pentagram_from_json(const json& j);

json to_json(const JointDistribution& jd);
json to_json(const BoundReport& r);
json to_json(const KcbsValue& v);
json to_json(const OptimizationResult& r);
json to_json(const NoiseModel& n);
NoiseModel noise_from_json(const json& j);
json to_json(const ShotPlan& p);
ShotPlan plan_from_json(const json& j);
json to_json(const Estimate& e);
json to_json(const CountTable& t);
json to_json(const WrightEstimate& e);
json to_json(const KcbsEstimate& e);
json to_json(const WrightExperimentReport& r);
json to_json(const KcbsExperimentReport& r);
json to_json(const photonic::MeasurementDevice& d);
json to_json(const photonic::FidelityTable& t);

// CSV rows "setting,outcome,count" (aggregated over samples).
std::string counts_to_csv(const CountTable& t);

// CSV rows "i,j,p_yy,p_yn,p_ny,p_nn,correlation".
std::string joints_to_csv(const std::array<JointDistribution, 5>& joints);

const char* order_name(Order order);
const char* method_name(ErrorMethod method);

}  // namespace kcbs
