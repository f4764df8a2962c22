#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "flexsum/aggregate.hpp"
#include "flexsum/experiments.hpp"

namespace flexsum::io
{

using nlohmann::json;

json to_json(const TclParams& p);
TclParams params_from_json(const json& j);

json to_json(const InnerApprox& apx);
InnerApprox approx_from_json(const json& j);

json to_json(const SamplerConfig& cfg);
SamplerConfig sampler_from_json(const json& j);

json to_json(const Homothet& h);

/// {version, seed, horizon, config, devices: [{device_id, params, approx}]}
json to_json(const Population& pop);

/// Devices are rebuilt from their parameters; stored approximations are kept as given (missing ones
/// are recomputed). Throws std::invalid_argument on structural problems, including no devices.
Population population_from_json(const json& j, unsigned jobs = 1);

json to_json(const TrackingResult& r);
json to_json(const SuiteReport& r);

/// Common header embedded in every emitted file.
json metadata(std::uint64_t seed, const json& config);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);

/// Two-column CSV with header "t,g_kW"; t must run 1..T.
Vec read_signal_csv(const std::filesystem::path& path);
std::string signal_csv(const Vec& g);

/// One row per cost entry, header "t,c"; a bare column of numbers is accepted too.
Vec read_cost_csv(const std::filesystem::path& path);

std::string records_csv(const std::vector<ExperimentRecord>& records);
std::string summary_csv(const std::vector<HorizonSummary>& rows);

/// t, target, gpoly, homothet, then one column per member profile of each method.
std::string tracking_csv(const TrackingComparison& cmp);

}  // namespace flexsum::io
