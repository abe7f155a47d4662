#pragma once

#include "censadd/pipeline.hpp"
#include "censadd/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

namespace censadd {

using Json = nlohmann::ordered_json;

std::string library_version();

/// Reads a sample with header `x1,...,xd,z,delta` (column order free). Throws
/// InputError naming the missing column or the offending line.
CensoredSample read_sample_csv(std::istream& is);
CensoredSample read_sample_csv(const std::filesystem::path& path);
/// Shortest round-trip decimal form, so write-then-read reproduces the sample.
void write_sample_csv(std::ostream& os, const CensoredSample& sample);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

Json to_json(const Box& box);
Box box_from_json(const Json& j);
Json to_json(const PipelineConfig& config);
/// Reads a pipeline configuration for dimension d on top of `base`; absent
/// fields keep their values from `base`.
PipelineConfig pipeline_config_from_json(const Json& j, PipelineConfig base);
Json to_json(const TrueModel& model);
Json to_json(const SimulationConfig& config);
/// Starts from default_simulation(); psi's tau0 and centre follow the model
/// unless given. Throws InputError on unknown keys or invalid values.
SimulationConfig simulation_config_from_json(const Json& j);

/// Tuning choices and derived quantities needed to reproduce a run.
Json provenance(const PipelineConfig& config, const PipelineResult& result, const Json& extra = Json::object());
Json to_json(const TestReport& report);
Json to_json(const MonteCarloSummary& summary);

void write_json(std::ostream& os, const Json& j);

}  // namespace censadd
