#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "apfnet/scenario.hpp"

namespace apfnet {

// Scenario documents are JSON objects with exactly the keys
//   ego {pos, vel}, goal, obstacles [{pos, vel, radius}], road_halfwidth,
//   horizon_steps, dt
// A suite is a JSON array of such documents. Unknown keys are rejected.
Scenario parse_scenario(std::string_view json_text);

// Accepts either a single scenario document or a suite array. Errors name
// the offending scenario index.
std::vector<Scenario> parse_suite(std::string_view json_text);
std::vector<Scenario> load_suite(const std::filesystem::path& path);

std::string dump_scenario(const Scenario& s);
std::string dump_suite(const std::vector<Scenario>& suite);
void save_suite(const std::filesystem::path& path, const std::vector<Scenario>& suite);

// Whole-file helpers shared by the writers in this library.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace apfnet
