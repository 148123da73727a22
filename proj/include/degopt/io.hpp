#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "degopt/fields.hpp"
#include "degopt/optimizer.hpp"
#include "degopt/reduced.hpp"
#include "degopt/verification.hpp"

namespace degopt {

inline constexpr const char* kVersion = "degopt 0.1.0";

// FNV-1a, stable across platforms; used to stamp artifacts with the config.
std::uint64_t fnv1a(const std::string& bytes);
std::string hash_hex(const std::string& bytes);

// CSV columns: t,x,value. Doubles printed with %.17g so that identical runs
// produce byte-identical files.
void write_trajectory_csv(const std::string& path, const Mesh1D& mesh, const Trajectory& y);
void write_control_csv(const std::string& path, const Mesh1D& mesh, const ControlField& v);
void write_iteration_csv(const std::string& path, const std::vector<IterationRecord>& history);

std::string format_double(double v);

nlohmann::json to_json(const SSCReport& rep);
nlohmann::json to_json(const ActiveSetReport& rep);
nlohmann::json to_json(const CertificationRecord& rec);
nlohmann::json to_json(const CheckReport& rep);

void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace degopt
