#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "phasecrb/sweep.hpp"

namespace phasecrb {

inline constexpr std::string_view kCsvHeader = "x,y,label,jd,jd_stderr,seed";
inline constexpr int kSchemaVersion = 1;

/// Shortest decimal that round-trips to the same double; never locale dependent.
std::string format_double(double v);

/// Header line plus one row per (series, point). LF line endings.
std::string to_csv(const std::vector<BoundSeries>& series);

/// {"label", "x", "y", "jd", "jd_stderr"} per series; jd arrays align with x.
nlohmann::json to_json(const std::vector<BoundSeries>& series);

/// Writes via a temporary sibling file and rename, so readers never see a
/// partial file.
void write_atomically(const std::filesystem::path& path, std::string_view content);

}  // namespace phasecrb
