#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmq/bootstrap.hpp"
#include "dmq/evt.hpp"
#include "dmq/geometry.hpp"
#include "dmq/quantile.hpp"

namespace dmq {

/// Comma-separated numeric table, one observation per line. Blank lines are ignored.
/// Throws DataError naming the row/column of ragged rows and non-numeric cells.
Sample parse_csv(const std::string& text, bool has_header = false);
Sample read_csv(const std::string& path, bool has_header = false);

/// Shortest text that reads back to the same double ("%.17g").
std::string format_double(double v);

void write_csv(std::ostream& os, const Sample& sample, const std::vector<std::string>& header = {});

nlohmann::json to_json(const TailFit& fit);
TailFit tail_fit_from_json(const nlohmann::json& j);

nlohmann::json to_json(const KSelection& sel);

nlohmann::json to_json(const QuantileSurface& surface);
QuantileSurface surface_from_json(const nlohmann::json& j);

/// One point per row: theta_*, angle_*, x_rotated_*, x_original_*, rho, floored.
std::string surface_to_csv(const QuantileSurface& surface);
std::vector<SurfacePoint> surface_points_from_csv(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace dmq
