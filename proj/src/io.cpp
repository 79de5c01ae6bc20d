#include "dmq/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dmq/error.hpp"

namespace dmq {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) cells.push_back(cell);
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& cell, double& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return errno == 0 && end == t.c_str() + t.size();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return lines;
}

Vector to_vector(const nlohmann::json& arr) {
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

nlohmann::json to_array(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace

Sample parse_csv(const std::string& text, bool has_header) {
  const auto lines = lines_of(text);
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  bool header_pending = has_header;
  for (std::size_t li = 0; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto cells = split(lines[li], ',');
    const std::size_t row_no = li + 1;
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw DataError("ragged row at row " + std::to_string(row_no) + ": expected " +
                      std::to_string(width) + " columns, found " + std::to_string(cells.size()));
    }
    std::vector<double> row(width);
    for (std::size_t c = 0; c < width; ++c) {
      if (!parse_number(cells[c], row[c])) {
        throw DataError("non-numeric cell at row " + std::to_string(row_no) + ", column " +
                        std::to_string(c + 1) + ": '" + trim(cells[c]) + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  Sample out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

Sample read_csv(const std::string& path, bool has_header) {
  return parse_csv(read_text_file(path), has_header);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const Sample& sample, const std::vector<std::string>& header) {
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  if (!header.empty()) os << '\n';
  for (Eigen::Index i = 0; i < sample.rows(); ++i) {
    for (Eigen::Index j = 0; j < sample.cols(); ++j) os << (j ? "," : "") << format_double(sample(i, j));
    os << '\n';
  }
}

nlohmann::json to_json(const TailFit& fit) {
  return {{"k", fit.k},
          {"n", fit.n},
          {"gamma_marginal", fit.gamma_marginal},
          {"gamma", fit.gamma},
          {"a", fit.a},
          {"b", fit.b}};
}

TailFit tail_fit_from_json(const nlohmann::json& j) {
  TailFit fit;
  fit.k = j.at("k").get<std::size_t>();
  fit.n = j.at("n").get<std::size_t>();
  fit.gamma_marginal = j.at("gamma_marginal").get<std::vector<double>>();
  fit.gamma = j.at("gamma").get<double>();
  fit.a = j.at("a").get<std::vector<double>>();
  fit.b = j.at("b").get<std::vector<double>>();
  return fit;
}

nlohmann::json to_json(const KSelection& sel) {
  return {{"k_hat", sel.k_hat},       {"n", sel.n},
          {"m1", sel.m1},             {"m2", sel.m2},
          {"epsilon", sel.epsilon},   {"B1", sel.b1},
          {"seed", sel.seed},         {"k_j_m1", sel.k_j_m1},
          {"k_j_m2", sel.k_j_m2},     {"pi_j", sel.pi_j},
          {"correction", sel.correction}, {"k_raw", sel.k_raw},
          {"fallback", sel.fallback}, {"warnings", sel.warnings}};
}

nlohmann::json to_json(const QuantileSurface& s) {
  nlohmann::json j;
  j["source"] = s.source;
  j["alpha"] = s.alpha;
  j["direction"] = to_array(s.direction);
  j["k"] = s.k;
  j["gamma"] = s.gamma;
  j["center"] = to_array(s.center);
  if (s.fit) j["fit"] = to_json(*s.fit);
  if (s.selection) j["selection"] = to_json(*s.selection);
  auto pts = nlohmann::json::array();
  for (const auto& p : s.points) {
    pts.push_back({{"theta", to_array(p.theta)},
                   {"angles", p.angles},
                   {"x_rotated", to_array(p.x_rotated)},
                   {"x_original", to_array(p.x_original)},
                   {"rho", p.rho},
                   {"floored", p.floored}});
  }
  j["points"] = std::move(pts);
  j["warnings"] = s.warnings;
  return j;
}

QuantileSurface surface_from_json(const nlohmann::json& j) {
  QuantileSurface s;
  s.source = j.value("source", std::string("estimate"));
  s.alpha = j.at("alpha").get<double>();
  s.direction = to_vector(j.at("direction"));
  s.k = j.at("k").get<std::size_t>();
  s.gamma = j.at("gamma").get<double>();
  s.center = j.contains("center") ? to_vector(j["center"]) : Vector::Zero(s.direction.size());
  if (j.contains("fit")) s.fit = tail_fit_from_json(j["fit"]);
  for (const auto& p : j.at("points")) {
    SurfacePoint sp;
    sp.theta = to_vector(p.at("theta"));
    sp.angles = p.value("angles", std::vector<double>{});
    sp.x_rotated = to_vector(p.at("x_rotated"));
    sp.x_original = to_vector(p.at("x_original"));
    sp.rho = p.at("rho").get<double>();
    sp.floored = p.at("floored").get<bool>();
    s.points.push_back(std::move(sp));
  }
  if (j.contains("warnings")) s.warnings = j["warnings"].get<std::vector<std::string>>();
  return s;
}

std::string surface_to_csv(const QuantileSurface& surface) {
  std::ostringstream os;
  const Eigen::Index d = surface.direction.size();
  std::vector<std::string> cols;
  for (Eigen::Index i = 1; i <= d; ++i) cols.push_back("theta_" + std::to_string(i));
  for (Eigen::Index i = 1; i < d; ++i) cols.push_back("angle_" + std::to_string(i));
  for (Eigen::Index i = 1; i <= d; ++i) cols.push_back("x_rotated_" + std::to_string(i));
  for (Eigen::Index i = 1; i <= d; ++i) cols.push_back("x_original_" + std::to_string(i));
  cols.emplace_back("rho");
  cols.emplace_back("floored");
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  for (const auto& p : surface.points) {
    for (Eigen::Index i = 0; i < d; ++i) os << format_double(p.theta[i]) << ',';
    for (Eigen::Index i = 0; i + 1 < d; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      os << (ii < p.angles.size() ? format_double(p.angles[ii]) : std::string("nan")) << ',';
    }
    for (Eigen::Index i = 0; i < d; ++i) os << format_double(p.x_rotated[i]) << ',';
    for (Eigen::Index i = 0; i < d; ++i) os << format_double(p.x_original[i]) << ',';
    os << format_double(p.rho) << ',' << (p.floored ? 1 : 0) << '\n';
  }
  return os.str();
}

std::vector<SurfacePoint> surface_points_from_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw DataError("surface CSV is empty");
  const auto header = split(lines[0], ',');
  // theta (d) + angles (d-1) + x_rotated (d) + x_original (d) + rho + floored = 4d + 1
  if (header.size() < 9 || (header.size() - 1) % 4 != 0) {
    throw DataError("surface CSV header has an unexpected column count");
  }
  const std::size_t d = (header.size() - 1) / 4;
  const Sample table = parse_csv(text, true);
  std::vector<SurfacePoint> points;
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    SurfacePoint p;
    const auto row = table.row(r);
    const auto dd = static_cast<Eigen::Index>(d);
    p.theta = row.segment(0, dd).transpose();
    for (Eigen::Index i = 0; i + 1 < dd; ++i) p.angles.push_back(row[dd + i]);
    p.x_rotated = row.segment(2 * dd - 1, dd).transpose();
    p.x_original = row.segment(3 * dd - 1, dd).transpose();
    p.rho = row[4 * dd - 1];
    p.floored = row[4 * dd] != 0.0;
    points.push_back(std::move(p));
  }
  return points;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open output file '" + path + "'");
  os << content;
  if (!os) throw DataError("failed writing output file '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace dmq
