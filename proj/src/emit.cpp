#include "negcurv/harness.hpp"

#include <json.hpp>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace negcurv {

namespace {

using json = nlohmann::json;

constexpr const char* kCsvMagic = "# negcurv-result schema_version=";
constexpr const char* kUnits =
    "r and lengths in units where the sectional curvature is at most -1 (Euclidean: chart units); norms from h";

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json point_json(const Vector& x) {
  json a = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) a.push_back(number(x[i]));
  return a;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw Error(ErrorCode::kIo, "result csv: bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string to_json(const ResultRecord& rec) {
  json j;
  j["schema_version"] = rec.schema_version;
  j["version"] = rec.version;
  j["experiment"] = rec.experiment;
  j["experiment_id"] = rec.experiment_id;
  j["config_hash"] = rec.config_hash;
  j["config"] = json::parse(rec.config_json);
  j["convention"] = rec.convention;
  j["units"] = kUnits;
  j["passed"] = rec.passed;
  j["wall_time_s"] = number(rec.wall_time_s);
  json checks = json::array();
  for (const auto& c : rec.checks) {
    checks.push_back({{"name", c.name},
                      {"relation", c.relation},
                      {"worst", number(c.worst)},
                      {"bound", number(c.bound)},
                      {"margin", number(c.margin)},
                      {"passed", c.passed},
                      {"worst_index", c.worst_index},
                      {"worst_point", point_json(c.worst_point)}});
  }
  j["checks"] = checks;
  json stats = json::object();
  for (const auto& [k, v] : rec.statistics) stats[k] = number(v);
  j["statistics"] = stats;
  j["notes"] = rec.notes;
  json rows = json::array();
  for (const auto& r : rec.rows) {
    rows.push_back({{"index", r.index},
                    {"quantity", r.quantity},
                    {"relation", r.relation},
                    {"r", number(r.r)},
                    {"point", point_json(r.point)},
                    {"measured", number(r.measured)},
                    {"bound", number(r.bound)},
                    {"margin", number(r.margin)},
                    {"ok", r.ok}});
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string to_csv(const ResultRecord& rec) {
  std::ostringstream os;
  os << kCsvMagic << rec.schema_version << "\n";
  os << "# version=" << rec.version << "\n";
  os << "# experiment=" << rec.experiment << "\n";
  os << "# experiment_id=" << rec.experiment_id << "\n";
  os << "# config_hash=" << rec.config_hash << "\n";
  os << "# config=" << rec.config_json << "\n";
  os << "# convention=" << rec.convention << "\n";
  os << "# units=" << kUnits << "\n";
  os << "# summary.passed=" << (rec.passed ? 1 : 0) << "\n";
  for (const auto& c : rec.checks) {
    os << "# summary." << c.name << ".worst=" << fmt(c.worst) << "\n";
    os << "# summary." << c.name << ".bound=" << fmt(c.bound) << "\n";
    os << "# summary." << c.name << ".margin=" << fmt(c.margin) << "\n";
    os << "# summary." << c.name << ".passed=" << (c.passed ? 1 : 0) << "\n";
    os << "# summary." << c.name << ".worst_index=" << c.worst_index << "\n";
  }
  for (const auto& [k, v] : rec.statistics) os << "# summary.stat." << k << "=" << fmt(v) << "\n";
  for (const auto& [k, v] : rec.notes) os << "# note." << k << "=" << v << "\n";
  os << "# wall_time_s=" << fmt(rec.wall_time_s) << "\n";

  Eigen::Index dim = 0;
  for (const auto& r : rec.rows) dim = std::max(dim, r.point.size());
  os << "index,quantity,relation,r";
  for (Eigen::Index i = 0; i < dim; ++i) os << ",x" << i;
  os << ",measured,bound,margin,ok\n";
  for (const auto& r : rec.rows) {
    os << r.index << "," << r.quantity << "," << r.relation << "," << fmt(r.r);
    for (Eigen::Index i = 0; i < dim; ++i) os << "," << (i < r.point.size() ? fmt(r.point[i]) : "");
    os << "," << fmt(r.measured) << "," << fmt(r.bound) << "," << fmt(r.margin) << "," << (r.ok ? 1 : 0) << "\n";
  }
  return os.str();
}

std::optional<int> result_file_schema(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto start = text.find_first_not_of(" \t\r\n");
  if (start == std::string::npos) return std::nullopt;
  if (text[start] == '{') {
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
      return std::nullopt;
    }
    return j["schema_version"].get<int>();
  }
  const std::string magic = kCsvMagic;
  if (text.compare(start, magic.size(), magic) != 0) return std::nullopt;
  const std::string rest = text.substr(start + magic.size(), text.find('\n', start) - start - magic.size());
  try {
    std::size_t used = 0;
    const int v = std::stoi(rest, &used);
    if (used == rest.size()) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

void write_result(const ResultRecord& rec, const std::string& path, OutputFormat format, bool force) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(path, ec) && !force) {
    const auto schema = result_file_schema(path);
    if (!schema || *schema != kSchemaVersion) {
      throw Error(ErrorCode::kSchema, "refusing to overwrite '" + path + "': " +
                                          (schema ? "it has schema version " + std::to_string(*schema)
                                                  : std::string("it is not a readable result file")) +
                                          " (use --force)");
    }
  }
  const std::string text = format == OutputFormat::kJson ? to_json(rec) : to_csv(rec);
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + tmp + "'");
    out << text;
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIo, "write failed for '" + tmp + "'");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into '" + path + "'");
  }
}

CsvResult parse_result_csv(const std::string& text) {
  CsvResult res;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      if (line.rfind(kCsvMagic, 0) != 0) throw Error(ErrorCode::kSchema, "not a negcurv result csv");
      res.metadata["schema_version"] = line.substr(std::string(kCsvMagic).size());
      first = false;
      continue;
    }
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
      if (key.rfind("summary.", 0) == 0) {
        res.summary[key.substr(8)] = parse_double(value);
      } else {
        res.metadata[key] = value;
      }
      continue;
    }
    const auto cells = split(line, ',');
    if (res.columns.empty()) {
      res.columns = cells;
      if (res.columns.size() < 8 || res.columns[0] != "index") throw Error(ErrorCode::kSchema, "result csv: bad header");
      continue;
    }
    if (cells.size() != res.columns.size()) throw Error(ErrorCode::kIo, "result csv: ragged row '" + line + "'");
    const std::size_t dim = res.columns.size() - 8;
    ResultRow r;
    r.index = static_cast<std::size_t>(parse_double(cells[0]));
    r.quantity = cells[1];
    r.relation = cells[2];
    r.r = parse_double(cells[3]);
    std::size_t filled = 0;
    while (filled < dim && !cells[4 + filled].empty()) ++filled;
    r.point.resize(static_cast<Eigen::Index>(filled));
    for (std::size_t i = 0; i < filled; ++i) r.point[static_cast<Eigen::Index>(i)] = parse_double(cells[4 + i]);
    r.measured = parse_double(cells[4 + dim]);
    r.bound = parse_double(cells[5 + dim]);
    r.margin = parse_double(cells[6 + dim]);
    r.ok = cells[7 + dim] == "1";
    res.rows.push_back(r);
  }
  if (first) throw Error(ErrorCode::kSchema, "empty result csv");
  return res;
}

CsvResult read_result_csv(const std::string& path) { return parse_result_csv(read_file(path)); }

}  // namespace negcurv
