#include "dflsim/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>

#include "config_json.hpp"
#include "dflsim/config.hpp"
#include "dflsim/engine.hpp"
#include "dflsim/error.hpp"

namespace dflsim {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void set_dotted(json& j, std::string_view key, const json& value) {
  json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part(key.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (part.empty()) throw ConfigError(std::string(key), "malformed axis key");
    if (!cur->is_object()) throw ConfigError(std::string(key), "axis path crosses a non-object value");
    if (dot == std::string_view::npos) {
      (*cur)[part] = value;
      return;
    }
    cur = &(*cur)[part];
    if (cur->is_null()) *cur = json::object();
    start = dot + 1;
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

std::string scenario_prefix(const ScenarioConfig& c, const std::string& id) {
  std::string s = id;
  for (std::string_view v : {to_string(c.paradigm), c.paradigm == Paradigm::cfl ? std::string_view("star")
                                                                                 : to_string(c.topology.kind),
                             to_string(c.aggregator.kind), to_string(c.attack.kind)}) {
    s += ',';
    s += v;
  }
  s += ',' + std::to_string(c.pnr_percent) + ',' + std::to_string(c.master_seed);
  return s;
}

struct Outcome {
  std::optional<ScenarioResult> result;
  std::string error;
};

std::size_t write_outcome(std::ostream& out, const ScenarioConfig& c, const Outcome& o) {
  const std::string prefix = scenario_prefix(c, scenario_id(c));
  if (!o.result) {
    out << prefix << ",,,,," << csv_escape(o.error) << '\n';
    return 1;
  }
  std::size_t rows = 0;
  for (const auto& rec : o.result->records) {
    for (const auto& [metric, value] : rec.metrics) {
      out << prefix << ',' << rec.round << ',' << to_string(metric) << ',' << format_double(value) << ','
          << format_double(rec.sim_transfer_seconds) << ",\n";
      ++rows;
    }
  }
  return rows;
}

bool all_numeric(const std::vector<std::string>& labels) {
  return std::all_of(labels.begin(), labels.end(), [](const std::string& s) {
    double v;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
  });
}

}  // namespace

SweepGrid parse_sweep_text(std::string_view text, const fs::path& base_dir) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "base" && key != "axes" && key != "max_scenarios") throw ConfigError(key, "unknown key");
  }
  std::size_t cap = kDefaultMaxScenarios;
  if (j.contains("max_scenarios")) {
    if (!j["max_scenarios"].is_number_unsigned()) throw ConfigError("max_scenarios", "expected a positive integer");
    cap = j["max_scenarios"].get<std::size_t>();
  }
  const json base = j.contains("base") ? json::parse(j["base"].dump()) : json::object();

  SweepGrid grid;
  grid.base = detail::config_from_json(base, base_dir);

  std::vector<std::vector<json>> values;
  if (j.contains("axes")) {
    const auto& axes = j["axes"];
    if (!axes.is_object()) throw ConfigError("axes", "expected an object");
    for (const auto& [key, list] : axes.items()) {
      if (!list.is_array() || list.empty()) throw ConfigError("axes." + key, "expected a non-empty array");
      grid.axis_keys.push_back(key);
      values.emplace_back();
      for (const auto& v : list) values.back().push_back(json::parse(v.dump()));
    }
  }

  std::size_t total = 1;
  for (const auto& v : values) {
    total *= v.size();
    if (total > cap) {
      throw ConfigError("axes", "grid has more than " + std::to_string(cap) + " scenarios (max_scenarios)");
    }
  }

  std::vector<std::size_t> idx(values.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    json point = base;
    for (std::size_t a = 0; a < values.size(); ++a) set_dotted(point, grid.axis_keys[a], values[a][idx[a]]);
    try {
      grid.points.push_back(detail::config_from_json(point, base_dir));
    } catch (const ConfigError& e) {
      std::string where;
      for (std::size_t a = 0; a < values.size(); ++a) {
        where += (a ? ", " : "") + grid.axis_keys[a] + "=" + values[a][idx[a]].dump();
      }
      throw ConfigError(e.key_path(), std::string(e.what()) + " (grid point " + where + ")");
    }
    for (std::size_t a = values.size(); a-- > 0;) {
      if (++idx[a] < values[a].size()) break;
      idx[a] = 0;
    }
  }
  return grid;
}

SweepGrid parse_sweep(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sweep_text(buf.str(), path.parent_path());
}

SweepGrid single_scenario_grid(const ScenarioConfig& cfg) {
  SweepGrid g;
  g.base = cfg;
  g.points.push_back(cfg);
  return g;
}

SweepSummary run_sweep(const SweepGrid& grid, const fs::path& out, const SweepOptions& options) {
  if (fs::exists(out) && !options.overwrite) {
    throw InvalidArgument("output " + out.string() + " already exists (pass overwrite to replace it)");
  }
  std::ofstream file(out, std::ios::trunc);
  if (!file) throw InvalidArgument("cannot write " + out.string());
  file << kCsvHeader << '\n';

  const std::size_t n = grid.points.size();
  std::vector<std::optional<Outcome>> done(n);
  std::size_t next_to_write = 0;
  std::mutex writer;
  SweepSummary summary;
  summary.scenarios = n;

  RunOptions run_opts;
  run_opts.threads = options.threads_per_scenario;
  parallel_for(n, options.parallel_scenarios, [&](std::size_t i) {
    Outcome o;
    try {
      o.result = run_scenario(grid.points[i], run_opts);
    } catch (const std::exception& e) {
      o.error = e.what();
    }
    std::lock_guard lock(writer);
    done[i] = std::move(o);
    // Rows are emitted strictly in grid order whatever the completion order.
    while (next_to_write < n && done[next_to_write]) {
      const Outcome& ready = *done[next_to_write];
      summary.rows += write_outcome(file, grid.points[next_to_write], ready);
      if (!ready.result) ++summary.failed;
      if (options.on_scenario) options.on_scenario(next_to_write, grid.points[next_to_write], ready.error);
      done[next_to_write].reset();
      ++next_to_write;
    }
    file.flush();
  });
  if (!file) throw Error("failed writing " + out.string());
  return summary;
}

Table pivot_results(const fs::path& csv, const TableSpec& spec) {
  std::ifstream in(csv);
  if (!in) throw InvalidArgument("cannot read " + csv.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(csv.string() + ": empty results file");
  const auto header = csv_split(line);
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidArgument("results have no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_id = column("scenario_id"), c_round = column("round"), c_metric = column("metric"),
                    c_value = column("value"), c_row = column(spec.rows), c_col = column(spec.cols);
  std::vector<std::pair<std::size_t, std::string>> filters;
  for (const auto& [k, v] : spec.where) filters.emplace_back(column(k), v);

  struct Final {
    int round = -1;
    double value = 0.0;
    std::string row, col;
  };
  std::map<std::string, Final> per_scenario;
  std::vector<std::string> scenario_order;
  std::vector<std::string> rows, cols;
  const std::string metric(to_string(spec.metric));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv_split(line);
    if (f.size() != header.size()) {
      throw FormatError(csv.string() + ":" + std::to_string(line_no) + ": wrong number of fields");
    }
    if (std::any_of(filters.begin(), filters.end(), [&](const auto& w) { return f[w.first] != w.second; })) continue;
    if (std::find(rows.begin(), rows.end(), f[c_row]) == rows.end()) rows.push_back(f[c_row]);
    if (std::find(cols.begin(), cols.end(), f[c_col]) == cols.end()) cols.push_back(f[c_col]);
    if (f[c_metric] != metric) continue;
    const int round = std::stoi(f[c_round]);
    auto [it, inserted] = per_scenario.try_emplace(f[c_id]);
    if (inserted) scenario_order.push_back(f[c_id]);
    if (round > it->second.round) it->second = Final{round, std::stod(f[c_value]), f[c_row], f[c_col]};
  }

  auto sort_labels = [](std::vector<std::string>& v) {
    if (all_numeric(v)) {
      std::sort(v.begin(), v.end(), [](const std::string& a, const std::string& b) { return std::stod(a) < std::stod(b); });
    }
  };
  sort_labels(cols);

  Table t;
  t.row_axis = spec.rows;
  t.col_axis = spec.cols;
  t.row_labels = rows;
  t.col_labels = cols;
  std::vector<std::vector<int>> hits(rows.size(), std::vector<int>(cols.size(), 0));
  t.cells.assign(rows.size(), std::vector<double>(cols.size(), 0.0));
  for (const auto& id : scenario_order) {
    const Final& fin = per_scenario.at(id);
    const auto r = static_cast<std::size_t>(std::find(rows.begin(), rows.end(), fin.row) - rows.begin());
    const auto c = static_cast<std::size_t>(std::find(cols.begin(), cols.end(), fin.col) - cols.begin());
    t.cells[r][c] = fin.value;
    ++hits[r][c];
  }
  std::string problems;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (hits[r][c] == 1) continue;
      problems += "\n  " + spec.rows + "=" + rows[r] + ", " + spec.cols + "=" + cols[c] +
                  (hits[r][c] == 0 ? ": missing" : ": " + std::to_string(hits[r][c]) + " scenarios (add a filter)");
    }
  }
  if (rows.empty()) problems = "\n  no rows match";
  if (!problems.empty()) throw InvalidArgument("cannot build " + metric + " table:" + problems);
  return t;
}

std::string format_table(const Table& t, TableFormat format) {
  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
    return std::string(buf);
  };
  std::ostringstream os;
  if (format == TableFormat::csv) {
    os << csv_escape(t.row_axis + "\\" + t.col_axis);
    for (const auto& c : t.col_labels) os << ',' << csv_escape(c);
    os << '\n';
    for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
      os << csv_escape(t.row_labels[r]);
      for (double v : t.cells[r]) os << ',' << pct(v);
      os << '\n';
    }
    return os.str();
  }
  std::size_t w0 = t.row_axis.size();
  for (const auto& r : t.row_labels) w0 = std::max(w0, r.size());
  std::vector<std::size_t> w(t.col_labels.size(), 5);
  for (std::size_t c = 0; c < w.size(); ++c) w[c] = std::max(w[c], t.col_labels[c].size());
  auto pad = [](const std::string& s, std::size_t width, bool left) {
    const std::string fill(width > s.size() ? width - s.size() : 0, ' ');
    return left ? s + fill : fill + s;
  };
  os << pad(t.row_axis, w0, true);
  for (std::size_t c = 0; c < w.size(); ++c) os << "  " << pad(t.col_labels[c], w[c], false);
  os << '\n';
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    os << pad(t.row_labels[r], w0, true);
    for (std::size_t c = 0; c < w.size(); ++c) os << "  " << pad(pct(t.cells[r][c]), w[c], false);
    os << '\n';
  }
  return os.str();
}

}  // namespace dflsim
