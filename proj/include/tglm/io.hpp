#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "tglm/error.hpp"
#include "tglm/hypothesis.hpp"
#include "tglm/model.hpp"

namespace tglm {

/// Column roles in an input table.
struct ModelSpec {
  std::string outcome;
  std::vector<std::string> regressors;
  std::string group;

  void validate() const {
    if (outcome.empty() || group.empty()) throw Error(ErrorKind::missing_column, "outcome and group columns are required");
    std::vector<std::string> all{outcome, group};
    all.insert(all.end(), regressors.begin(), regressors.end());
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = i + 1; j < all.size(); ++j) {
        if (all[i] == all[j]) throw Error(ErrorKind::parse_error, "column \"" + all[i] + "\" used twice in the model");
      }
    }
  }
};

/// Dataset plus the group labels in id order.
struct LoadedData {
  Dataset data;
  std::vector<std::string> group_labels;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

/// Locale-independent decimal parse; accepts scientific notation.
inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Reads non-blank lines; the first is the header.
inline std::vector<std::vector<std::string>> read_table(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_failure, "cannot open \"" + path + "\"");
  return in;
}

}  // namespace detail

/// Parses a header-led CSV table. Group cells are labels, mapped to dense ids
/// in order of first appearance.
inline LoadedData load_csv(std::istream& in, const ModelSpec& spec) {
  spec.validate();
  const auto table = detail::read_table(in);
  if (table.empty()) throw Error(ErrorKind::empty_file, "input has no header row");
  const auto& header = table.front();

  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorKind::missing_column, "column \"" + name + "\" not found in header");
  };
  const auto y_col = column(spec.outcome);
  const auto g_col = column(spec.group);
  std::vector<std::size_t> x_cols;
  for (const auto& r : spec.regressors) x_cols.push_back(column(r));
  if (table.size() < 2) throw Error(ErrorKind::empty_file, "input has no data rows");

  LoadedData out;
  auto& d = out.data;
  d.regressor_count = x_cols.size();
  std::map<std::string, std::size_t> ids;

  for (std::size_t row = 1; row < table.size(); ++row) {
    const auto& cells = table[row];
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::parse_error, "row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                              " cells, header has " + std::to_string(header.size()));
    }
    auto number = [&](std::size_t col) {
      const auto v = detail::parse_double(cells[col]);
      if (!v) {
        throw Error(ErrorKind::non_numeric_cell, "row " + std::to_string(row) + ", column \"" + header[col] +
                                                     "\": \"" + cells[col] + "\" is not a number");
      }
      return *v;
    };
    d.outcome.push_back(number(y_col));
    std::vector<double> x;
    for (auto c : x_cols) x.push_back(number(c));
    d.regressors.push_back(std::move(x));

    const auto& label = cells[g_col];
    auto [it, inserted] = ids.try_emplace(label, out.group_labels.size());
    if (inserted) out.group_labels.push_back(label);
    d.group.push_back(it->second);
  }
  d.group_count = out.group_labels.size();
  return out;
}

inline LoadedData load_csv(const std::string& path, const ModelSpec& spec) {
  auto in = detail::open_input(path);
  return load_csv(in, spec);
}

/// Sparse contrast entries with header `hypothesis,group,param,coeff`.
/// Unlisted cells are zero and the hypothesis count is one past the largest index.
inline ContrastTensor load_contrasts(std::istream& in, std::size_t params, std::size_t groups) {
  const auto table = detail::read_table(in);
  if (table.empty()) throw Error(ErrorKind::empty_file, "contrast file is empty");
  const std::vector<std::string> expected{"hypothesis", "group", "param", "coeff"};
  if (table.front() != expected) throw Error(ErrorKind::parse_error, "contrast header must be hypothesis,group,param,coeff");
  if (table.size() < 2) throw Error(ErrorKind::empty_file, "contrast file has no entries");

  struct Entry {
    std::size_t h, g, a;
    double c;
  };
  std::vector<Entry> entries;
  std::size_t hypotheses = 0;
  for (std::size_t row = 1; row < table.size(); ++row) {
    const auto& cells = table[row];
    if (cells.size() != 4) throw Error(ErrorKind::parse_error, "contrast row " + std::to_string(row) + " needs 4 cells");
    const auto h = detail::parse_index(cells[0]);
    const auto g = detail::parse_index(cells[1]);
    const auto a = detail::parse_index(cells[2]);
    const auto c = detail::parse_double(cells[3]);
    if (!h || !g || !a) throw Error(ErrorKind::parse_error, "contrast row " + std::to_string(row) + " has a bad index");
    if (!c) throw Error(ErrorKind::non_numeric_cell, "contrast row " + std::to_string(row) + " coefficient is not a number");
    if (*g >= groups) {
      throw Error(ErrorKind::index_out_of_range, "contrast row " + std::to_string(row) + ": group " + std::to_string(*g) +
                                                     " >= " + std::to_string(groups));
    }
    if (*a >= params) {
      throw Error(ErrorKind::index_out_of_range, "contrast row " + std::to_string(row) + ": param " + std::to_string(*a) +
                                                     " >= " + std::to_string(params));
    }
    entries.push_back({*h, *g, *a, *c});
    hypotheses = std::max(hypotheses, *h + 1);
  }

  std::vector<double> values(hypotheses * params * groups, 0.0);
  std::vector<bool> seen(values.size(), false);
  for (const auto& e : entries) {
    const auto off = (e.h * params + e.a) * groups + e.g;
    if (seen[off]) {
      throw Error(ErrorKind::parse_error, "duplicate contrast entry (" + std::to_string(e.h) + "," + std::to_string(e.g) +
                                              "," + std::to_string(e.a) + ")");
    }
    seen[off] = true;
    values[off] = e.c;
  }
  return ContrastTensor(Tensor({hypotheses, params, groups}, std::move(values)));
}

inline ContrastTensor load_contrasts(const std::string& path, std::size_t params, std::size_t groups) {
  auto in = detail::open_input(path);
  return load_contrasts(in, params, groups);
}

/// 64-bit FNV-1a over the file bytes, as 16 hex digits.
inline std::string file_digest(const std::string& path) {
  auto in = detail::open_input(path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

struct HypothesisRow {
  double g = 0.0;
  double t = 0.0;
  double standard_error = 0.0;
  double p = 0.0;

  friend bool operator==(const HypothesisRow&, const HypothesisRow&) = default;
};

/// Everything a `fit` or `test` run produces.
struct RunReport {
  std::string command;
  std::string backend;
  std::vector<std::string> params;
  std::vector<std::string> groups;
  std::vector<std::vector<double>> beta;  ///< [group][param]
  double sigma2 = 0.0;
  std::vector<double> sigma2_per_group;
  long long df = 0;
  std::vector<HypothesisRow> hypotheses;
  std::optional<double> f;
  std::optional<double> f_p;
  std::optional<double> beta_deviation;
  std::optional<double> t_deviation;
  std::map<std::string, std::string> inputs;
};

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json number_json(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

inline double json_number(const ordered_json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const RunReport& r) {
  using detail::number_json;
  nlohmann::ordered_json j;
  j["command"] = r.command;
  j["backend"] = r.backend;
  j["params"] = r.params;
  j["groups"] = r.groups;
  auto beta = nlohmann::ordered_json::array();
  for (const auto& row : r.beta) {
    auto jr = nlohmann::ordered_json::array();
    for (double v : row) jr.push_back(number_json(v));
    beta.push_back(jr);
  }
  j["beta"] = beta;
  auto var = nlohmann::ordered_json::object();
  var["pooled"] = number_json(r.sigma2);
  auto per = nlohmann::ordered_json::array();
  for (double v : r.sigma2_per_group) per.push_back(number_json(v));
  var["per_group"] = per;
  var["df"] = r.df;
  j["variance"] = var;
  auto hyp = nlohmann::ordered_json::array();
  for (const auto& h : r.hypotheses) {
    hyp.push_back({{"g", number_json(h.g)}, {"t", number_json(h.t)}, {"se", number_json(h.standard_error)},
                   {"p", number_json(h.p)}});
  }
  j["hypotheses"] = hyp;
  if (r.f) j["f"] = {{"value", number_json(*r.f)}, {"p", number_json(r.f_p.value_or(std::nan("")))}};
  if (r.beta_deviation || r.t_deviation) {
    auto cc = nlohmann::ordered_json::object();
    if (r.beta_deviation) cc["beta_deviation"] = number_json(*r.beta_deviation);
    if (r.t_deviation) cc["t_deviation"] = number_json(*r.t_deviation);
    j["cross_check"] = cc;
  }
  j["inputs"] = r.inputs;
  return j;
}

inline RunReport run_report_from_json(const nlohmann::ordered_json& j) {
  using detail::json_number;
  RunReport r;
  try {
    r.command = j.at("command").get<std::string>();
    r.backend = j.at("backend").get<std::string>();
    r.params = j.at("params").get<std::vector<std::string>>();
    r.groups = j.at("groups").get<std::vector<std::string>>();
    for (const auto& row : j.at("beta")) {
      std::vector<double> v;
      for (const auto& e : row) v.push_back(json_number(e));
      r.beta.push_back(std::move(v));
    }
    const auto& var = j.at("variance");
    r.sigma2 = json_number(var.at("pooled"));
    for (const auto& e : var.at("per_group")) r.sigma2_per_group.push_back(json_number(e));
    r.df = var.at("df").get<long long>();
    for (const auto& h : j.at("hypotheses")) {
      r.hypotheses.push_back({json_number(h.at("g")), json_number(h.at("t")), json_number(h.at("se")), json_number(h.at("p"))});
    }
    if (j.contains("f")) {
      r.f = json_number(j["f"].at("value"));
      r.f_p = json_number(j["f"].at("p"));
    }
    if (j.contains("cross_check")) {
      const auto& cc = j["cross_check"];
      if (cc.contains("beta_deviation")) r.beta_deviation = json_number(cc["beta_deviation"]);
      if (cc.contains("t_deviation")) r.t_deviation = json_number(cc["t_deviation"]);
    }
    r.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse_error, std::string("malformed report: ") + e.what());
  }
  return r;
}

inline std::string serialize_report(const RunReport& r) { return to_json(r).dump(2) + "\n"; }

inline RunReport parse_report(std::string_view text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse_error, std::string("report is not valid JSON: ") + e.what());
  }
  return run_report_from_json(j);
}

inline void write_report_table(std::ostream& os, const RunReport& r) {
  os << "backend: " << r.backend << "\n\n";
  os << std::left << std::setw(14) << "group";
  for (const auto& p : r.params) os << std::right << std::setw(16) << p;
  os << std::right << std::setw(16) << "sigma2" << '\n';
  for (std::size_t g = 0; g < r.beta.size(); ++g) {
    os << std::left << std::setw(14) << r.groups[g];
    for (double v : r.beta[g]) os << std::right << std::setw(16) << std::setprecision(8) << v;
    os << std::right << std::setw(16) << std::setprecision(8) << r.sigma2_per_group[g] << '\n';
  }
  os << "\npooled sigma2 = " << std::setprecision(10) << r.sigma2 << ", df = " << r.df << '\n';
  if (!r.hypotheses.empty()) {
    os << '\n' << std::left << std::setw(6) << "H" << std::right << std::setw(16) << "g" << std::setw(16) << "se"
       << std::setw(16) << "t" << std::setw(16) << "p" << '\n';
    for (std::size_t h = 0; h < r.hypotheses.size(); ++h) {
      const auto& row = r.hypotheses[h];
      os << std::left << std::setw(6) << h << std::right << std::setprecision(8) << std::setw(16) << row.g
         << std::setw(16) << row.standard_error << std::setw(16) << row.t << std::setw(16) << row.p << '\n';
    }
  }
  if (r.f) os << "\nF = " << std::setprecision(10) << *r.f << ", p = " << r.f_p.value_or(std::nan("")) << '\n';
  if (r.beta_deviation) os << "\ncross-check beta deviation = " << *r.beta_deviation;
  if (r.t_deviation) os << ", t deviation = " << *r.t_deviation;
  if (r.beta_deviation) os << '\n';
}

}  // namespace tglm
