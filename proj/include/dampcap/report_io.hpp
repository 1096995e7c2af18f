#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dampcap/capacity.hpp"
#include "dampcap/error.hpp"
#include "dampcap/families.hpp"
#include "dampcap/sweep.hpp"

namespace dampcap {

enum class OutputFormat { csv, json };

inline OutputFormat format_from_string(std::string_view s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw validation_error("unknown output format \"" + std::string(s) + "\"");
}

namespace detail {

inline std::string format12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string join_levels(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + format12(v[i]);
  return out;
}

}  // namespace detail

// Column layout: family, d, parameters, i_direct, i_fourier, c_det, winner,
// chi_direct, chi_fourier, delta, prior_entropy, prior_0.., status, diagnostic.
inline void write_csv(std::span<const SweepRow> rows, std::ostream& os) {
  std::vector<std::string> param_cols;
  bool any_levels = false;
  std::size_t max_dim = 0;
  for (const auto& row : rows) {
    for (const auto& key : family_parameter_keys(row.spec.family)) {
      if (std::find(param_cols.begin(), param_cols.end(), key) == param_cols.end()) {
        param_cols.push_back(key);
      }
    }
    any_levels = any_levels || !row.spec.level_gammas.empty();
    max_dim = std::max(max_dim, row.spec.dim);
  }
  if (any_levels) param_cols.emplace_back("gammas");

  os << "family,d";
  for (const auto& key : param_cols) os << ',' << key;
  os << ",i_direct,i_fourier,c_det,winner,chi_direct,chi_fourier,delta,prior_entropy";
  for (std::size_t n = 0; n < max_dim; ++n) os << ",prior_" << n;
  os << ",status,diagnostic\n";

  for (const auto& row : rows) {
    os << to_string(row.spec.family) << ',' << row.spec.dim;
    for (const auto& key : param_cols) {
      os << ',';
      if (key == "gammas") {
        os << detail::join_levels(row.spec.level_gammas);
      } else if (auto it = row.spec.params.find(key); it != row.spec.params.end()) {
        os << detail::format12(it->second);
      }
    }
    if (row.report) {
      const auto& r = *row.report;
      for (double v : {r.i_direct, r.i_fourier, r.c_det}) os << ',' << detail::format12(v);
      os << ',' << to_string(r.winner);
      for (double v : {r.chi_direct, r.chi_fourier, r.delta, r.prior_entropy}) {
        os << ',' << detail::format12(v);
      }
      for (std::size_t n = 0; n < max_dim; ++n) {
        os << ',';
        if (n < r.prior_direct.size()) os << detail::format12(r.prior_direct[n]);
      }
    } else {
      os << std::string(8 + max_dim, ',');
    }
    os << ',' << to_string(row.status) << ',' << detail::csv_escape(row.diagnostic) << '\n';
  }
}

inline nlohmann::json spec_to_json(const ChannelSpec& spec) {
  nlohmann::json j;
  j["family"] = to_string(spec.family);
  j["d"] = spec.dim;
  j["params"] = nlohmann::json::object();
  for (const auto& [key, value] : spec.params) j["params"][key] = detail::round12(value);
  if (!spec.level_gammas.empty()) {
    auto& arr = j["params"]["gammas"] = nlohmann::json::array();
    for (double g : spec.level_gammas) arr.push_back(detail::round12(g));
  }
  return j;
}

inline ChannelSpec spec_from_json(const nlohmann::json& j) {
  ChannelSpec spec;
  spec.family = family_from_string(j.at("family").get<std::string>());
  spec.dim = j.at("d").get<std::size_t>();
  for (const auto& [key, value] : j.at("params").items()) {
    if (key == "gammas") {
      spec.level_gammas = value.get<std::vector<double>>();
    } else {
      spec.params[key] = value.get<double>();
    }
  }
  validate_keys(spec);
  return spec;
}

inline nlohmann::json row_to_json(const SweepRow& row) {
  using detail::round12;
  nlohmann::json j;
  j["spec"] = spec_to_json(row.spec);
  if (row.report) {
    const auto& r = *row.report;
    j["i_direct"] = round12(r.i_direct);
    j["i_fourier"] = round12(r.i_fourier);
    j["c_det"] = round12(r.c_det);
    j["winner"] = to_string(r.winner);
    j["chi_direct"] = round12(r.chi_direct);
    j["chi_fourier"] = round12(r.chi_fourier);
    j["delta"] = round12(r.delta);
    auto& prior = j["prior_direct"] = nlohmann::json::array();
    for (double p : r.prior_direct.values()) prior.push_back(round12(p));
    j["prior_entropy"] = round12(r.prior_entropy);
    j["ba_iterations"] = r.ba_iterations;
    j["ba_gap"] = r.ba_gap;
    j["ba_certified"] = r.ba_certified;
  }
  j["status"] = to_string(row.status);
  j["diagnostic"] = row.diagnostic;
  return j;
}

inline SweepRow row_from_json(const nlohmann::json& j) {
  SweepRow row;
  row.spec = spec_from_json(j.at("spec"));
  const auto status = j.at("status").get<std::string>();
  if (status == "ok") {
    row.status = RowStatus::ok;
  } else if (status == "uncertified") {
    row.status = RowStatus::uncertified;
  } else if (status == "skipped") {
    row.status = RowStatus::skipped;
  } else {
    throw validation_error("unknown row status \"" + status + "\"");
  }
  row.diagnostic = j.at("diagnostic").get<std::string>();
  if (row.status != RowStatus::skipped) {
    CapacityReport r;
    r.spec = row.spec;
    r.i_direct = j.at("i_direct").get<double>();
    r.i_fourier = j.at("i_fourier").get<double>();
    r.c_det = j.at("c_det").get<double>();
    r.winner = basis_from_string(j.at("winner").get<std::string>());
    r.chi_direct = j.at("chi_direct").get<double>();
    r.chi_fourier = j.at("chi_fourier").get<double>();
    r.delta = j.at("delta").get<double>();
    r.prior_direct = ProbVector(j.at("prior_direct").get<std::vector<double>>());
    r.prior_entropy = j.at("prior_entropy").get<double>();
    r.ba_iterations = j.at("ba_iterations").get<std::size_t>();
    r.ba_gap = j.at("ba_gap").get<double>();
    r.ba_certified = j.at("ba_certified").get<bool>();
    row.report = std::move(r);
  }
  return row;
}

inline void write_json(std::span<const SweepRow> rows, std::ostream& os) {
  auto arr = nlohmann::json::array();
  for (const auto& row : rows) arr.push_back(row_to_json(row));
  os << arr.dump(2) << '\n';
}

// Reads back the array written by write_json.
inline std::vector<SweepRow> parse_reports(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw validation_error(std::string("malformed report document: ") + e.what());
  }
  if (!doc.is_array()) throw validation_error("report document must be a JSON array");
  std::vector<SweepRow> rows;
  try {
    for (const auto& j : doc) rows.push_back(row_from_json(j));
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("bad report entry: ") + e.what());
  }
  return rows;
}

inline void emit(std::span<const SweepRow> rows, OutputFormat format, std::ostream& os) {
  if (rows.empty()) throw validation_error("nothing to emit");
  if (format == OutputFormat::csv) {
    write_csv(rows, os);
  } else {
    write_json(rows, os);
  }
  if (!os) throw error("failed writing output");
}

inline void emit(std::span<const SweepRow> rows, OutputFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot open \"" + path + "\" for writing");
  emit(rows, format, out);
}

}  // namespace dampcap
