#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dampcap/capacity.hpp"
#include "dampcap/error.hpp"
#include "dampcap/families.hpp"

namespace dampcap {

// One swept parameter and its grid values.
struct Axis {
  std::string name;
  std::vector<double> values;

  friend bool operator==(const Axis&, const Axis&) = default;
};

struct SweepSpec {
  std::string id;
  // Fixed parameters; dim is taken from dims.
  ChannelSpec base;
  std::vector<std::size_t> dims;
  std::vector<Axis> axes;
  // Drop grid points the family rejects instead of reporting them as skipped
  // (used where the admissible range depends on d).
  bool clip_to_admissible = false;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

namespace detail {

// Value printed with 12 significant digits and read back.
inline double round12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline std::vector<double> arithmetic_grid(double from, double to, double step) {
  if (!(step > 0)) throw validation_error("sweep step must be positive");
  if (to < from) throw validation_error("sweep range is empty (to < from)");
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  if (count > 1000000) throw validation_error("sweep axis has too many points");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = round12(from + double(i) * step);
  return v;
}

}  // namespace detail

// Every point of the sweep, d outermost, then the axes in declaration order
// (the last axis varies fastest).
inline std::vector<ChannelSpec> grid_points(const SweepSpec& s) {
  std::vector<ChannelSpec> points;
  for (std::size_t d : s.dims) {
    std::vector<std::size_t> idx(s.axes.size(), 0);
    for (;;) {
      ChannelSpec spec = s.base;
      spec.dim = d;
      for (std::size_t a = 0; a < s.axes.size(); ++a) {
        spec.params[s.axes[a].name] = s.axes[a].values[idx[a]];
      }
      bool keep = true;
      if (s.clip_to_admissible) {
        try {
          (void)build_transition(spec);
        } catch (const validation_error&) {
          keep = false;
        }
      }
      if (keep) points.push_back(std::move(spec));

      std::size_t a = s.axes.size();
      while (a > 0 && ++idx[a - 1] == s.axes[a - 1].values.size()) idx[--a] = 0;
      if (a == 0) break;
    }
  }
  return points;
}

namespace detail {

using nlohmann::json;

inline double json_number(const json& v, const std::string& key) {
  if (!v.is_number()) {
    throw validation_error("parameter \"" + key + "\" must be a number, got " + v.dump());
  }
  const double x = v.get<double>();
  if (is_integer_parameter(key) && x != std::floor(x)) {
    throw validation_error("parameter \"" + key + "\" must be an integer, got " + v.dump());
  }
  return x;
}

inline Axis parse_axis(const std::string& name, const json& v) {
  Axis axis{name, {}};
  if (v.is_array()) {
    for (const auto& x : v) axis.values.push_back(json_number(x, name));
  } else if (v.is_object()) {
    for (const auto& [key, _] : v.items()) {
      if (key != "from" && key != "to" && key != "step" && key != "values") {
        throw validation_error("unknown key \"" + key + "\" in sweep axis \"" + name + "\"");
      }
    }
    if (v.contains("values")) {
      if (v.size() != 1) throw validation_error("axis \"" + name + "\": values excludes from/to/step");
      return parse_axis(name, v.at("values"));
    }
    if (!v.contains("from") || !v.contains("to")) {
      throw validation_error("axis \"" + name + "\" needs \"from\" and \"to\"");
    }
    const double step = v.contains("step") ? json_number(v.at("step"), "step") : 1.0;
    axis.values = arithmetic_grid(json_number(v.at("from"), name), json_number(v.at("to"), name), step);
  } else {
    throw validation_error("axis \"" + name + "\" must be an object or a list");
  }
  if (axis.values.empty()) throw validation_error("axis \"" + name + "\" has no values");
  return axis;
}

}  // namespace detail

// Reads a JSON sweep document:
//   {"family": name, "d": int | "d_list": [int...], "params": {...}, "sweep": {axis: {...}}}
inline SweepSpec parse_config(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw validation_error(std::string("malformed config: ") + e.what());
  }
  if (!doc.is_object()) throw validation_error("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "family" && key != "d" && key != "d_list" && key != "params" && key != "sweep") {
      throw validation_error("unknown config key \"" + key + "\"");
    }
  }
  if (!doc.contains("family") || !doc.at("family").is_string()) {
    throw validation_error("config needs a string \"family\"");
  }

  SweepSpec s;
  s.base.family = family_from_string(doc.at("family").get<std::string>());

  auto dim_value = [](const json& v) -> std::size_t {
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      throw validation_error("dimension must be a positive integer, got " + v.dump());
    }
    return v.get<std::size_t>();
  };
  if (doc.contains("d") == doc.contains("d_list")) {
    throw validation_error("config needs exactly one of \"d\" and \"d_list\"");
  }
  if (doc.contains("d")) {
    s.dims.push_back(dim_value(doc.at("d")));
  } else {
    if (!doc.at("d_list").is_array() || doc.at("d_list").empty()) {
      throw validation_error("\"d_list\" must be a nonempty list");
    }
    for (const auto& v : doc.at("d_list")) s.dims.push_back(dim_value(v));
  }
  s.base.dim = s.dims.front();

  const auto keys = family_parameter_keys(s.base.family);
  auto known = [&](const std::string& k) {
    return std::find(keys.begin(), keys.end(), k) != keys.end();
  };

  if (doc.contains("params")) {
    const auto& params = doc.at("params");
    if (!params.is_object()) throw validation_error("\"params\" must be an object");
    for (const auto& [key, value] : params.items()) {
      if (key == "gammas" && accepts_level_gammas(s.base.family)) {
        if (!value.is_array()) throw validation_error("\"gammas\" must be a list of numbers");
        for (const auto& g : value) s.base.level_gammas.push_back(detail::json_number(g, key));
        continue;
      }
      if (!known(key)) {
        throw validation_error("unknown parameter \"" + key + "\" for family " +
                               std::string(to_string(s.base.family)));
      }
      s.base.params[key] = detail::json_number(value, key);
    }
  }
  if (doc.contains("sweep")) {
    const auto& sweep = doc.at("sweep");
    if (!sweep.is_object()) throw validation_error("\"sweep\" must be an object");
    for (const auto& [key, value] : sweep.items()) {
      if (!known(key)) {
        throw validation_error("unknown sweep parameter \"" + key + "\" for family " +
                               std::string(to_string(s.base.family)));
      }
      if (s.base.params.contains(key)) {
        throw validation_error("parameter \"" + key + "\" is both fixed and swept");
      }
      s.axes.push_back(detail::parse_axis(key, value));
    }
  }
  validate_keys(s.base);

  // Every scalar parameter must be either fixed or swept.
  for (const auto& key : keys) {
    const bool swept = std::any_of(s.axes.begin(), s.axes.end(),
                                   [&](const Axis& a) { return a.name == key; });
    const bool level = key == "gamma" && !s.base.level_gammas.empty();
    if (!swept && !level && !s.base.params.contains(key)) {
      throw validation_error("missing parameter \"" + key + "\" for family " +
                             std::string(to_string(s.base.family)));
    }
  }
  return s;
}

// Parameter sweeps behind each figure of the damping-channel study.
inline SweepSpec figure_preset(std::string_view id) {
  auto dims_2_to = [](std::size_t hi) {
    std::vector<std::size_t> v;
    for (std::size_t d = 2; d <= hi; ++d) v.push_back(d);
    return v;
  };
  auto unit_gamma = [] { return Axis{"gamma", detail::arithmetic_grid(0.0, 1.0, 0.01)}; };

  SweepSpec s;
  s.id = std::string(id);
  if (id == "fig1" || id == "fig3") {
    s.base.family = Family::bosonic;
    s.dims = dims_2_to(8);
    s.axes = {unit_gamma()};
  } else if (id == "fig2") {
    s.base.family = Family::bosonic;
    s.dims = {8};
    s.axes = {unit_gamma()};
  } else if (id == "fig4") {
    s.base.family = Family::hypergeometric;
    s.dims = {8};
    s.base.params["L"] = 12;
    s.axes = {Axis{"M", detail::arithmetic_grid(1, 12, 1)}};
  } else if (id == "fig6") {
    s.base.family = Family::negative_hypergeometric;
    s.dims = {8};
    s.base.params["L"] = 32;
    s.axes = {Axis{"M", detail::arithmetic_grid(1, 32 - 7, 1)}};
  } else if (id == "fig7" || id == "fig9") {
    s.base.family = Family::beta_binomial;
    s.dims = {8};
    s.axes = {Axis{"alpha", detail::arithmetic_grid(0.1, 5.0, 0.1)},
              Axis{"beta", detail::arithmetic_grid(0.1, 5.0, 0.1)}};
  } else if (id == "fig8") {
    s.base.family = Family::beta_binomial;
    s.dims = {8};
    s.axes = {Axis{"alpha", detail::arithmetic_grid(0.005, 0.2, 0.005)},
              Axis{"beta", detail::arithmetic_grid(0.005, 0.2, 0.005)}};
  } else if (id == "fig10" || id == "fig11") {
    s.base.family = Family::geometric;
    s.dims = dims_2_to(8);
    s.axes = {unit_gamma()};
  } else if (id == "fig12") {
    s.base.family = Family::constant_ratio;
    s.dims = {2, 3, 4, 5};
    s.axes = {unit_gamma()};
    s.clip_to_admissible = true;
  } else if (id == "fig13") {
    s.base.family = Family::two_jump;
    s.dims = {8};
    s.axes = {Axis{"gamma1", detail::arithmetic_grid(0.0, 3.0, 0.05)},
              Axis{"gamma2", detail::arithmetic_grid(0.0, 3.0, 0.05)}};
  } else if (id == "fig14") {
    s.base.family = Family::lambda;
    s.dims = {4};
    s.axes = {Axis{"gamma", detail::arithmetic_grid(0.0, 2.0, 0.01)}};
  } else if (id == "fig15") {
    s.base.family = Family::v;
    s.dims = {2, 3, 4, 8};
    s.axes = {unit_gamma()};
  } else {
    throw validation_error("unknown figure preset \"" + std::string(id) + "\"");
  }
  s.base.dim = s.dims.front();
  return s;
}

inline constexpr std::string_view figure_ids[] = {"fig1", "fig2",  "fig3",  "fig4",  "fig6",
                                                  "fig7", "fig8",  "fig9",  "fig10", "fig11",
                                                  "fig12", "fig13", "fig14", "fig15"};

enum class RowStatus { ok, uncertified, skipped };

inline std::string_view to_string(RowStatus s) {
  switch (s) {
    case RowStatus::ok: return "ok";
    case RowStatus::uncertified: return "uncertified";
    case RowStatus::skipped: return "skipped";
  }
  return "?";
}

// One grid point: a report, or the reason there is none.
struct SweepRow {
  ChannelSpec spec;
  std::optional<CapacityReport> report;
  RowStatus status = RowStatus::ok;
  std::string diagnostic;
};

inline SweepRow evaluate_point(const ChannelSpec& spec, double tol, std::size_t max_iter) {
  SweepRow row;
  row.spec = spec;
  try {
    row.report = detected_capacity(spec, tol, max_iter);
    auto warnings = spec_warnings(spec);
    if (!row.report->ba_certified) {
      row.status = RowStatus::uncertified;
      char gap[32];
      std::snprintf(gap, sizeof gap, "%.3g", row.report->ba_gap);
      warnings.push_back("Blahut-Arimoto stopped after " + std::to_string(max_iter) +
                         " iterations with gap " + gap + " bits");
    }
    for (const auto& w : warnings) row.diagnostic += (row.diagnostic.empty() ? "" : "; ") + w;
  } catch (const error& e) {
    row.report.reset();
    row.status = RowStatus::skipped;
    row.diagnostic = e.what();
  }
  return row;
}

// Evaluates every grid point. Rows come back in grid order whatever the
// number of worker threads.
inline std::vector<SweepRow> run_sweep(const SweepSpec& s, double tol = default_ba_tolerance,
                                       std::size_t max_iter = default_ba_max_iterations,
                                       unsigned threads = 0) {
  const auto points = grid_points(s);
  std::vector<SweepRow> rows(points.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, points.size())));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      rows[i] = evaluate_point(points[i], tol, max_iter);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return rows;
}

}  // namespace dampcap
