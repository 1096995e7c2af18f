// Command-line front end: detected-capacity reports for damping channels.
//
//   dampcap compute --family bosonic --d 8 --param gamma=0.3
//   dampcap sweep --config sweep.json --format csv --out rows.csv
//   dampcap figure --id fig4 --format json
//
// Exit codes: 0 success, 1 I/O or internal failure, 2 invalid input,
// 3 some grid points were skipped or left uncertified.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dampcap/dampcap.hpp"

namespace {

constexpr int exit_validation = 2;
constexpr int exit_point_failures = 3;

struct RunOptions {
  double tol = dampcap::default_ba_tolerance;
  std::size_t max_iter = dampcap::default_ba_max_iterations;
  std::string format = "csv";
  std::string out;
  unsigned threads = 0;
};

void add_run_options(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--tol", opt.tol, "Blahut-Arimoto tolerance in bits")->capture_default_str();
  cmd->add_option("--max-iter", opt.max_iter, "Blahut-Arimoto iteration budget")
      ->capture_default_str();
  cmd->add_option("--format", opt.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", opt.out, "Output file (default: stdout)");
  cmd->add_option("--threads", opt.threads, "Worker threads (0: one per core)");
}

// key=value, where gammas takes a comma-separated list.
void apply_param(dampcap::ChannelSpec& spec, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw dampcap::validation_error("--param expects key=value, got \"" + kv + "\"");
  }
  const std::string key = kv.substr(0, eq);
  const std::string value = kv.substr(eq + 1);
  auto number = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      throw dampcap::validation_error("parameter \"" + key + "\" has non-numeric value \"" +
                                      text + "\"");
    }
    return v;
  };
  if (key == "gammas") {
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) spec.level_gammas.push_back(number(item));
  } else {
    spec.params[key] = number(value);
  }
}

int finish(const std::vector<dampcap::SweepRow>& rows, const RunOptions& opt) {
  const auto format = dampcap::format_from_string(opt.format);
  if (opt.out.empty()) {
    dampcap::emit(rows, format, std::cout);
  } else {
    dampcap::emit(rows, format, opt.out);
  }
  int failures = 0;
  for (const auto& row : rows) {
    if (row.status != dampcap::RowStatus::ok) {
      ++failures;
      std::cerr << "warning: " << dampcap::to_string(row.spec.family) << " d=" << row.spec.dim
                << ": " << dampcap::to_string(row.status) << ": " << row.diagnostic << '\n';
    } else if (!row.diagnostic.empty()) {
      std::cerr << "note: " << row.diagnostic << '\n';
    }
  }
  return failures ? exit_point_failures : 0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dampcap::validation_error("cannot read config \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detected classical capacity of multilevel damping channels"};
  app.require_subcommand(1);

  RunOptions opt;

  std::string family;
  std::size_t dim = 0;
  std::vector<std::string> params;
  auto* compute = app.add_subcommand("compute", "Evaluate a single channel");
  compute->add_option("--family", family, "Channel family")->required();
  compute->add_option("--d", dim, "Dimension")->required();
  compute->add_option("--param", params, "Parameter key=value (repeatable)");
  add_run_options(compute, opt);

  std::string config;
  auto* sweep = app.add_subcommand("sweep", "Run a sweep described by a JSON config");
  sweep->add_option("--config", config, "Config file")->required();
  add_run_options(sweep, opt);

  std::string figure_id;
  auto* figure = app.add_subcommand("figure", "Run the sweep behind a figure preset");
  figure->add_option("--id", figure_id, "Preset id (fig1 ... fig15)")->required();
  add_run_options(figure, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_validation;
  }

  try {
    std::vector<dampcap::SweepRow> rows;
    if (*compute) {
      dampcap::ChannelSpec spec;
      spec.family = dampcap::family_from_string(family);
      spec.dim = dim;
      for (const auto& kv : params) apply_param(spec, kv);
      dampcap::validate_keys(spec);
      rows.push_back(dampcap::evaluate_point(spec, opt.tol, opt.max_iter));
      if (rows.front().status == dampcap::RowStatus::skipped) {
        std::cerr << "error: " << rows.front().diagnostic << '\n';
        return exit_validation;
      }
    } else if (*sweep) {
      const auto spec = dampcap::parse_config(read_file(config));
      rows = dampcap::run_sweep(spec, opt.tol, opt.max_iter, opt.threads);
    } else {
      const auto spec = dampcap::figure_preset(figure_id);
      rows = dampcap::run_sweep(spec, opt.tol, opt.max_iter, opt.threads);
    }
    return finish(rows, opt);
  } catch (const dampcap::validation_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
