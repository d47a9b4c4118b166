#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "threespheres/geometry.hpp"
#include "threespheres/sweep.hpp"
#include "threespheres/uniqueness.hpp"

using namespace threespheres;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::InvalidInput, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::InvalidInput, "cannot write " + path);
  out << text;
}

// "start:stop:count" with count >= 1.
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) fail(ErrorCode::InvalidInput, "grid must look like start:stop:count");
  double lo = 0;
  double hi = 0;
  int count = 0;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    count = std::stoi(parts[2]);
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidInput, "grid must look like start:stop:count");
  }
  if (count < 1) fail(ErrorCode::InvalidInput, "grid count must be >= 1");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(count == 1 ? lo : (i == count - 1 ? hi : lo + (hi - lo) * i / (count - 1)));
  }
  return out;
}

int cmd_correlate(double x_norm, double r, double R, const std::string& grid_spec) {
  const Family fam(Vector::Unit(2, 0) * x_norm, r, R);
  std::vector<double> grid;
  if (grid_spec.empty()) {
    for (int i = 0; i <= 10; ++i) grid.push_back(i == 10 ? x_norm : x_norm * i / 10);
  } else {
    grid = parse_grid(grid_spec);
  }
  std::printf("|a| = %.12g\nrho = %.12g\ncorrelation constant = %.12g\n", fam.a_norm(), fam.rho(),
              fam.a_norm() + R * R / fam.a_norm());
  std::printf("%-14s %-14s %-14s %-14s %-14s\n", "t", "r_t", "r_t*", "alpha", "omega");
  for (double t : grid) {
    const double rt = family_radius(fam, t);
    const double rs = image_radius(fam, t);
    if (t > 0) {
      const Exponents ex = exponents(fam, t);
      std::printf("%-14.8g %-14.8g %-14.8g %-14.8g %-14.8g\n", t, rt, rs, ex.alpha, ex.omega);
    } else {
      std::printf("%-14.8g %-14.8g %-14.8g %-14s %-14s\n", t, rt, rs, "-", "-");
    }
  }
  return 0;
}

int cmd_verify(const std::string& config_path, std::string csv_path, std::string json_path,
               int threads) {
  SweepConfig config = sweep_config_from_json(read_file(config_path));
  if (csv_path.empty() && config.csv_path) csv_path = *config.csv_path;
  if (json_path.empty() && config.json_path) json_path = *config.json_path;
  const SweepResult result = run_sweep(config, threads > 0 ? threads : sweep_threads());

  const std::string csv = sweep_csv(result);
  if (csv_path.empty()) {
    std::fwrite(csv.data(), 1, csv.size(), stdout);
  } else {
    write_file(csv_path, csv);
  }
  if (!json_path.empty()) write_file(json_path, sweep_json_lines(result));

  for (const auto& s : result.skipped) {
    std::fprintf(stderr, "skipped %s (n=%d, config %d): %s\n", s.check.c_str(), s.n, s.config,
                 s.reason.c_str());
  }
  for (const auto& row : result.rows) {
    if (row.report.pass) continue;
    std::fprintf(stderr, "FAIL %s n=%d config=%d poly=%d param=%.6g lhs=%.10g rhs=%.10g\n",
                 row.report.name.c_str(), row.n, row.config, row.poly, row.parameter,
                 row.report.lhs, row.report.rhs);
  }
  std::fprintf(stderr, "%zu checks, %d failed, %zu skipped\n", result.rows.size(),
               result.failures(), result.skipped.size());
  return result.all_pass() ? 0 : kExitFailure;
}

int cmd_uniqueness(const std::string& sequence_path, const std::string& envelope,
                   const std::string& csv_path, int window, double threshold) {
  const SmallnessSequence seq = sequence_from_json(read_file(sequence_path));
  const std::string spec = !envelope.empty() && envelope[0] == '@' ? read_file(envelope.substr(1))
                                                                    : envelope;
  const GrowthEnvelope phi = GrowthEnvelope::from_json(spec);
  const CriterionTrace trace = criterion_trace(seq, phi, {window, threshold});
  const std::string csv = trace_csv(trace);
  if (csv_path.empty()) {
    std::fwrite(csv.data(), 1, csv.size(), stdout);
  } else {
    write_file(csv_path, csv);
  }
  std::printf("%s\n", verdict_line(trace).c_str());
  return 0;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  return out;
}

int cmd_report(const std::string& csv_path) {
  std::istringstream in(read_file(csv_path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("name,", 0) != 0) {
    fail(ErrorCode::InvalidInput, csv_path + ": not a verify CSV");
  }
  struct Summary {
    int rows = 0;
    int failed = 0;
    double max_ratio = 0.0;
  };
  std::map<std::string, Summary> by_name;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 10) {
      fail(ErrorCode::InvalidInput, csv_path + ":" + std::to_string(line_no) + ": expected 10 columns");
    }
    Summary& s = by_name[cells[0]];
    ++s.rows;
    if (cells[9] != "true") ++s.failed;
    const double ratio = std::strtod(cells[8].c_str(), nullptr);
    if (ratio > s.max_ratio) s.max_ratio = ratio;
  }
  int failed = 0;
  std::printf("%-34s %8s %8s %14s\n", "check", "rows", "failed", "max ratio");
  for (const auto& [name, s] : by_name) {
    std::printf("%-34s %8d %8d %14.6g\n", name.c_str(), s.rows, s.failed, s.max_ratio);
    failed += s.failed;
  }
  return failed == 0 ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlated-spheres geometry, three-spheres checks and uniqueness traces"};
  app.require_subcommand(1);

  double x_norm = 0;
  double r = 0;
  double R = 1.0;
  std::string t_grid;
  auto* correlate = app.add_subcommand("correlate", "Print the correlated family of B_{x,r}");
  correlate->add_option("--x-norm", x_norm, "|x|")->required();
  correlate->add_option("--r", r, "radius of the generating ball")->required();
  correlate->add_option("--R", R, "radius of the ambient ball")->capture_default_str();
  correlate->add_option("--t-grid", t_grid, "start:stop:count (default 0:|x|:11)");

  std::string config_path;
  std::string csv_path;
  std::string json_path;
  int threads = 0;
  auto* verify = app.add_subcommand("verify", "Run a corpus sweep from a JSON config");
  verify->add_option("--config", config_path, "sweep configuration")->required();
  verify->add_option("--csv", csv_path, "summary CSV (default: stdout)");
  verify->add_option("--json", json_path, "JSON Lines reports");
  verify->add_option("--threads", threads, "worker threads (default THREESPHERES_THREADS)");

  std::string sequence_path;
  std::string envelope;
  std::string trace_path;
  int window = 10;
  double threshold = 1e3;
  auto* uniqueness = app.add_subcommand("uniqueness", "Evaluate the uniqueness criterion trend");
  uniqueness->add_option("--sequence", sequence_path, "JSON array of {x, r, eps}")->required();
  uniqueness->add_option("--envelope", envelope, "growth envelope JSON, or @file")->required();
  uniqueness->add_option("--csv", trace_path, "trace CSV (default: stdout)");
  uniqueness->add_option("--window", window, "trend window")->capture_default_str();
  uniqueness->add_option("--threshold", threshold, "divergence threshold")->capture_default_str();

  std::string report_path;
  auto* report = app.add_subcommand("report", "Summarize a verify CSV");
  report->add_option("csv", report_path, "CSV written by verify")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (correlate->parsed()) return cmd_correlate(x_norm, r, R, t_grid);
    if (verify->parsed()) return cmd_verify(config_path, csv_path, json_path, threads);
    if (uniqueness->parsed()) {
      return cmd_uniqueness(sequence_path, envelope, trace_path, window, threshold);
    }
    if (report->parsed()) return cmd_report(report_path);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
