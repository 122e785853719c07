#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "lvtopo/grid.hpp"
#include "lvtopo/harness.hpp"
#include "lvtopo/kernels.hpp"
#include "lvtopo/metrics.hpp"
#include "lvtopo/recovery.hpp"
#include "lvtopo/signals.hpp"

namespace fs = std::filesystem;
using namespace lvtopo;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
}

grid::GridTopology topology_for(const harness::RunConfig& config,
                                const std::string& topology_path) {
  if (!topology_path.empty()) return grid::decode(read_file(topology_path));
  return grid::build_fixture(config.fixture, config.resistance_ohm);
}

void add_profile_flags(CLI::App* cmd, harness::RunConfig& config) {
  cmd->add_option("--noise-sigma", config.profile.noise_sigma,
                  "relative load noise std");
  cmd->add_option("--ar-rho", config.profile.ar_rho,
                  "AR(1) coefficient of the load noise");
  cmd->add_option("--scale-sigma", config.profile.scale_sigma,
                  "lognormal sigma of the per-leaf scale factor");
  cmd->add_option("--interval", config.profile.interval_s, "sampling interval [s]");
  cmd->add_option("--pf", config.power_factor, "load power factor");
  cmd->add_option("--tol", config.flow_tol, "power flow tolerance [V]");
}

int cmd_generate(const harness::RunConfig& config, const std::string& topology_path,
                 const std::string& out_dir, bool histograms, bool pf_trace) {
  auto truth = topology_for(config, topology_path);
  auto report = grid::validate(truth);
  if (!report.ok()) throw std::runtime_error("invalid topology:\n" + report.to_string());

  auto profile = signals::synth_profile(truth.leaves(), config.samples,
                                        config.profile, config.seed);
  auto measurements = signals::simulate(truth, profile, config.power_factor,
                                        config.flow_tol, config.flow_max_iter);

  fs::create_directories(out_dir);
  signals::save_measurements(measurements, out_dir + "/measurements.csv",
                             {"config: " + config.to_json()});
  write_file(out_dir + "/topology.json", grid::encode(truth));
  write_file(out_dir + "/topology.config.json", config.to_json() + "\n");

  if (histograms) {
    for (std::size_t j = 0; j < measurements.leaf_ids.size(); ++j) {
      std::string leaf = std::to_string(measurements.leaf_ids[j]);
      signals::save_histogram(measurements.dV.col(j), 40,
                              out_dir + "/hist_dV_leaf" + leaf + ".csv");
      signals::save_histogram(measurements.dI.col(j), 40,
                              out_dir + "/hist_dI_leaf" + leaf + ".csv");
    }
  }
  if (pf_trace) {
    powerflow::LoadAssignment loads;
    loads.power_factor = config.power_factor;
    for (std::size_t j = 0; j < profile.leaf_ids.size(); ++j)
      loads.active_power_w[profile.leaf_ids[j]] = profile.power_w(0, j);
    auto sol = powerflow::solve(truth, loads, config.flow_tol, config.flow_max_iter);
    std::ostringstream os;
    os << "# config: " << config.to_json() << "\niteration,max_dv_volts\n";
    os.precision(17);
    for (std::size_t i = 0; i < sol.iteration_trace.size(); ++i)
      os << (i + 1) << "," << sol.iteration_trace[i] << "\n";
    write_file(out_dir + "/pf_trace.csv", os.str());
  }

  std::cout << "generated " << measurements.V.rows() << " snapshots for "
            << measurements.leaf_ids.size() << " leaves into " << out_dir << "\n";
  return 0;
}

int cmd_recover(const harness::RunConfig& config, const std::string& measurements_path,
                const std::string& truth_path, const std::string& out_dir,
                bool dump_matrices) {
  auto measurements = signals::load_measurements(measurements_path);
  fs::create_directories(out_dir);

  recovery::RecoverOptions options;
  if (dump_matrices) {
    options.layer_observer = [&](int layer, const stats::CorrelationMatrix& sigma,
                                 const stats::PrecisionMatrix& theta,
                                 const stats::DistanceMatrix& dist) {
      std::ostringstream os;
      os.precision(17);
      auto dump = [&](const char* name, const Matrix& m) {
        os << name << "\n";
        for (std::size_t i = 0; i < m.rows(); ++i) {
          for (std::size_t j = 0; j < m.cols(); ++j)
            os << (j ? "," : "") << m(i, j);
          os << "\n";
        }
      };
      dump("sigma", sigma.sigma);
      dump("theta", theta.theta);
      os << "distance\n";
      for (std::size_t i = 0; i < dist.size(); ++i) {
        for (std::size_t j = 0; j < dist.size(); ++j) {
          if (j) os << ",";
          if (i == j)
            os << "";
          else if (dist.finite(i, j))
            os << dist.at(i, j);
          else
            os << "inf";
        }
        os << "\n";
      }
      write_file(out_dir + "/matrices_layer" + std::to_string(layer) + ".csv",
                 os.str());
    };
  }

  auto recovered =
      recovery::recover(measurements, config.resistance_ohm, config.theta, options);
  write_file(out_dir + "/recovered_topology.json", grid::encode(recovered.tree));
  std::ostringstream log;
  log << "# config: " << config.to_json() << "\n"
      << recovery::format_step_log(recovered.steps);
  write_file(out_dir + "/step_log.txt", log.str());
  std::cout << recovery::format_step_log(recovered.steps);

  if (!truth_path.empty()) {
    auto truth = grid::decode(read_file(truth_path));
    auto report = metrics::recovery_ratio(truth, recovered.tree);
    write_file(out_dir + "/report.txt",
               "# config: " + config.to_json() + "\n" + report.to_string());
    std::cout << report.to_string();
  }
  return 0;
}

int cmd_benchmark(harness::RunConfig config, const std::vector<std::size_t>& samples,
                  int seeds, const std::string& out_path, int jobs) {
  if (samples.empty()) throw CLI::ValidationError("--samples must not be empty");

  std::vector<harness::RunConfig> points;
  for (std::size_t n : samples)
    for (int s = 0; s < seeds; ++s) {
      auto point = config;
      point.samples = n;
      point.seed = config.seed + static_cast<std::uint64_t>(s);
      points.push_back(point);
    }

  std::vector<harness::BenchmarkRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1))
      rows[i] = harness::run_point(points[i]);
  };
  jobs = std::max(1, jobs);
  std::vector<std::thread> threads;
  for (int t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  write_file(out_path, harness::benchmark_csv(rows, config));

  std::map<std::size_t, std::pair<double, int>> by_samples;
  for (const auto& row : rows)
    if (row.recovery_ratio) {
      by_samples[row.samples].first += *row.recovery_ratio;
      by_samples[row.samples].second += 1;
    } else {
      by_samples[row.samples];
    }
  for (const auto& [n, acc] : by_samples) {
    std::cout << config.fixture << " samples=" << n << " mean_ratio=";
    if (acc.second > 0)
      std::cout << acc.first / acc.second;
    else
      std::cout << "nan";
    std::cout << " (" << acc.second << "/" << seeds << " runs ok)\n";
  }
  return 0;
}

int cmd_export(const std::string& topology_path, const std::string& format,
               const std::string& out_path) {
  auto topology = grid::decode(read_file(topology_path));
  std::ostringstream os;
  if (format == "dot") {
    os << "digraph lvdn {\n";
    for (const auto& [id, kind] : topology.nodes) {
      const char* shape = kind == grid::NodeKind::Leaf     ? "circle"
                          : kind == grid::NodeKind::Root   ? "doublecircle"
                                                           : "box";
      os << "  n" << id << " [label=\"" << id << "\", shape=" << shape
         << ", kind=" << grid::to_string(kind) << "];\n";
    }
    for (const auto& seg : topology.segments)
      os << "  n" << seg.parent << " -> n" << seg.child << ";\n";
    os << "}\n";
  } else if (format == "text") {
    for (const auto& [id, kind] : topology.nodes)
      os << "node " << id << " " << grid::to_string(kind) << "\n";
    for (const auto& seg : topology.segments)
      os << "edge " << seg.parent << " " << seg.child << " " << seg.resistance_ohm
         << "\n";
  } else {
    throw CLI::ValidationError("unknown format: " + format + " (use dot or text)");
  }
  if (out_path.empty())
    std::cout << os.str();
  else
    write_file(out_path, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LVDN topology recovery from smart-meter increments"};
  app.require_subcommand(1);

  harness::RunConfig config;
  if (const char* env = std::getenv("LVTOPO_CONFIG")) {
    try {
      config = harness::RunConfig::from_json(read_file(env));
    } catch (const std::exception& e) {
      std::cerr << "bad LVTOPO_CONFIG: " << e.what() << "\n";
      return 1;
    }
  }

  std::string topology_path, measurements_path, truth_path, out_dir = ".";
  std::string out_path, format = "dot";
  std::vector<std::size_t> sample_grid;
  int seeds = 5, jobs = 1;
  bool histograms = false, pf_trace = false, dump_matrices = false;

  auto* gen = app.add_subcommand("generate", "simulate measurements for a fixture");
  gen->add_option("--fixture", config.fixture, "fixture name (sys6..sys25)");
  gen->add_option("--topology", topology_path, "topology JSON instead of a fixture");
  gen->add_option("--samples", config.samples, "number of increments T (>= 2)")
      ->check(CLI::Range(std::size_t{2}, std::size_t{10000000}));
  gen->add_option("--seed", config.seed, "RNG seed");
  gen->add_option("--resistance", config.resistance_ohm, "segment resistance [ohm]");
  gen->add_option("--out-dir", out_dir, "output directory");
  gen->add_flag("--histograms", histograms, "export per-leaf dV/dI histograms");
  gen->add_flag("--pf-trace", pf_trace, "dump per-iteration max dV of snapshot 0");
  add_profile_flags(gen, config);

  auto* rec = app.add_subcommand("recover", "reconstruct a topology from a CSV");
  rec->add_option("--measurements", measurements_path, "measurement CSV")->required();
  rec->add_option("--truth", truth_path, "ground-truth topology JSON for scoring");
  rec->add_option("--theta", config.theta, "grouping distance threshold");
  rec->add_option("--resistance", config.resistance_ohm, "segment resistance [ohm]");
  rec->add_option("--out-dir", out_dir, "output directory");
  rec->add_flag("--dump-matrices", dump_matrices, "dump per-layer sigma/theta/D");

  auto* bench = app.add_subcommand("benchmark", "recovery-ratio sweep");
  bench->add_option("--fixture", config.fixture, "fixture name");
  bench->add_option("--samples", sample_grid, "sample counts to sweep (comma separated)")
      ->required()
      ->delimiter(',');
  bench->add_option("--seeds", seeds, "seeds per point")->check(CLI::PositiveNumber);
  bench->add_option("--seed", config.seed, "base seed");
  bench->add_option("--theta", config.theta, "grouping distance threshold");
  bench->add_option("--resistance", config.resistance_ohm, "segment resistance [ohm]");
  bench->add_option("--out", out_path, "output CSV path")->required();
  bench->add_option("--jobs", jobs, "concurrent grid points");
  add_profile_flags(bench, config);

  auto* exp = app.add_subcommand("export", "render a topology file");
  exp->add_option("--topology", topology_path, "topology JSON")->required();
  exp->add_option("--format", format, "dot or text");
  exp->add_option("--out", out_path, "output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_generate(config, topology_path, out_dir, histograms, pf_trace);
    if (rec->parsed())
      return cmd_recover(config, measurements_path, truth_path, out_dir,
                         dump_matrices);
    if (bench->parsed())
      return cmd_benchmark(config, sample_grid, seeds, out_path, jobs);
    if (exp->parsed()) return cmd_export(topology_path, format, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
