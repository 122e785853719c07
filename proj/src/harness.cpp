#include "lvtopo/harness.hpp"

#include <chrono>
#include <sstream>

#include <nlohmann/json.hpp>

namespace lvtopo::harness {

using json = nlohmann::json;

std::string RunConfig::to_json() const {
  json j;
  j["fixture"] = fixture;
  j["samples"] = samples;
  j["seed"] = seed;
  j["theta"] = theta;
  j["resistance_ohm"] = resistance_ohm;
  j["power_factor"] = power_factor;
  j["flow_tol"] = flow_tol;
  j["flow_max_iter"] = flow_max_iter;
  j["profile"] = {{"interval_s", profile.interval_s},
                  {"noise_sigma", profile.noise_sigma},
                  {"ar_rho", profile.ar_rho},
                  {"scale_sigma", profile.scale_sigma},
                  {"base_shape", profile.base_shape}};
  return j.dump();
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  RunConfig c;
  c.fixture = j.value("fixture", c.fixture);
  c.samples = j.value("samples", c.samples);
  c.seed = j.value("seed", c.seed);
  c.theta = j.value("theta", c.theta);
  c.resistance_ohm = j.value("resistance_ohm", c.resistance_ohm);
  c.power_factor = j.value("power_factor", c.power_factor);
  c.flow_tol = j.value("flow_tol", c.flow_tol);
  c.flow_max_iter = j.value("flow_max_iter", c.flow_max_iter);
  if (j.contains("profile")) {
    const auto& p = j.at("profile");
    c.profile.interval_s = p.value("interval_s", c.profile.interval_s);
    c.profile.noise_sigma = p.value("noise_sigma", c.profile.noise_sigma);
    c.profile.ar_rho = p.value("ar_rho", c.profile.ar_rho);
    c.profile.scale_sigma = p.value("scale_sigma", c.profile.scale_sigma);
    if (p.contains("base_shape"))
      c.profile.base_shape = p.at("base_shape").get<std::vector<double>>();
  }
  return c;
}

namespace {

// Separate deterministic noise streams per grid point. Without this, two
// points sharing a seed reuse the same realization (a shorter sweep is a
// prefix of a longer one), which correlates the benchmark curve.
std::uint64_t stream_seed(const RunConfig& config) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (unsigned char c : config.fixture) {
    h ^= c;
    h *= 1099511628211ull;
  }
  mix(config.samples);
  mix(config.seed);
  return h;
}

}  // namespace

PointResult run_point_detailed(const RunConfig& config) {
  auto truth = grid::build_fixture(config.fixture, config.resistance_ohm);
  auto profile = signals::synth_profile(truth.leaves(), config.samples,
                                        config.profile, stream_seed(config));
  auto measurements = signals::simulate(truth, profile, config.power_factor,
                                        config.flow_tol, config.flow_max_iter);
  PointResult result;
  result.recovered =
      recovery::recover(measurements, config.resistance_ohm, config.theta);
  result.report = metrics::recovery_ratio(truth, result.recovered.tree);
  return result;
}

BenchmarkRow run_point(const RunConfig& config) {
  BenchmarkRow row;
  row.fixture = config.fixture;
  row.samples = config.samples;
  row.seed = config.seed;
  auto start = std::chrono::steady_clock::now();
  try {
    auto result = run_point_detailed(config);
    row.recovery_ratio = result.report.recovery_ratio;
    row.layers = result.recovered.steps.size();
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  row.elapsed_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return row;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows,
                          const RunConfig& base_config) {
  std::ostringstream os;
  os << "# config: " << base_config.to_json() << "\n";
  os << "fixture,samples,seed,recovery_ratio,layers,elapsed_ms\n";
  os.precision(17);
  for (const auto& row : rows) {
    os << row.fixture << "," << row.samples << "," << row.seed << ",";
    if (row.recovery_ratio)
      os << *row.recovery_ratio;
    else
      os << "nan";
    os << "," << row.layers << "," << row.elapsed_ms << "\n";
  }
  return os.str();
}

}  // namespace lvtopo::harness
