#include "lvtopo/signals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "lvtopo/kernels.hpp"

namespace lvtopo::signals {

using grid::NodeId;

namespace {

double interp_template(const std::vector<double>& shape, double hours) {
  const double period = static_cast<double>(shape.size());
  double h = std::fmod(hours, period);
  if (h < 0) h += period;
  std::size_t i = static_cast<std::size_t>(h);
  double frac = h - static_cast<double>(i);
  double a = shape[i];
  double b = shape[(i + 1) % shape.size()];
  return a + frac * (b - a);
}

}  // namespace

LoadProfile synth_profile(const std::vector<NodeId>& leaf_ids, std::size_t samples,
                          const ProfileOptions& options, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("samples must be >= 2");
  if (options.noise_sigma < 0) throw BadSigma("noise_sigma must be >= 0");
  if (options.base_shape.empty() ||
      std::any_of(options.base_shape.begin(), options.base_shape.end(),
                  [](double v) { return v <= 0; }))
    throw BadTemplate("base shape must be non-empty and strictly positive");
  if (options.interval_s <= 0) throw std::invalid_argument("interval must be > 0");

  LoadProfile profile;
  profile.leaf_ids = leaf_ids;
  profile.interval_s = options.interval_s;
  profile.power_w = Matrix(samples + 1, leaf_ids.size());

  std::mt19937_64 rng(seed);
  for (std::size_t j = 0; j < leaf_ids.size(); ++j) {
    std::normal_distribution<double> normal(0.0, 1.0);
    double scale = 1.0;
    if (options.scale_sigma > 0)
      scale = std::exp(options.scale_sigma * normal(rng));
    const double rho = options.ar_rho;
    const double innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    double eps = 0.0;
    auto col = profile.power_w.col(j);
    for (std::size_t t = 0; t <= samples; ++t) {
      double eta = options.noise_sigma * normal(rng);
      eps = (t == 0 || rho <= 0) ? eta : rho * eps + innovation * eta;
      double hours = static_cast<double>(t) * options.interval_s / 3600.0;
      double base = interp_template(options.base_shape, hours);
      col[t] = std::max(0.0, base * scale * (1.0 + eps));
    }
  }
  return profile;
}

MeasurementSet simulate(const grid::GridTopology& topology, const LoadProfile& profile,
                        double power_factor, double tol, int max_iter) {
  const auto topo_leaves = topology.leaves();
  const std::set<NodeId> leaf_set(topo_leaves.begin(), topo_leaves.end());
  for (NodeId id : profile.leaf_ids)
    if (!leaf_set.count(id))
      throw std::invalid_argument("profile leaf " + std::to_string(id) +
                                  " is not a leaf of the topology");

  const auto adj = grid::adjacency(topology);
  const std::size_t snapshots = profile.power_w.rows();
  const std::size_t k = profile.leaf_ids.size();

  MeasurementSet set;
  set.leaf_ids = profile.leaf_ids;
  set.V = Matrix(snapshots, k);
  set.I = Matrix(snapshots, k);

  for (std::size_t t = 0; t < snapshots; ++t) {
    powerflow::LoadAssignment loads;
    loads.power_factor = power_factor;
    for (std::size_t j = 0; j < k; ++j)
      loads.active_power_w[profile.leaf_ids[j]] = profile.power_w(t, j);
    auto sol = powerflow::solve(topology, loads, tol, max_iter);
    if (!sol.converged) {
      std::ostringstream os;
      os << "power flow did not converge at snapshot " << t;
      throw SimulationDiverged(os.str(), t);
    }
    for (std::size_t j = 0; j < k; ++j) {
      NodeId leaf = profile.leaf_ids[j];
      set.V(t, j) = std::abs(sol.node_voltage.at(leaf));
      set.I(t, j) = std::abs(sol.branch_current.at({adj.parent.at(leaf), leaf}));
    }
  }

  set.dV = Matrix(snapshots - 1, k);
  set.dI = Matrix(snapshots - 1, k);
  for (std::size_t j = 0; j < k; ++j) {
    kernels::first_diff(set.V.col(j), set.dV.col(j));
    kernels::first_diff(set.I.col(j), set.dI.col(j));
  }
  return set;
}

ScaleResult standard_scale(const Matrix& m) {
  if (m.rows() < 2) throw std::invalid_argument("standard_scale needs >= 2 rows");
  ScaleResult result;
  result.scaled = Matrix(m.rows(), m.cols());
  const double n = static_cast<double>(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    auto col = m.col(j);
    double mean = kernels::sum(col) / n;
    std::vector<double> centered(col.size());
    kernels::shift_scale(col, mean, 1.0, centered);
    double var = kernels::dot(centered, centered) / (n - 1.0);
    double sd = std::sqrt(var);
    if (sd == 0.0) {
      result.degenerate_columns.push_back(j);
      kernels::shift_scale(col, mean, 0.0, result.scaled.col(j));
    } else {
      kernels::shift_scale(col, mean, 1.0 / sd, result.scaled.col(j));
    }
  }
  return result;
}

void save_measurements(const MeasurementSet& set, const std::string& path,
                       const std::vector<std::string>& header_comments) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& comment : header_comments) out << "# " << comment << "\n";
  out << "t,leaf_id,V_volts,I_amps\n";
  out.precision(17);
  for (std::size_t t = 0; t < set.V.rows(); ++t)
    for (std::size_t j = 0; j < set.leaf_ids.size(); ++j)
      out << t << "," << set.leaf_ids[j] << "," << set.V(t, j) << "," << set.I(t, j)
          << "\n";
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    std::ostringstream os;
    os << "line " << line_no << ": bad number '" << s << "'";
    throw ParseError(os.str());
  }
  return v;
}

}  // namespace

MeasurementSet load_measurements(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::size_t line_no = 0;

  // skip comments, then require the schema header
  do {
    if (!std::getline(in, line)) throw SchemaViolation("empty measurement file");
    ++line_no;
  } while (!line.empty() && line[0] == '#');
  if (line != "t,leaf_id,V_volts,I_amps")
    throw SchemaViolation("expected header t,leaf_id,V_volts,I_amps, got '" + line +
                          "'");

  std::vector<NodeId> leaf_order;
  std::map<NodeId, std::vector<std::pair<double, double>>> series;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv(line);
    if (fields.size() != 4) {
      std::ostringstream os;
      os << "line " << line_no << ": expected 4 fields, got " << fields.size();
      throw SchemaViolation(os.str());
    }
    NodeId leaf = static_cast<NodeId>(parse_double(fields[1], line_no));
    double v = parse_double(fields[2], line_no);
    double i = parse_double(fields[3], line_no);
    if (!series.count(leaf)) leaf_order.push_back(leaf);
    series[leaf].emplace_back(v, i);
  }
  if (series.empty()) throw SchemaViolation("measurement file has no data rows");

  std::size_t snapshots = series.at(leaf_order.front()).size();
  for (const auto& [leaf, rows] : series)
    if (rows.size() != snapshots) {
      std::ostringstream os;
      os << "leaf " << leaf << " has " << rows.size() << " snapshots, expected "
         << snapshots;
      throw RaggedSeries(os.str());
    }
  if (snapshots < 2) throw SchemaViolation("need at least 2 snapshots");

  MeasurementSet set;
  set.leaf_ids = leaf_order;
  set.V = Matrix(snapshots, leaf_order.size());
  set.I = Matrix(snapshots, leaf_order.size());
  for (std::size_t j = 0; j < leaf_order.size(); ++j) {
    const auto& rows = series.at(leaf_order[j]);
    for (std::size_t t = 0; t < snapshots; ++t) {
      set.V(t, j) = rows[t].first;
      set.I(t, j) = rows[t].second;
    }
  }
  set.dV = Matrix(snapshots - 1, leaf_order.size());
  set.dI = Matrix(snapshots - 1, leaf_order.size());
  for (std::size_t j = 0; j < leaf_order.size(); ++j) {
    kernels::first_diff(set.V.col(j), set.dV.col(j));
    kernels::first_diff(set.I.col(j), set.dI.col(j));
  }
  return set;
}

void save_histogram(std::span<const double> series, std::size_t bins,
                    const std::string& path) {
  if (series.empty() || bins == 0)
    throw std::invalid_argument("histogram needs data and >= 1 bin");
  auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi == lo) hi = lo + 1.0;
  double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : series) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(b, bins - 1)]++;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "bin_left,bin_right,count\n";
  out.precision(17);
  for (std::size_t b = 0; b < bins; ++b)
    out << lo + width * static_cast<double>(b) << ","
        << lo + width * static_cast<double>(b + 1) << "," << counts[b] << "\n";
}

}  // namespace lvtopo::signals
