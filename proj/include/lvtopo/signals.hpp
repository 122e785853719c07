#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lvtopo/grid.hpp"
#include "lvtopo/matrix.hpp"
#include "lvtopo/powerflow.hpp"

namespace lvtopo::signals {

struct BadTemplate : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BadSigma : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SimulationDiverged : std::runtime_error {
  SimulationDiverged(const std::string& what, std::size_t snapshot_index)
      : std::runtime_error(what), snapshot(snapshot_index) {}
  std::size_t snapshot;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RaggedSeries : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Evening-peaked 24h residential template, watts per hour of day.
inline constexpr std::array<double, 24> kResidentialTemplate = {
    300,  250,  220,  210,  210, 230, 350, 500, 600, 550, 500, 480,
    500,  520,  480,  500,  700, 900, 1200, 1400, 1300, 1000, 700, 450};

struct ProfileOptions {
  double interval_s = 60.0;
  double noise_sigma = 0.1;  // relative, i.i.d. Gaussian per sample
  // Optional extensions past the i.i.d. model; both default off.
  double ar_rho = 0.0;       // AR(1) coefficient of the noise process
  double scale_sigma = 0.0;  // lognormal sigma of a per-leaf scale factor
  std::vector<double> base_shape{kResidentialTemplate.begin(),
                                 kResidentialTemplate.end()};
};

struct LoadProfile {
  std::vector<grid::NodeId> leaf_ids;
  double interval_s = 60.0;
  Matrix power_w;  // (T+1) x |leaves|
};

struct MeasurementSet {
  std::vector<grid::NodeId> leaf_ids;
  Matrix V;   // (T+1) x |leaves|, voltage magnitudes
  Matrix I;   // (T+1) x |leaves|, incident-segment current magnitudes
  Matrix dV;  // T x |leaves|
  Matrix dI;  // T x |leaves|
};

// power[t] = template(t * interval) * scale_leaf * (1 + eps_t), clipped at 0.
// The 24-point template is interpolated linearly and wraps past 24 h.
// Deterministic per seed.
LoadProfile synth_profile(const std::vector<grid::NodeId>& leaf_ids, std::size_t samples,
                          const ProfileOptions& options, std::uint64_t seed);

// One power flow per snapshot; dV/dI by first differencing.
MeasurementSet simulate(const grid::GridTopology& topology, const LoadProfile& profile,
                        double power_factor = 1.0, double tol = 1e-8,
                        int max_iter = 100);

struct ScaleResult {
  Matrix scaled;
  std::vector<std::size_t> degenerate_columns;  // constant columns mapped to zeros
};

// Column-wise zero mean, unit sample std (n-1 denominator).
ScaleResult standard_scale(const Matrix& m);

// CSV schema: header "t,leaf_id,V_volts,I_amps", one row per (snapshot, leaf).
// '#'-prefixed lines are comments. Increments are recomputed on load.
void save_measurements(const MeasurementSet& set, const std::string& path,
                       const std::vector<std::string>& header_comments = {});
MeasurementSet load_measurements(const std::string& path);

// Increment-distribution diagnostic: "bin_left,bin_right,count" rows.
void save_histogram(std::span<const double> series, std::size_t bins,
                    const std::string& path);

}  // namespace lvtopo::signals
