#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dbareit/common.hpp"
#include "dbareit/dbar_solver.hpp"
#include "dbareit/forward_fem.hpp"
#include "dbareit/phantom.hpp"
#include "dbareit/reconstruct.hpp"
#include "dbareit/scattering.hpp"

namespace dbareit {

/// Everything a run needs. Loaded from an INI file; see configs/ for
/// annotated examples.
struct RunConfig {
  // [phantom]
  std::string preset = "example1";  // example1..3 or constant
  std::filesystem::path phantom_file;
  Complex constant_value{1.0, 0.0};
  // [mesh]
  double radius = 0.15;
  int target_triangles = 20000;
  // [electrodes]
  ElectrodeLayout layout;
  double amplitude = 0.002;
  // [noise]
  double eta = 0.0;
  std::uint64_t seed = 1;
  // [scattering]
  double k_cutoff = 5.5;
  int k_points = 128;
  Truncation truncation = Truncation::square(5.5);
  int odd_m = 64;
  TraceRule trace_rule = TraceRule::kBoundaryJump;
  G0Sign g0_sign = G0Sign::kFundamental;
  // [dbar]
  int nz = 128;
  double z_extent = 1.1;
  DbarSettings dbar;
  // [run]
  int workers = 1;
  std::filesystem::path output = "run";
  // [reconstruction]
  std::string background = "auto";  // auto | fit | "re im"

  /// Throws Error on invalid values.
  void validate() const;
  AdmittivityField phantom() const;

  static RunConfig load(const std::filesystem::path& path,
                        const std::vector<std::string>& overrides = {});
  static RunConfig from_overrides(const std::vector<std::string>& overrides);
  /// INI text that reloads to the same config. Without `with_output` the
  /// run.output key is left out, so copies stored inside run directories do
  /// not depend on where the run was written.
  std::string to_ini(bool with_output = true) const;
};

/// Raised by a pipeline stage; names the stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Wall-clock seconds per stage in run order.
using StageTimings = std::vector<std::pair<std::string, double>>;

struct SimulationOutput {
  DiskMesh mesh;
  Eigen::MatrixXd currents;
  Eigen::MatrixXcd voltages_gamma;
  Eigen::MatrixXcd voltages_one;
  DNMatrix dn_gamma;  // physical radius, noise applied when eta > 0
  DNMatrix dn_one;
};

struct ReconstructionOutput {
  ScatteringData scattering;
  TruncationReport truncation_report;
  DbarRunResult dbar;
  PotentialField q;
  ReconResult recon;
  Complex background;
};

/// Forward problem and DN matrices; writes mesh, voltages and DN files when
/// `out` is non-empty.
SimulationOutput simulate(const RunConfig& cfg, const std::filesystem::path& out,
                          StageTimings* timings = nullptr);

/// Steps from DN matrices to the admittivity image.
ReconstructionOutput reconstruct(const RunConfig& cfg, const DNMatrix& dn_gamma,
                                 const DNMatrix& dn_one, StageTimings* timings = nullptr);

/// Least-squares gamma0 with Lambda_gamma ~ gamma0 Lambda_1.
Complex fit_background(const DNMatrix& dn_gamma, const DNMatrix& dn_one);

/// Writes scattering dumps, M fields, sigma/epsilon grids, images and
/// report.json into `out`.
void write_reconstruction(const RunConfig& cfg, const ReconstructionOutput& r,
                          const std::filesystem::path& out);

/// Full chain; returns the report written to report.json. Timings go to
/// timings.json.
std::string run_pipeline(const RunConfig& cfg);
/// Reconstruction from DN files in `input` (dn_gamma.csv, dn_one.csv).
std::string run_reconstruct(const RunConfig& cfg, const std::filesystem::path& input);

struct ArtifactDiff {
  std::string file;
  std::size_t values = 0;
  double sup_norm = 0.0;
  double relative_l2 = 0.0;
  bool identical_bytes = false;
};

/// Compares the standard artifacts present in both directories. Throws on
/// shape mismatch.
std::vector<ArtifactDiff> compare_runs(const std::filesystem::path& a,
                                       const std::filesystem::path& b);

/// Artifact files produced by a pipeline run (timings.json excluded).
const std::vector<std::string>& artifact_files();

}  // namespace dbareit
