#pragma once

#include "nlab/config.hpp"
#include "nlab/evolve.hpp"
#include "nlab/field.hpp"
#include "nlab/kernels.hpp"
#include "nlab/limits.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nlab {

KernelSpec kernel_from(const ExperimentConfig& cfg);
Grid grid_from(const ExperimentConfig& cfg);
DatumSpec datum_from(const ExperimentConfig& cfg);
EvolveParams params_from(const ExperimentConfig& cfg);

// CSV schemas shared with the plotting side.

/// t,sup_norm,l1_mass,weighted_sup,absorbed_mass,tail_A_eff
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// x,u in 1D or x,y,u in 2D, one node per row; L and h as comment lines.
void write_snapshot_csv(const std::filesystem::path& path, const Field& field);
/// Rebuilds the truncated-box grid from the node coordinates.
Field read_snapshot_csv(const std::filesystem::path& path, double time = 0.0,
                        TailLaw tail = ZeroTail{});

/// Snapshot files listed in snapshots.csv (t,file,tail_A_eff,tail_exponent)
/// next to a trajectory CSV.
std::vector<Field> read_snapshot_index(const std::filesystem::path& trajectory_csv);

/// xi,F
void write_profile_csv(const std::filesystem::path& path, const ProfileSolution& profile);

struct ExperimentResult {
  std::filesystem::path output_dir;
  std::vector<std::string> artifacts;  // file names relative to output_dir
  std::string config_hash;
};

/// Run cfg.kind, write its CSVs and a manifest.txt naming them. The manifest
/// is itself a valid config reproducing the run.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace nlab
