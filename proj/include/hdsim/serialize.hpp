#pragma once

#include <string>
#include <vector>

#include "hdsim/types.hpp"

namespace hdsim {

// All writers emit to a temporary file in the target directory and rename
// into place, so failures never leave partial outputs. CSV files begin with
// a "# hdsim <version>" comment line; numbers use 17 significant digits.

void write_text_atomic(const std::string& path, const std::string& content);

std::string format_double(double v);

// CountDistribution: CSV "n,probability" (+ tail row comment) and JSON.
void write_count_distribution_csv(const std::string& path,
                                  const CountDistribution& d);
void write_count_distribution_json(const std::string& path,
                                   const CountDistribution& d);

// Sampler event log: CSV "shot,detector,count".
void write_count_events_csv(const std::string& path,
                            const std::vector<std::vector<int>>& shots_by_row);

// ScaledDifferenceDistribution: CSV "outcome,probability".
void write_scaled_difference_csv(const std::string& path,
                                 const ScaledDifferenceDistribution& d);

// Convergence table: CSV "r,sup_error"; JSON variant includes the t-grid
// and per-t errors.
void write_convergence_csv(const std::string& path,
                           const std::vector<ConvergenceRow>& rows);
void write_convergence_json(const std::string& path,
                            const std::vector<ConvergenceRow>& rows,
                            const std::vector<double>& t_grid,
                            const std::vector<std::vector<double>>& per_t);

// PhaseSpaceGrid: CSV "q,p,value"; binary variant is a JSON header file plus
// a flat little-endian float64 row-major payload. gnuplot layout emits
// whitespace-separated blocks split by blank lines per q-row.
void write_grid_csv(const std::string& path, const PhaseSpaceGrid& g);
void write_grid_binary(const std::string& json_path,
                       const std::string& payload_path,
                       const PhaseSpaceGrid& g);
void write_grid_gnuplot(const std::string& path, const PhaseSpaceGrid& g);
PhaseSpaceGrid read_grid_csv(const std::string& path);
PhaseSpaceGrid read_grid_binary(const std::string& json_path);

// JointCountDistribution: CSV "k,l,m,n,probability".
void write_joint_counts_csv(const std::string& path,
                            const JointCountDistribution& d);

// FockDensityMatrix: JSON with cutoff, tolerance metadata, and row-major
// [re, im] entry pairs.
void write_density_json(const std::string& path, const FockDensityMatrix& rho);
FockDensityMatrix read_density_json(const std::string& path);

}  // namespace hdsim
