#pragma once

// File outputs of an experiment: metrics.csv, summary.json and 2-D ellipse
// polylines. CSV files use ',' separators, '.' decimals, a header row and LF
// line endings.

#include "smf/harness.hpp"

#include <filesystem>
#include <ostream>
#include <string>

namespace smf::outputs {

inline constexpr int kOutlinePoints = 128;

/// Creates the directory and probes it for writing. Throws ConfigError.
void ensure_output_dir(const std::filesystem::path& dir);

/// Shortest round-trip decimal text; "nan"/"inf" for non-finite values.
std::string format_double(double v);

void write_metrics_csv(std::ostream& os, const harness::Experiment& e);
std::string summary_json(const harness::Experiment& e);
/// Writes ellipses/run<r>_k<k>_<filter>[_<kind>].csv; returns the file count.
int write_ellipses(const std::filesystem::path& dir, const harness::Experiment& e);

/// All of the above into `dir`.
void emit_outputs(const std::filesystem::path& dir, const harness::Experiment& e);

}  // namespace smf::outputs
