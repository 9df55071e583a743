#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "afc/diagnostics.hpp"
#include "afc/simulator.hpp"

namespace afc {

/// Files written by emit_trace.
struct TraceFiles {
  std::string states;   ///< states.csv
  std::string events;   ///< events.csv
  std::string summary;  ///< summary.json
  std::string series;   ///< series.csv (series, t, value)
};

/// Column names of the states CSV.
std::vector<std::string> state_columns(const SimulationTrace& trace);

void write_states_csv(const SimulationTrace& trace, const std::string& path);
void write_events_csv(const SimulationTrace& trace, const std::string& path);
void write_series_csv(const SimulationTrace& trace, const std::string& path);

nlohmann::json summary_to_json(const SimulationTrace& trace, const std::optional<ZenoReport>& zeno,
                               const std::optional<LyapunovReport>& lyapunov);

/// Writes the four files into `dir` (created when missing). Throws IoError
/// naming the path on failure.
TraceFiles emit_trace(const SimulationTrace& trace, const std::string& dir,
                      const std::optional<ZenoReport>& zeno = std::nullopt,
                      const std::optional<LyapunovReport>& lyapunov = std::nullopt,
                      const std::string& scenario_name = "");

/// (agent 0-based, t) pairs from an events CSV.
std::vector<Event> read_events_csv(const std::string& path);

/// Event counts laid out one column per agent, leaders first:
///   agent  | L1 | L2 | ... | F1 | ...
///   events | .. |
/// A positive step count adds a row of trigger frequencies in percent.
std::string event_count_table(const std::vector<int>& counts, int leader_count, int steps = 0);

/// Human-readable report for a trace directory (summary + count table).
std::string report_trace_dir(const std::string& dir);

/// Dense matrix as CSV, row-major, 17 significant digits.
void write_matrix_csv(const Matrix& m, const std::string& path);
Matrix read_matrix_csv(const std::string& path);

/// FNV-1a 64-bit hash of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::string& path);

}  // namespace afc
