#include "afc/trace_io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "afc/errors.hpp"

namespace afc {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << std::setprecision(17);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string coord(const std::string& prefix, int agent, int k) {
  return prefix + std::to_string(agent + 1) + "_" + std::to_string(k + 1);
}

// Values of one sample in state_columns order.
std::vector<double> row_values(const SimulationTrace& trace, const TraceSample& s) {
  std::vector<double> out{s.t};
  const int nl = trace.leader_count;
  for (int i = 0; i < trace.agent_count; ++i) {
    for (int k = 0; k < trace.state_dim; ++k) out.push_back(s.p(i, k));
    if (trace.mode == ProtocolMode::Output) {
      for (int k = 0; k < trace.state_dim; ++k) out.push_back(s.z(i, k));
    }
    if (i < nl) {
      out.push_back(s.leader_gain(i));
    } else {
      for (int k = 0; k < trace.input_dim; ++k) out.push_back(s.y(i - nl, k));
      out.push_back(s.coupling(i - nl));
      out.push_back(s.state_gain(i - nl));
      out.push_back(s.estimate_gain(i - nl));
    }
  }
  out.push_back(s.errors.formation);
  out.push_back(s.errors.leader);
  out.push_back(s.errors.observer);
  out.push_back(s.errors.compensation);
  return out;
}

}  // namespace

std::vector<std::string> state_columns(const SimulationTrace& trace) {
  std::vector<std::string> cols{"t"};
  const int nl = trace.leader_count;
  for (int i = 0; i < trace.agent_count; ++i) {
    for (int k = 0; k < trace.state_dim; ++k) cols.push_back(coord("p", i, k));
    if (trace.mode == ProtocolMode::Output) {
      for (int k = 0; k < trace.state_dim; ++k) cols.push_back(coord("z", i, k));
    }
    const std::string id = std::to_string(i + 1);
    if (i < nl) {
      cols.push_back("leader_gain" + id);
    } else {
      for (int k = 0; k < trace.input_dim; ++k) cols.push_back(coord("y", i, k));
      cols.push_back("coupling" + id);
      cols.push_back("state_gain" + id);
      cols.push_back("estimate_gain" + id);
    }
  }
  for (const char* c : {"formation_error", "leader_error", "observer_error", "compensation_error"}) cols.push_back(c);
  return cols;
}

void write_states_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out = open_out(path);
  const auto cols = state_columns(trace);
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  for (const TraceSample& s : trace.samples) {
    const auto values = row_values(trace, s);
    for (std::size_t k = 0; k < values.size(); ++k) out << (k ? "," : "") << values[k];
    out << '\n';
  }
  finish(out, path);
}

void write_events_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "agent,t,step\n";
  for (const Event& e : trace.events) out << e.agent + 1 << ',' << e.t << ',' << e.step << '\n';
  finish(out, path);
}

void write_series_csv(const SimulationTrace& trace, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "series,t,value\n";
  const auto cols = state_columns(trace);
  std::vector<std::vector<double>> rows;
  for (const TraceSample& s : trace.samples) rows.push_back(row_values(trace, s));
  for (std::size_t c = 1; c < cols.size(); ++c) {
    for (const auto& r : rows) out << cols[c] << ',' << r[0] << ',' << r[c] << '\n';
  }
  // One step per event gives an event raster per agent.
  for (const Event& e : trace.events) out << "event" << e.agent + 1 << ',' << e.t << ",1\n";
  finish(out, path);
}

json summary_to_json(const SimulationTrace& trace, const std::optional<ZenoReport>& zeno,
                     const std::optional<LyapunovReport>& lyapunov) {
  json doc;
  const SimulationSummary& s = trace.summary;
  doc["mode"] = to_string(trace.mode);
  doc["agent_count"] = trace.agent_count;
  doc["leader_count"] = trace.leader_count;
  doc["dt"] = trace.dt;
  doc["t_end"] = trace.t_end;
  doc["total_steps"] = trace.total_steps;
  doc["final_errors"] = {{"formation", s.final_errors.formation},
                         {"leader", s.final_errors.leader},
                         {"observer", s.final_errors.observer},
                         {"compensation", s.final_errors.compensation}};
  json agents = json::array();
  for (std::size_t i = 0; i < s.agents.size(); ++i) {
    agents.push_back({{"agent", i + 1},
                      {"role", static_cast<int>(i) < trace.leader_count ? "leader" : "follower"},
                      {"events", s.agents[i].events},
                      {"frequency", s.agents[i].frequency},
                      {"min_gap", s.agents[i].min_gap}});
  }
  doc["agents"] = agents;
  doc["mean_frequency"] = s.mean_frequency;
  if (zeno) {
    json z;
    z["window"] = zeno->window;
    json suspects = json::array();
    for (int i : zeno->suspects) suspects.push_back(i + 1);
    z["suspects"] = suspects;
    json windows = json::array();
    for (const auto& a : zeno->agents) windows.push_back(a.window_counts);
    z["window_counts"] = windows;
    doc["zeno"] = z;
  }
  if (lyapunov) {
    doc["lyapunov"] = {{"holds", lyapunov->holds()},
                       {"max_excess", lyapunov->max_excess},
                       {"tolerance", lyapunov->tolerance},
                       {"violations", lyapunov->violations.size()}};
  }
  return doc;
}

TraceFiles emit_trace(const SimulationTrace& trace, const std::string& dir, const std::optional<ZenoReport>& zeno,
                      const std::optional<LyapunovReport>& lyapunov, const std::string& scenario_name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  TraceFiles files;
  files.states = (fs::path(dir) / "states.csv").string();
  files.events = (fs::path(dir) / "events.csv").string();
  files.summary = (fs::path(dir) / "summary.json").string();
  files.series = (fs::path(dir) / "series.csv").string();
  write_states_csv(trace, files.states);
  write_events_csv(trace, files.events);
  write_series_csv(trace, files.series);
  json doc = summary_to_json(trace, zeno, lyapunov);
  if (!scenario_name.empty()) doc["scenario"] = scenario_name;
  std::ofstream out(files.summary);
  if (!out) throw IoError("cannot write '" + files.summary + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + files.summary + "'");
  return files;
}

std::vector<Event> read_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("agent,t", 0) != 0) throw ParseError(path + ": missing events header");
  std::vector<Event> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, t, k;
    if (!std::getline(row, a, ',') || !std::getline(row, t, ',')) throw ParseError(path + ": bad row '" + line + "'");
    std::getline(row, k, ',');
    try {
      out.push_back({std::stoi(a) - 1, k.empty() ? 0 : std::stoi(k), std::stod(t)});
    } catch (const std::exception&) {
      throw ParseError(path + ": bad row '" + line + "'");
    }
  }
  return out;
}

std::string event_count_table(const std::vector<int>& counts, int leader_count, int steps) {
  std::vector<std::string> head{"agent"}, body{"events"}, rate{"frequency (%)"};
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const bool leader = static_cast<int>(i) < leader_count;
    head.push_back((leader ? "L" : "F") + std::to_string(leader ? i + 1 : i + 1 - leader_count));
    body.push_back(std::to_string(counts[i]));
    std::ostringstream pct;
    if (steps > 0) pct << std::fixed << std::setprecision(1) << 100.0 * counts[i] / steps;
    rate.push_back(pct.str());
  }
  const bool with_rate = steps > 0;
  std::size_t label = 0, width = 0;
  for (const auto* row : {&head, &body, &rate}) {
    if (row == &rate && !with_rate) continue;
    label = std::max(label, (*row)[0].size());
    for (std::size_t k = 1; k < row->size(); ++k) width = std::max(width, (*row)[k].size());
  }
  std::ostringstream os;
  for (const auto* row : {&head, &body, &rate}) {
    if (row == &rate && !with_rate) continue;
    for (std::size_t k = 0; k < row->size(); ++k) {
      os << (k ? " | " : "") << std::setw(static_cast<int>(k ? width : label)) << (*row)[k];
    }
    os << '\n';
  }
  return os.str();
}

std::string report_trace_dir(const std::string& dir) {
  const std::string summary_path = (fs::path(dir) / "summary.json").string();
  std::ifstream in(summary_path);
  if (!in) throw IoError("cannot read '" + summary_path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(summary_path + ": " + e.what());
  }
  const int n = doc.at("agent_count").get<int>();
  const int nl = doc.at("leader_count").get<int>();
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (const Event& e : read_events_csv((fs::path(dir) / "events.csv").string())) {
    if (e.agent < 0 || e.agent >= n) throw ParseError("event for unknown agent " + std::to_string(e.agent + 1));
    ++counts[e.agent];
  }
  std::ostringstream os;
  if (doc.contains("scenario")) os << "scenario: " << doc["scenario"].get<std::string>() << '\n';
  os << "mode: " << doc.at("mode").get<std::string>() << ", t_end = " << doc.at("t_end").get<double>()
     << ", dt = " << doc.at("dt").get<double>() << ", steps = " << doc.at("total_steps").get<int>() << '\n';
  const json& e = doc.at("final_errors");
  os << "final errors: formation " << e.at("formation").get<double>() << ", leader " << e.at("leader").get<double>()
     << ", observer " << e.at("observer").get<double>() << '\n';
  const int steps = doc.at("total_steps").get<int>();
  os << "mean trigger frequency: " << std::fixed << std::setprecision(2)
     << 100.0 * doc.at("mean_frequency").get<double>() << "%\n";
  os.unsetf(std::ios::fixed);
  os << std::setprecision(6);
  os << event_count_table(counts, nl, steps);
  if (doc.contains("zeno")) {
    const auto& s = doc["zeno"]["suspects"];
    os << "zeno-suspect agents: " << (s.empty() ? std::string("none") : s.dump()) << '\n';
  }
  if (doc.contains("lyapunov")) {
    os << "lyapunov bound: " << (doc["lyapunov"]["holds"].get<bool>() ? "holds" : "violated") << '\n';
  }
  return os.str();
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) out << (k ? "," : "") << m(i, k);
    out << '\n';
  }
  finish(out, path);
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(path + ": not a number: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError(path + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

std::string file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::uint64_t h = 1469598103934665603ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace afc
