#pragma once

#include "jflow/diagnostics.hpp"
#include "jflow/flow.hpp"
#include "jflow/ma.hpp"
#include "jflow/presets.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace jflow::app {

inline constexpr int kSchemaVersion = 1;

enum class Backend { full, split };

struct DiagnosticsConfig {
  double sup_phi_budget = 1e300;
  double sup_phidot_budget = 1e300;
  double max_ratio = 1.1;
  double trace_tolerance = 1e-8;
  double monitor_tolerance = 1e-8;
  double q_slack = 1.0;
  double region_threshold = 0.1;
  int q_stride = 10; ///< history rows between Q evaluations
  QMonitorConfig q;
};

/// Initial potential: fixed modes plus `random_modes` band-limited modes
/// drawn from the seed.
struct InitConfig {
  std::vector<FourierMode> modes;
  int random_modes = 0;
  double random_amplitude = 0.0;
  int random_band = 2;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  int n = 16;
  std::array<double, 4> offsets{};
  Backend backend = Backend::split;
  std::string preset_name;
  PresetSpec preset; ///< resolved forms (preset with explicit overrides applied)
  FlowConfig flow;
  MASolverConfig ma;
  std::vector<double> eps_list{0.0};
  InitConfig init;
  DiagnosticsConfig diagnostics;
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> snapshot; ///< input field for `functionals`
  int path_steps = 64;                           ///< Mabuchi path resolution
  std::string source_path;                        ///< config file, if any
  std::map<std::string, std::string> overrides;   ///< command-line settings applied on top of the file

  /// Canonical text of every field; the basis of the config hash.
  std::string canonical() const;
  std::string hash() const;

  Grid torus_grid() const;
  Grid plane_grid() const;
  ScalarField initial_potential() const; ///< on the torus grid
  SplitField initial_split() const;      ///< split backend only
};

/// Parses INI text (top-level keys plus [flow], [ma], [init], [diagnostics],
/// [chi0], [omega0], [omega_hat] sections). Every problem is collected and
/// reported together in one ConfigError.
/// `overrides` maps dotted keys (e.g. "eps", "flow.max_time") to raw values
/// and takes precedence over the text.
RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const std::map<std::string, std::string>& overrides = {});

/// Re-runs the config validation after programmatic edits.
void validate(const RunConfig& cfg);

struct Verdict {
  std::string name;
  bool ok = false;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;

  bool operator==(const Verdict&) const = default;
};

struct SeriesRow {
  std::string label;
  double eps = 0.0;
  HistoryRow h;

  bool operator==(const SeriesRow&) const = default;
};

struct RunRecord {
  int schema_version = kSchemaVersion;
  std::string command;
  std::string config_hash;
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
  std::vector<SeriesRow> rows;
  std::vector<Verdict> verdicts;
  std::map<std::string, double> scalars;
  std::vector<std::string> errors;
  std::vector<std::string> artifacts; ///< relative to the record's directory
  std::vector<std::string> notes;

  bool ok() const;
  int exit_code() const { return ok() ? 0 : 1; }
  bool operator==(const RunRecord&) const = default;
};

/// Commands: check-classes, run, family, solve-ma, functionals, report.
/// Writes run.json and the artifacts into cfg.out. Module errors end up in
/// RunRecord::errors.
RunRecord execute(const RunConfig& cfg, const std::string& command);

std::string to_json(const RunRecord& rec);
RunRecord from_json(const std::string& text);

void write_record(const std::filesystem::path& path, const RunRecord& rec);
/// Throws FormatError on corrupt input. Integrity problems go to `warnings`:
/// missing artifacts and a config whose current hash differs from the recorded one.
RunRecord read_record(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Plot-ready CSV of the rows, with fixed 17-digit formatting.
std::string series_csv(const std::vector<SeriesRow>& rows);

std::vector<std::string> command_names();

} // namespace jflow::app
