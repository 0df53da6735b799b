#include "jflow/app.hpp"

#include "jflow/error.hpp"
#include "jflow/io.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace jflow::app {

using nlohmann::json;

namespace {

// JSON has no inf/nan; they travel as strings so the round trip stays exact.
json real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double real(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw FormatError("expected a number, got " + j.dump());
}

json row_json(const SeriesRow& r) {
  const HistoryRow& h = r.h;
  return {{"label", r.label},
          {"eps", real(r.eps)},
          {"t", real(h.t)},
          {"sup_phi", real(h.sup_phi)},
          {"sup_phidot", real(h.sup_phidot)},
          {"J", real(h.J)},
          {"I", real(h.I)},
          {"margin", real(h.margin)},
          {"residual", real(h.residual)},
          {"max_phidot", real(h.max_phidot)},
          {"min_phidot", real(h.min_phidot)},
          {"max_trace", real(h.max_trace)},
          {"trace_defect", real(h.trace_defect)},
          {"dissipated", real(h.dissipated)},
          {"step", h.step},
          {"dt", real(h.dt)}};
}

SeriesRow row_from(const json& j) {
  SeriesRow r;
  r.label = j.at("label").get<std::string>();
  r.eps = real(j.at("eps"));
  HistoryRow& h = r.h;
  h.t = real(j.at("t"));
  h.sup_phi = real(j.at("sup_phi"));
  h.sup_phidot = real(j.at("sup_phidot"));
  h.J = real(j.at("J"));
  h.I = real(j.at("I"));
  h.margin = real(j.at("margin"));
  h.residual = real(j.at("residual"));
  h.max_phidot = real(j.at("max_phidot"));
  h.min_phidot = real(j.at("min_phidot"));
  h.max_trace = real(j.at("max_trace"));
  h.trace_defect = real(j.at("trace_defect"));
  h.dissipated = real(j.at("dissipated"));
  h.step = j.at("step").get<std::size_t>();
  h.dt = real(j.at("dt"));
  return r;
}

} // namespace

bool RunRecord::ok() const {
  if (!errors.empty() || verdicts.empty()) return false;
  for (const auto& v : verdicts)
    if (!v.ok) return false;
  return true;
}

std::string to_json(const RunRecord& rec) {
  json j;
  j["schema_version"] = rec.schema_version;
  j["command"] = rec.command;
  j["config_hash"] = rec.config_hash;
  j["config_path"] = rec.config_path;
  j["overrides"] = rec.overrides;
  j["seed"] = rec.seed;
  j["started"] = rec.started;
  j["finished"] = rec.finished;
  j["rows"] = json::array();
  for (const auto& r : rec.rows) j["rows"].push_back(row_json(r));
  j["verdicts"] = json::array();
  for (const auto& v : rec.verdicts) {
    j["verdicts"].push_back(
        {{"name", v.name}, {"ok", v.ok}, {"value", real(v.value)}, {"bound", real(v.bound)}, {"detail", v.detail}});
  }
  j["scalars"] = json::object();
  for (const auto& [k, v] : rec.scalars) j["scalars"][k] = real(v);
  j["errors"] = rec.errors;
  j["artifacts"] = rec.artifacts;
  j["notes"] = rec.notes;
  j["exit_code"] = rec.exit_code();
  return j.dump(2) + "\n";
}

RunRecord from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("record is not valid JSON: ") + e.what());
  }
  try {
    RunRecord rec;
    rec.schema_version = j.at("schema_version").get<int>();
    if (rec.schema_version != kSchemaVersion) {
      throw FormatError("record schema version " + std::to_string(rec.schema_version) + " is not supported");
    }
    rec.command = j.at("command").get<std::string>();
    rec.config_hash = j.at("config_hash").get<std::string>();
    rec.config_path = j.at("config_path").get<std::string>();
    rec.overrides = j.at("overrides").get<std::map<std::string, std::string>>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.started = j.at("started").get<std::string>();
    rec.finished = j.at("finished").get<std::string>();
    for (const auto& r : j.at("rows")) rec.rows.push_back(row_from(r));
    for (const auto& v : j.at("verdicts")) {
      rec.verdicts.push_back({v.at("name").get<std::string>(), v.at("ok").get<bool>(), real(v.at("value")),
                              real(v.at("bound")), v.at("detail").get<std::string>()});
    }
    for (const auto& [k, v] : j.at("scalars").items()) rec.scalars[k] = real(v);
    rec.errors = j.at("errors").get<std::vector<std::string>>();
    rec.artifacts = j.at("artifacts").get<std::vector<std::string>>();
    rec.notes = j.at("notes").get<std::vector<std::string>>();
    return rec;
  } catch (const json::exception& e) {
    throw FormatError(std::string("record is malformed: ") + e.what());
  }
}

void write_record(const std::filesystem::path& path, const RunRecord& rec) { write_file_atomic(path, to_json(rec)); }

RunRecord read_record(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  RunRecord rec = from_json(text);
  if (!warnings) return rec;
  const auto dir = path.parent_path();
  for (const auto& a : rec.artifacts) {
    if (!std::filesystem::exists(dir / a)) warnings->push_back("integrity: artifact '" + a + "' is missing");
  }
  if (!rec.config_path.empty()) {
    if (!std::filesystem::exists(rec.config_path)) {
      warnings->push_back("integrity: config '" + rec.config_path + "' no longer exists");
    } else {
      try {
        const RunConfig cfg = load_config(rec.config_path, rec.overrides);
        if (cfg.hash() != rec.config_hash) {
          warnings->push_back("stale: config '" + rec.config_path + "' changed since the record was written (hash " +
                              cfg.hash() + ", recorded " + rec.config_hash + ")");
        }
      } catch (const ConfigError& e) {
        warnings->push_back("stale: config '" + rec.config_path + "' no longer parses");
      }
    }
  }
  return rec;
}

std::string series_csv(const std::vector<SeriesRow>& rows) {
  std::string out = "label,eps,t,sup_phi,sup_phidot,J,I,margin,residual,max_phidot,min_phidot,max_trace,dissipated,"
                    "step,dt\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out += buf;
  };
  for (const auto& r : rows) {
    const HistoryRow& h = r.h;
    out += r.label;
    for (double v : {r.eps, h.t, h.sup_phi, h.sup_phidot, h.J, h.I, h.margin, h.residual, h.max_phidot,
                     h.min_phidot, h.max_trace, h.dissipated})
      put(v);
    out += "," + std::to_string(h.step);
    put(h.dt);
    out += '\n';
  }
  return out;
}

std::vector<std::string> command_names() {
  return {"check-classes", "run", "family", "solve-ma", "functionals", "report"};
}

} // namespace jflow::app
