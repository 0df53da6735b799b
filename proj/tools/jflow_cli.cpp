#include "jflow/app.hpp"
#include "jflow/error.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

void print_summary(const jflow::app::RunRecord& rec) {
  for (const auto& v : rec.verdicts) {
    std::printf("%-4s %-40s value=%-14.8g bound=%-14.8g %s\n", v.ok ? "ok" : "FAIL", v.name.c_str(), v.value,
                v.bound, v.detail.c_str());
  }
  for (const auto& [k, v] : rec.scalars) std::printf("     %-40s %.12g\n", k.c_str(), v);
  for (const auto& n : rec.notes) std::printf("note: %s\n", n.c_str());
  for (const auto& e : rec.errors) std::printf("error: %s\n", e.c_str());
  std::printf("config %s, exit %d\n", rec.config_hash.c_str(), rec.exit_code());
}

} // namespace

int main(int argc, char** argv) {
  CLI::App cli{"J-flow experiments on flat complex tori"};
  std::string config, command = "run", out, eps, preset;
  std::optional<std::uint64_t> seed;
  cli.add_option("--config", config, "INI configuration file")->check(CLI::ExistingFile);
  cli.add_option("--command", command, "One of: " + join(jflow::app::command_names()))
      ->check(CLI::IsMember(jflow::app::command_names()));
  cli.add_option("--out", out, "Output directory");
  cli.add_option("--eps", eps, "Comma-separated regularization parameters");
  cli.add_option("--preset", preset, "Built-in data: " + join(jflow::preset_names()));
  cli.add_option("--seed", seed, "Seed for randomized initial potentials");
  CLI11_PARSE(cli, argc, argv);

  std::map<std::string, std::string> overrides;
  if (!out.empty()) overrides["out"] = out;
  if (!eps.empty()) overrides["eps"] = eps;
  if (!preset.empty()) overrides["preset"] = preset;
  if (seed) overrides["seed"] = std::to_string(*seed);

  if (config.empty() && preset.empty() && command != "report") {
    std::cerr << "either --config or --preset is required\n";
    return 2;
  }
  try {
    const jflow::app::RunConfig cfg =
        config.empty() ? jflow::app::parse_config("", overrides) : jflow::app::load_config(config, overrides);
    const jflow::app::RunRecord rec = jflow::app::execute(cfg, command);
    print_summary(rec);
    return rec.exit_code();
  } catch (const jflow::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
