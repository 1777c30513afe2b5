#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mzweak/app/commands.hpp"
#include "mzweak/app/config.hpp"
#include "mzweak/errors.hpp"

namespace {

using nlohmann::json;

/// Command-line values layered over the config file before validation.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> input;
  std::optional<std::string> format;
  std::optional<std::string> method;
  std::optional<std::size_t> frames;
  bool stabilized = false;
  bool no_svg = false;
  bool no_timestamp = false;
  bool print_config = false;
};

json read_config_document(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw mzweak::ConfigError("cannot open config " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw mzweak::ConfigError("config " + path + ": top level must be an object");
    /// A run manifest carries its resolved configuration and can be replayed directly.
    if (j.value("tool", "") == "mzweak" && j.contains("config") && j["config"].is_object()) return j["config"];
    return j;
  } catch (const json::parse_error& e) {
    throw mzweak::ConfigError("config " + path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate, fit and analyse interferometric measurement of non-Hermitian operator expectations"};
  app.set_version_flag("--version", std::string(MZWEAK_VERSION));
  Overrides o;
  app.add_option("-c,--config", o.config_path, "JSON experiment configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Master RNG seed");
  app.add_option("-o,--out", o.out, "Output directory");
  app.add_option("-i,--input", o.input, "Input profile CSV (fit mode)");
  app.add_option("--format", o.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--method", o.method, "Visibility extraction method")
      ->check(CLI::IsMember({"full_model", "envelope", "two_beam"}));
  app.add_option("--frames", o.frames, "Frames per angle and arm")->check(CLI::PositiveNumber);
  app.add_flag("--stabilized", o.stabilized, "Phase-stabilized frames (default: unstabilized)");
  app.add_flag("--no-svg", o.no_svg, "Skip SVG plots");
  app.add_flag("--no-timestamp", o.no_timestamp, "Omit wall-clock times from outputs");
  app.add_flag("--print-config", o.print_config, "Print the resolved configuration and exit");
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::optional<std::string> mode;
  std::string figure;
  for (const char* name : {"decompose", "mzi-theory", "synth", "fit", "sweep", "weakmeas"}) {
    app.add_subcommand(name, std::string("Run the ") + name + " mode")->callback([&mode, name] { mode = name; });
  }
  auto* reproduce = app.add_subcommand("reproduce", "Regenerate one figure's data and plot");
  reproduce->add_option("figure", figure, "fig4, fig5, fig6, fig8, fig9 or fig10")
      ->required()
      ->check(CLI::IsMember({"fig4", "fig5", "fig6", "fig8", "fig9", "fig10"}));
  reproduce->callback([&] { mode = "reproduce"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    json doc = read_config_document(o.config_path);
    if (mode) doc["mode"] = *mode;
    if (!figure.empty()) doc["figure"]["id"] = figure;
    if (o.seed) doc["seed"] = *o.seed;
    if (o.out) doc["paths"]["output"] = *o.out;
    if (o.input) doc["paths"]["input"] = *o.input;
    if (o.format) doc["format"] = *o.format;
    if (o.method) doc["fit"]["method"] = *o.method;
    if (o.frames) doc["frames"]["n_frames"] = *o.frames;
    if (o.stabilized) doc["stabilized"] = true;
    if (o.no_svg) doc["svg"] = false;
    if (o.no_timestamp) doc["timestamps"] = false;
    if (!doc.contains("mode")) {
      std::cerr << "error: no mode given (use a subcommand or set \"mode\" in the config)\n" << app.help();
      return 2;
    }

    const auto cfg = mzweak::app::parse_config(doc);
    if (o.print_config) {
      std::cout << mzweak::app::to_json(cfg).dump(2) << "\n";
      return 0;
    }
    const auto result = mzweak::app::run(cfg, std::cout);
    std::cout << "wrote " << result.outputs.size() << " file(s) and manifest.json to " << result.output_dir.string()
              << "\n";
    return 0;
  } catch (const mzweak::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.family());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
