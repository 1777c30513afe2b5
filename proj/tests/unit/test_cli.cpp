#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mzweak/app/commands.hpp"
#include "mzweak/app/config.hpp"
#include "mzweak/errors.hpp"

namespace {

using namespace mzweak;
using nlohmann::json;
namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("mzweak_cli_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_schema() {
  std::ifstream in(MZWEAK_SCHEMA_PATH);
  return json::parse(in);
}

/// Small, fast configuration for exercising each mode end to end.
app::ExperimentConfig quick_config(app::Mode mode, const fs::path& out) {
  app::ExperimentConfig c;
  c.mode = mode;
  c.seed = 11;
  c.timestamps = false;
  c.paths.output = out.string();
  c.theta = {40.0, 50.0, 5.0};
  c.frames.n_frames = 3;
  c.detector.n_pixels = 512;
  c.envelope.mu = 256;
  c.envelope.sigma = 60;
  return c;
}

TEST(Config, EmptyDocumentGivesDefaults) {
  const auto c = app::parse_config(json::object());
  EXPECT_EQ(c.mode, app::Mode::reproduce);
  EXPECT_EQ(c.format, app::OutputFormat::csv);
  EXPECT_EQ(c.frames.n_frames, 100u);
  EXPECT_EQ(c.fit.method, fringe::FitMethod::full_model);
  EXPECT_EQ(c.theta.radians().size(), 181u);
  EXPECT_EQ(c.decompose.op_name, "lowering");
}

TEST(Config, UnknownKeysRejectedAtEveryLevel) {
  EXPECT_THROW(app::parse_config(json{{"bogus", 1}}), ConfigError);
  const json defaults = app::to_json(app::ExperimentConfig{});
  std::function<void(const json&, json::json_pointer)> walk = [&](const json& node, json::json_pointer ptr) {
    if (!node.is_object()) return;
    json doc = defaults;
    doc[ptr / "not_a_key"] = 1;
    EXPECT_THROW(app::parse_config(doc), ConfigError) << ptr.to_string();
    for (const auto& [k, v] : node.items()) walk(v, ptr / k);
  };
  walk(defaults, json::json_pointer{});
}

TEST(Config, TypeAndRangeErrors) {
  EXPECT_THROW(app::parse_config(json{{"mode", "nope"}}), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"seed", "abc"}}), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"format", "xml"}}), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"frames", {{"n_frames", 1}}}}), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"fit", {{"method", "magic"}}}}), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"decompose", {{"operator", "nope"}}}}), ConfigError);
  EXPECT_THROW(app::parse_config(json{{"decompose", {{"psi", json::array({1})}}}}), ConfigError);
}

TEST(Config, PresetsAndExplicitEntries) {
  auto c = app::parse_config(json{{"decompose", {{"operator", "pauli_y"}, {"psi", "r"}}}});
  EXPECT_EQ(c.decompose.op(0, 1), jones::Complex(0, -1));
  EXPECT_NEAR(std::abs(c.decompose.psi.v), std::sqrt(0.5), 1e-15);
  c = app::parse_config(json::parse(R"({"decompose":{"operator":[[0,0],[1,0],[0,0],[0,0]],"psi":[[1,0],[0,0]]}})"));
  EXPECT_EQ(c.decompose.op(0, 1), jones::Complex(1, 0));
  EXPECT_TRUE(c.decompose.op_name.empty());
}

TEST(Config, JsonRoundTrip) {
  app::ExperimentConfig c;
  c.mode = app::Mode::sweep;
  c.seed = 987654321987654321ULL;
  c.imperfection.retardance_rad = 0.2;
  c.imperfection.compensation_axis_deg = 10.0;
  c.fit.method = fringe::FitMethod::envelope;
  c.frames.phase_mode = fringe::FramePhase::drift;
  c.figure.id = app::Figure::fig9;
  c.decompose.op = jones::pauli_x();
  c.decompose.op_name.clear();
  const json j = app::to_json(c);
  EXPECT_EQ(app::to_json(app::parse_config(j)), j);
  EXPECT_EQ(app::parse_config(j).seed, c.seed);
}

/// Every resolved key appears in the schema and every schema property is resolved.
void compare_with_schema(const json& resolved, const json& schema, const std::string& where) {
  ASSERT_TRUE(schema.contains("properties")) << where;
  EXPECT_EQ(schema.value("additionalProperties", true), false) << where;
  std::set<std::string> a, b;
  for (const auto& [k, v] : resolved.items()) a.insert(k);
  for (const auto& [k, v] : schema["properties"].items()) b.insert(k);
  EXPECT_EQ(a, b) << where;
  for (const auto& [k, v] : resolved.items()) {
    const auto& sub = schema["properties"][k];
    if (v.is_object() && sub.contains("properties")) compare_with_schema(v, sub, where + "/" + k);
  }
}

TEST(Config, SchemaMatchesResolvedKeys) {
  compare_with_schema(app::to_json(app::ExperimentConfig{}), load_schema(), "");
}

TEST(Config, SchemaDefaultsMatchParser) {
  const json defaults = app::to_json(app::ExperimentConfig{});
  std::function<void(const json&, const json&, const std::string&)> walk = [&](const json& r, const json& s,
                                                                                const std::string& where) {
    for (const auto& [k, v] : r.items()) {
      const auto& sub = s["properties"][k];
      if (v.is_object()) {
        walk(v, sub, where + "/" + k);
      } else if (sub.contains("default")) {
        if (v.is_number()) {
          EXPECT_DOUBLE_EQ(v.get<double>(), sub["default"].get<double>()) << where << "/" << k;
        } else {
          EXPECT_EQ(v, sub["default"]) << where << "/" << k;
        }
      }
    }
  };
  walk(defaults, load_schema(), "");
}

void expect_manifest(const app::RunResult& r, app::Mode mode) {
  const auto m = json::parse(slurp(r.output_dir / "manifest.json"));
  EXPECT_EQ(m.at("tool"), "mzweak");
  EXPECT_EQ(m.at("mode"), app::to_string(mode));
  EXPECT_TRUE(m.at("config_hash").get<std::string>().starts_with("fnv1a64:"));
  EXPECT_TRUE(m.at("started_at").is_null());
  EXPECT_EQ(m.at("outputs").size(), r.outputs.size());
  int manifests = 0;
  for (const auto& e : fs::directory_iterator(r.output_dir)) manifests += e.path().filename() == "manifest.json";
  EXPECT_EQ(manifests, 1);
  for (const auto& f : r.outputs) EXPECT_TRUE(fs::exists(r.output_dir / f)) << f;
  EXPECT_EQ(app::to_json(app::parse_config(m.at("config"))), m.at("config"));
}

TEST(Run, EveryModeWritesOutputsAndManifest) {
  std::ostringstream log;
  for (auto mode : {app::Mode::decompose, app::Mode::mzi_theory, app::Mode::synth, app::Mode::sweep,
                    app::Mode::weakmeas}) {
    const auto dir = fresh_dir("mode_" + app::to_string(mode));
    const auto r = app::run(quick_config(mode, dir), log);
    EXPECT_FALSE(r.outputs.empty());
    expect_manifest(r, mode);
  }
}

TEST(Run, FitModeReadsSynthesizedProfile) {
  std::ostringstream log;
  const auto dir = fresh_dir("fit");
  auto synth = quick_config(app::Mode::synth, dir / "synth");
  app::run(synth, log);
  for (auto method : {fringe::FitMethod::full_model, fringe::FitMethod::envelope, fringe::FitMethod::two_beam}) {
    auto fit = quick_config(app::Mode::fit, dir / ("fit_" + std::to_string(static_cast<int>(method))));
    fit.paths.input = (dir / "synth" / "profile_0000.csv").string();
    fit.fit.method = method;
    const auto r = app::run(fit, log);
    expect_manifest(r, app::Mode::fit);
  }
  auto missing = quick_config(app::Mode::fit, dir / "missing");
  EXPECT_THROW(app::run(missing, log), ConfigError);
}

TEST(Run, FigureModes) {
  std::ostringstream log;
  for (auto fig : {app::Figure::fig4, app::Figure::fig5, app::Figure::fig6, app::Figure::fig8, app::Figure::fig9,
                   app::Figure::fig10}) {
    const auto dir = fresh_dir("repro_" + app::to_string(fig));
    auto c = quick_config(app::Mode::reproduce, dir);
    c.figure.id = fig;
    const auto r = app::run(c, log);
    expect_manifest(r, app::Mode::reproduce);
  }
}

TEST(Run, JsonFormatAndNoSvg) {
  std::ostringstream log;
  const auto dir = fresh_dir("jsonfmt");
  auto c = quick_config(app::Mode::mzi_theory, dir);
  c.format = app::OutputFormat::json;
  c.svg = false;
  const auto r = app::run(c, log);
  for (const auto& f : r.outputs) {
    EXPECT_EQ(fs::path(f).extension(), ".json") << f;
  }
  const auto rows = json::parse(slurp(dir / "mzi_theory.json"));
  ASSERT_TRUE(rows.is_array());
  EXPECT_TRUE(rows[0].contains("v_with_r"));
}

TEST(Run, SweepIsByteDeterministic) {
  std::ostringstream log;
  std::string first;
  for (int rep = 0; rep < 2; ++rep) {
    const auto dir = fresh_dir("determinism");
    const auto r = app::run(quick_config(app::Mode::sweep, dir), log);
    std::string all;
    for (const auto& f : r.outputs) all += f + "\n" + slurp(dir / f);
    all += slurp(dir / "manifest.json");
    if (rep == 0) {
      first = all;
    } else {
      EXPECT_EQ(all, first);
    }
  }
}

TEST(Run, DegenerateArmIsRecordedNotFatal) {
  auto c = quick_config(app::Mode::sweep, fresh_dir("degenerate"));
  c.fit.method = fringe::FitMethod::envelope;
  c.detector = {};
  c.envelope = {};
  const double thetas[] = {0.0, 3.14159265358979323846 / 4};
  const auto rows = app::run_mzi_sweep(c, thetas);
  ASSERT_EQ(rows.size(), 2u);

  ASSERT_FALSE(rows[0].failures.empty());
  ASSERT_TRUE(rows[0].without_r.has_value());
  EXPECT_TRUE(std::isnan(rows[0].without_r->visibility_mean));
  EXPECT_EQ(rows[0].without_r->n_frames, 0u);
  EXPECT_EQ(rows[0].without_r->n_failed, c.frames.n_frames);
  EXPECT_FALSE(rows[0].weak_value_abs.has_value());

  EXPECT_TRUE(rows[1].failures.empty());
  ASSERT_TRUE(rows[1].weak_value_abs.has_value());
  EXPECT_NEAR(*rows[1].weak_value_abs, 0.5, 0.025);
}

TEST(Hash, Fnv1aKnownVectors) {
  EXPECT_EQ(app::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(app::fnv1a_hex("a"), "af63dc4c8601ec8c");
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MZWEAK_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Binary, ExitCodes) {
  const auto dir = fresh_dir("binary");
  fs::create_directories(dir);
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("--no-such-flag"), 2);
  EXPECT_EQ(run_cli(""), 2);
  std::ofstream(dir / "empty.csv").close();
  EXPECT_EQ(run_cli("fit -i " + (dir / "empty.csv").string() + " -o " + (dir / "o").string()), 2);
  std::ofstream(dir / "bad.json") << "{\"frames\": {\"n_frames\": 0}}";
  EXPECT_EQ(run_cli("-c " + (dir / "bad.json").string() + " sweep"), 2);
  {
    std::ofstream flat(dir / "flat.csv");
    flat << "pixel_index,intensity\n";
    for (int i = 0; i < 256; ++i) flat << i << ",1\n";
  }
  EXPECT_EQ(run_cli("fit --method envelope -i " + (dir / "flat.csv").string() + " -o " + (dir / "o2").string()), 4);
  EXPECT_EQ(run_cli("decompose --no-timestamp -o " + (dir / "d").string()), 0);
  EXPECT_EQ(run_cli("-c " + (dir / "d" / "manifest.json").string() + " -o " + (dir / "d2").string()), 0);
  EXPECT_EQ(slurp(dir / "d" / "decompose.json"), slurp(dir / "d2" / "decompose.json"));
}

}  // namespace
