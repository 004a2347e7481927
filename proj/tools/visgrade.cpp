// visgrade: grade, batch-grade and validate against a YAML rubric.
//
// Exit status: 0 when grading ran (whatever the score), 1 when the grader
// itself failed, 2 for bad arguments or an invalid rubric.

#include <glob.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "visgrade/error.hpp"
#include "visgrade/grader/grader.hpp"
#include "visgrade/rubric/rubric.hpp"

namespace fs = std::filesystem;
using namespace visgrade;

namespace {

constexpr int kOk = 0;
constexpr int kMalfunction = 1;
constexpr int kUsage = 2;

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::vector<fs::path> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<fs::path> out;
  if (::glob(pattern.c_str(), GLOB_NOSORT, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) {
      if (fs::is_directory(g.gl_pathv[i])) out.emplace_back(g.gl_pathv[i]);
    }
  }
  globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

std::string submission_id(const fs::path& dir) {
  const auto p = dir.lexically_normal();
  const auto name = (p.has_filename() ? p : p.parent_path()).filename().string();
  return name.empty() ? "submission" : name;
}

struct Common {
  std::string rubric;
  std::string mode = "live";
  std::string webdriver;
  std::string shared_assets;
  std::string entry;

  grader::GradeOptions options() const {
    grader::GradeOptions o;
    o.mode = mode == "static" ? grader::Mode::static_snapshot : grader::Mode::live;
    if (!webdriver.empty()) {
      o.webdriver_url = webdriver;
    } else if (const char* env = std::getenv("VISGRADE_WEBDRIVER_URL"); env && *env) {
      o.webdriver_url = env;
    }
    if (!shared_assets.empty()) o.shared_assets = fs::path(shared_assets);
    return o;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--rubric", c.rubric, "Rubric YAML file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--mode", c.mode, "live (browser) or static (pre-rendered snapshot)")
      ->check(CLI::IsMember({"live", "static"}))
      ->capture_default_str();
  cmd->add_option("--webdriver", c.webdriver, "Automation server URL (default $VISGRADE_WEBDRIVER_URL or http://localhost:9515)");
  cmd->add_option("--shared-assets", c.shared_assets, "Directory of shared libraries and datasets")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--entry", c.entry, "Entry file relative to the submission (default from the rubric)");
}

int validate(const std::string& path) {
  try {
    const auto r = rubric::load_rubric(path);
    std::cout << fmt::format("ok: {} ({} tests, {} points)\n", r.meta.name, r.tests.size(), r.meta.total_points);
    return kOk;
  } catch (const Error& e) {
    std::cerr << fmt::format("{}: {}\n", e.kind(), e.what());
    return kUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rubric-driven grader for D3/SVG visualizations"};
  app.set_version_flag("--version", grader::grader_version());
  app.require_subcommand(1);

  Common grade_args;
  std::string submission, out, screenshot, sidecar, format = "json", id;
  bool canonical = false;
  auto* grade_cmd = app.add_subcommand("grade", "Grade one submission directory");
  add_common(grade_cmd, grade_args);
  grade_cmd->add_option("--submission", submission, "Submission directory")->required()->check(CLI::ExistingDirectory);
  grade_cmd->add_option("--id", id, "Submission id (default: directory name)");
  grade_cmd->add_option("--out", out, "Report path (default: stdout)");
  grade_cmd->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  grade_cmd->add_flag("--canonical", canonical, "Write duration_ms as 0 for byte-stable reports");
  grade_cmd->add_option("--screenshot", screenshot, "PNG path for the rendered page (live mode)");
  grade_cmd->add_option("--sidecar", sidecar, "Instructor-only diagnostics JSON");

  Common batch_args;
  std::string pattern, out_dir, csv;
  int parallelism = 1;
  bool batch_canonical = false;
  auto* batch_cmd = app.add_subcommand("batch", "Grade every submission directory matching a glob");
  add_common(batch_cmd, batch_args);
  batch_cmd->add_option("--submissions", pattern, "Glob of submission directories, e.g. 'subs/*'")->required();
  batch_cmd->add_option("--parallelism", parallelism, "Concurrent workers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  batch_cmd->add_option("--out-dir", out_dir, "Receives <id>.json, <id>.sidecar.json and <id>.png")->required();
  batch_cmd->add_option("--csv", csv, "Summary CSV path");
  batch_cmd->add_flag("--canonical", batch_canonical, "Write duration_ms as 0 in the JSON reports");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a rubric and exit");
  validate_cmd->add_option("--rubric", validate_path, "Rubric YAML file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  if (*validate_cmd) return validate(validate_path);

  const auto& common = *grade_cmd ? grade_args : batch_args;
  std::optional<rubric::RubricSpec> rubric;
  try {
    rubric = rubric::load_rubric(common.rubric);
  } catch (const Error& e) {
    std::cerr << fmt::format("{}: {}\n", e.kind(), e.what());
    return kUsage;
  }

  try {
    auto options = common.options();
    if (*grade_cmd) {
      if (!screenshot.empty()) options.screenshot_out = fs::path(screenshot);
      const grader::Submission sub{submission, common.entry, id.empty() ? submission_id(submission) : id};
      const auto report = grader::grade(sub, *rubric, options);
      const auto body = format == "text" ? grader::render_text(report) : grader::render_json(report, canonical);
      if (out.empty()) std::cout << body;
      else write_file(out, body);
      if (!sidecar.empty()) write_file(sidecar, grader::render_sidecar(report));
      if (report.status == grader::RunStatus::grader_error) {
        std::cerr << "grader error; see the sidecar for details\n";
        return kMalfunction;
      }
      return kOk;
    }

    const auto dirs = expand_glob(pattern);
    if (dirs.empty()) {
      std::cerr << "no submission directories match " << pattern << "\n";
      return kUsage;
    }
    std::vector<grader::Submission> subs;
    for (const auto& d : dirs) subs.push_back({d, common.entry, submission_id(d)});
    options.screenshot_out = options.mode == grader::Mode::live ? std::optional<fs::path>(out_dir) : std::nullopt;
    const auto reports = grader::grade_batch(subs, *rubric, options, parallelism);
    int failures = 0;
    for (const auto& r : reports) {
      write_file(fs::path(out_dir) / (r.submission_id + ".json"), grader::render_json(r, batch_canonical));
      write_file(fs::path(out_dir) / (r.submission_id + ".sidecar.json"), grader::render_sidecar(r));
      if (r.status == grader::RunStatus::grader_error) ++failures;
      std::cerr << fmt::format("{}: {} / {} ({})\n", r.submission_id, r.score, r.max_score, grader::to_string(r.status));
    }
    if (!csv.empty()) write_file(csv, grader::summary_csv(reports));
    return failures > 0 ? kMalfunction : kOk;
  } catch (const RubricInvalid& e) {
    std::cerr << fmt::format("{}: {}\n", e.kind(), e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kMalfunction;
  }
}
