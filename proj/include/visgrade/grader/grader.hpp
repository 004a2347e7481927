#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "visgrade/checks/checks.hpp"
#include "visgrade/rubric/rubric.hpp"

namespace visgrade::grader {

namespace fs = std::filesystem;

std::string grader_version();

struct Submission {
  fs::path root_dir;
  std::string entry_file;  // relative to root_dir; empty uses the rubric's
  std::string id;
};

enum class Status { pass, fail, error, advisory };
std::string to_string(Status s);

struct TestOutcome {
  std::string test_id;
  rubric::Category category = rubric::Category::advisory;
  double points_awarded = 0;
  double points_possible = 0;
  Status status = Status::advisory;
  std::vector<std::string> feedback;
  /// Raw error text, stack of causes. Never shown to students.
  std::optional<std::string> instructor_detail;
};

/// Whether grading ran to completion. `submission_error` covers pages that
/// fail to load; `grader_error` covers infrastructure failures.
enum class RunStatus { graded, submission_error, grader_error };
std::string to_string(RunStatus s);

struct GradeReport {
  std::string submission_id;
  double score = 0;
  double max_score = 0;
  std::vector<TestOutcome> outcomes;
  std::optional<std::string> screenshot_path;
  long long duration_ms = 0;
  std::string grader_version;
  RunStatus status = RunStatus::graded;
  std::vector<std::string> instructor_notes;
};

// ---- static file server ----

/// Loopback HTTP server over a merged view of a submission directory and a
/// shared-assets directory; submission files shadow shared ones. HTML
/// responses get the page-error probe injected. Requests escaping the roots
/// get 403 and are logged; missing files get a 404 page whose title carries
/// the not-found marker.
class StaticServer {
 public:
  /// Throws PortExhausted.
  StaticServer(fs::path root, std::optional<fs::path> shared_assets = std::nullopt);
  ~StaticServer();
  StaticServer(const StaticServer&) = delete;
  StaticServer& operator=(const StaticServer&) = delete;

  std::string base_url() const;
  int port() const;
  /// One line per refused or failed request ("PathTraversalAttempt: /../x").
  std::vector<std::string> log() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Script inserted at the top of every served HTML page.
const std::string& error_probe_script();
/// Inserts the probe after <head> (or the html start tag, or at the front).
std::string inject_probe(std::string html);

// ---- grading ----

enum class Mode { live, static_snapshot };

struct GradeOptions {
  Mode mode = Mode::static_snapshot;
  std::string webdriver_url = "http://localhost:9515";
  std::optional<fs::path> shared_assets;
  std::optional<fs::path> screenshot_out;
  int session_retries = 2;
};

/// Runs one interaction test against the live page. Static grading passes
/// none and such tests report an error outcome.
using InteractionRunner = std::function<checks::CheckResult(const rubric::InteractionCheck&)>;

/// Rubric-order outcomes for one snapshot. Advisory tests run first; a test
/// that references a missing required element is not run and reports
/// "skipped: prerequisite missing <selector>".
std::vector<TestOutcome> grade_document(const dom::Document& doc, const rubric::RubricSpec& rubric,
                                        const InteractionRunner& interactions = nullptr);

/// Never throws for submission or infrastructure failures; those become
/// zero-score reports. Throws RubricInvalid only for unusable rubrics.
GradeReport grade(const Submission& sub, const rubric::RubricSpec& rubric, const GradeOptions& options);

/// Reports in input order. `parallelism` workers each grade whole
/// submissions. Here `options.screenshot_out` names a directory that
/// receives <id>.png per submission.
std::vector<GradeReport> grade_batch(const std::vector<Submission>& subs, const rubric::RubricSpec& rubric,
                                     const GradeOptions& options, int parallelism);

/// Every test at zero with the same explanation; score 0.
GradeReport zero_report(const std::string& submission_id, const rubric::RubricSpec& rubric, RunStatus status,
                        const std::string& student_message, const std::string& instructor_detail);

// ---- rendering ----

/// The report contract. `canonical` writes duration_ms as 0 so that reports
/// of identical inputs are byte-identical.
std::string render_json(const GradeReport& report, bool canonical = false);
std::string render_text(const GradeReport& report);
/// Instructor-only diagnostics: per-test error details and run notes.
std::string render_sidecar(const GradeReport& report);
std::string summary_csv(const std::vector<GradeReport>& reports);

}  // namespace visgrade::grader
