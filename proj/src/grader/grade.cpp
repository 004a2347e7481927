#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "visgrade/error.hpp"
#include "visgrade/grader/grader.hpp"
#include "visgrade/interact/session.hpp"
#include "visgrade/text.hpp"

#ifndef VISGRADE_VERSION
#define VISGRADE_VERSION "0.0.0"
#endif

namespace visgrade::grader {

std::string grader_version() { return VISGRADE_VERSION; }

std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::error: return "error";
    case Status::advisory: return "advisory";
  }
  return "?";
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::graded: return "graded";
    case RunStatus::submission_error: return "submission_error";
    case RunStatus::grader_error: return "grader_error";
  }
  return "?";
}

namespace {

using rubric::Category;

// ---- prerequisites ----

std::string normalize_selector(std::string_view s) {
  std::string out;
  for (char c : text::trim(s)) {
    if (c == '>') {
      while (!out.empty() && out.back() == ' ') out.pop_back();
      out += '>';
    } else if (text::is_space(c)) {
      if (!out.empty() && out.back() != ' ' && out.back() != '>') out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

/// True when `missing` appears in `ref` as a whole run of compounds.
bool references(const std::string& ref, const std::string& missing) {
  const auto r = normalize_selector(ref), m = normalize_selector(missing);
  if (m.empty()) return false;
  for (auto at = r.find(m); at != std::string::npos; at = r.find(m, at + 1)) {
    const bool starts = at == 0 || r[at - 1] == ' ' || r[at - 1] == '>';
    const auto end = at + m.size();
    const bool ends = end == r.size() || r[end] == ' ' || r[end] == '>' || r[end] == ':';
    if (starts && ends) return true;
  }
  return false;
}

std::vector<std::string> selectors_of(const rubric::TestSpec& t, const rubric::RubricSpec& rubric) {
  std::vector<std::string> out;
  auto scale_refs = [&](const std::string& id) {
    if (const auto* s = rubric.find_scale(id)) {
      if (s->axis_group) out.push_back(s->axis_group->expression());
      if (s->color) out.push_back(s->color->marks.expression());
    }
  };
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, rubric::ScaleCheck>) {
          scale_refs(c.scale);
        } else if constexpr (std::is_same_v<T, rubric::PositionsCheck>) {
          out.push_back(c.marks.expression());
          for (const auto& e : c.encodings) scale_refs(e.scale);
        } else if constexpr (std::is_same_v<T, rubric::SortedCheck> || std::is_same_v<T, rubric::ConstantCheck>) {
          out.push_back(c.marks.expression());
        } else if constexpr (std::is_same_v<T, rubric::ColorGroupingCheck>) {
          for (const auto& g : c.groups) out.push_back(g.expression());
        } else if constexpr (std::is_same_v<T, rubric::AxisTicksCheck>) {
          scale_refs(c.scale);
        } else if constexpr (std::is_same_v<T, rubric::InteractionCheck>) {
          for (const auto& a : c.actions) {
            if (a.target) out.push_back(a.target->expression());
            if (a.destination) out.push_back(a.destination->expression());
          }
        }
      },
      t.check);
  return out;
}

// ---- outcomes ----

TestOutcome to_outcome(const rubric::TestSpec& t, const checks::CheckResult& r) {
  TestOutcome o;
  o.test_id = t.id;
  o.category = t.category;
  if (t.category == Category::advisory) {
    o.status = Status::advisory;
    o.feedback = r.detail_lines;
    if (!r.passed && !r.expected.empty()) {
      o.feedback.insert(o.feedback.begin(), {"Expected: " + r.expected, "Actual: " + r.actual});
    }
    if (r.error_kind) o.instructor_detail = *r.error_kind + ": " + r.actual;
    return o;
  }
  o.points_possible = t.points;
  if (r.error_kind) {
    o.status = Status::error;
    o.feedback = r.detail_lines;
    o.instructor_detail = *r.error_kind + ": " + r.actual;
  } else {
    o.status = r.passed ? Status::pass : Status::fail;
    o.points_awarded = std::clamp(r.passed ? t.points : t.points * r.credit, 0.0, t.points);
    if (!r.passed) o.feedback = {"Expected: " + r.expected, "Actual: " + r.actual};
    o.feedback.insert(o.feedback.end(), r.detail_lines.begin(), r.detail_lines.end());
  }
  if (o.status != Status::pass && t.feedback_hint) o.feedback.push_back("Hint: " + *t.feedback_hint);
  return o;
}

TestOutcome error_outcome(const rubric::TestSpec& t, std::vector<std::string> feedback, std::string detail) {
  TestOutcome o;
  o.test_id = t.id;
  o.category = t.category;
  o.points_possible = t.category == Category::advisory ? 0 : t.points;
  o.status = t.category == Category::advisory ? Status::advisory : Status::error;
  o.feedback = std::move(feedback);
  o.instructor_detail = std::move(detail);
  if (t.category != Category::advisory && t.feedback_hint) o.feedback.push_back("Hint: " + *t.feedback_hint);
  return o;
}

checks::CheckResult run_interaction(const rubric::InteractionCheck& c, const InteractionRunner& runner) {
  try {
    return runner(c);
  } catch (const Error& e) {
    auto r = checks::fail("the interaction to complete", fmt::format("{}: {}", e.kind(), e.what()),
                          {fmt::format("Could not perform the interaction: {}", e.what())});
    r.error_kind = e.kind();
    return r;
  }
}

}  // namespace

std::vector<TestOutcome> grade_document(const dom::Document& doc, const rubric::RubricSpec& rubric,
                                        const InteractionRunner& interactions) {
  std::vector<std::optional<TestOutcome>> outcomes(rubric.tests.size());
  checks::ScaleResolver scales(doc, rubric);

  std::vector<std::string> missing;
  for (const auto& f : rubric::validate_structure(rubric.structure, doc)) {
    if (!f.found) missing.push_back(f.selector);
  }

  for (std::size_t i = 0; i < rubric.tests.size(); ++i) {
    const auto& t = rubric.tests[i];
    if (t.category == Category::advisory) outcomes[i] = to_outcome(t, checks::run_check(t, doc, rubric, scales));
  }
  for (std::size_t i = 0; i < rubric.tests.size(); ++i) {
    const auto& t = rubric.tests[i];
    if (outcomes[i]) continue;
    std::optional<std::string> absent;
    for (const auto& ref : selectors_of(t, rubric)) {
      for (const auto& m : missing) {
        if (!absent && references(ref, m)) absent = m;
      }
    }
    if (absent) {
      outcomes[i] = error_outcome(t, {"skipped: prerequisite missing " + *absent},
                                  "prerequisite missing: " + *absent);
      continue;
    }
    if (const auto* ic = std::get_if<rubric::InteractionCheck>(&t.check)) {
      if (!interactions) {
        outcomes[i] = error_outcome(t, {"skipped: interaction tests need a live browser"},
                                    "static mode cannot run interaction tests");
      } else {
        outcomes[i] = to_outcome(t, run_interaction(*ic, interactions));
      }
      continue;
    }
    outcomes[i] = to_outcome(t, checks::run_check(t, doc, rubric, scales));
  }

  std::vector<TestOutcome> out;
  for (auto& o : outcomes) out.push_back(std::move(*o));
  return out;
}

GradeReport zero_report(const std::string& submission_id, const rubric::RubricSpec& rubric, RunStatus status,
                        const std::string& student_message, const std::string& instructor_detail) {
  GradeReport r;
  r.submission_id = submission_id;
  r.max_score = rubric.meta.total_points;
  r.grader_version = grader_version();
  r.status = status;
  for (const auto& t : rubric.tests) r.outcomes.push_back(error_outcome(t, {student_message}, instructor_detail));
  r.instructor_notes.push_back(instructor_detail);
  return r;
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string url_path(const std::string& relative) {
  std::string out;
  for (unsigned char c : relative) {
    if (std::isalnum(c) || std::strchr("/-._~", c)) out += static_cast<char>(c);
    else out += fmt::format("%{:02X}", c);
  }
  return out;
}

checks::CheckResult combine_assertions(const interact::DomDelta& delta,
                                       const std::vector<interact::StateAssertion>& assertions) {
  std::vector<std::string> lines;
  std::optional<checks::CheckResult> first_failure;
  for (const auto& a : assertions) {
    auto r = interact::assert_state(delta, a);
    lines.push_back(fmt::format("{} {} {}{}", r.passed ? "ok:" : "failed:", a.target.expression(),
                                interact::to_string(a.relation), a.attribute.empty() ? "" : " (" + a.attribute + ")"));
    for (const auto& l : r.detail_lines) lines.push_back("  " + l);
    if (!r.passed && !first_failure) first_failure = std::move(r);
  }
  if (!first_failure) return checks::pass(std::move(lines));
  return checks::fail(first_failure->expected, first_failure->actual, std::move(lines));
}

bool is_page_error(const Error& e) {
  return dynamic_cast<const PageLoadTimeout*>(&e) || dynamic_cast<const PageNotFound*>(&e) ||
         dynamic_cast<const JavascriptFatal*>(&e);
}

std::optional<std::string> save_screenshot(interact::BrowserSession& session, const GradeOptions& options,
                                           std::vector<std::string>& notes) {
  if (!options.screenshot_out) return std::nullopt;
  try {
    const auto png = session.capture_screenshot();
    std::ofstream out(*options.screenshot_out, std::ios::binary);
    out.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
    if (!out) throw ScreenshotFailed("could not write " + options.screenshot_out->string());
    return options.screenshot_out->string();
  } catch (const Error& e) {
    notes.push_back(fmt::format("screenshot: {}: {}", e.kind(), e.what()));
    return std::nullopt;
  }
}

GradeReport grade_live(const Submission& sub, const std::string& entry, const rubric::RubricSpec& rubric,
                       const GradeOptions& options) {
  StaticServer server(sub.root_dir, options.shared_assets);
  const auto page_url = server.base_url() + "/" + url_path(entry);
  interact::SessionOptions so;
  so.viewport_width = rubric.live.viewport_width;
  so.viewport_height = rubric.live.viewport_height;
  so.implicit_wait_ms = rubric.live.implicit_wait_ms;
  so.page_load_timeout_ms = rubric.live.page_load_timeout_ms;
  so.ready_selector = rubric.live.ready_selector;

  std::vector<std::string> notes;
  std::optional<interact::BrowserSession> session;
  for (int attempt = 0; attempt <= options.session_retries && !session; ++attempt) {
    try {
      session.emplace(interact::BrowserSession::create(options.webdriver_url, so));
      session->load(page_url);
    } catch (const Error& e) {
      if (is_page_error(e)) {
        auto shot = session ? save_screenshot(*session, options, notes) : std::nullopt;
        auto r = zero_report(sub.id, rubric, RunStatus::submission_error,
                             fmt::format("Your page failed to load ({}): {}", e.kind(), e.what()),
                             fmt::format("{}: {}", e.kind(), e.what()));
        r.screenshot_path = std::move(shot);
        for (auto& n : notes) r.instructor_notes.push_back(std::move(n));
        for (auto& l : server.log()) r.instructor_notes.push_back("server: " + l);
        return r;
      }
      notes.push_back(fmt::format("session attempt {}: {}: {}", attempt + 1, e.kind(), e.what()));
      session.reset();
    }
  }
  if (!session) {
    std::string detail;
    for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
    auto r = zero_report(sub.id, rubric, RunStatus::grader_error,
                         "The grader could not start a browser. This is not a problem with your submission.",
                         fmt::format("SessionFailure: {} attempts failed: {}", options.session_retries + 1, detail));
    return r;
  }

  GradeReport report;
  report.screenshot_path = save_screenshot(*session, options, notes);
  const auto doc = session->snapshot();
  const InteractionRunner runner = [&](const rubric::InteractionCheck& c) {
    if (c.fresh_page) session->load(page_url);
    const auto delta = interact::run_chain(*session, c.actions, c.settle_ms.value_or(rubric.live.settle_ms));
    return combine_assertions(delta, c.assertions);
  };
  report.outcomes = grade_document(doc, rubric, runner);
  session->close();
  report.instructor_notes = std::move(notes);
  for (auto& l : server.log()) report.instructor_notes.push_back("server: " + l);
  return report;
}

}  // namespace

GradeReport grade(const Submission& sub, const rubric::RubricSpec& rubric, const GradeOptions& options) {
  double total = 0;
  for (const auto& t : rubric.tests) total += t.points;
  if (std::abs(total - rubric.meta.total_points) > 1e-9 * std::max(1.0, total)) {
    throw RubricInvalid(fmt::format("test points sum to {}, but total_points is {}", text::format_exact(total),
                                    text::format_exact(rubric.meta.total_points)));
  }

  const auto start = std::chrono::steady_clock::now();
  const std::string entry = sub.entry_file.empty() ? rubric.meta.entry_file : sub.entry_file;
  GradeReport report;
  try {
    std::error_code ec;
    if (!fs::is_regular_file(sub.root_dir / entry, ec)) {
      report = zero_report(sub.id, rubric, RunStatus::submission_error,
                           fmt::format("Could not find {} in your submission.", entry),
                           "missing entry file " + (sub.root_dir / entry).string());
    } else if (options.mode == Mode::static_snapshot) {
      const auto doc = dom::parse_snapshot(read_file(sub.root_dir / entry));
      report.outcomes = grade_document(doc, rubric);
    } else {
      report = grade_live(sub, entry, rubric, options);
    }
  } catch (const UnparseableDocument& e) {
    report = zero_report(sub.id, rubric, RunStatus::submission_error,
                         fmt::format("Your page could not be read as HTML: {}", e.what()),
                         fmt::format("{}: {}", e.kind(), e.what()));
  } catch (const Error& e) {
    report = zero_report(sub.id, rubric, RunStatus::grader_error,
                         "The grader hit an internal error. This is not a problem with your submission.",
                         fmt::format("{}: {}", e.kind(), e.what()));
  } catch (const std::exception& e) {
    report = zero_report(sub.id, rubric, RunStatus::grader_error,
                         "The grader hit an internal error. This is not a problem with your submission.",
                         std::string("exception: ") + e.what());
  }

  report.submission_id = sub.id;
  report.grader_version = grader_version();
  report.max_score = rubric.meta.total_points;
  report.score = 0;
  for (const auto& o : report.outcomes) report.score += o.points_awarded;
  report.duration_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<GradeReport> grade_batch(const std::vector<Submission>& subs, const rubric::RubricSpec& rubric,
                                     const GradeOptions& options, int parallelism) {
  std::vector<GradeReport> reports(subs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < subs.size(); i = next++) {
      auto opts = options;
      if (opts.screenshot_out) opts.screenshot_out = *opts.screenshot_out / (subs[i].id + ".png");
      try {
        reports[i] = grade(subs[i], rubric, opts);
      } catch (const Error& e) {
        reports[i] = zero_report(subs[i].id, rubric, RunStatus::grader_error,
                                 "The grader hit an internal error. This is not a problem with your submission.",
                                 fmt::format("{}: {}", e.kind(), e.what()));
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, parallelism));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(n, subs.size()); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return reports;
}

}  // namespace visgrade::grader
