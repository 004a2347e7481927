
#include <fmt/format.h>
#include <json.hpp>

#include "visgrade/grader/grader.hpp"
#include "visgrade/text.hpp"

namespace visgrade::grader {

namespace {

using OrderedJson = nlohmann::ordered_json;

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += (out.empty() ? "" : "\n") + l;
  return out;
}

const char* category_heading(rubric::Category c) {
  switch (c) {
    case rubric::Category::advisory: return "Advisory";
    case rubric::Category::appearance: return "Mark appearance";
    case rubric::Category::positioning: return "Scales and positioning";
    case rubric::Category::interaction: return "Interactivity";
  }
  return "Other";
}

const char* glyph(Status s) {
  switch (s) {
    case Status::pass: return "✓";
    case Status::fail: return "✗";
    case Status::error: return "!";
    case Status::advisory: return "•";
  }
  return "?";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string render_json(const GradeReport& report, bool canonical) {
  OrderedJson j;
  j["schema"] = 1;
  j["submission_id"] = report.submission_id;
  j["score"] = report.score;
  j["max_score"] = report.max_score;
  j["duration_ms"] = canonical ? 0 : report.duration_ms;
  j["grader_version"] = report.grader_version;
  j["screenshot"] = report.screenshot_path ? OrderedJson(*report.screenshot_path) : OrderedJson(nullptr);
  j["tests"] = OrderedJson::array();
  for (const auto& o : report.outcomes) {
    j["tests"].push_back({{"id", o.test_id},
                          {"category", rubric::to_string(o.category)},
                          {"status", to_string(o.status)},
                          {"score", o.points_awarded},
                          {"max_score", o.points_possible},
                          {"output", join_lines(o.feedback)}});
  }
  return j.dump(2) + "\n";
}

std::string render_text(const GradeReport& report) {
  std::string out = fmt::format("Submission {}: {} / {} points\n", report.submission_id,
                                text::format_number(report.score), text::format_number(report.max_score));
  if (report.status != RunStatus::graded) out += "Grading did not complete; see the messages below.\n";
  for (auto c : {rubric::Category::advisory, rubric::Category::appearance, rubric::Category::positioning,
                 rubric::Category::interaction}) {
    bool heading = false;
    for (const auto& o : report.outcomes) {
      if (o.category != c) continue;
      if (!heading) {
        out += fmt::format("\n{}\n", category_heading(c));
        heading = true;
      }
      if (o.status == Status::advisory) {
        out += fmt::format("  {} {}\n", glyph(o.status), o.test_id);
      } else {
        out += fmt::format("  {} {} ({} / {})\n", glyph(o.status), o.test_id, text::format_number(o.points_awarded),
                           text::format_number(o.points_possible));
      }
      for (const auto& l : o.feedback) out += "      " + l + "\n";
    }
  }
  return out;
}

std::string render_sidecar(const GradeReport& report) {
  OrderedJson j;
  j["submission_id"] = report.submission_id;
  j["status"] = to_string(report.status);
  j["notes"] = report.instructor_notes;
  j["tests"] = OrderedJson::array();
  for (const auto& o : report.outcomes) {
    if (o.instructor_detail) j["tests"].push_back({{"id", o.test_id}, {"detail", *o.instructor_detail}});
  }
  return j.dump(2) + "\n";
}

std::string summary_csv(const std::vector<GradeReport>& reports) {
  std::string out = "id,score,max_score,duration_ms,status\n";
  for (const auto& r : reports) {
    out += fmt::format("{},{},{},{},{}\n", csv_field(r.submission_id), text::format_exact(r.score),
                       text::format_exact(r.max_score), r.duration_ms, to_string(r.status));
  }
  return out;
}

}  // namespace visgrade::grader
