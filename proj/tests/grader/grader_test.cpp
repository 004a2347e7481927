#include <filesystem>
#include <fstream>
#include <random>
#include <regex>

#include <fmt/format.h>
#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "../support/bar_gen.hpp"
#include "../support/hover_page.hpp"
#include "../support/mock_webdriver.hpp"
#include "visgrade/error.hpp"
#include "visgrade/grader/grader.hpp"

using namespace visgrade;
using namespace visgrade::grader;
using Json = nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() / fmt::format("visgrade_{}_{}_{}", tag, ::getpid(), counter++);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  void write(const std::string& relative, const std::string& content) const {
    fs::create_directories((path / relative).parent_path());
    std::ofstream(path / relative, std::ios::binary) << content;
  }
};

const rubric::RubricSpec& bar_rubric() {
  static const auto r = rubric::load_rubric(fs::path(VISGRADE_TEST_DATA) / "rubrics" / "bar_chart.yaml");
  return r;
}

const TestOutcome& outcome(const GradeReport& r, const std::string& id) {
  for (const auto& o : r.outcomes) {
    if (o.test_id == id) return o;
  }
  throw std::out_of_range(id);
}

GradeReport grade_static(const synth::BarChart& chart, const std::string& id = "s") {
  TempDir dir("bars");
  dir.write("index.html", chart.render());
  return grade({dir.path, "", id}, bar_rubric(), {});
}

std::string joined(const TestOutcome& o) {
  std::string s;
  for (const auto& l : o.feedback) s += l + "\n";
  return s;
}

}  // namespace

// ---- static server ----

TEST(StaticServer, ServesFilesWithProbeAndOverlay) {
  TempDir sub("sub"), shared("shared");
  sub.write("submission.html", "<html><head><title>t</title></head><body></body></html>");
  sub.write("data/own.csv", "a\n1\n");
  shared.write("data/own.csv", "shadowed\n");
  shared.write("data/shared.csv", "b\n2\n");
  shared.write("lib/d3.min.js", "// d3");
  StaticServer server(sub.path, shared.path);
  httplib::Client c(server.base_url());

  auto page = c.Get("/submission.html");
  ASSERT_TRUE(page);
  EXPECT_EQ(page->status, 200);
  EXPECT_NE(page->body.find(interact::kErrorProbeGlobal), std::string::npos);
  EXPECT_LT(page->body.find("<head>"), page->body.find("<script>"));
  EXPECT_EQ(page->get_header_value("Content-Type"), "text/html; charset=utf-8");

  EXPECT_EQ(c.Get("/data/own.csv")->body, "a\n1\n");
  EXPECT_EQ(c.Get("/data/shared.csv")->body, "b\n2\n");
  EXPECT_EQ(c.Get("/lib/d3.min.js")->get_header_value("Content-Type"), "text/javascript");

  auto missing = c.Get("/nope.html");
  EXPECT_EQ(missing->status, 404);
  EXPECT_NE(missing->body.find(interact::kNotFoundMarker), std::string::npos);
}

TEST(StaticServer, RefusesTraversal) {
  TempDir root("root");
  root.write("inner/index.html", "<p>ok</p>");
  root.write("secret.txt", "top secret");
  StaticServer server(root.path / "inner");
  httplib::Client c(server.base_url());
  for (const char* path : {"/../secret.txt", "/../../etc/passwd", "/%2e%2e/secret.txt", "/a/..%2f..%2fsecret.txt",
                           "/..\\secret.txt"}) {
    auto res = c.Get(path);
    ASSERT_TRUE(res) << path;
    EXPECT_EQ(res->status, 403) << path;
    EXPECT_EQ(res->body.find("top secret"), std::string::npos) << path;
  }
  const auto log = server.log();
  ASSERT_EQ(log.size(), 5u);
  for (const auto& l : log) EXPECT_EQ(l.rfind("PathTraversalAttempt: ", 0), 0u) << l;
}

TEST(StaticServer, RefusesSymlinkEscape) {
  TempDir root("root"), outside("outside");
  outside.write("secret.txt", "top secret");
  fs::create_directory_symlink(outside.path, root.path / "link");
  StaticServer server(root.path);
  auto res = httplib::Client(server.base_url()).Get("/link/secret.txt");
  EXPECT_EQ(res->status, 403);
}

TEST(StaticServer, InjectProbePlacement) {
  const auto& p = error_probe_script();
  EXPECT_EQ(inject_probe("<html><head><title>x</title></head></html>"), "<html><head>" + p + "<title>x</title></head></html>");
  EXPECT_EQ(inject_probe("<HTML lang=en><body><header>h</header></body>"), "<HTML lang=en>" + p + "<body><header>h</header></body>");
  EXPECT_EQ(inject_probe("<!DOCTYPE html><svg></svg>"), "<!DOCTYPE html>" + p + "<svg></svg>");
  EXPECT_EQ(inject_probe("<svg></svg>"), p + "<svg></svg>");
}

// ---- static grading ----

TEST(GradeStatic, ReferenceScoresMax) {
  const auto r = grade_static(synth::BarChart{});
  EXPECT_EQ(r.status, RunStatus::graded);
  for (const auto& o : r.outcomes) {
    EXPECT_TRUE(o.status == Status::pass || o.status == Status::advisory) << o.test_id << "\n" << joined(o);
  }
  EXPECT_DOUBLE_EQ(r.score, 11);
  EXPECT_DOUBLE_EQ(r.max_score, 11);
  EXPECT_EQ(r.grader_version, "0.1.0");
}

TEST(GradeStatic, DesignVariantsScoreMax) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 30; ++i) {
    const auto chart = synth::random_variant(rng);
    const auto r = grade_static(chart);
    EXPECT_DOUBLE_EQ(r.score, r.max_score) << "variant " << i << "\n" << render_text(r);
  }
}

TEST(GradeStatic, UnsortedMutantFailsOnlySorting) {
  synth::BarChart chart;
  chart.swap_first_two = true;
  const auto r = grade_static(chart);
  for (const auto& o : r.outcomes) {
    if (o.test_id == "sorted") EXPECT_EQ(o.status, Status::fail);
    else EXPECT_NE(o.status, Status::fail) << o.test_id << "\n" << joined(o);
  }
  EXPECT_DOUBLE_EQ(r.score, r.max_score - 2);
  const auto text = joined(outcome(r, "sorted"));
  EXPECT_NE(text.find("First inversion at index 1"), std::string::npos) << text;
  EXPECT_NE(text.find("Hint: Sort the data"), std::string::npos);
}

TEST(GradeStatic, MissingAxisSkipsDependents) {
  synth::BarChart chart;
  chart.drop_value_axis = true;
  const auto r = grade_static(chart);
  for (const char* id : {"value-scale", "bar-positions", "value-ticks"}) {
    const auto& o = outcome(r, id);
    EXPECT_EQ(o.status, Status::error) << id;
    EXPECT_EQ(o.feedback.front(), "skipped: prerequisite missing g#value-axis") << id;
    EXPECT_EQ(o.points_awarded, 0);
  }
  EXPECT_EQ(outcome(r, "sorted").status, Status::pass);
  EXPECT_EQ(outcome(r, "category-scale").status, Status::pass);
  EXPECT_EQ(outcome(r, "structure").status, Status::advisory);
  EXPECT_DOUBLE_EQ(r.score, r.max_score - 6);
}

TEST(GradeStatic, ShiftedBarFailsPositionsAndOddColorFailsGrouping) {
  synth::BarChart shifted;
  shifted.moved = 3;
  shifted.shift_px = 5;
  const auto r1 = grade_static(shifted);
  EXPECT_EQ(outcome(r1, "bar-positions").status, Status::fail);
  EXPECT_NE(joined(outcome(r1, "bar-positions")).find("Missing datum"), std::string::npos);

  synth::BarChart odd;
  odd.odd_color = true;
  const auto r2 = grade_static(odd);
  EXPECT_EQ(outcome(r2, "one-color").status, Status::fail);
  EXPECT_DOUBLE_EQ(r2.score, r2.max_score - 1);
}

TEST(GradeStatic, MissingEntryAndUnreadablePageZeroScore) {
  TempDir dir("empty");
  const auto r = grade({dir.path, "", "ghost"}, bar_rubric(), {});
  EXPECT_EQ(r.status, RunStatus::submission_error);
  EXPECT_EQ(r.score, 0);
  EXPECT_EQ(r.max_score, 11);
  EXPECT_EQ(r.outcomes.size(), bar_rubric().tests.size());
  EXPECT_EQ(r.outcomes[2].feedback.front(), "Could not find index.html in your submission.");
}

TEST(GradeStatic, InteractionTestsNeedLiveMode) {
  TempDir dir("hover");
  dir.write("index.html", synth::HoverPage{}.markup());
  const auto rubric = rubric::parse_rubric(R"~(
schema: 1
meta: {name: hover, entry_file: index.html, total_points: 1}
structure: {groups: [marks]}
tests:
  - {id: grow, category: interaction, points: 1,
     check: {actions: [{move_to: "circle.dot"}],
             assert: [{target: "circle.dot", attribute: r, relation: greater_than_before}]}}
)~", dir.path);
  const auto r = grade({dir.path, "", "h"}, rubric, {});
  EXPECT_EQ(r.outcomes[0].status, Status::error);
  EXPECT_EQ(r.outcomes[0].feedback.front(), "skipped: interaction tests need a live browser");
}

// ---- live grading over the mock automation server ----

namespace {

/// A page that is whatever the static server returns for the URL.
synth::MockPage fetching_page(std::shared_ptr<std::string> html) {
  synth::MockPage m;
  m.markup = [html] { return *html; };
  m.navigate = [html](synth::MockPage& self, const std::string& url) {
    const std::regex parts(R"(^(https?://[^/]+)(/.*)$)");
    std::smatch match;
    if (!std::regex_match(url, match, parts)) return;
    auto res = httplib::Client(match[1].str()).Get(match[2].str());
    *html = res ? res->body : "";
    const auto open = html->find("<title>"), close = html->find("</title>");
    self.title = open != std::string::npos && close != std::string::npos
                     ? html->substr(open + 7, close - open - 7)
                     : "";
  };
  return m;
}

}  // namespace

TEST(GradeLive, ServedBarChartScoresMaxWithScreenshot) {
  auto html = std::make_shared<std::string>();
  synth::MockWebDriver driver(fetching_page(html));
  TempDir dir("live"), out("shots");
  dir.write("index.html", synth::BarChart{}.render());
  GradeOptions opts;
  opts.mode = Mode::live;
  opts.webdriver_url = driver.endpoint();
  opts.screenshot_out = out.path / "shot.png";
  const auto r = grade({dir.path, "", "live"}, bar_rubric(), opts);
  EXPECT_EQ(r.status, RunStatus::graded) << render_sidecar(r);
  EXPECT_DOUBLE_EQ(r.score, r.max_score) << render_text(r);
  EXPECT_GT(r.duration_ms, 0);
  EXPECT_LT(r.duration_ms, 30000);
  ASSERT_TRUE(r.screenshot_path);
  EXPECT_TRUE(fs::file_size(*r.screenshot_path) > 8);
  EXPECT_EQ(driver.session_deletes, 1);
  // The page the browser saw carried the injected error probe.
  EXPECT_NE(html->find(interact::kErrorProbeGlobal), std::string::npos);
}

TEST(GradeLive, NotFoundPageIsSubmissionError) {
  auto html = std::make_shared<std::string>();
  auto page = fetching_page(html);
  // A browser that follows a stale link lands on a missing file.
  page.navigate = [inner = page.navigate](synth::MockPage& self, const std::string& url) {
    inner(self, url.substr(0, url.rfind('/')) + "/gone.html");
  };
  synth::MockWebDriver driver(std::move(page));
  TempDir dir("live");
  dir.write("index.html", "<html></html>");
  GradeOptions opts;
  opts.mode = Mode::live;
  opts.webdriver_url = driver.endpoint();
  const auto r = grade({dir.path, "", "nf"}, bar_rubric(), opts);
  EXPECT_EQ(r.status, RunStatus::submission_error);
  EXPECT_NE(joined(r.outcomes.at(2)).find("PageNotFound"), std::string::npos) << joined(r.outcomes.at(2));
  EXPECT_EQ(driver.session_creates, 1);
}

TEST(GradeLive, JavascriptFatalGivesZeroReportWithScreenshot) {
  synth::HoverPage page;
  auto mock = synth::mock_page(page);
  mock.errors = {"Uncaught ReferenceError: dta is not defined"};
  synth::MockWebDriver driver(std::move(mock));
  TempDir dir("live"), out("shots");
  dir.write("index.html", "<html></html>");
  GradeOptions opts;
  opts.mode = Mode::live;
  opts.webdriver_url = driver.endpoint();
  opts.screenshot_out = out.path / "blank.png";
  const auto r = grade({dir.path, "", "crash"}, bar_rubric(), opts);
  EXPECT_EQ(r.status, RunStatus::submission_error);
  EXPECT_EQ(r.score, 0);
  EXPECT_EQ(r.max_score, 11);
  EXPECT_NE(joined(r.outcomes.at(2)).find("JavascriptFatal"), std::string::npos);
  EXPECT_NE(joined(r.outcomes.at(2)).find("dta is not defined"), std::string::npos);
  ASSERT_TRUE(r.screenshot_path);
  EXPECT_TRUE(fs::exists(*r.screenshot_path));
  EXPECT_EQ(driver.session_creates, 1);  // page errors are not retried
}

TEST(GradeLive, SessionFailureRetriesTwiceThenZero) {
  synth::HoverPage page;
  synth::MockWebDriver driver(synth::mock_page(page));
  driver.refuse_session = true;
  TempDir dir("live");
  dir.write("index.html", "<html></html>");
  GradeOptions opts;
  opts.mode = Mode::live;
  opts.webdriver_url = driver.endpoint();
  const auto r = grade({dir.path, "", "down"}, bar_rubric(), opts);
  EXPECT_EQ(driver.session_creates, 3);
  EXPECT_EQ(r.status, RunStatus::grader_error);
  EXPECT_EQ(r.score, 0);
  // Protocol text stays out of the student report and goes to the sidecar.
  EXPECT_EQ(render_json(r).find("session not created"), std::string::npos);
  EXPECT_NE(render_sidecar(r).find("session not created"), std::string::npos);
}

TEST(GradeLive, InteractionTestsUseFreshPages) {
  synth::HoverPage page;
  synth::MockWebDriver driver(synth::mock_page(page));
  TempDir dir("live");
  dir.write("index.html", "<html></html>");
  const auto rubric = rubric::parse_rubric(R"~(
schema: 1
meta: {name: hover, entry_file: index.html, total_points: 4}
structure: {groups: [marks]}
tests:
  - {id: structure, category: advisory, check: {structure: true}}
  - {id: grow, category: interaction, points: 1,
     check: {actions: [{move_to: "circle.dot"}], settle_ms: 0,
             assert: [{target: "circle.dot", attribute: r, relation: greater_than_before}]}}
  - {id: recolor-and-tooltip, category: interaction, points: 1,
     check: {actions: [{move_to: "circle.dot"}], settle_ms: 0,
             assert: [{target: "circle.dot", attribute: fill, relation: equal, value: orange},
                      {target: "div#tooltip", relation: element_appears}]}}
  - {id: stale-page, category: interaction, points: 1,
     check: {fresh_page: false, actions: [{move_to: "circle.dot"}], settle_ms: 0,
             assert: [{target: "circle.dot", attribute: r, relation: greater_than_before}]}}
  - {id: missing-target, category: interaction, points: 1,
     check: {actions: [{click: "rect.button"}], settle_ms: 0,
             assert: [{target: "circle.dot", attribute: r, relation: changed}]}}
)~", dir.path);
  GradeOptions opts;
  opts.mode = Mode::live;
  opts.webdriver_url = driver.endpoint();
  const auto r = grade({dir.path, "", "hover"}, rubric, opts);
  EXPECT_EQ(outcome(r, "grow").status, Status::pass) << joined(outcome(r, "grow"));
  EXPECT_EQ(outcome(r, "recolor-and-tooltip").status, Status::pass) << joined(outcome(r, "recolor-and-tooltip"));
  EXPECT_EQ(outcome(r, "stale-page").status, Status::fail);
  EXPECT_EQ(outcome(r, "missing-target").status, Status::error);
  EXPECT_EQ(outcome(r, "missing-target").instructor_detail.value().rfind("TargetNotFound", 0), 0u);
  EXPECT_DOUBLE_EQ(r.score, 2);
}

// ---- rendering ----

namespace {

GradeReport sample_report() {
  GradeReport r;
  r.submission_id = "student-7";
  r.max_score = 5;
  r.grader_version = "0.1.0";
  r.duration_ms = 1234;
  auto add = [&](std::string id, rubric::Category c, double possible, Status s, std::vector<std::string> fb) {
    TestOutcome o;
    o.test_id = std::move(id);
    o.category = c;
    o.points_possible = possible;
    o.points_awarded = s == Status::pass ? possible : 0;
    o.status = s;
    o.feedback = std::move(fb);
    r.outcomes.push_back(o);
    r.score += o.points_awarded;
  };
  add("layout", rubric::Category::advisory, 0, Status::advisory, {"Detected a bar chart"});
  add("a", rubric::Category::positioning, 2, Status::pass, {});
  add("b", rubric::Category::appearance, 2, Status::pass, {});
  add("ticks", rubric::Category::appearance, 1, Status::fail,
      {"Expected: ticks every 5", "Actual: [1980, 1990, 2000]", "Found ticks [1980, 1990, 2000], but expected [1980, 1985, 1990, 1995, 2000]",
       "Hint: Use .ticks(5)."});
  return r;
}

}  // namespace

TEST(Render, JsonContract) {
  const auto j = Json::parse(render_json(sample_report()));
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["score"].get<double>(), 4.0);
  EXPECT_EQ(j["max_score"].get<double>(), 5.0);
  EXPECT_EQ(j["duration_ms"], 1234);
  EXPECT_TRUE(j["screenshot"].is_null());
  ASSERT_EQ(j["tests"].size(), 4u);
  EXPECT_EQ(j["tests"][0]["status"], "advisory");
  EXPECT_EQ(j["tests"][0]["max_score"].get<double>(), 0.0);
  EXPECT_EQ(j["tests"][3]["category"], "appearance");
  EXPECT_EQ(j["tests"][3]["status"], "fail");
  const auto raw = render_json(sample_report());
  EXPECT_LT(raw.find("\"schema\""), raw.find("\"submission_id\""));
  EXPECT_LT(raw.find("\"grader_version\""), raw.find("\"screenshot\""));
  EXPECT_LT(raw.find("\"screenshot\""), raw.find("\"tests\""));
  EXPECT_EQ(Json::parse(render_json(sample_report(), true))["duration_ms"], 0);
}

TEST(Render, TextGroupsByCategory) {
  const auto text = render_text(sample_report());
  EXPECT_EQ(text.rfind("Submission student-7: 4 / 5 points\n", 0), 0u);
  const auto adv = text.find("\nAdvisory\n"), app = text.find("\nMark appearance\n"),
             pos = text.find("\nScales and positioning\n");
  ASSERT_NE(adv, std::string::npos);
  EXPECT_LT(adv, app);
  EXPECT_LT(app, pos);
  EXPECT_NE(text.find("  • layout\n"), std::string::npos);  // no point line for advisory
  EXPECT_NE(text.find("  ✗ ticks (0 / 1)\n"), std::string::npos);
  EXPECT_NE(text.find("Found ticks [1980, 1990, 2000], but expected [1980, 1985"), std::string::npos);
  EXPECT_NE(text.find("Hint: Use .ticks(5)."), std::string::npos);
}

TEST(Render, FailedTickTestFromGrading) {
  synth::BarChart chart;
  chart.value_max = 50;
  auto rubric = bar_rubric();
  std::get<rubric::AxisTicksCheck>(rubric.tests.back().check).interval = 5;
  TempDir dir("ticks");
  dir.write("index.html", chart.render());
  const auto r = grade({dir.path, "", "t"}, rubric, {});
  const auto text = render_text(r);
  EXPECT_NE(text.find("Found ticks [0, 10, 20, 30, 40, 50], but expected [0, 5, 10"), std::string::npos) << text;
}

TEST(Render, CsvQuotesAndHeader) {
  auto a = sample_report();
  a.submission_id = "smith, j";
  auto b = sample_report();
  b.submission_id = "say \"hi\"";
  b.status = RunStatus::submission_error;
  const auto csv = summary_csv({a, b});
  EXPECT_EQ(csv, "id,score,max_score,duration_ms,status\n"
                 "\"smith, j\",4,5,1234,graded\n"
                 "\"say \"\"hi\"\"\",4,5,1234,submission_error\n");
}

// ---- batch ----

TEST(Batch, OrderIsolationAndDeterminism) {
  TempDir root("batch");
  std::mt19937_64 rng(5);
  std::vector<Submission> subs;
  for (int i = 0; i < 6; ++i) {
    auto chart = synth::random_variant(rng);
    chart.swap_first_two = i % 3 == 1;
    const auto id = fmt::format("sub{}", i);
    if (i != 4) root.write(id + "/index.html", chart.render());  // sub4 crashes: no entry file
    fs::create_directories(root.path / id);
    subs.push_back({root.path / id, "", id});
  }
  const auto first = grade_batch(subs, bar_rubric(), {}, 3);
  const auto second = grade_batch(subs, bar_rubric(), {}, 2);
  ASSERT_EQ(first.size(), subs.size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    EXPECT_EQ(first[i].submission_id, subs[i].id);
    EXPECT_EQ(render_json(first[i], true), render_json(second[i], true));
  }
  EXPECT_EQ(first[4].status, RunStatus::submission_error);
  EXPECT_EQ(first[4].score, 0);
  EXPECT_DOUBLE_EQ(first[0].score, 11);
  EXPECT_DOUBLE_EQ(first[1].score, 9);

  // Isolation: mutating one submission changes only its report.
  synth::BarChart broken;
  broken.odd_color = true;
  root.write("sub2/index.html", broken.render());
  const auto third = grade_batch(subs, bar_rubric(), {}, 4);
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (i == 2) EXPECT_NE(render_json(first[i], true), render_json(third[i], true));
    else EXPECT_EQ(render_json(first[i], true), render_json(third[i], true)) << i;
  }

  const auto csv = summary_csv(first);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Batch, ThreeSubmissionsParallelismTwo) {
  TempDir root("batch3");
  std::vector<Submission> subs;
  for (const char* id : {"c", "a", "b"}) {
    root.write(std::string(id) + "/index.html", synth::BarChart{}.render());
    subs.push_back({root.path / id, "", id});
  }
  const auto reports = grade_batch(subs, bar_rubric(), {}, 2);
  ASSERT_EQ(reports.size(), 3u);
  EXPECT_EQ(reports[0].submission_id, "c");
  EXPECT_EQ(reports[1].submission_id, "a");
  EXPECT_EQ(reports[2].submission_id, "b");
}

TEST(Grade, RubricPointMismatchIsInvalid) {
  auto rubric = bar_rubric();
  rubric.meta.total_points = 99;
  TempDir dir("x");
  EXPECT_THROW(grade({dir.path, "", "x"}, rubric, {}), RubricInvalid);
}
