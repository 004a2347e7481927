#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "visgrade/checks/checks.hpp"
#include "visgrade/error.hpp"
#include "visgrade/layout/layout.hpp"
#include "visgrade/text.hpp"

namespace visgrade::checks {

std::vector<const dom::ElementNode*> graded_marks(const dom::Document& doc, const dom::Selector& marks) {
  std::vector<const dom::ElementNode*> out;
  for (const auto* n : dom::select(doc, marks)) {
    bool embedded = false;
    for (const auto* p = doc.parent(*n); p && !embedded; p = doc.parent(*p)) {
      embedded = text::iequals(p->tag, "foreignObject");
    }
    if (!embedded && dom::is_rendered(doc, *n)) out.push_back(n);
  }
  return out;
}

CheckResult pass(std::vector<std::string> detail_lines) {
  CheckResult r;
  r.passed = true;
  r.credit = 1;
  r.detail_lines = std::move(detail_lines);
  return r;
}

CheckResult fail(std::string expected, std::string actual, std::vector<std::string> detail_lines) {
  CheckResult r;
  r.expected = std::move(expected);
  r.actual = std::move(actual);
  r.detail_lines = std::move(detail_lines);
  return r;
}

namespace {

CheckResult run_structure(const dom::Document& doc, const rubric::RubricSpec& rubric) {
  std::vector<std::string> lines, missing;
  for (const auto& f : rubric::validate_structure(rubric.structure, doc)) {
    lines.push_back(fmt::format("{}: found {} (need at least {})", f.selector, f.count, f.expected_min));
    if (!f.found) missing.push_back(fmt::format("{} ({} of {})", f.selector, f.count, f.expected_min));
  }
  if (missing.empty()) return pass(std::move(lines));
  return fail("every required element present", fmt::format("missing {}", fmt::join(missing, ", ")),
              std::move(lines));
}

struct Visitor {
  const dom::Document& doc;
  const rubric::RubricSpec& rubric;
  ScaleResolver& scales;

  CheckResult operator()(const rubric::StructureCheck&) const { return run_structure(doc, rubric); }

  CheckResult operator()(const rubric::LayoutCheck&) const {
    return pass(layout::format_layout_advisory(layout::detect_layout(doc, rubric.structure)));
  }

  CheckResult operator()(const rubric::ScaleCheck& c) const { return check_scale(scales, rubric, c.scale); }

  CheckResult operator()(const rubric::PositionsCheck& c) const {
    const auto* data = rubric.find_dataset(c.dataset);
    if (!data) throw DomainViolation("rubric declares no dataset '" + c.dataset + "'");
    std::vector<AxisBinding> bindings;
    for (const auto& e : c.encodings) bindings.push_back({e.scale, &scales.get(e.scale), e.field});
    return check_positions(doc, c.marks, bindings, *data, {c.tolerance_px, c.exact_count, c.partial});
  }

  CheckResult operator()(const rubric::SortedCheck& c) const {
    return check_sorted(doc, c.marks, c.key, c.order, c.along);
  }

  CheckResult operator()(const rubric::ConstantCheck& c) const {
    return check_constant(doc, c.marks, c.attribute, c.tolerance);
  }

  CheckResult operator()(const rubric::ColorGroupingCheck& c) const {
    return check_color_grouping(doc, c.groups, c.property);
  }

  CheckResult operator()(const rubric::AxisTicksCheck& c) const {
    const auto& s = scales.get(c.scale);
    auto r = check_axis_ticks(s, c);
    r.detail_lines.insert(r.detail_lines.begin(), "Assuming " + describe_scale(c.scale, s));
    return r;
  }

  CheckResult operator()(const rubric::InteractionCheck&) const {
    throw std::invalid_argument("interaction checks run in the interaction engine");
  }
};

}  // namespace

CheckResult run_check(const rubric::TestSpec& test, const dom::Document& doc, const rubric::RubricSpec& rubric,
                      ScaleResolver& scales) {
  try {
    auto r = std::visit(Visitor{doc, rubric, scales}, test.check);
    std::sort(r.offenders.begin(), r.offenders.end());
    r.offenders.erase(std::unique(r.offenders.begin(), r.offenders.end()), r.offenders.end());
    return r;
  } catch (const Error& e) {
    auto r = fail(fmt::format("a gradable {} check", rubric::check_name(test.check)),
                  fmt::format("{}: {}", e.kind(), e.what()), {fmt::format("Could not grade: {}", e.what())});
    r.error_kind = e.kind();
    return r;
  }
}

}  // namespace visgrade::checks
