#include "visgrade/rubric/dataset.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "visgrade/text.hpp"

namespace visgrade::rubric {

Dataset::Dataset(std::vector<std::string> header, std::vector<std::vector<std::string>> rows)
    : header_(std::move(header)), rows_(std::move(rows)) {
  for (auto& row : rows_) row.resize(header_.size());
}

Dataset Dataset::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read dataset file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

// RFC 4180: quoted fields may contain separators, newlines and "" escapes.
Dataset Dataset::parse_csv(std::string_view content) {
  if (content.substr(0, 3) == "\xEF\xBB\xBF") content.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&]() {
    record.push_back(quoted ? field : std::string(text::trim(field)));
    field.clear();
    quoted = false;
    field_started = false;
  };
  auto end_record = [&]() {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (quoted && field_started) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          field_started = false;  // closing quote; keep `quoted` for end_field
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && text::trim(field).empty() && !quoted) {
      field.clear();
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !record.empty() || quoted) end_record();

  if (records.empty()) return Dataset{};
  std::vector<std::string> header = std::move(records.front());
  records.erase(records.begin());
  return Dataset(std::move(header), std::move(records));
}

std::optional<std::size_t> Dataset::column_index(std::string_view field) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == field) return i;
  }
  return std::nullopt;
}

std::vector<std::string> Dataset::column(std::string_view field) const {
  const auto index = column_index(field);
  if (!index) throw std::out_of_range("unknown dataset field '" + std::string(field) + "'");
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& row : rows_) out.push_back(row[*index]);
  return out;
}

}  // namespace visgrade::rubric
