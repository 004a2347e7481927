#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace visgrade::rubric {

/// A CSV table with a header row. Fields are kept as text; scales decide
/// how to interpret them.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> header, std::vector<std::vector<std::string>> rows);

  /// Throws std::runtime_error on unreadable files.
  static Dataset load_csv(const std::filesystem::path& path);
  static Dataset parse_csv(std::string_view content);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t row_count() const { return rows_.size(); }

  /// First column whose header equals `field`.
  std::optional<std::size_t> column_index(std::string_view field) const;
  bool has_field(std::string_view field) const { return column_index(field).has_value(); }
  /// Throws std::out_of_range for unknown fields.
  std::vector<std::string> column(std::string_view field) const;
  const std::string& cell(std::size_t row, std::size_t column) const { return rows_[row][column]; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace visgrade::rubric
