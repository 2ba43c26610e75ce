#pragma once

#include <charconv>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace hyfi {

/// Shortest round-trip decimal form, independent of the global locale.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Minimal CSV writer: fixed header, comma separated, '\n' line endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header)
      : out_(out), columns_(header.size()) {
    write_fields(header);
  }

  template <typename... Ts>
  void row(const Ts&... fields) {
    static_assert(sizeof...(Ts) > 0);
    std::vector<std::string> cells;
    cells.reserve(sizeof...(Ts));
    (cells.push_back(cell(fields)), ...);
    write_fields(cells);
  }

  void row_cells(const std::vector<std::string>& cells) { write_fields(cells); }

  std::size_t columns() const { return columns_; }

 private:
  template <typename T>
  static std::string cell(const T& v) {
    if constexpr (std::is_same_v<T, bool>) {
      return v ? "1" : "0";
    } else if constexpr (std::is_floating_point_v<T>) {
      return format_number(static_cast<double>(v));
    } else if constexpr (std::is_integral_v<T>) {
      return std::to_string(v);
    } else {
      return std::string(std::string_view(v));
    }
  }

  void write_fields(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace hyfi
