#include "data/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "errors.hpp"

namespace sf::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string where(const std::string& source, std::size_t line, std::size_t column) {
  return source + ": line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::vector<double> RawSeries::channel(std::size_t c) const {
  std::vector<double> out(steps());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = at(t, c);
  return out;
}

RawSeries load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open '" + path + "'");
  return parse_csv(f, path);
}

RawSeries parse_csv(std::istream& in, const std::string& source) {
  RawSeries rs;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (!have_header) {
      if (cells.size() < 2) throw DataError(where(source, line_no, 1) + ": header needs a timestamp and at least one channel");
      std::set<std::string> seen;
      for (std::size_t c = 1; c < cells.size(); ++c) {
        std::string name(cells[c]);
        if (name.empty()) throw DataError(where(source, line_no, c + 1) + ": empty channel name");
        if (!seen.insert(name).second) throw DataError(where(source, line_no, c + 1) + ": duplicate channel '" + name + "'");
        rs.channel_names.push_back(std::move(name));
      }
      have_header = true;
      continue;
    }
    if (cells.size() != rs.channels() + 1) {
      throw DataError(where(source, line_no, std::min(cells.size(), rs.channels() + 1) + 1) + ": expected " +
                      std::to_string(rs.channels() + 1) + " fields, found " + std::to_string(cells.size()));
    }
    rs.timestamps.emplace_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto cell = cells[c];
      double v = 0.0;
      const char* first = cell.data();
      if (!cell.empty() && cell.front() == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw DataError(where(source, line_no, c + 1) + ": '" + std::string(cell) + "' is not a finite number");
      }
      rs.values.push_back(v);
    }
  }
  if (!have_header) throw DataError(source + ": empty file");
  if (rs.timestamps.empty()) throw DataError(source + ": no data rows");
  return rs;
}

RawSeries exclude_channels(const RawSeries& rs, const std::vector<std::string>& selectors) {
  std::vector<bool> drop(rs.channels(), false);
  for (const auto& sel : selectors) {
    auto it = std::find(rs.channel_names.begin(), rs.channel_names.end(), sel);
    if (it != rs.channel_names.end()) {
      drop[static_cast<std::size_t>(it - rs.channel_names.begin())] = true;
      continue;
    }
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(sel.data(), sel.data() + sel.size(), index);
    if (sel.empty() || ec != std::errc() || ptr != sel.data() + sel.size() || index >= rs.channels()) {
      throw InvalidArgument("exclude_channels: no channel named or indexed '" + sel + "' (have " +
                            std::to_string(rs.channels()) + " channels)");
    }
    drop[index] = true;
  }
  RawSeries out;
  out.timestamps = rs.timestamps;
  out.frequency = rs.frequency;
  for (std::size_t c = 0; c < rs.channels(); ++c) {
    if (!drop[c]) out.channel_names.push_back(rs.channel_names[c]);
  }
  if (out.channel_names.empty()) throw InvalidArgument("exclude_channels: every channel would be removed");
  out.values.reserve(rs.steps() * out.channels());
  for (std::size_t t = 0; t < rs.steps(); ++t) {
    for (std::size_t c = 0; c < rs.channels(); ++c) {
      if (!drop[c]) out.values.push_back(rs.at(t, c));
    }
  }
  return out;
}

}  // namespace sf::data
