#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace sf::data {

// T x D readings, row-major by time step.
struct RawSeries {
  std::vector<std::string> channel_names;
  std::vector<std::string> timestamps;  // may be empty
  std::vector<double> values;
  std::string frequency;  // informational label, e.g. "1h"

  std::size_t channels() const { return channel_names.size(); }
  std::size_t steps() const { return channels() == 0 ? 0 : values.size() / channels(); }
  double at(std::size_t t, std::size_t c) const { return values[t * channels() + c]; }
  std::vector<double> channel(std::size_t c) const;
};

// First column is a timestamp (kept verbatim), the rest are numeric channels
// named by the header. Throws IoError for unreadable files and DataError with
// the 1-based line and column for malformed content.
RawSeries load_csv(const std::string& path);
RawSeries parse_csv(std::istream& in, const std::string& source = "<stream>");

// Drops the selected channels. A selector is a channel name or, if no
// channel has that name, a 0-based index. Unknown selectors throw
// InvalidArgument.
RawSeries exclude_channels(const RawSeries& rs, const std::vector<std::string>& selectors);

}  // namespace sf::data
