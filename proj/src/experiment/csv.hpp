#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sf::experiment {

// Shortest round-trip decimal form; identical across runs and platforms.
std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row(std::vector<std::string> cells);
  std::string str() const;
  // Throws IoError.
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// bin_index,amplitude
CsvTable spectrum_table(const std::vector<double>& amplitude);

}  // namespace sf::experiment
