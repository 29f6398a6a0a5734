#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "kadd/game.hpp"

namespace kadd {

/// Raw numeric table as read from CSV, column-major.
struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t cols() const { return columns.size(); }
};

/// Discrete category codes, column-major.
struct DataMatrix {
  std::size_t rows = 0;
  std::vector<std::vector<int>> columns;

  std::size_t cols() const { return columns.size(); }
};

/// Reads a CSV with a header row and numeric cells.
inline NumericTable read_numeric_csv(std::istream& is) {
  NumericTable t;
  std::string line;
  std::size_t lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      t.columns.resize(t.header.size());
      continue;
    }
    if (cells.size() != t.header.size())
      throw std::invalid_argument("csv line " + std::to_string(lineno) + ": wrong number of cells");
    for (std::size_t j = 0; j < cells.size(); ++j) {
      char* end = nullptr;
      const double v = std::strtod(cells[j].c_str(), &end);
      if (cells[j].empty() || end != cells[j].c_str() + cells[j].size() || !std::isfinite(v))
        throw std::invalid_argument("csv line " + std::to_string(lineno) + ": non-numeric cell '" +
                                    cells[j] + "'");
      t.columns[j].push_back(v);
    }
  }
  if (t.header.empty()) throw std::invalid_argument("csv: missing header row");
  return t;
}

inline NumericTable read_numeric_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open data file " + path);
  return read_numeric_csv(is);
}

/// Equal-width binning per column. Columns with at most `bins` distinct
/// values are coded by the rank of their value instead.
inline DataMatrix discretize(const NumericTable& raw, int bins = 4) {
  if (bins < 2) throw std::invalid_argument("discretize: bins must be at least 2");
  DataMatrix d;
  d.rows = raw.rows();
  for (const auto& col : raw.columns) {
    std::vector<int> codes(col.size(), 0);
    const std::set<double> distinct(col.begin(), col.end());
    if (distinct.size() <= static_cast<std::size_t>(bins)) {
      std::map<double, int> rank;
      int r = 0;
      for (double v : distinct) rank[v] = r++;
      for (std::size_t i = 0; i < col.size(); ++i) codes[i] = rank[col[i]];
    } else {
      const double lo = *distinct.begin();
      const double width = (*distinct.rbegin() - lo) / bins;
      for (std::size_t i = 0; i < col.size(); ++i) {
        const int c = static_cast<int>(std::floor((col[i] - lo) / width));
        codes[i] = std::clamp(c, 0, bins - 1);
      }
    }
    d.columns.push_back(std::move(codes));
  }
  return d;
}

/// ν(S) = Σ_{i∈S} H(X_i) − H(X_S) with empirical Shannon entropies.
class TotalCorrelationGame final : public Game {
 public:
  explicit TotalCorrelationGame(DataMatrix data, double log_base = std::numbers::e)
      : Game(static_cast<int>(data.cols())), data_(std::move(data)), log_scale_(1.0 / std::log(log_base)) {
    if (data_.rows == 0) throw std::invalid_argument("total correlation game needs at least one row");
    for (const auto& c : data_.columns)
      if (c.size() != data_.rows) throw std::invalid_argument("ragged data matrix");
    if (!(log_base > 1.0)) throw std::invalid_argument("entropy log base must exceed 1");
    for (int i = 0; i < players(); ++i) marginal_.push_back(entropy(singleton(i)));
  }

  std::string describe() const override { return "totalcorr"; }

  /// Empirical joint entropy of the columns in `s`.
  double entropy(Coalition s) const {
    if (s.empty()) return 0.0;
    const auto cols = members(s);
    std::map<std::vector<int>, std::size_t> counts;
    std::vector<int> key(cols.size());
    for (std::size_t r = 0; r < data_.rows; ++r) {
      for (std::size_t j = 0; j < cols.size(); ++j)
        key[j] = data_.columns[static_cast<std::size_t>(cols[j] - 1)][r];
      ++counts[key];
    }
    const double m = static_cast<double>(data_.rows);
    double h = 0.0;
    for (const auto& [k, c] : counts) {
      const double p = static_cast<double>(c) / m;
      h -= p * std::log(p);
    }
    return h * log_scale_;
  }

 protected:
  double compute(Coalition a) const override {
    if (a.size() <= 1) return 0.0;
    double s = 0.0;
    for (int i = 0; i < players(); ++i)
      if (a.contains(i)) s += marginal_[static_cast<std::size_t>(i)];
    return s - entropy(a);
  }

 private:
  DataMatrix data_;
  double log_scale_;
  std::vector<double> marginal_;
};

inline GamePtr total_correlation_game(DataMatrix data, double log_base = std::numbers::e) {
  return std::make_shared<TotalCorrelationGame>(std::move(data), log_base);
}

}  // namespace kadd
