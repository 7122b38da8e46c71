#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "llab/error.hpp"
#include "llab/io.hpp"

namespace llab {

/// Non-decreasing positive points with integer multiplicities, stored by distinct value.
/// Counting queries are O(log n); logarithms are cached for the exponential sums.
class PointSequence {
 public:
  PointSequence() = default;

  static PointSequence from_points(std::vector<double> pts) {
    std::sort(pts.begin(), pts.end());
    std::vector<double> v;
    std::vector<std::int64_t> m;
    for (double p : pts) {
      if (!v.empty() && v.back() == p)
        ++m.back();
      else {
        v.push_back(p);
        m.push_back(1);
      }
    }
    return from_atoms(std::move(v), std::move(m));
  }

  /// Values must already be strictly increasing.
  static PointSequence from_atoms(std::vector<double> values, std::vector<std::int64_t> mult) {
    require(values.size() == mult.size(), ErrorCode::InvalidSequence, "values/multiplicities size mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
      require(std::isfinite(values[i]) && values[i] > 0.0, ErrorCode::InvalidSequence,
              "points must be positive and finite");
      require(mult[i] >= 1, ErrorCode::InvalidSequence, "multiplicities must be >= 1");
      require(i == 0 || values[i] > values[i - 1], ErrorCode::InvalidSequence,
              "atom values must be strictly increasing");
    }
    PointSequence s;
    s.values_ = std::move(values);
    s.mult_ = std::move(mult);
    s.finish();
    return s;
  }

  static PointSequence integers(std::int64_t first, std::int64_t last) {
    require(first >= 1 && last >= first, ErrorCode::InvalidSequence, "bad integer range");
    std::vector<double> v(static_cast<std::size_t>(last - first + 1));
    std::iota(v.begin(), v.end(), static_cast<double>(first));
    std::vector<std::int64_t> m(v.size(), 1);
    return from_atoms(std::move(v), std::move(m));
  }

  std::size_t distinct() const { return values_.size(); }
  std::int64_t total() const { return prefix_.empty() ? 0 : prefix_.back(); }
  bool empty() const { return values_.empty(); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::int64_t>& multiplicities() const { return mult_; }
  const std::vector<double>& logs() const { return logs_; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }

  /// Number of distinct values <= x.
  std::size_t index_upto(double x) const {
    return static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), x) - values_.begin());
  }
  /// Total multiplicity of the first i distinct values.
  std::int64_t prefix(std::size_t i) const { return i == 0 ? 0 : prefix_[i - 1]; }
  /// N(x): points <= x counted with multiplicity.
  std::int64_t counting(double x) const { return prefix(index_upto(x)); }

  /// Upper end of the range on which the stored points are known to be complete.
  double cutoff() const { return cutoff_; }
  void set_cutoff(double c) {
    require(c >= 0.0, ErrorCode::InvalidArgument, "cutoff must be >= 0");
    cutoff_ = c;
  }

  /// Points listed with repetition, in index order.
  std::vector<double> expanded() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(total()));
    for (std::size_t i = 0; i < values_.size(); ++i)
      out.insert(out.end(), static_cast<std::size_t>(mult_[i]), values_[i]);
    return out;
  }

  std::string to_csv() const {
    std::string out = "value,multiplicity\n";
    out.reserve(out.size() + values_.size() * 24);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      out += io::format_real(values_[i]);
      out += ',';
      out += std::to_string(mult_[i]);
      out += '\n';
    }
    if (values_.empty() || cutoff_ != values_.back()) out += "#cutoff," + io::format_real(cutoff_) + '\n';
    return out;
  }

  static PointSequence from_csv(std::string_view text) {
    auto ls = io::lines(text);
    require(!ls.empty() && ls[0] == "value,multiplicity", ErrorCode::SchemaMismatch,
            "sequence CSV must start with 'value,multiplicity'");
    std::vector<double> v;
    std::vector<std::int64_t> m;
    double cutoff = -1.0;
    for (std::size_t i = 1; i < ls.size(); ++i) {
      if (ls[i].empty()) continue;
      auto f = io::split(ls[i]);
      if (ls[i].front() == '#') {
        require(f.size() == 2 && f[0] == "#cutoff", ErrorCode::SchemaMismatch, "unknown sequence CSV directive");
        cutoff = io::parse_real(f[1]);
        continue;
      }
      require(f.size() == 2, ErrorCode::SchemaMismatch, "sequence row needs 2 fields");
      v.push_back(io::parse_real(f[0]));
      m.push_back(static_cast<std::int64_t>(io::parse_real(f[1])));
    }
    auto seq = from_atoms(std::move(v), std::move(m));
    if (cutoff >= 0.0) seq.set_cutoff(cutoff);
    return seq;
  }

 private:
  void finish() {
    prefix_.resize(values_.size());
    logs_.resize(values_.size());
    std::int64_t run = 0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      run += mult_[i];
      prefix_[i] = run;
      logs_[i] = std::log(values_[i]);
    }
    cutoff_ = values_.empty() ? 0.0 : values_.back();
  }

  std::vector<double> values_;
  std::vector<std::int64_t> mult_;
  std::vector<std::int64_t> prefix_;
  std::vector<double> logs_;
  double cutoff_ = 0.0;
};

}  // namespace llab
