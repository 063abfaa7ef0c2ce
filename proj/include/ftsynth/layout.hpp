#pragma once

#include <charconv>
#include <deque>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ftsynth {

/// A 2-D rectangular grid of physical qubits with 4-neighbor adjacency.
/// The qubit at cell (r, c) has index r * cols + c.
struct QubitLayout {
  int rows = 0;
  int cols = 0;

  int size() const { return rows * cols; }
  int index_of(int r, int c) const { return r * cols + c; }
  int row_of(int q) const { return q / cols; }
  int col_of(int q) const { return q % cols; }

  bool adjacent(int a, int b) const {
    const int dr = row_of(a) - row_of(b);
    const int dc = col_of(a) - col_of(b);
    return (dr == 0 && (dc == 1 || dc == -1)) ||
           (dc == 0 && (dr == 1 || dr == -1));
  }

  std::vector<int> neighbors(int q) const {
    std::vector<int> out;
    out.reserve(4);
    const int r = row_of(q);
    const int c = col_of(q);
    if (r > 0) out.push_back(index_of(r - 1, c));
    if (c > 0) out.push_back(index_of(r, c - 1));
    if (c + 1 < cols) out.push_back(index_of(r, c + 1));
    if (r + 1 < rows) out.push_back(index_of(r + 1, c));
    return out;
  }

  friend bool operator==(const QubitLayout&, const QubitLayout&) = default;
};

inline QubitLayout build_layout(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("layout dimensions must be positive, got " +
                                std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
  return QubitLayout{rows, cols};
}

/// Parses a layout spec of the form "ROWSxCOLS", e.g. "5x7".
inline QubitLayout parse_layout_spec(std::string_view spec) {
  const auto sep = spec.find('x');
  if (sep == std::string_view::npos) {
    throw std::invalid_argument("layout spec must look like 5x7, got '" +
                                std::string(spec) + "'");
  }
  int rows = 0;
  int cols = 0;
  const auto lhs = spec.substr(0, sep);
  const auto rhs = spec.substr(sep + 1);
  auto r1 = std::from_chars(lhs.data(), lhs.data() + lhs.size(), rows);
  auto r2 = std::from_chars(rhs.data(), rhs.data() + rhs.size(), cols);
  if (r1.ec != std::errc{} || r1.ptr != lhs.data() + lhs.size() ||
      r2.ec != std::errc{} || r2.ptr != rhs.data() + rhs.size()) {
    throw std::invalid_argument("layout spec must look like 5x7, got '" +
                                std::string(spec) + "'");
  }
  return build_layout(rows, cols);
}

/// All-pairs shortest hop counts over the layout's adjacency.
class DistanceMatrix {
public:
  DistanceMatrix() = default;
  DistanceMatrix(int n, std::vector<int> d) : n_(n), d_(std::move(d)) {}

  int size() const { return n_; }
  int operator()(int a, int b) const { return d_[static_cast<size_t>(a) * n_ + b]; }

private:
  int n_ = 0;
  std::vector<int> d_;
};

inline DistanceMatrix distance_matrix(const QubitLayout& layout) {
  const int n = layout.size();
  std::vector<int> d(static_cast<size_t>(n) * n, -1);
  // BFS per source; on a grid this reproduces Manhattan distance.
  std::deque<int> queue;
  for (int src = 0; src < n; ++src) {
    int* row = d.data() + static_cast<size_t>(src) * n;
    row[src] = 0;
    queue.clear();
    queue.push_back(src);
    while (!queue.empty()) {
      const int cur = queue.front();
      queue.pop_front();
      for (int nb : layout.neighbors(cur)) {
        if (row[nb] < 0) {
          row[nb] = row[cur] + 1;
          queue.push_back(nb);
        }
      }
    }
  }
  return DistanceMatrix(n, std::move(d));
}

enum class ExtendDirection { vertical, horizontal };

/// Relabeling produced by doubling a layout along one axis. Block 0 keeps the
/// original cell offsets, block 1 is the shifted copy; both maps are indexed
/// by the old qubit index.
struct ExtensionPlan {
  ExtendDirection direction = ExtendDirection::vertical;
  int base_rows = 0;
  int base_cols = 0;
  int ext_rows = 0;
  int ext_cols = 0;
  std::vector<int> block0;
  std::vector<int> block1;
};

inline std::pair<QubitLayout, ExtensionPlan> extend_layout(
    const QubitLayout& layout, ExtendDirection direction) {
  const int m = layout.rows;
  const int n = layout.cols;
  QubitLayout ext = direction == ExtendDirection::vertical
                        ? build_layout(2 * m, n)
                        : build_layout(m, 2 * n);
  ExtensionPlan plan;
  plan.direction = direction;
  plan.base_rows = m;
  plan.base_cols = n;
  plan.ext_rows = ext.rows;
  plan.ext_cols = ext.cols;
  plan.block0.resize(layout.size());
  plan.block1.resize(layout.size());
  for (int q = 0; q < layout.size(); ++q) {
    const int r = layout.row_of(q);
    const int c = layout.col_of(q);
    plan.block0[q] = ext.index_of(r, c);
    plan.block1[q] = direction == ExtendDirection::vertical
                         ? ext.index_of(r + m, c)
                         : ext.index_of(r, c + n);
  }
  return {ext, plan};
}

}  // namespace ftsynth
