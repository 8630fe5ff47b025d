#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlgcp {

struct Window {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  double shorter_side() const { return std::min(width(), height()); }

  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }

  void validate() const {
    if (!(x1 > x0) || !(y1 > y0))
      throw std::invalid_argument("Window: upper corner must exceed lower corner");
  }
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  int type = 0;  // 0-based type index; CSV files use 1-based labels
};

struct PointPattern {
  std::vector<Point> points;
  Window window;
  int n_types = 1;  // declared, not inferred; empty types are allowed

  std::size_t size() const { return points.size(); }

  void validate() const {
    window.validate();
    if (n_types < 1) throw std::invalid_argument("PointPattern: n_types must be >= 1");
    for (const auto& pt : points) {
      if (!window.contains(pt.x, pt.y))
        throw std::invalid_argument("PointPattern: point outside window");
      if (pt.type < 0 || pt.type >= n_types)
        throw std::invalid_argument("PointPattern: type index out of range");
    }
  }

  std::vector<long> type_counts() const {
    std::vector<long> counts(n_types, 0);
    for (const auto& pt : points) ++counts[pt.type];
    return counts;
  }
};

// Gridded real-valued function over a rectangular window, nearest-cell lookup.
struct ScalarField {
  Window window;
  int nx = 2, ny = 2;
  std::vector<double> values;  // row-major: values[iy * nx + ix]

  ScalarField() = default;
  ScalarField(Window w, int nx_, int ny_, double fill = 0.0)
      : window(w), nx(nx_), ny(ny_), values(static_cast<std::size_t>(nx_) * ny_, fill) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("ScalarField: nx, ny must be >= 2");
  }

  double dx() const { return window.width() / nx; }
  double dy() const { return window.height() / ny; }
  double cell_area() const { return dx() * dy(); }

  double& at(int ix, int iy) { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }

  int cell_ix(double x) const {
    int ix = static_cast<int>((x - window.x0) / dx());
    return std::min(std::max(ix, 0), nx - 1);
  }
  int cell_iy(double y) const {
    int iy = static_cast<int>((y - window.y0) / dy());
    return std::min(std::max(iy, 0), ny - 1);
  }

  double value_at(double x, double y) const { return at(cell_ix(x), cell_iy(y)); }

  double cell_center_x(int ix) const { return window.x0 + (ix + 0.5) * dx(); }
  double cell_center_y(int iy) const { return window.y0 + (iy + 0.5) * dy(); }

  // grid quadrature of the field over the window
  double integral() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * cell_area();
  }
};

struct PairEntry {
  int u = 0;   // point index of the first member
  int v = 0;   // point index of the second member
  int ti = 0;  // type of point u
  int tj = 0;  // type of point v
  double r = 0.0;
};

// All ordered distinct pairs within distance R, bucketed by (type_i, type_j).
struct PairIndex {
  double R = 0.0;
  int n_types = 1;
  std::vector<PairEntry> entries;
  // bucket(i,j) lists indices into `entries`
  std::vector<std::vector<int>> buckets;

  int bucket_id(int i, int j) const { return i * n_types + j; }
  const std::vector<int>& bucket(int i, int j) const { return buckets[bucket_id(i, j)]; }

  void rebuild_buckets() {
    buckets.assign(static_cast<std::size_t>(n_types) * n_types, {});
    for (int e = 0; e < static_cast<int>(entries.size()); ++e)
      buckets[bucket_id(entries[e].ti, entries[e].tj)].push_back(e);
  }
};

PairIndex enumerate_pairs(const PointPattern& pattern, double R);

// K disjoint folds, partitioning each (i,j) bucket with sizes differing by at
// most one; swap-paired entries (u,v)/(v,u) always land in the same fold.
std::vector<PairIndex> kfold_split(const PairIndex& pairs, int K, std::uint64_t seed);

// CSV interchange: patterns as `x,y,type` (1-based type label), fields as a
// raster with a 4-line header (`x0,y0,x1,y1` labels + values, `nx,ny` labels +
// values) followed by ny rows of nx values.
void write_pattern_csv(const PointPattern& pattern, const std::string& path);
PointPattern read_pattern_csv(const std::string& path, Window window, int n_types);
void write_field_csv(const ScalarField& field, const std::string& path);
ScalarField read_field_csv(const std::string& path);

}  // namespace mlgcp
