#include "mlgcp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mlgcp/rng.hpp"

namespace mlgcp {

PairIndex enumerate_pairs(const PointPattern& pattern, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("enumerate_pairs: R must be positive");
  pattern.window.validate();

  PairIndex index;
  index.R = R;
  index.n_types = pattern.n_types;

  const int n = static_cast<int>(pattern.points.size());
  if (n >= 2) {
    // uniform hash grid with cell size R: candidates live in the 3x3 neighborhood
    const Window& w = pattern.window;
    const int gx = std::max(1, static_cast<int>(std::floor(w.width() / R)));
    const int gy = std::max(1, static_cast<int>(std::floor(w.height() / R)));
    const double cw = w.width() / gx;
    const double ch = w.height() / gy;

    std::vector<std::vector<int>> cells(static_cast<std::size_t>(gx) * gy);
    auto cell_of = [&](const Point& pt) {
      int cx = std::min(static_cast<int>((pt.x - w.x0) / cw), gx - 1);
      int cy = std::min(static_cast<int>((pt.y - w.y0) / ch), gy - 1);
      return cy * gx + cx;
    };
    for (int a = 0; a < n; ++a) cells[cell_of(pattern.points[a])].push_back(a);

    const double R2 = R * R;
    for (int cy = 0; cy < gy; ++cy) {
      for (int cx = 0; cx < gx; ++cx) {
        const auto& here = cells[static_cast<std::size_t>(cy) * gx + cx];
        if (here.empty()) continue;
        for (int ny_ = std::max(0, cy - 1); ny_ <= std::min(gy - 1, cy + 1); ++ny_) {
          for (int nx_ = std::max(0, cx - 1); nx_ <= std::min(gx - 1, cx + 1); ++nx_) {
            const auto& there = cells[static_cast<std::size_t>(ny_) * gx + nx_];
            for (int a : here) {
              const Point& pa = pattern.points[a];
              for (int b : there) {
                if (b <= a) continue;  // canonical unordered pair a < b
                const Point& pb = pattern.points[b];
                const double dx = pa.x - pb.x;
                const double dy = pa.y - pb.y;
                const double d2 = dx * dx + dy * dy;
                if (d2 > R2 || d2 == 0.0) continue;
                const double r = std::sqrt(d2);
                index.entries.push_back({a, b, pa.type, pb.type, r});
                index.entries.push_back({b, a, pb.type, pa.type, r});
              }
            }
          }
        }
      }
    }
  }

  index.rebuild_buckets();
  return index;
}

std::vector<PairIndex> kfold_split(const PairIndex& pairs, int K, std::uint64_t seed) {
  if (K < 2) throw std::invalid_argument("kfold_split: K must be >= 2");

  std::vector<PairIndex> folds(K);
  for (auto& f : folds) {
    f.R = pairs.R;
    f.n_types = pairs.n_types;
  }

  Rng rng(seed);
  const int p = pairs.n_types;
  // Assign the canonical member (u < v) of each swap pair per bucket, then
  // mirror, so train/validation sets stay swap-closed. Buckets are processed
  // over unordered type pairs (i <= j); the (j,i) bucket follows by mirroring.
  for (int i = 0; i < p; ++i) {
    for (int j = i; j < p; ++j) {
      // canonical representatives (u < v) of all unordered pairs with types {i,j}:
      // they sit in bucket(i,j) or, when i != j, in bucket(j,i)
      std::vector<int> canon;
      for (int e : pairs.bucket(i, j)) {
        const PairEntry& pe = pairs.entries[e];
        if (pe.u < pe.v) canon.push_back(e);
      }
      if (j != i) {
        for (int e : pairs.bucket(j, i)) {
          const PairEntry& pe = pairs.entries[e];
          if (pe.u < pe.v) canon.push_back(e);
        }
      }
      // shuffle (Fisher-Yates on the rng stream), then deal round-robin
      for (int a = static_cast<int>(canon.size()) - 1; a > 0; --a) {
        const int b = static_cast<int>(rng.uniform() * (a + 1));
        std::swap(canon[a], canon[std::min(b, a)]);
      }
      for (std::size_t idx = 0; idx < canon.size(); ++idx) {
        const PairEntry& pe = pairs.entries[canon[idx]];
        PairIndex& fold = folds[idx % K];
        fold.entries.push_back(pe);
        fold.entries.push_back({pe.v, pe.u, pe.tj, pe.ti, pe.r});
      }
    }
  }
  for (auto& f : folds) f.rebuild_buckets();
  return folds;
}

void write_pattern_csv(const PointPattern& pattern, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "x,y,type\n";
  out.precision(17);
  for (const auto& pt : pattern.points)
    out << pt.x << ',' << pt.y << ',' << (pt.type + 1) << '\n';
}

PointPattern read_pattern_csv(const std::string& path, Window window, int n_types) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y,type", 0) != 0)
    throw std::runtime_error(path + ":1: expected header 'x,y,type'");

  PointPattern pattern;
  pattern.window = window;
  pattern.n_types = n_types;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string fx, fy, ft;
    if (!std::getline(ss, fx, ',') || !std::getline(ss, fy, ',') || !std::getline(ss, ft, ','))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
    Point pt;
    pt.x = std::stod(fx);
    pt.y = std::stod(fy);
    pt.type = std::stoi(ft) - 1;
    pattern.points.push_back(pt);
  }
  pattern.validate();
  return pattern;
}

void write_field_csv(const ScalarField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(17);
  out << "x0,y0,x1,y1\n"
      << field.window.x0 << ',' << field.window.y0 << ',' << field.window.x1 << ','
      << field.window.y1 << "\n"
      << "nx,ny\n"
      << field.nx << ',' << field.ny << '\n';
  for (int iy = 0; iy < field.ny; ++iy) {
    for (int ix = 0; ix < field.nx; ++ix) {
      if (ix) out << ',';
      out << field.at(ix, iy);
    }
    out << '\n';
  }
}

ScalarField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  auto expect = [&](const char* label, int lineno) {
    if (!std::getline(in, line) || line.rfind(label, 0) != 0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected '" +
                               label + "' header line");
  };
  expect("x0,y0,x1,y1", 1);
  std::getline(in, line);
  Window w;
  {
    std::istringstream ss(line);
    char c;
    ss >> w.x0 >> c >> w.y0 >> c >> w.x1 >> c >> w.y1;
  }
  expect("nx,ny", 3);
  std::getline(in, line);
  int nx = 0, ny = 0;
  {
    std::istringstream ss(line);
    char c;
    ss >> nx >> c >> ny;
  }
  ScalarField field(w, nx, ny);
  for (int iy = 0; iy < ny; ++iy) {
    if (!std::getline(in, line))
      throw std::runtime_error(path + ": truncated raster body");
    std::istringstream ss(line);
    std::string tok;
    for (int ix = 0; ix < nx; ++ix) {
      if (!std::getline(ss, tok, ','))
        throw std::runtime_error(path + ": row " + std::to_string(iy) + " too short");
      field.at(ix, iy) = std::stod(tok);
    }
  }
  return field;
}

}  // namespace mlgcp
