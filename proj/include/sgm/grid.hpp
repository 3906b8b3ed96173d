#pragma once

// Uniform tensor grids on an interval or a rectangle, grid functions (Field),
// the boundary distance d(x), the boundary layer {d < delta}, and the discrete
// norms used throughout the solver.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sgm/error.hpp"

namespace sgm {

enum class DomainKind { interval, rectangle };

struct Domain {
  DomainKind kind = DomainKind::interval;
  std::array<double, 2> extents{1.0, 0.0};

  static Domain interval(double length) { return {DomainKind::interval, {length, 0.0}}; }
  static Domain rectangle(double lx, double ly) { return {DomainKind::rectangle, {lx, ly}}; }

  int dimension() const noexcept { return kind == DomainKind::interval ? 1 : 2; }

  double min_extent() const noexcept {
    return kind == DomainKind::interval ? extents[0] : std::min(extents[0], extents[1]);
  }
};

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Uniform grid with `n` nodes per axis, nodes numbered row-major (x fastest).
class Grid {
public:
  Grid(const Domain& domain, std::size_t n) : domain_(domain), n_(n) {
    if (n < 3) throw InvalidArgument("grid needs at least 3 nodes per axis, got " + std::to_string(n));
    const int dim = domain.dimension();
    for (int a = 0; a < dim; ++a) {
      if (!(domain.extents[a] > 0.0) || !std::isfinite(domain.extents[a]))
        throw InvalidArgument("domain extents must be positive and finite");
    }
    dim_ = dim;
    nx_ = n;
    ny_ = dim == 2 ? n : 1;
    for (int a = 0; a < dim; ++a) h_[a] = domain.extents[a] / static_cast<double>(n - 1);

    const std::size_t total = nx_ * ny_;
    coords_.resize(total);
    distance_.resize(total);
    interior_index_.assign(total, npos);
    for (std::size_t j = 0; j < ny_; ++j) {
      for (std::size_t i = 0; i < nx_; ++i) {
        const std::size_t k = index(i, j);
        coords_[k] = {axis_coord(0, i), dim == 2 ? axis_coord(1, j) : 0.0};
        double d = axis_distance(0, i);
        if (dim == 2) d = std::min(d, axis_distance(1, j));
        distance_[k] = d;
        const bool boundary = i == 0 || i == nx_ - 1 || (dim == 2 && (j == 0 || j == ny_ - 1));
        if (boundary) {
          boundary_ids_.push_back(k);
        } else {
          interior_index_[k] = interior_ids_.size();
          interior_ids_.push_back(k);
        }
      }
    }
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  const Domain& domain() const noexcept { return domain_; }
  int dimension() const noexcept { return dim_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return coords_.size(); }

  double h(int axis) const noexcept { return h_[axis]; }
  double h_min() const noexcept { return dim_ == 1 ? h_[0] : std::min(h_[0], h_[1]); }

  /// Weight of one node in the lumped (cell) measure: h in 1D, hx*hy in 2D.
  double cell_volume() const noexcept { return dim_ == 1 ? h_[0] : h_[0] * h_[1]; }

  std::size_t index(std::size_t i, std::size_t j = 0) const noexcept { return j * nx_ + i; }
  std::array<std::size_t, 2> ij(std::size_t k) const noexcept { return {k % nx_, k / nx_}; }

  const std::array<double, 2>& coord(std::size_t k) const noexcept { return coords_[k]; }
  bool is_boundary(std::size_t k) const noexcept { return interior_index_[k] == npos; }

  /// Position of node k among the interior unknowns, or npos for boundary nodes.
  std::size_t interior_index(std::size_t k) const noexcept { return interior_index_[k]; }

  std::span<const std::size_t> interior_ids() const noexcept { return interior_ids_; }
  std::span<const std::size_t> boundary_ids() const noexcept { return boundary_ids_; }

  /// Distance to the boundary at every node.
  std::span<const double> distance() const noexcept { return distance_; }

  /// Node reflected across the midline orthogonal to `axis`.
  std::size_t mirror(std::size_t k, int axis) const noexcept {
    auto [i, j] = ij(k);
    if (axis == 0) return index(nx_ - 1 - i, j);
    return index(i, ny_ - 1 - j);
  }

  /// Trapezoid quadrature weight of node k.
  double trapezoid_weight(std::size_t k) const noexcept {
    auto [i, j] = ij(k);
    double w = axis_weight(0, i);
    if (dim_ == 2) w *= axis_weight(1, j);
    return w;
  }

private:
  std::size_t axis_count(int axis) const noexcept { return axis == 0 ? nx_ : ny_; }

  // Coordinates are generated from the nearer end so the grid is bitwise
  // symmetric and d equals an integer multiple of h.
  double axis_coord(int axis, std::size_t i) const noexcept {
    const std::size_t last = axis_count(axis) - 1;
    if (2 * i <= last) return static_cast<double>(i) * h_[axis];
    return domain_.extents[axis] - static_cast<double>(last - i) * h_[axis];
  }

  double axis_distance(int axis, std::size_t i) const noexcept {
    const std::size_t last = axis_count(axis) - 1;
    return static_cast<double>(std::min(i, last - i)) * h_[axis];
  }

  double axis_weight(int axis, std::size_t i) const noexcept {
    const std::size_t last = axis_count(axis) - 1;
    return (i == 0 || i == last) ? 0.5 * h_[axis] : h_[axis];
  }

  Domain domain_;
  std::size_t n_;
  int dim_ = 1;
  std::size_t nx_ = 0;
  std::size_t ny_ = 1;
  std::array<double, 2> h_{0.0, 0.0};
  std::vector<std::array<double, 2>> coords_;
  std::vector<double> distance_;
  std::vector<std::size_t> interior_index_;
  std::vector<std::size_t> interior_ids_;
  std::vector<std::size_t> boundary_ids_;
};

inline GridPtr build_grid(const Domain& domain, std::size_t n) {
  return std::make_shared<const Grid>(domain, n);
}

/// Real-valued grid function; one value per node.
class Field {
public:
  Field() = default;
  explicit Field(GridPtr grid, double fill = 0.0) : grid_(std::move(grid)) {
    if (!grid_) throw InvalidArgument("field needs a grid");
    values_.assign(grid_->size(), fill);
  }
  Field(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw InvalidArgument("field needs a grid");
    if (values_.size() != grid_->size()) throw InvalidArgument("field size does not match grid");
  }

  template <class Fn>
  static Field from_function(GridPtr grid, Fn&& fn) {
    Field f(grid);
    for (std::size_t k = 0; k < grid->size(); ++k) {
      const auto& p = grid->coord(k);
      f.values_[k] = fn(p[0], p[1]);
    }
    return f;
  }

  /// Like from_function but forced to zero on boundary nodes.
  template <class Fn>
  static Field dirichlet(GridPtr grid, Fn&& fn) {
    Field f = from_function(grid, std::forward<Fn>(fn));
    for (std::size_t k : grid->boundary_ids()) f.values_[k] = 0.0;
    return f;
  }

  /// The boundary distance d as a field.
  static Field distance(GridPtr grid) {
    auto d = grid->distance();
    return Field(grid, std::vector<double>(d.begin(), d.end()));
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  bool empty() const noexcept { return !grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
  }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
  }
  Field& operator*=(double s) noexcept {
    for (double& v : values_) v *= s;
    return *this;
  }

  void check_same(const Field& o) const {
    if (grid_ != o.grid_) throw InvalidArgument("fields live on different grids");
  }

private:
  GridPtr grid_;
  std::vector<double> values_;
};

inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(double s, Field a) { return a *= s; }
inline Field operator-(Field a) {
  for (double& v : a.values()) v = -v;
  return a;
}

/// Sup of |a - b| over all nodes.
inline double sup_distance(const Field& a, const Field& b) {
  a.check_same(b);
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

/// Nodes of the layer {x interior : d(x) < delta}.
inline std::vector<bool> boundary_layer_mask(const Grid& grid, double delta) {
  const double half = 0.5 * grid.domain().min_extent();
  if (!(delta > 0.0) || !(delta < half)) {
    throw InvalidArgument("boundary layer width must lie in (0, " + std::to_string(half) + "), got " +
                          std::to_string(delta));
  }
  std::vector<bool> mask(grid.size(), false);
  auto d = grid.distance();
  for (std::size_t k : grid.interior_ids()) mask[k] = d[k] < delta;
  return mask;
}

enum class NormKind { sup, l2, h1 };

/// Trapezoid-weighted inner product.
inline double inner(const Field& a, const Field& b) {
  a.check_same(b);
  const Grid& g = a.grid();
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += g.trapezoid_weight(k) * a[k] * b[k];
  return s;
}

namespace detail {

// Sum over grid edges of (edge weight) * (forward difference / h)^2.
inline double gradient_energy(const Field& f) {
  const Grid& g = f.grid();
  double s = 0.0;
  const double hx = g.h(0);
  for (std::size_t j = 0; j < g.ny(); ++j) {
    // Edge weights along x: hx times the trapezoid weight in y.
    double wy = 1.0;
    if (g.dimension() == 2) wy = (j == 0 || j == g.ny() - 1) ? 0.5 * g.h(1) : g.h(1);
    for (std::size_t i = 0; i + 1 < g.nx(); ++i) {
      const double df = (f[g.index(i + 1, j)] - f[g.index(i, j)]) / hx;
      s += hx * wy * df * df;
    }
  }
  if (g.dimension() == 2) {
    const double hy = g.h(1);
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const double wx = (i == 0 || i == g.nx() - 1) ? 0.5 * hx : hx;
      for (std::size_t j = 0; j + 1 < g.ny(); ++j) {
        const double df = (f[g.index(i, j + 1)] - f[g.index(i, j)]) / hy;
        s += hy * wx * df * df;
      }
    }
  }
  return s;
}

}  // namespace detail

inline double norm(const Field& f, NormKind kind) {
  switch (kind) {
    case NormKind::sup: {
      double m = 0.0;
      for (double v : f.values()) m = std::max(m, std::abs(v));
      return m;
    }
    case NormKind::l2:
      return std::sqrt(inner(f, f));
    case NormKind::h1:
      return std::sqrt(detail::gradient_energy(f) + inner(f, f));
  }
  return 0.0;
}

// CSV: header "x,value" (1D) or "x,y,value" (2D), one node per row, row-major.

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const Field& f) {
  const Grid& g = f.grid();
  os << (g.dimension() == 1 ? "x,value\n" : "x,y,value\n");
  for (std::size_t k = 0; k < f.size(); ++k) {
    const auto& p = g.coord(k);
    os << format_double(p[0]) << ',';
    if (g.dimension() == 2) os << format_double(p[1]) << ',';
    os << format_double(f[k]) << '\n';
  }
}

/// Reads a CSV written by write_csv onto `grid`; lines starting with '#' are skipped.
inline Field read_csv(std::istream& is, GridPtr grid) {
  const int dim = grid->dimension();
  std::string line;
  bool header = false;
  std::vector<double> values;
  values.reserve(grid->size());
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      const char* expected = dim == 1 ? "x,value" : "x,y,value";
      if (line != expected) throw InvalidArgument("unexpected CSV header '" + line + "'");
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != static_cast<std::size_t>(dim + 1)) throw InvalidArgument("malformed CSV row '" + line + "'");
    const std::size_t k = values.size();
    if (k >= grid->size()) throw InvalidArgument("CSV has more rows than grid nodes");
    const auto& p = grid->coord(k);
    const double tol = 1e-9 * grid->domain().min_extent();
    if (std::abs(row[0] - p[0]) > tol || (dim == 2 && std::abs(row[1] - p[1]) > tol))
      throw InvalidArgument("CSV node coordinates do not match the grid at row " + std::to_string(k));
    values.push_back(row.back());
  }
  if (values.size() != grid->size()) throw InvalidArgument("CSV row count does not match grid");
  return Field(std::move(grid), std::move(values));
}

}  // namespace sgm
