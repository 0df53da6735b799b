#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace jflow {

/// Uniform periodic lattice on the unit box.
///
/// A torus grid has complex dimension 2 (real coordinates x1, y1, x2, y2,
/// N^4 points, row-major with y2 fastest). A plane grid has complex
/// dimension 1 (x, y, N^2 points) and carries one factor of a product
/// (split) field.
class Grid {
public:
  static Grid torus(int n, std::array<double, 4> offsets = {});
  static Grid plane(int n, std::array<double, 2> offsets = {});

  int n() const { return n_; }
  int complex_dim() const { return complex_dim_; }
  int real_dim() const { return 2 * complex_dim_; }
  double spacing() const { return 1.0 / n_; }
  std::size_t size() const { return size_; }
  const std::array<double, 4>& offsets() const { return offsets_; }

  /// Integer lattice index along each real axis.
  std::array<int, 4> multi_index(std::size_t flat) const;
  /// Real coordinate of the given point along real axis `axis`.
  double coordinate(std::size_t flat, int axis) const;
  std::array<double, 4> point(std::size_t flat) const;

  bool operator==(const Grid& other) const;

private:
  Grid(int n, int complex_dim, std::array<double, 4> offsets);

  int n_ = 0;
  int complex_dim_ = 2;
  std::size_t size_ = 0;
  std::array<double, 4> offsets_{};
};

/// Real function sampled on a Grid.
class ScalarField {
public:
  ScalarField() = default;
  explicit ScalarField(Grid grid, double value = 0.0);
  ScalarField(Grid grid, std::vector<double> values);

  /// Samples f at every grid point; f receives the real coordinates
  /// (unused trailing entries are zero on plane grids).
  static ScalarField sample(const Grid& grid,
                            const std::function<double(const std::array<double, 4>&)>& f);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  double mean() const;
  double min() const;
  double max() const;
  double sup_abs() const;
  bool all_finite() const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(const ScalarField& other);
  ScalarField& operator*=(double s);
  ScalarField& operator+=(double s);

private:
  Grid grid_ = Grid::torus(4);
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
ScalarField operator+(ScalarField a, double s);

/// Integral over the torus with the volume convention i dz^dzbar = 2 dx^dy:
/// a top-form density integrates to 4 * mean over the unit box.
double integrate(const ScalarField& density);

} // namespace jflow
