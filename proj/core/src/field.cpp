#include "jflow/field.hpp"

#include "jflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jflow {

Grid::Grid(int n, int complex_dim, std::array<double, 4> offsets)
    : n_(n), complex_dim_(complex_dim), offsets_(offsets) {
  if (n < 4 || n % 2 != 0) {
    throw DomainError("grid size N must be even and at least 4, got " + std::to_string(n));
  }
  const double h = 1.0 / n;
  for (int a = 0; a < 2 * complex_dim; ++a) {
    if (offsets_[a] < 0.0 || offsets_[a] >= h) {
      throw DomainError("grid offsets must lie in [0, 1/N)");
    }
  }
  size_ = 1;
  for (int a = 0; a < 2 * complex_dim; ++a) size_ *= static_cast<std::size_t>(n);
}

Grid Grid::torus(int n, std::array<double, 4> offsets) { return Grid(n, 2, offsets); }

Grid Grid::plane(int n, std::array<double, 2> offsets) {
  return Grid(n, 1, {offsets[0], offsets[1], 0.0, 0.0});
}

std::array<int, 4> Grid::multi_index(std::size_t flat) const {
  std::array<int, 4> idx{};
  const int d = real_dim();
  for (int a = d - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(n_));
    flat /= static_cast<std::size_t>(n_);
  }
  return idx;
}

double Grid::coordinate(std::size_t flat, int axis) const {
  return multi_index(flat)[axis] * spacing() + offsets_[axis];
}

std::array<double, 4> Grid::point(std::size_t flat) const {
  const auto idx = multi_index(flat);
  std::array<double, 4> p{};
  for (int a = 0; a < real_dim(); ++a) p[a] = idx[a] * spacing() + offsets_[a];
  return p;
}

bool Grid::operator==(const Grid& other) const {
  return n_ == other.n_ && complex_dim_ == other.complex_dim_ && offsets_ == other.offsets_;
}

ScalarField::ScalarField(Grid grid, double value) : grid_(grid), values_(grid.size(), value) {}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw DomainError("scalar field length does not match grid");
  }
}

ScalarField ScalarField::sample(const Grid& grid,
                                const std::function<double(const std::array<double, 4>&)>& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) out.values_[i] = f(grid.point(i));
  return out;
}

double ScalarField::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(size());
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::sup_abs() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

namespace {
void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw DomainError("scalar fields live on different grids");
}
} // namespace

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& other) {
  require_same_grid(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= other.values_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::operator+=(double s) {
  for (double& v : values_) v += s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }
ScalarField operator+(ScalarField a, double s) { return a += s; }

double integrate(const ScalarField& density) { return 4.0 * density.mean(); }

} // namespace jflow
