#include "jflow/separable.hpp"

#include "jflow/error.hpp"
#include "jflow/split.hpp"

#include <cmath>
#include <numeric>

namespace jflow {

Separable::Separable(const Grid& plane) : plane_(plane) {
  if (plane.complex_dim() != 1) throw DomainError("separable factors live on plane grids");
}

Separable Separable::first(const ScalarField& a) {
  Separable s(a.grid());
  s.terms_.push_back({{a.values().begin(), a.values().end()}, std::vector<double>(a.size(), 1.0)});
  return s;
}

Separable Separable::second(const ScalarField& b) {
  Separable s(b.grid());
  s.terms_.push_back({std::vector<double>(b.size(), 1.0), {b.values().begin(), b.values().end()}});
  return s;
}

Separable Separable::constant(const Grid& plane, double value) {
  Separable s(plane);
  s.terms_.push_back({std::vector<double>(plane.size(), value), std::vector<double>(plane.size(), 1.0)});
  return s;
}

Separable& Separable::operator+=(const Separable& o) {
  if (!(o.plane_ == plane_)) throw DomainError("separable operands on different grids");
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  return *this;
}

Separable& Separable::operator*=(double s) {
  for (auto& t : terms_)
    for (double& v : t.a) v *= s;
  return *this;
}

Separable operator*(const Separable& x, const Separable& y) {
  if (!(x.plane_ == y.plane_)) throw DomainError("separable operands on different grids");
  Separable out(x.plane_);
  const std::size_t m = x.plane_.size();
  for (const auto& s : x.terms_) {
    for (const auto& t : y.terms_) {
      Separable::Term p{std::vector<double>(m), std::vector<double>(m)};
      for (std::size_t i = 0; i < m; ++i) {
        p.a[i] = s.a[i] * t.a[i];
        p.b[i] = s.b[i] * t.b[i];
      }
      out.terms_.push_back(std::move(p));
    }
  }
  return out;
}

double Separable::mean() const {
  const double m = static_cast<double>(plane_.size());
  double total = 0.0;
  for (const auto& t : terms_) {
    total += (std::accumulate(t.a.begin(), t.a.end(), 0.0) / m) *
             (std::accumulate(t.b.begin(), t.b.end(), 0.0) / m);
  }
  return total;
}

double Separable::value(std::size_t i1, std::size_t i2) const {
  double v = 0.0;
  for (const auto& t : terms_) v += t.a[i1] * t.b[i2];
  return v;
}

double Separable::sup_abs() const {
  double s = 0.0;
  const std::size_t m = plane_.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) s = std::max(s, std::abs(value(i, j)));
  return s;
}

ScalarField Separable::assemble() const {
  const std::size_t m = plane_.size();
  ScalarField out(torus_of(plane_));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = value(i, j);
  return out;
}

Separable operator+(Separable x, const Separable& y) { return x += y; }
Separable operator-(Separable x, Separable y) { return x += (y *= -1.0); }
Separable operator*(double s, Separable x) { return x *= s; }

double integrate(const Separable& density) { return 4.0 * density.mean(); }

Separable wedge_density(const SplitHerm& x, const SplitHerm& y) {
  // diag(xa, xb) ^ diag(ya, yb) = xa yb + ya xb
  Separable d = Separable::first(x.a) * Separable::second(y.b);
  d += Separable::first(y.a) * Separable::second(x.b);
  return d;
}

SplitHerm operator+(const SplitHerm& x, const SplitHerm& y) { return {x.a + y.a, x.b + y.b}; }

} // namespace jflow
