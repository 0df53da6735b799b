#pragma once

#include "jflow/field.hpp"

#include <vector>

namespace jflow {

/// Function on T^4 written as a finite sum of products a_i(z1) b_i(z2).
///
/// Products of split potentials and diagonal split forms stay in this class
/// with a handful of terms, and the mean over T^4 of each term factorizes,
/// so torus integrals of split quantities never need the N^4 grid.
class Separable {
public:
  explicit Separable(const Grid& plane);

  static Separable first(const ScalarField& a);
  static Separable second(const ScalarField& b);
  static Separable constant(const Grid& plane, double value);

  const Grid& plane() const { return plane_; }
  std::size_t terms() const { return terms_.size(); }

  Separable& operator+=(const Separable& o);
  Separable& operator*=(double s);
  friend Separable operator*(const Separable& x, const Separable& y);

  double mean() const;
  double value(std::size_t i1, std::size_t i2) const;
  /// Max |value| over all N^4 point pairs.
  double sup_abs() const;
  ScalarField assemble() const;

private:
  struct Term {
    std::vector<double> a, b;
  };
  Grid plane_;
  std::vector<Term> terms_;
};

Separable operator+(Separable x, const Separable& y);
Separable operator-(Separable x, Separable y);
Separable operator*(double s, Separable x);
Separable operator*(const Separable& x, const Separable& y);

/// 4 * mean over T^4, as for torus densities.
double integrate(const Separable& density);

/// Realized diagonal split form diag(a(z1), b(z2)).
struct SplitHerm {
  ScalarField a;
  ScalarField b;
};

Separable wedge_density(const SplitHerm& x, const SplitHerm& y);
SplitHerm operator+(const SplitHerm& x, const SplitHerm& y);

} // namespace jflow
