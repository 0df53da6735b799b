#include "jflow/spectral.hpp"

#include "jflow/error.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace jflow {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int derivative_wavenumber(int i, int n) {
  if (2 * i == n) return 0;
  return 2 * i < n ? i : i - n;
}

} // namespace

struct Spectral::Plans {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_complex* work = nullptr;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
    fftw_free(real);
    fftw_free(spec);
    fftw_free(work);
  }
};

Spectral::Spectral(const Grid& grid) : grid_(grid), out_grid_(grid), plans_(std::make_unique<Plans>()) {
  const int n = grid.n();
  const int d = grid.real_dim();
  const int half = n / 2 + 1;
  spec_size_ = static_cast<std::size_t>(half);
  for (int a = 0; a < d - 1; ++a) spec_size_ *= static_cast<std::size_t>(n);

  plans_->real = fftw_alloc_real(grid.size());
  plans_->spec = fftw_alloc_complex(spec_size_);
  plans_->work = fftw_alloc_complex(spec_size_);
  std::vector<int> dims(static_cast<std::size_t>(d), n);
  {
    std::lock_guard lock(planner_mutex());
    plans_->r2c = fftw_plan_dft_r2c(d, dims.data(), plans_->real, plans_->spec, FFTW_ESTIMATE);
    plans_->c2r = fftw_plan_dft_c2r(d, dims.data(), plans_->work, plans_->real, FFTW_ESTIMATE);
  }
  if (!plans_->r2c || !plans_->c2r) throw Error("FFTW planning failed");

  kx_.resize(spec_size_ * static_cast<std::size_t>(d));
  for (std::size_t s = 0; s < spec_size_; ++s) {
    std::size_t rem = s;
    std::array<int, 4> idx{};
    idx[d - 1] = static_cast<int>(rem % static_cast<std::size_t>(half));
    rem /= static_cast<std::size_t>(half);
    for (int a = d - 2; a >= 0; --a) {
      idx[a] = static_cast<int>(rem % static_cast<std::size_t>(n));
      rem /= static_cast<std::size_t>(n);
    }
    for (int a = 0; a < d; ++a) kx_[s * d + a] = derivative_wavenumber(idx[a], n);
  }
  null_filter_.assign(spec_size_, 1.0);
  for (std::size_t s = 1; s < spec_size_; ++s) {
    bool null = true;
    for (int a = 0; a < d; ++a) null = null && kx_[s * d + a] == 0;
    if (null) null_filter_[s] = 0.0;
  }

  const double pi = std::numbers::pi;
  const double pi2 = pi * pi;
  s11_.resize(spec_size_);
  if (d == 4) {
    s22_.resize(spec_size_);
    s12re_.resize(spec_size_);
    s12im_.resize(spec_size_);
  }
  for (int j = 0; j < grid.complex_dim(); ++j) {
    dz_re_[j].resize(spec_size_);
    dz_im_[j].resize(spec_size_);
  }
  for (std::size_t s = 0; s < spec_size_; ++s) {
    const int* k = &kx_[s * d];
    const double x1 = k[0], y1 = k[1];
    s11_[s] = -pi2 * (x1 * x1 + y1 * y1);
    // d/dz = (d/dx - i d/dy)/2 -> pi (k_y + i k_x)
    dz_re_[0][s] = pi * y1;
    dz_im_[0][s] = pi * x1;
    if (d == 4) {
      const double x2 = k[2], y2 = k[3];
      s22_[s] = -pi2 * (x2 * x2 + y2 * y2);
      s12re_[s] = -pi2 * (x1 * x2 + y1 * y2);
      s12im_[s] = -pi2 * (x1 * y2 - y1 * x2);
      dz_re_[1][s] = pi * y2;
      dz_im_[1][s] = pi * x2;
    }
  }
}

Spectral::~Spectral() = default;

void Spectral::check_grid(const ScalarField& f) const {
  // Offsets translate the lattice and leave every symbol unchanged.
  if (f.grid().n() != grid_.n() || f.grid().complex_dim() != grid_.complex_dim()) {
    throw DomainError("field grid does not match spectral grid");
  }
  if (!f.all_finite()) throw DomainError("non-finite values in spectral input");
}

void Spectral::forward(const ScalarField& f) {
  check_grid(f);
  std::memcpy(plans_->real, f.values().data(), sizeof(double) * f.size());
  fftw_execute(plans_->r2c);
  out_grid_ = f.grid();
}

ScalarField Spectral::apply_symbol(const std::vector<double>& symbol) {
  const double norm = 1.0 / static_cast<double>(grid_.size());
  for (std::size_t s = 0; s < spec_size_; ++s) {
    const double m = symbol[s] * norm;
    plans_->work[s][0] = plans_->spec[s][0] * m;
    plans_->work[s][1] = plans_->spec[s][1] * m;
  }
  fftw_execute(plans_->c2r);
  return ScalarField(out_grid_, std::vector<double>(plans_->real, plans_->real + grid_.size()));
}

HermitianFormField Spectral::complex_hessian(const ScalarField& phi) {
  if (grid_.complex_dim() != 2) throw DomainError("complex_hessian needs a torus grid");
  forward(phi);
  return HermitianFormField(apply_symbol(s11_), apply_symbol(s22_), apply_symbol(s12re_),
                            apply_symbol(s12im_));
}

ScalarField Spectral::ddbar(const ScalarField& phi) {
  if (grid_.complex_dim() != 1) throw DomainError("ddbar needs a plane grid");
  forward(phi);
  return apply_symbol(s11_);
}

std::vector<std::pair<ScalarField, ScalarField>> Spectral::dz(const ScalarField& phi) {
  forward(phi);
  const double norm = 1.0 / static_cast<double>(grid_.size());
  std::vector<std::pair<ScalarField, ScalarField>> out;
  auto imaginary_symbol = [&](const std::vector<double>& odd) {
    // multiply by i * odd: (re, im) -> (-im * odd, re * odd)
    for (std::size_t s = 0; s < spec_size_; ++s) {
      const double m = odd[s] * norm;
      plans_->work[s][0] = -plans_->spec[s][1] * m;
      plans_->work[s][1] = plans_->spec[s][0] * m;
    }
    fftw_execute(plans_->c2r);
    return ScalarField(out_grid_, std::vector<double>(plans_->real, plans_->real + grid_.size()));
  };
  for (int j = 0; j < grid_.complex_dim(); ++j) {
    // Re(d phi/dz) = phi_x / 2 has symbol i pi k_x; Im = -phi_y / 2 has symbol -i pi k_y.
    std::vector<double> neg_y(dz_re_[j].size());
    for (std::size_t s = 0; s < neg_y.size(); ++s) neg_y[s] = -dz_re_[j][s];
    ScalarField re = imaginary_symbol(dz_im_[j]);
    ScalarField im = imaginary_symbol(neg_y);
    out.emplace_back(std::move(re), std::move(im));
  }
  return out;
}

ScalarField Spectral::solve_constant_coefficient(const ScalarField& src, const Herm2& b) {
  forward(src);
  std::vector<double> inv(spec_size_);
  for (std::size_t s = 0; s < spec_size_; ++s) {
    double sym = b.a11 * s11_[s];
    if (grid_.complex_dim() == 2) {
      sym += b.a22 * s22_[s] + 2.0 * (b.a12.real() * s12re_[s] + b.a12.imag() * s12im_[s]);
    }
    inv[s] = std::abs(sym) > 1e-12 ? 1.0 / sym : 0.0;
  }
  return apply_symbol(inv);
}

ScalarField Spectral::remove_null_modes(const ScalarField& f) {
  forward(f);
  return apply_symbol(null_filter_);
}

Spectral& spectral_for(const Grid& grid) {
  using Key = std::tuple<int, int>;
  thread_local std::map<Key, std::unique_ptr<Spectral>> cache;
  const Key key{grid.n(), grid.complex_dim()};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_unique<Spectral>(grid)).first;
  return *it->second;
}

HermitianFormField complex_hessian(const ScalarField& phi) {
  return spectral_for(phi.grid()).complex_hessian(phi);
}

ScalarField ddbar(const ScalarField& phi) { return spectral_for(phi.grid()).ddbar(phi); }

ScalarField remove_null_modes(const ScalarField& phi) { return spectral_for(phi.grid()).remove_null_modes(phi); }

} // namespace jflow
