#include "conelab/spectral_grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <string>

namespace conelab {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
struct Plans {
  fftw_plan r2c;
  fftw_plan c2r;
};

const Plans& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, Plans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> in(n);
  std::vector<fftw_complex> out(n / 2 + 1);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  Plans p{fftw_plan_dft_r2c_1d(n, in.data(), out.data(), flags),
          fftw_plan_dft_c2r_1d(n, out.data(), in.data(), flags | FFTW_DESTROY_INPUT)};
  return cache.emplace(n, p).first->second;
}

void require_same_grid(const Grid1D& a, const Grid1D& b) {
  if (!(a == b)) throw InvalidArgument("fields live on different grids");
}

template <class Symbol>
PeriodicField apply_symbol(const PeriodicField& f, Symbol&& symbol) {
  auto c = forward_transform(f);
  for (int k = 0; k < static_cast<int>(c.size()); ++k) c[k] *= symbol(k);
  return inverse_transform(f.grid(), c);
}

}  // namespace

Grid1D::Grid1D(int n, double length) : n_(n), length_(length) {
  if (n < 8 || !std::has_single_bit(static_cast<unsigned>(n)))
    throw InvalidArgument("grid size must be a power of two >= 8, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length))
    throw InvalidArgument("grid length must be positive");
}

std::vector<double> Grid1D::points() const {
  std::vector<double> p(n_);
  for (int j = 0; j < n_; ++j) p[j] = x(j);
  return p;
}

PeriodicField::PeriodicField(const Grid1D& grid) : grid_(grid), values_(grid.n(), 0.0) {}

PeriodicField::PeriodicField(const Grid1D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != grid_.n())
    throw InvalidArgument("field has " + std::to_string(values_.size()) +
                          " samples, grid has " + std::to_string(grid_.n()));
}

bool PeriodicField::is_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double PeriodicField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double PeriodicField::min() const { return *std::min_element(values_.begin(), values_.end()); }

PeriodicField& PeriodicField::operator+=(const PeriodicField& o) {
  require_same_grid(grid_, o.grid_);
  for (int j = 0; j < size(); ++j) values_[j] += o.values_[j];
  return *this;
}

PeriodicField& PeriodicField::operator-=(const PeriodicField& o) {
  require_same_grid(grid_, o.grid_);
  for (int j = 0; j < size(); ++j) values_[j] -= o.values_[j];
  return *this;
}

PeriodicField& PeriodicField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

PeriodicField operator+(PeriodicField a, const PeriodicField& b) { return a += b; }
PeriodicField operator-(PeriodicField a, const PeriodicField& b) { return a -= b; }
PeriodicField operator*(PeriodicField a, double s) { return a *= s; }
PeriodicField operator*(double s, PeriodicField a) { return a *= s; }

PeriodicField operator*(const PeriodicField& a, const PeriodicField& b) {
  require_same_grid(a.grid(), b.grid());
  PeriodicField r(a.grid());
  for (int j = 0; j < a.size(); ++j) r[j] = a[j] * b[j];
  return r;
}

std::vector<std::complex<double>> forward_transform(const PeriodicField& f) {
  const int n = f.size();
  std::vector<double> in(f.values().begin(), f.values().end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(plans_for(n).r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / n;
  for (auto& c : out) c *= scale;
  return out;
}

PeriodicField inverse_transform(const Grid1D& grid, std::span<const std::complex<double>> coeffs) {
  const int n = grid.n();
  if (static_cast<int>(coeffs.size()) != n / 2 + 1)
    throw InvalidArgument("coefficient count does not match grid");
  std::vector<std::complex<double>> buf(coeffs.begin(), coeffs.end());
  std::vector<double> out(n);
  fftw_execute_dft_c2r(plans_for(n).c2r, reinterpret_cast<fftw_complex*>(buf.data()), out.data());
  return PeriodicField(grid, std::move(out));
}

PeriodicField deriv(const PeriodicField& f, int order) {
  if (order < 1 || order > 3)
    throw InvalidArgument("derivative order must be 1, 2 or 3, got " + std::to_string(order));
  if (!f.is_finite()) throw InvalidArgument("deriv: non-finite input");
  const Grid1D& g = f.grid();
  const int nyquist = g.n() / 2;
  return apply_symbol(f, [&](int k) {
    if (k == nyquist && order % 2 == 1) return std::complex<double>(0.0);
    return std::pow(std::complex<double>(0.0, g.wavenumber(k)), order);
  });
}

PeriodicField helmholtz(const PeriodicField& f, double alpha) {
  const Grid1D& g = f.grid();
  return apply_symbol(f, [&](int k) {
    const double kk = g.wavenumber(k);
    return std::complex<double>(1.0 + alpha * alpha * kk * kk);
  });
}

PeriodicField helmholtz_inv(const PeriodicField& f, double alpha) {
  if (!(alpha >= 0.0)) throw InvalidArgument("helmholtz_inv: alpha must be >= 0");
  const Grid1D& g = f.grid();
  return apply_symbol(f, [&](int k) {
    const double kk = g.wavenumber(k);
    return std::complex<double>(1.0 / (1.0 + alpha * alpha * kk * kk));
  });
}

PeriodicField dealias(const PeriodicField& f) {
  const int cutoff = f.grid().dealias_cutoff();
  return apply_symbol(f, [&](int k) { return std::complex<double>(k <= cutoff ? 1.0 : 0.0); });
}

PeriodicField dealiased_product(const PeriodicField& a, const PeriodicField& b) {
  return dealias(dealias(a) * dealias(b));
}

double integrate(const PeriodicField& f) {
  const auto v = f.values();
  return f.grid().dx() * std::accumulate(v.begin(), v.end(), 0.0);
}

double rms(const PeriodicField& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return std::sqrt(s / f.size());
}

double l2_norm(const PeriodicField& f) { return rms(f) * std::sqrt(f.grid().length()); }

TrigSeries::TrigSeries(const PeriodicField& f) : grid_(f.grid()), coeffs_(forward_transform(f)) {
  // Fold the conjugate half in: interior modes count twice, k = 0 and the
  // Nyquist mode (a pure cosine) once.
  for (int k = 1; k < grid_.n() / 2; ++k) coeffs_[k] *= 2.0;
}

double TrigSeries::value(double x) const { return value_and_slope(x).first; }

std::pair<double, double> TrigSeries::value_and_slope(double x) const {
  const double base = kTwoPi * x / grid_.length();
  const std::complex<double> step = std::polar(1.0, base);
  const int nyq = grid_.n() / 2;
  std::complex<double> e(1.0, 0.0);
  double v = coeffs_[0].real();
  double s = 0.0;
  for (int k = 1; k < nyq; ++k) {
    // Re-anchor periodically so the recurrence does not drift.
    e = (k % 32 == 0) ? std::polar(1.0, base * k) : e * step;
    const std::complex<double> term = coeffs_[k] * e;
    v += term.real();
    s -= grid_.wavenumber(k) * term.imag();
  }
  v += coeffs_[nyq].real() * std::cos(base * nyq);
  return {v, s};
}

std::vector<double> interp(const PeriodicField& f, std::span<const double> points) {
  TrigSeries series(f);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) throw InvalidArgument("interp: non-finite point");
    out[i] = series.value(points[i]);
  }
  return out;
}

Field2D::Field2D(const Grid2D& grid)
    : grid_(grid), values_(static_cast<std::size_t>(grid.gx().n()) * grid.gy().n(), 0.0) {}

Field2D Field2D::extrude_y(const PeriodicField& f, const Grid1D& gy) {
  Field2D r(Grid2D(f.grid(), gy));
  for (int i = 0; i < r.nx(); ++i)
    for (int j = 0; j < r.ny(); ++j) r.at(i, j) = f[i];
  return r;
}

Field2D& Field2D::operator+=(const Field2D& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

Field2D& Field2D::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field2D operator+(Field2D a, const Field2D& b) { return a += b; }
Field2D operator-(Field2D a, const Field2D& b) { return a += -1.0 * b; }
Field2D operator*(double s, Field2D a) { return a *= s; }

Field2D operator*(const Field2D& a, const Field2D& b) {
  Field2D r(a.grid());
  for (int i = 0; i < a.nx(); ++i)
    for (int j = 0; j < a.ny(); ++j) r.at(i, j) = a.at(i, j) * b.at(i, j);
  return r;
}

Field2D partial(const Field2D& f, int axis, int order) {
  Field2D r(f.grid());
  if (axis == 0) {
    for (int j = 0; j < f.ny(); ++j) {
      PeriodicField line(f.grid().gx());
      for (int i = 0; i < f.nx(); ++i) line[i] = f.at(i, j);
      const PeriodicField d = deriv(line, order);
      for (int i = 0; i < f.nx(); ++i) r.at(i, j) = d[i];
    }
  } else if (axis == 1) {
    for (int i = 0; i < f.nx(); ++i) {
      PeriodicField line(f.grid().gy());
      for (int j = 0; j < f.ny(); ++j) line[j] = f.at(i, j);
      const PeriodicField d = deriv(line, order);
      for (int j = 0; j < f.ny(); ++j) r.at(i, j) = d[j];
    }
  } else {
    throw InvalidArgument("partial: axis must be 0 or 1");
  }
  return r;
}

}  // namespace conelab
