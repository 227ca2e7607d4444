#pragma once

// Uniform periodic grids with Fourier differentiation, Helmholtz inversion,
// band-limited interpolation and quadrature. Every other module samples its
// fields on these grids.

#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "conelab/error.hpp"

namespace conelab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic grid x_j = j L / n, j = 0..n-1.
class Grid1D {
 public:
  /// n must be a power of two with n >= 8; length must be positive.
  explicit Grid1D(int n, double length = kTwoPi);

  int n() const { return n_; }
  double length() const { return length_; }
  double dx() const { return length_ / n_; }
  double x(int j) const { return j * dx(); }
  std::vector<double> points() const;

  /// Angular wavenumber of Fourier index k (k may be negative).
  double wavenumber(int k) const { return kTwoPi * k / length_; }
  /// Highest index kept by the 2/3 dealiasing rule.
  int dealias_cutoff() const { return n_ / 3; }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  int n_;
  double length_;
};

/// Real samples of a periodic function on a Grid1D.
class PeriodicField {
 public:
  explicit PeriodicField(const Grid1D& grid);
  PeriodicField(const Grid1D& grid, std::vector<double> values);

  template <class F>
  static PeriodicField sample(const Grid1D& grid, F&& f) {
    std::vector<double> v(grid.n());
    for (int j = 0; j < grid.n(); ++j) v[j] = f(grid.x(j));
    return PeriodicField(grid, std::move(v));
  }

  static PeriodicField constant(const Grid1D& grid, double c) {
    return PeriodicField(grid, std::vector<double>(grid.n(), c));
  }

  const Grid1D& grid() const { return grid_; }
  int size() const { return grid_.n(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](int j) const { return values_[j]; }
  double& operator[](int j) { return values_[j]; }

  bool is_finite() const;
  double max_abs() const;
  double min() const;

  PeriodicField& operator+=(const PeriodicField& o);
  PeriodicField& operator-=(const PeriodicField& o);
  PeriodicField& operator*=(double s);

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

PeriodicField operator+(PeriodicField a, const PeriodicField& b);
PeriodicField operator-(PeriodicField a, const PeriodicField& b);
PeriodicField operator*(PeriodicField a, double s);
PeriodicField operator*(double s, PeriodicField a);
/// Pointwise product (no dealiasing).
PeriodicField operator*(const PeriodicField& a, const PeriodicField& b);

/// Normalised real-to-complex transform: coefficients c_k, k = 0..n/2, with
/// f(x_j) = sum_k c_k e^{i k x_j 2pi/L} + c.c. for 0 < k < n/2.
std::vector<std::complex<double>> forward_transform(const PeriodicField& f);
PeriodicField inverse_transform(const Grid1D& grid,
                                std::span<const std::complex<double>> coeffs);

/// Spectral derivative of the given order (1..3). Odd orders drop the
/// Nyquist mode; even orders keep it with symbol (ik)^order.
PeriodicField deriv(const PeriodicField& f, int order = 1);

/// Applies (1 - alpha^2 d_xx) mode-wise.
PeriodicField helmholtz(const PeriodicField& f, double alpha);

/// Solves (1 - alpha^2 d_xx) u = f mode-wise, i.e. divides by 1 + alpha^2 k^2.
PeriodicField helmholtz_inv(const PeriodicField& f, double alpha);

/// Truncates every mode with |k| > n/3.
PeriodicField dealias(const PeriodicField& f);

/// Product a*b with 2/3-rule dealiasing of inputs and output.
PeriodicField dealiased_product(const PeriodicField& a, const PeriodicField& b);

/// Band-limited (trigonometric) interpolation at arbitrary points.
std::vector<double> interp(const PeriodicField& f, std::span<const double> points);

/// L/n times the sum of samples; exact for band-limited integrands.
double integrate(const PeriodicField& f);

/// Root-mean-square of the samples.
double rms(const PeriodicField& f);
/// sqrt(integrate(f^2)).
double l2_norm(const PeriodicField& f);

/// Precomputed Fourier series of a field, evaluable with its derivative at
/// arbitrary points. Useful when the same field is sampled many times.
class TrigSeries {
 public:
  explicit TrigSeries(const PeriodicField& f);

  double value(double x) const;
  /// Value and first derivative at x.
  std::pair<double, double> value_and_slope(double x) const;

 private:
  Grid1D grid_;
  std::vector<std::complex<double>> coeffs_;
};

/// Tensor-product periodic grid, used for genuinely two-dimensional checks.
class Grid2D {
 public:
  Grid2D(Grid1D gx, Grid1D gy) : gx_(gx), gy_(gy) {}
  const Grid1D& gx() const { return gx_; }
  const Grid1D& gy() const { return gy_; }

 private:
  Grid1D gx_;
  Grid1D gy_;
};

/// Samples on a Grid2D, row-major with x as the slow index.
class Field2D {
 public:
  explicit Field2D(const Grid2D& grid);

  /// Extends a 1D field in x constantly along y.
  static Field2D extrude_y(const PeriodicField& f, const Grid1D& gy);

  const Grid2D& grid() const { return grid_; }
  double& at(int i, int j) { return values_[static_cast<std::size_t>(i) * ny() + j]; }
  double at(int i, int j) const { return values_[static_cast<std::size_t>(i) * ny() + j]; }
  int nx() const { return grid_.gx().n(); }
  int ny() const { return grid_.gy().n(); }
  std::span<const double> values() const { return values_; }

  Field2D& operator+=(const Field2D& o);
  Field2D& operator*=(double s);

 private:
  Grid2D grid_;
  std::vector<double> values_;
};

Field2D operator+(Field2D a, const Field2D& b);
Field2D operator-(Field2D a, const Field2D& b);
Field2D operator*(const Field2D& a, const Field2D& b);
Field2D operator*(double s, Field2D a);

/// Partial spectral derivative along x (axis 0) or y (axis 1).
Field2D partial(const Field2D& f, int axis, int order = 1);

}  // namespace conelab
