#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace solvlab {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Uniform cell-centred grid over an axis-aligned box.
///
/// Cell (i,j,k) covers origin + h*[i,i+1) x [j,j+1) x [k,k+1); storage is
/// x-fastest. Outside the box sits one layer of ghost cells whose values are
/// fixed by the field type (0 for potentials, 1 for the phase field).
class Grid3D {
public:
  Grid3D() = default;
  Grid3D(Vec3 origin, double spacing, std::array<int, 3> dims);

  /// Smallest grid with spacing h covering [origin, origin + extent].
  static Grid3D covering(Vec3 origin, Vec3 extent, double spacing);

  const Vec3& origin() const { return origin_; }
  double spacing() const { return h_; }
  const std::array<int, 3>& dims() const { return dims_; }
  int nx() const { return dims_[0]; }
  int ny() const { return dims_[1]; }
  int nz() const { return dims_[2]; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }
  double cell_volume() const { return h_ * h_ * h_; }
  Vec3 extent() const { return {h_ * dims_[0], h_ * dims_[1], h_ * dims_[2]}; }
  Vec3 upper() const { return origin_ + extent(); }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * k);
  }
  std::array<int, 3> ijk(std::size_t idx) const {
    const auto nx = static_cast<std::size_t>(dims_[0]);
    const auto ny = static_cast<std::size_t>(dims_[1]);
    return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny), static_cast<int>(idx / (nx * ny))};
  }
  Vec3 center(int i, int j, int k) const {
    return {origin_[0] + (i + 0.5) * h_, origin_[1] + (j + 0.5) * h_, origin_[2] + (k + 0.5) * h_};
  }
  Vec3 center(std::size_t idx) const {
    const auto c = ijk(idx);
    return center(c[0], c[1], c[2]);
  }
  bool contains(const Vec3& x) const;

  /// Index range [lo, hi) of cells whose centres may lie within `radius` of x, clamped to the grid.
  void cell_range(const Vec3& x, double radius, std::array<int, 3>& lo, std::array<int, 3>& hi) const;

  friend bool operator==(const Grid3D& a, const Grid3D& b) {
    return a.origin_ == b.origin_ && a.h_ == b.h_ && a.dims_ == b.dims_;
  }

private:
  Vec3 origin_{0.0, 0.0, 0.0};
  double h_ = 1.0;
  std::array<int, 3> dims_{2, 2, 2};
};

struct ScalarField {
  ScalarField() = default;
  explicit ScalarField(const Grid3D& g, double fill = 0.0) : grid(g), values(g.cell_count(), fill) {}

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double& at(int i, int j, int k) { return values[grid.index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[grid.index(i, j, k)]; }
  std::size_t size() const { return values.size(); }

  ScalarField& operator+=(const ScalarField& other);
  bool all_finite() const;
  double max_abs() const;

  Grid3D grid;
  std::vector<double> values;
};

/// Binary solvent indicator: 1 = solvent, 0 = solute cavity.
struct PhaseField {
  PhaseField() = default;
  explicit PhaseField(const Grid3D& g, std::uint8_t fill = 1) : grid(g), values(g.cell_count(), fill) {}

  std::uint8_t& operator[](std::size_t i) { return values[i]; }
  std::uint8_t operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const { return values.size(); }
  std::size_t count_zero() const;

  friend bool operator==(const PhaseField& a, const PhaseField& b) {
    return a.grid == b.grid && a.values == b.values;
  }

  Grid3D grid;
  std::vector<std::uint8_t> values;
};

struct VectorField {
  VectorField() = default;
  explicit VectorField(const Grid3D& g)
      : grid(g), components{std::vector<double>(g.cell_count()), std::vector<double>(g.cell_count()),
                            std::vector<double>(g.cell_count())} {}

  Grid3D grid;
  std::array<std::vector<double>, 3> components;
};

/// Forward differences with a zero ghost layer: (f[c+e_i] - f[c]) / h.
VectorField gradient(const ScalarField& f);

/// Backward differences with g = 0 below the box; the negative adjoint of gradient().
ScalarField divergence(const VectorField& g);

/// h^3-weighted inner products.
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);

/// Anisotropic (l1) perimeter: h^2 times the number of faces across which u
/// changes, counting faces against the u = 1 ghost layer.
double tv_anisotropic(const PhaseField& u);

/// Same functional for a relaxed field with values in [0,1].
double tv_anisotropic(const ScalarField& u);

double integrate(const ScalarField& f);

/// Integral over cells with u = 1, or over cells with u = 0 when `complement` is set.
double integrate_masked(const ScalarField& f, const PhaseField& u, bool complement);

/// Per-cell share of the squared discrete gradient: half of every interior
/// face difference squared plus the full boundary face differences (ghost 0).
/// Summing eps_c / (2r) * g_c * h^3 over cells reproduces the face-based
/// Dirichlet energy with arithmetic-mean face coefficients.
ScalarField cell_gradient_energy(const ScalarField& psi);

}  // namespace solvlab
