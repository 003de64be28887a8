#include "solvlab/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace solvlab {

namespace {

// Neumaier-compensated running sum; order is fixed so results are reproducible.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

Grid3D::Grid3D(Vec3 origin, double spacing, std::array<int, 3> dims) : origin_(origin), h_(spacing), dims_(dims) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("Grid3D: spacing must be positive, got " + std::to_string(spacing));
  }
  for (int d : dims) {
    if (d < 2) {
      throw std::invalid_argument("Grid3D: need at least 2 cells per axis, got " + std::to_string(d));
    }
  }
}

Grid3D Grid3D::covering(Vec3 origin, Vec3 extent, double spacing) {
  std::array<int, 3> dims{};
  for (int a = 0; a < 3; ++a) {
    // Tolerate round-off so that extent = n*h yields exactly n cells.
    dims[a] = std::max(2, static_cast<int>(std::ceil(extent[a] / spacing - 1e-9)));
  }
  return Grid3D(origin, spacing, dims);
}

bool Grid3D::contains(const Vec3& x) const {
  const Vec3 up = upper();
  for (int a = 0; a < 3; ++a) {
    if (!(x[a] > origin_[a] && x[a] < up[a])) return false;
  }
  return true;
}

void Grid3D::cell_range(const Vec3& x, double radius, std::array<int, 3>& lo, std::array<int, 3>& hi) const {
  for (int a = 0; a < 3; ++a) {
    const double lo_f = std::floor((x[a] - radius - origin_[a]) / h_ - 0.5);
    const double hi_f = std::ceil((x[a] + radius - origin_[a]) / h_ + 0.5);
    lo[a] = static_cast<int>(std::clamp(lo_f, 0.0, static_cast<double>(dims_[a])));
    hi[a] = static_cast<int>(std::clamp(hi_f, 0.0, static_cast<double>(dims_[a])));
  }
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  if (!(grid == other.grid)) throw std::invalid_argument("ScalarField +=: grids differ");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

bool ScalarField::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

std::size_t PhaseField::count_zero() const {
  return static_cast<std::size_t>(std::count(values.begin(), values.end(), std::uint8_t{0}));
}

VectorField gradient(const ScalarField& f) {
  const Grid3D& g = f.grid;
  VectorField out(g);
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  const double inv_h = 1.0 / g.spacing();
  const std::size_t sx = 1, sy = static_cast<std::size_t>(nx), sz = static_cast<std::size_t>(nx) * ny;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t c = g.index(i, j, k);
        const double fc = f.values[c];
        out.components[0][c] = ((i + 1 < nx ? f.values[c + sx] : 0.0) - fc) * inv_h;
        out.components[1][c] = ((j + 1 < ny ? f.values[c + sy] : 0.0) - fc) * inv_h;
        out.components[2][c] = ((k + 1 < nz ? f.values[c + sz] : 0.0) - fc) * inv_h;
      }
    }
  }
  return out;
}

ScalarField divergence(const VectorField& v) {
  const Grid3D& g = v.grid;
  ScalarField out(g);
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  const double inv_h = 1.0 / g.spacing();
  const std::size_t sx = 1, sy = static_cast<std::size_t>(nx), sz = static_cast<std::size_t>(nx) * ny;
  const auto& gx = v.components[0];
  const auto& gy = v.components[1];
  const auto& gz = v.components[2];
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t c = g.index(i, j, k);
        double d = gx[c] - (i > 0 ? gx[c - sx] : 0.0);
        d += gy[c] - (j > 0 ? gy[c - sy] : 0.0);
        d += gz[c] - (k > 0 ? gz[c - sz] : 0.0);
        out.values[c] = d * inv_h;
      }
    }
  }
  return out;
}

double inner(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("inner: grids differ");
  CompensatedSum s;
  for (std::size_t i = 0; i < a.values.size(); ++i) s.add(a.values[i] * b.values[i]);
  return s.value() * a.grid.cell_volume();
}

double inner(const VectorField& a, const VectorField& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("inner: grids differ");
  CompensatedSum s;
  for (int d = 0; d < 3; ++d) {
    for (std::size_t i = 0; i < a.components[d].size(); ++i) s.add(a.components[d][i] * b.components[d][i]);
  }
  return s.value() * a.grid.cell_volume();
}

namespace {

// Sum over all faces (interior and ghost) of |u_a - u_b|, ghost value 1.
template <typename Get>
double face_jump_sum(const Grid3D& g, Get get) {
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  CompensatedSum s;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double uc = get(g.index(i, j, k));
        const double right = i + 1 < nx ? get(g.index(i + 1, j, k)) : 1.0;
        const double up = j + 1 < ny ? get(g.index(i, j + 1, k)) : 1.0;
        const double front = k + 1 < nz ? get(g.index(i, j, k + 1)) : 1.0;
        double acc = std::abs(right - uc) + std::abs(up - uc) + std::abs(front - uc);
        if (i == 0) acc += std::abs(1.0 - uc);
        if (j == 0) acc += std::abs(1.0 - uc);
        if (k == 0) acc += std::abs(1.0 - uc);
        s.add(acc);
      }
    }
  }
  return s.value();
}

}  // namespace

double tv_anisotropic(const PhaseField& u) {
  const double h = u.grid.spacing();
  return h * h * face_jump_sum(u.grid, [&](std::size_t c) { return static_cast<double>(u.values[c]); });
}

double tv_anisotropic(const ScalarField& u) {
  const double h = u.grid.spacing();
  return h * h * face_jump_sum(u.grid, [&](std::size_t c) { return u.values[c]; });
}

double integrate(const ScalarField& f) {
  CompensatedSum s;
  for (double v : f.values) s.add(v);
  return s.value() * f.grid.cell_volume();
}

double integrate_masked(const ScalarField& f, const PhaseField& u, bool complement) {
  if (!(f.grid == u.grid)) throw std::invalid_argument("integrate_masked: grids differ");
  const std::uint8_t keep = complement ? 0 : 1;
  CompensatedSum s;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (u.values[i] == keep) s.add(f.values[i]);
  }
  return s.value() * f.grid.cell_volume();
}

ScalarField cell_gradient_energy(const ScalarField& psi) {
  const Grid3D& g = psi.grid;
  ScalarField out(g);
  const int n[3] = {g.nx(), g.ny(), g.nz()};
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n[0]), static_cast<std::size_t>(n[0]) * n[1]};
  const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        const int pos[3] = {i, j, k};
        const std::size_t c = g.index(i, j, k);
        const double pc = psi.values[c];
        double acc = 0.0;
        for (int a = 0; a < 3; ++a) {
          if (pos[a] + 1 < n[a]) {
            const double d = psi.values[c + stride[a]] - pc;
            acc += 0.5 * d * d;
          } else {
            acc += pc * pc;
          }
          if (pos[a] > 0) {
            const double d = psi.values[c - stride[a]] - pc;
            acc += 0.5 * d * d;
          } else {
            acc += pc * pc;
          }
        }
        out.values[c] = acc * inv_h2;
      }
    }
  }
  return out;
}

}  // namespace solvlab
