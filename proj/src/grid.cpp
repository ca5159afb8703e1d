#include "conelab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "conelab/error.hpp"
#include "quadrature.hpp"

namespace conelab {

double sphere_area(int d) {
  const double h = 0.5 * (d + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double cap_sphere_factor(int n) { return sphere_area(n - 2); }

Grid build_grid(const ConeSpec& cone, double R_max, std::size_t nr, std::size_t nphi) {
  cone.validate();
  if (!(R_max > 0.0) || !std::isfinite(R_max)) {
    throw Error(ErrorKind::InvalidConfig, "R_max must be positive");
  }
  if (nr == 0) throw Error(ErrorKind::InvalidConfig, "Nr must be at least 1");
  if (!cone.full_sphere() && nphi == 0) {
    throw Error(ErrorKind::InvalidConfig, "Nphi must be at least 1 on a cap");
  }

  Grid grid;
  grid.cone = cone;
  grid.R_max = R_max;
  grid.nr = nr;
  grid.dr = R_max / static_cast<double>(nr);
  const int n = cone.n;

  grid.r_centers.resize(nr);
  grid.r_measure.resize(nr);
  for (std::size_t i = 0; i < nr; ++i) {
    const double a = grid.dr * static_cast<double>(i);
    const double b = a + grid.dr;
    grid.r_centers[i] = a + 0.5 * grid.dr;
    grid.r_measure[i] =
        detail::gauss_cell([n](double r) { return volume_weight(r, n); }, a, b);
  }

  if (cone.full_sphere()) {
    grid.dphi = std::numbers::pi;
    grid.phi_measure = {sphere_area(n - 1)};
    return grid;
  }

  grid.dphi = cone.theta0 / static_cast<double>(nphi);
  grid.phi_centers.resize(nphi);
  for (std::size_t j = 0; j < nphi; ++j) {
    grid.phi_centers[j] = (static_cast<double>(j) + 0.5) * grid.dphi;
  }
  grid.phi_measure = cap_cell_measures(cone, nphi);
  return grid;
}

std::vector<double> cap_cell_measures(const ConeSpec& cone, std::size_t cells) {
  const int n = cone.n;
  const double h = cone.theta0 / static_cast<double>(cells);
  const double factor = cap_sphere_factor(n);
  std::vector<double> measure(cells);
  for (std::size_t j = 0; j < cells; ++j) {
    const double a = h * static_cast<double>(j);
    measure[j] = n == 2 ? factor * h
                        : factor * detail::gauss_cell(
                                       [n](double phi) { return std::pow(std::sin(phi), n - 2); },
                                       a, a + h);
  }
  return measure;
}

double StateField::sup_norm() const noexcept {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

void check_on_grid(const Grid& grid, std::size_t values_size) {
  if (values_size != grid.size()) {
    throw Error(ErrorKind::GridMismatch,
                "field has " + std::to_string(values_size) + " values but the grid has " +
                    std::to_string(grid.size()) + " cells");
  }
}

}  // namespace conelab
