#pragma once

// Cell-centered tensor grid on the truncated cone (0, R_max) x (0, theta0).

#include <cstddef>
#include <vector>

#include "conelab/hyperbolic_core.hpp"

namespace conelab {

/// Area of the unit sphere S^d embedded in R^{d+1}; |S^0| = 2.
double sphere_area(int d);

/// |S^{n-2}|, the factor turning the cap polar-angle integral into a surface
/// integral over Omega in S^{n-1}.
double cap_sphere_factor(int n);

/// Cells are (i+1/2) dr in r and (j+1/2) dphi in phi, so no center sits on
/// r = 0, phi = 0 or on a boundary face. On the whole space (theta0 = pi)
/// the grid is radial-only: one angular cell that spans all of S^{n-1}.
struct Grid {
  ConeSpec cone;
  double R_max = 0.0;
  std::size_t nr = 0;
  double dr = 0.0;
  double dphi = 0.0;
  std::vector<double> r_centers;
  std::vector<double> phi_centers;  // empty when radial-only
  std::vector<double> r_measure;    // int over cell of sinh^{n-1} r dr
  std::vector<double> phi_measure;  // surface measure of the cell on S^{n-1}

  bool radial_only() const noexcept { return phi_centers.empty(); }
  std::size_t nphi() const noexcept { return phi_measure.size(); }
  std::size_t size() const noexcept { return nr * nphi(); }
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    return i * nphi() + j;
  }
  double r_face(std::size_t i) const noexcept { return dr * static_cast<double>(i); }
};

Grid build_grid(const ConeSpec& cone, double R_max, std::size_t nr, std::size_t nphi);

/// Surface measure on S^{n-1} of each of `cells` uniform polar-angle cells
/// covering the cap (0, theta0).
std::vector<double> cap_cell_measures(const ConeSpec& cone, std::size_t cells);

/// Solution values u(r_i, phi_j) stored ring by ring (index i * nphi + j).
struct StateField {
  std::vector<double> values;
  double t = 0.0;

  double sup_norm() const noexcept;
};

/// Throws grid-mismatch unless `values` has one entry per grid cell.
void check_on_grid(const Grid& grid, std::size_t values_size);

}  // namespace conelab
