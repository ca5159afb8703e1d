#pragma once

// First Dirichlet eigenpair of -Delta_theta on a geodesic cap of S^{n-1},
// restricted to axisymmetric functions of the polar angle phi.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "conelab/grid.hpp"
#include "conelab/hyperbolic_core.hpp"

namespace conelab {

/// Conservative discretization of psi'' + (n-2) cot(phi) psi' on uniform
/// cells of (0, theta0):
///
///   (L psi)_j = [b_{j+1/2} (psi_{j+1} - psi_j) - b_{j-1/2} (psi_j - psi_{j-1})] / m_j
///
/// with b the face values of sin^{n-2}(phi)/dphi and m_j the cell measures.
/// The axis face carries no flux (regularity); the theta0 face uses the
/// odd ghost psi_N = -psi_{N-1} on a cap and no flux on the whole sphere.
/// Surface measures include |S^{n-2}|, so the operator is symmetric in the
/// discrete L^2(Omega) inner product.
struct CapOperator {
  ConeSpec cone;
  double dphi = 0.0;
  std::vector<double> measure;
  std::vector<double> coupling;  // coupling[j] sits on face j+1/2
  bool dirichlet = true;

  static CapOperator build(const ConeSpec& cone, std::size_t cells);

  std::size_t size() const noexcept { return measure.size(); }
  void apply(std::span<const double> u, std::span<double> out) const;
  double diagonal(std::size_t j) const noexcept;
};

struct EigenPair {
  double omega1 = 0.0;
  std::vector<double> psi1;     // cell values, nonnegative
  std::vector<double> weights;  // surface measure of each cell
  double dphi = 0.0;
  ConeSpec cone;
  double sphere_factor = 0.0;   // |S^{n-2}|

  std::size_t size() const noexcept { return psi1.size(); }
  double phi(std::size_t j) const noexcept { return (static_cast<double>(j) + 0.5) * dphi; }
  /// Interpolated value on the theta0 face; zero on a cap by construction.
  double boundary_value() const noexcept;
  double l1_norm() const noexcept;
  double max_value() const noexcept;
};

/// On a cap the eigenvalue is bracketed by Sturm node counting of the shooting
/// solution from the axis and refined by bisection to 1e-10; on the whole
/// sphere omega1 = 0 and psi1 = 1/|S^{n-1}|.
EigenPair solve_cap_eigenpair(const ConeSpec& cone, std::size_t grid_points);

/// Same computation without the minimum grid size, for matching the angular
/// cells of a coarse solver grid.
EigenPair solve_discrete_cap_eigenpair(const ConeSpec& cone, std::size_t grid_points);

/// Scales `psi_raw`, tabulated on uniform cells of (0, theta0), to unit
/// L^1(Omega) norm.
std::vector<double> cap_l1_normalize(std::span<const double> psi_raw, const ConeSpec& cone);

/// Weights w_j such that sum_j w_j u_j = int_Omega psi1 u dsigma for a ring of
/// the solver grid. Throws grid-mismatch when the pair was not solved on the
/// grid's angular cells.
std::vector<double> angular_projection_weights(const Grid& grid, const EigenPair& pair);

/// e^{alpha t} int_Omega psi1 u(r_i, .) dsigma for every ring of the grid.
std::vector<double> angular_average(const Grid& grid, std::span<const double> u,
                                    const EigenPair& pair, double alpha, double t);

/// Two-column CSV (phi, psi1) preceded by `# key=value` comment lines.
void write_eigenpair_csv(std::ostream& out, const EigenPair& pair);

}  // namespace conelab
