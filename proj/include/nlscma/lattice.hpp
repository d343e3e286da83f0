#pragma once

#include <span>
#include <string>
#include <vector>

#include "nlscma/common.hpp"

namespace nlscma {

/// Columns of the generator of a one-complex-dimensional lattice
/// {z1*g1 + z2*g2 : z1, z2 integer}.
struct GeneratorBasis {
  Complex g1{1.0, 0.0};
  Complex g2{0.0, 1.0};

  /// Determinant of the real 2x2 matrix [Re g1, Re g2; Im g1, Im g2].
  double determinant() const { return g1.real() * g2.imag() - g2.real() * g1.imag(); }

  static GeneratorBasis eisenstein();
  static GeneratorBasis gaussian();
};

enum class WindowKind { Circular, Rectangular };

struct PartitionWindow {
  WindowKind kind = WindowKind::Circular;
  Complex center{0.0, 0.0};
  double radius = 1.0;       // Circular
  double half_width = 1.0;   // Rectangular
  double half_height = 1.0;  // Rectangular

  static PartitionWindow circular(double radius, Complex center = {});
  static PartitionWindow rectangular(double half_width, double half_height, Complex center = {});

  double area() const;
  bool contains(Complex p, double tol = 1e-9) const;
  PartitionWindow scaled(double factor) const;
};

/// A finite lattice code: the per-resource overlapped constellation.
struct LatticeCode {
  CVector points;
  GeneratorBasis basis;
  PartitionWindow window;
  double scale = 1.0;          // cumulative factor applied by normalize()
  double target_energy = 0.0;  // 0 until normalized

  Eigen::Index size() const { return points.size(); }
  double mean_energy() const;
};

enum class LatticeFamily { Eisenstein, Gaussian };

std::string to_string(LatticeFamily family);
std::string to_string(WindowKind kind);
LatticeFamily parse_lattice_family(const std::string& name);
WindowKind parse_window_kind(const std::string& name);

/// All points g1*z1 + g2*z2 + offset with |z1|, |z2| <= max_coeff.
std::vector<Complex> generate_lattice(const GeneratorBasis& basis, int max_coeff,
                                      Complex offset = {});

/// Selects exactly target_count points with an origin-centred window grown to
/// the smallest size enclosing at least target_count points. Excess points on
/// the window boundary are dropped so that +/- pairs survive first and then by
/// smallest |arg|. `aspect` is half_height / half_width for rectangles.
LatticeCode partition(std::span<const Complex> points, WindowKind kind, int target_count,
                      double aspect = 1.0);

/// Uniformly rescales points (and window) so that the mean of |s|^2 equals
/// target_energy.
LatticeCode normalize(const LatticeCode& code, double target_energy);

/// V^(2/n) / (6 P) with n = 2 real dimensions, V the window area and P the
/// mean point energy.
double shape_gain(const LatticeCode& code);

/// Minimum pairwise (non-squared) Euclidean distance of a set of complex points.
template <typename Derived>
double med(const Eigen::MatrixBase<Derived>& points) {
  const Eigen::Index n = points.size();
  require(n >= 2, "undefined MED");
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a + 1; b < n; ++b)
      best = std::min(best, std::norm(Complex(points(a)) - Complex(points(b))));
  return std::sqrt(best);
}

double med(const LatticeCode& code);

/// Offset that makes the origin a point-inversion centre of the lattice
/// without being a lattice point: (1+i)/2 for Gaussian, 1/2 for Eisenstein.
Complex symmetric_offset(LatticeFamily family);

/// generate -> partition -> normalize for one of the named families, using
/// symmetric_offset() and an enumeration extent of ceil(2*sqrt(count)).
LatticeCode make_lattice_code(LatticeFamily family, WindowKind kind, int count,
                              double target_energy, double aspect = 1.0);

}  // namespace nlscma
