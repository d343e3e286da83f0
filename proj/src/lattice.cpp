#include "nlscma/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace nlscma {

namespace {

constexpr double kTieTol = 1e-9;

double window_metric(Complex p, WindowKind kind, double aspect) {
  if (kind == WindowKind::Circular) return std::abs(p);
  return std::max(std::abs(p.real()), std::abs(p.imag()) / aspect);
}

bool same_point(Complex a, Complex b) { return std::abs(a - b) <= kTieTol; }

}  // namespace

GeneratorBasis GeneratorBasis::eisenstein() {
  return {Complex{1.0, 0.0}, std::polar(1.0, 2.0 * std::numbers::pi / 3.0)};
}

GeneratorBasis GeneratorBasis::gaussian() { return {Complex{1.0, 0.0}, Complex{0.0, 1.0}}; }

PartitionWindow PartitionWindow::circular(double radius, Complex center) {
  require(radius > 0.0, "window radius must be positive");
  PartitionWindow w;
  w.kind = WindowKind::Circular;
  w.center = center;
  w.radius = radius;
  return w;
}

PartitionWindow PartitionWindow::rectangular(double half_width, double half_height,
                                             Complex center) {
  require(half_width > 0.0 && half_height > 0.0, "window half extents must be positive");
  PartitionWindow w;
  w.kind = WindowKind::Rectangular;
  w.center = center;
  w.half_width = half_width;
  w.half_height = half_height;
  return w;
}

double PartitionWindow::area() const {
  return kind == WindowKind::Circular ? std::numbers::pi * radius * radius
                                      : 4.0 * half_width * half_height;
}

bool PartitionWindow::contains(Complex p, double tol) const {
  const Complex d = p - center;
  if (kind == WindowKind::Circular) return std::abs(d) <= radius * (1.0 + tol);
  return std::abs(d.real()) <= half_width * (1.0 + tol) &&
         std::abs(d.imag()) <= half_height * (1.0 + tol);
}

PartitionWindow PartitionWindow::scaled(double factor) const {
  PartitionWindow w = *this;
  w.center *= factor;
  w.radius *= factor;
  w.half_width *= factor;
  w.half_height *= factor;
  return w;
}

double LatticeCode::mean_energy() const {
  return points.size() == 0 ? 0.0 : points.cwiseAbs2().mean();
}

std::string to_string(LatticeFamily family) {
  return family == LatticeFamily::Eisenstein ? "eisenstein" : "gaussian";
}

std::string to_string(WindowKind kind) {
  return kind == WindowKind::Circular ? "circular" : "rectangular";
}

LatticeFamily parse_lattice_family(const std::string& name) {
  if (name == "eisenstein" || name == "hexagonal") return LatticeFamily::Eisenstein;
  if (name == "gaussian" || name == "qam") return LatticeFamily::Gaussian;
  throw Error("unknown lattice family: " + name);
}

WindowKind parse_window_kind(const std::string& name) {
  if (name == "circular") return WindowKind::Circular;
  if (name == "rectangular") return WindowKind::Rectangular;
  throw Error("unknown window kind: " + name);
}

std::vector<Complex> generate_lattice(const GeneratorBasis& basis, int max_coeff,
                                      Complex offset) {
  require(max_coeff >= 1, "max_coeff must be at least 1");
  const double scale = std::max(std::norm(basis.g1), std::norm(basis.g2));
  if (std::abs(basis.determinant()) <= 1e-12 * scale) throw Error("degenerate generator");

  std::vector<Complex> points;
  points.reserve(static_cast<std::size_t>((2 * max_coeff + 1) * (2 * max_coeff + 1)));
  for (int z1 = -max_coeff; z1 <= max_coeff; ++z1)
    for (int z2 = -max_coeff; z2 <= max_coeff; ++z2)
      points.push_back(static_cast<double>(z1) * basis.g1 + static_cast<double>(z2) * basis.g2 +
                       offset);
  // A non-degenerate basis yields distinct points already; the pass below only
  // guards against callers feeding near-collinear bases that slip past the
  // determinant test.
  std::vector<Complex> unique;
  unique.reserve(points.size());
  for (const Complex& p : points) {
    const bool dup = std::any_of(unique.begin(), unique.end(),
                                 [&](const Complex& q) { return same_point(p, q); });
    if (!dup) unique.push_back(p);
  }
  return unique;
}

LatticeCode partition(std::span<const Complex> points, WindowKind kind, int target_count,
                      double aspect) {
  require(target_count >= 1, "target_count must be at least 1");
  require(aspect > 0.0, "window aspect must be positive");
  if (points.size() < static_cast<std::size_t>(target_count)) throw Error("extent too small");

  std::vector<double> metric(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) metric[i] = window_metric(points[i], kind, aspect);

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return metric[a] < metric[b]; });
  const double boundary = metric[order[static_cast<std::size_t>(target_count) - 1]];
  const double tol = kTieTol * std::max(1.0, boundary);

  std::vector<Complex> selected;
  std::vector<Complex> shell;
  for (std::size_t i : order) {
    if (metric[i] < boundary - tol)
      selected.push_back(points[i]);
    else if (metric[i] <= boundary + tol)
      shell.push_back(points[i]);
  }

  // Boundary ties: keep +/- pairs first, each ordered by smallest |arg|.
  std::stable_sort(shell.begin(), shell.end(), [](Complex a, Complex b) {
    const double aa = std::abs(std::arg(a));
    const double ab = std::abs(std::arg(b));
    if (std::abs(aa - ab) > kTieTol) return aa < ab;
    return std::arg(a) < std::arg(b);
  });
  std::size_t need = static_cast<std::size_t>(target_count) - selected.size();
  std::vector<bool> used(shell.size(), false);
  for (std::size_t i = 0; i < shell.size() && need >= 2; ++i) {
    if (used[i]) continue;
    for (std::size_t j = i + 1; j < shell.size(); ++j) {
      if (!used[j] && same_point(shell[j], -shell[i])) {
        used[i] = used[j] = true;
        selected.push_back(shell[i]);
        selected.push_back(shell[j]);
        need -= 2;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < shell.size() && need > 0; ++i) {
    if (used[i]) continue;
    used[i] = true;
    selected.push_back(shell[i]);
    --need;
  }

  LatticeCode code;
  code.points = Eigen::Map<const CVector>(selected.data(), static_cast<Eigen::Index>(selected.size()));
  code.window = kind == WindowKind::Circular
                    ? PartitionWindow::circular(boundary)
                    : PartitionWindow::rectangular(boundary, boundary * aspect);
  return code;
}

LatticeCode normalize(const LatticeCode& code, double target_energy) {
  require(target_energy > 0.0, "target energy must be positive");
  require(code.size() > 0, "zero energy");
  const double energy = code.mean_energy();
  if (!(energy > 0.0)) throw Error("zero energy");
  const double factor = std::sqrt(target_energy / energy);
  LatticeCode out = code;
  out.points *= factor;
  out.window = code.window.scaled(factor);
  out.scale = code.scale * factor;
  out.target_energy = target_energy;
  return out;
}

double shape_gain(const LatticeCode& code) {
  require(code.size() > 0, "shape gain of an empty code");
  const double energy = code.mean_energy();
  if (!(energy > 0.0)) throw Error("zero energy");
  constexpr double n = 2.0;
  return std::pow(code.window.area(), 2.0 / n) / (6.0 * energy);
}

double med(const LatticeCode& code) { return med(code.points); }

Complex symmetric_offset(LatticeFamily family) {
  return family == LatticeFamily::Gaussian ? Complex{0.5, 0.5} : Complex{0.5, 0.0};
}

LatticeCode make_lattice_code(LatticeFamily family, WindowKind kind, int count,
                              double target_energy, double aspect) {
  require(count >= 1, "target_count must be at least 1");
  const GeneratorBasis basis =
      family == LatticeFamily::Eisenstein ? GeneratorBasis::eisenstein() : GeneratorBasis::gaussian();
  const int extent = static_cast<int>(std::ceil(2.0 * std::sqrt(static_cast<double>(count))));
  const Complex offset = symmetric_offset(family);
  const auto points = generate_lattice(basis, extent, offset);
  LatticeCode code = partition(points, kind, count, aspect);

  // The enumerated patch is a parallelogram; the window must sit inside its
  // inscribed disc or boundary points could be missing.
  const double inscribed = extent * std::abs(basis.determinant()) /
                               std::max(std::abs(basis.g1), std::abs(basis.g2)) -
                           std::abs(offset);
  const double reach = kind == WindowKind::Circular
                           ? code.window.radius
                           : std::hypot(code.window.half_width, code.window.half_height);
  if (reach >= inscribed) throw Error("extent too small");

  code.basis = basis;
  return normalize(code, target_energy);
}

}  // namespace nlscma
