#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mlim/expsum.hpp"
#include "mlim/piecewise.hpp"
#include "mlim/xreal.hpp"

namespace mlim {

struct Atom {
  double at = 0.0;
  double weight = 0.0;
  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Constant density on [lo, hi).
struct DensityCell {
  double lo = 0.0;
  double hi = 0.0;
  double density = 0.0;
  friend bool operator==(const DensityCell&, const DensityCell&) = default;
};

/// Density scale * exp(rate * s).
struct ExpDensity {
  double scale = 1.0;
  double rate = 0.0;
  friend bool operator==(const ExpDensity&, const ExpDensity&) = default;
};

/// Absolutely continuous piece of a measure on [lo, hi) described by a closed
/// form CDF with cdf(lo) = 0. When the density is exponential the form is
/// kept too, which makes products with exponential function cells integrable
/// in closed form.
class AnalyticSegment {
 public:
  AnalyticSegment(std::string name, double lo, double hi, std::function<double(double)> cdf,
                  std::optional<ExpDensity> form = std::nullopt);

  /// Exponential density on [lo, hi); the CDF is derived from the form.
  static AnalyticSegment exponential(std::string name, double lo, double hi, ExpDensity form);
  /// Density 2^{-s} on [0, inf), CDF (1 - 2^{-s}) / ln 2.
  static AnalyticSegment exp2();

  const std::string& name() const noexcept { return name_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  const std::optional<ExpDensity>& form() const noexcept { return form_; }
  double cdf(double s) const;
  /// Mass of [a, b) intersected with the segment.
  double mass(double a, double b) const;

  friend bool operator==(const AnalyticSegment& a, const AnalyticSegment& b) {
    return a.name_ == b.name_ && a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.form_ == b.form_;
  }

 private:
  std::string name_;
  double lo_;
  double hi_;
  std::function<double(double)> cdf_;
  std::optional<ExpDensity> form_;
};

/// How the continuous part of a measure looks on one refinement cell.
struct Kernel {
  enum class Kind { none, exponential, cdf } kind = Kind::none;
  ExpDensity form{};                        // kind == exponential (constant density: rate 0)
  const AnalyticSegment* segment = nullptr; // kind == cdf

  double mass(double lo, double hi) const;
};

/// Finite nonnegative measure on an interval: atoms, constant-density cells
/// and analytic segments. Atoms at equal locations are merged; cells and
/// segments may not overlap one another.
class FiniteMeasure {
 public:
  FiniteMeasure() = default;
  explicit FiniteMeasure(Interval domain, std::vector<Atom> atoms = {}, std::vector<DensityCell> cells = {},
                         std::vector<AnalyticSegment> segments = {});

  static FiniteMeasure dirac(Interval domain, double at, double weight = 1.0);
  static FiniteMeasure uniform(Interval domain, double lo, double hi, double density = 1.0);

  const Interval& domain() const noexcept { return domain_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<DensityCell>& cells() const noexcept { return cells_; }
  const std::vector<AnalyticSegment>& segments() const noexcept { return segments_; }

  double atom_weight(double at) const;
  /// Continuous description on a span inside one refinement cell.
  Kernel kernel_on(double lo, double hi) const;
  /// Continuous endpoints (cells and segments) plus domain ends, sorted.
  std::vector<double> breaks() const;

  FiniteMeasure with_atom(double at, double weight) const;

  friend bool operator==(const FiniteMeasure&, const FiniteMeasure&) = default;

 private:
  Interval domain_{};
  std::vector<Atom> atoms_;
  std::vector<DensityCell> cells_;
  std::vector<AnalyticSegment> segments_;
};

double total_mass(const FiniteMeasure& m);

/// Common refinement: every input is constant (functions) or has a single
/// continuous description (measures) on each [breaks[i], breaks[i+1]).
/// `points` lists atom and point-value locations.
struct Partition {
  Interval domain{};
  std::vector<double> breaks;
  std::vector<double> points;
  std::size_t cell_count() const noexcept { return breaks.empty() ? 0 : breaks.size() - 1; }
};

using RefinementInput = std::variant<const FiniteMeasure*, const PiecewiseFn*>;
Partition common_refinement(const std::vector<RefinementInput>& objs);

struct IntegralParts {
  XReal positive = 0.0;
  XReal negative = 0.0;  // integral of f-, nonnegative
};

/// Integrals of f+ and f- against m, each exact on the common refinement.
IntegralParts integrate_parts(const PiecewiseFn& f, const FiniteMeasure& m);

/// integral of f+ minus integral of f-; +-inf when exactly one part diverges.
/// Throws UndefinedIntegral when both do.
XReal integrate(const PiecewiseFn& f, const FiniteMeasure& m);

/// Total-variation norm of a - b.
double tv_norm_diff(const FiniteMeasure& a, const FiniteMeasure& b);

/// Continuous piecewise-linear function with constant extension: knots
/// (x_i, y_i), value y_0 left of x_0 and y_k right of x_k. Used for
/// Lipschitz test functions in weak-convergence banks.
class LinearFn {
 public:
  LinearFn(Interval domain, std::vector<double> xs, std::vector<double> ys);
  /// clamp((s - x0) / (x1 - x0), 0, 1) mapped onto [y0, y1].
  static LinearFn ramp(Interval domain, double x0, double y0, double x1, double y1);

  double operator()(double s) const;
  const Interval& domain() const noexcept { return domain_; }
  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& ys() const noexcept { return ys_; }

 private:
  Interval domain_;
  std::vector<double> xs_;
  std::vector<double> ys_;
};

double integrate(const LinearFn& f, const FiniteMeasure& m);

/// Exact mass m({s : pred(a(s), b(s))}). Between consecutive refinement
/// points the predicate may change only where a - b crosses one of the
/// `levels`; those crossings are located exactly and the predicate is
/// evaluated once per resulting piece.
double set_mass(const FiniteMeasure& m, const PiecewiseFn& a, const PiecewiseFn& b,
                const std::function<bool(XReal, XReal)>& pred, const std::vector<double>& levels);

}  // namespace mlim
