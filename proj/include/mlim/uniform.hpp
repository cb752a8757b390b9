#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlim/fatou.hpp"

namespace mlim {

struct SignedCell {
  Region region;
  double mass = 0.0;
};

/// Finite signed measure carried by disjoint refinement cells and atoms.
struct SignedCellMeasure {
  std::vector<SignedCell> cells;
};

/// nu(C) = int_C f_n d mu_n - int_C f d mu, one cell per region of constant
/// sign (continuous cells are split where the gap density changes sign).
/// Throws NonIntegrable when an infinite value meets positive mass.
SignedCellMeasure signed_gap(const PiecewiseFn& fn, const FiniteMeasure& mn, const PiecewiseFn& f, const FiniteMeasure& m);

/// Positive and negative (as a magnitude) Hahn masses, each summed over the
/// cells in index order.
struct HahnTotals {
  double positive = 0.0;
  double negative = 0.0;
};

HahnTotals hahn_totals(const SignedCellMeasure& g);

/// inf over C of nu(C): the sum of the negative cell masses (<= 0).
double uniform_fatou_gap(const SignedCellMeasure& g);

/// sup over C of |nu(C)| = max(positive, negative).
double uniform_sup_gap(const SignedCellMeasure& g);

/// m({f_n <= f - eps}) for n = 1..n_max.
std::vector<double> condition_undershoot(const FnSequence& seq, const PiecewiseFn& f, const FiniteMeasure& m, double eps);

/// m({|f_n - f| >= eps}) for n = 1..n_max.
std::vector<double> conv_in_measure(const FnSequence& seq, const PiecewiseFn& f, const FiniteMeasure& m, double eps);

enum class Consistency { consistent, inconsistent, undetermined };

std::string to_string(Consistency c);

struct UniformReport {
  std::vector<double> inf_gap;     // per n, <= 0
  std::vector<double> sup_gap;     // per n, >= |inf_gap|
  std::vector<double> variation;   // positive + negative mass
  std::vector<double> cond_i;      // undershoot measure
  std::vector<double> cond_i_dct;  // convergence-in-measure level set
  std::vector<double> cond_ii;     // tail of f_n^- at the largest grid K
  std::vector<double> tv;          // ||mu_n - mu||
  std::size_t window_start = 1;

  Trend tv_trend = Trend::undetermined;
  Trend fatou_trend = Trend::undetermined;
  Trend dct_trend = Trend::undetermined;
  Trend cond_i_trend = Trend::undetermined;
  Trend cond_i_dct_trend = Trend::undetermined;
  std::optional<UiVerdict> aui_negative;
  std::optional<UiVerdict> aui_absolute;

  Conclusion uniform_fatou = Conclusion::inconclusive;
  Conclusion uniform_dct = Conclusion::inconclusive;
  Consistency fatou_consistency = Consistency::undetermined;
  Consistency dct_consistency = Consistency::undetermined;
  bool fixture_bug = false;  // observed trend contradicts the stated equivalence
  std::vector<std::string> notes;

  /// n,inf_gap,sup_gap,cond_i,cond_ii with CRLF line ends.
  std::string to_csv() const;
};

/// Requires sc.limit_function.
UniformReport uniform_report(const Scenario& sc);

}  // namespace mlim
