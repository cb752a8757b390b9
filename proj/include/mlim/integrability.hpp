#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mlim/sequence.hpp"

namespace mlim {

/// integral of |f| * 1{|f| >= K} against m, for every K of a grid at once.
/// Entries may be +inf.
std::vector<double> tail_values(const PiecewiseFn& f, const FiniteMeasure& m, const std::vector<double>& K_grid);

/// integral of |f_n| * 1{|f_n| >= K} d mu_n.
double tail_integral(const FnSequence& seq, const MeasureSequence& measures, std::size_t n, double K);

/// Default trailing window start: the last max(8, n_max / 4) indices.
std::size_t default_window_start(std::size_t n_max);

/// Default K grid {2^j : j = -1..12}.
std::vector<double> default_k_grid();

struct TailCurve {
  std::vector<double> K_grid;
  std::vector<std::vector<double>> rows;  // rows[n - 1][k]
  std::vector<double> sup;                // sup over n
  std::vector<double> limsup_window;      // max over n in [window_start, n_max]
  std::vector<bool> stabilized;           // last stab_width values within stab_tol
  std::size_t window_start = 1;
  std::size_t stab_width = 8;
  double stab_tol = 1e-12;

  std::size_t n_max() const noexcept { return rows.size(); }
  /// Header K, n1..n_max, sup, limsup_window; one line per K.
  std::string to_csv() const;
};

TailCurve tail_curve(const FnSequence& seq, const MeasureSequence& measures, const std::vector<double>& K_grid,
                     std::size_t window_start, std::size_t stab_width = 8, double stab_tol = 1e-12);

/// Builds the aggregates of a curve from its rows (also checks that every
/// row is nonincreasing in K).
TailCurve curve_from_rows(std::vector<double> K_grid, std::vector<std::vector<double>> rows, std::size_t window_start,
                          std::size_t stab_width = 8, double stab_tol = 1e-12);

enum class UiKind { ui, aui };

std::string to_string(UiKind k);

struct UiVerdict {
  UiKind kind = UiKind::ui;
  bool passes = false;
  std::optional<double> K_star;
  double tol = 0.0;
  std::optional<std::size_t> shift_N;
  std::size_t window_start = 1;
  std::size_t n_max = 0;
  bool stabilized = false;  // stabilization flag at K_star (aui only)
};

UiVerdict verdict(const TailCurve& curve, UiKind kind, double tol);

/// Smallest N <= N_max with max over n in (N, n_max] of row[n - 1] <= tol.
std::optional<std::size_t> shift_from_row(const std::vector<double>& row, double tol, std::size_t N_max);

/// Smallest N <= N_max such that the shifted family's tail at K_max is <= tol
/// uniformly in n; nullopt when there is none.
std::optional<std::size_t> shift_search(const FnSequence& seq, const MeasureSequence& measures, double tol,
                                        double K_max, std::size_t N_max);

struct KartashovResult {
  bool triggered = false;                      // windowed limsup reached tol on the grid
  bool holds = true;
  std::optional<double> K_window;              // first K with windowed limsup <= tol
  std::optional<std::size_t> shift;            // rows up to here never reach tol
  std::optional<double> K_uniform;             // first K with sup over n > shift <= tol
  std::optional<std::pair<std::size_t, double>> witness;  // (n, K) breaking the implication
};

/// Finite-table check of the lemma behind the shift equivalence. `eps[n-1][k]`
/// must be nonincreasing in k (PreconditionFailed otherwise).
KartashovResult kartashov_check(const std::vector<std::vector<double>>& eps, const std::vector<double>& K_grid,
                                std::size_t window_start, double tol);

}  // namespace mlim
