#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mlim/sequence.hpp"

namespace mlim {

/// Pairs (N_j, delta_j): index thresholds increasing, radii decreasing.
struct EpiSchedule {
  std::vector<std::size_t> N;
  std::vector<double> delta;
  std::size_t n_max = 0;

  /// delta_j = 2^-j, N_j = 2^j, j = 1..min(12, floor(log2 n_max)).
  static EpiSchedule standard(std::size_t n_max);
  /// Throws InvalidArgument on a malformed schedule, ScheduleExhausted when
  /// N_J exceeds n_max.
  void validate() const;
  std::size_t size() const noexcept { return N.size(); }
};

enum class Certainty { exact, window_truncated };
enum class EpiSide { liminf, limsup };

std::string to_string(Certainty c);
std::string to_string(EpiSide s);

struct EpiEstimate {
  std::vector<XReal> inner;  // per-j inf (liminf) or sup (limsup)
  XReal value = 0.0;
  Certainty certainty = Certainty::window_truncated;
  std::string source;        // "certificate", "eventual_form" or "scan"
  bool stabilized = false;   // last two inner values agree
};

/// inf (or sup) of f over the open ball (s - r, s + r) intersected with the
/// domain, by an exact scan of cells, fill regions and point values.
XReal ball_extremum(const PiecewiseFn& f, double s, double r, EpiSide side);

/// Lower / upper semicontinuous envelope of f at s: the min (max) of f(s) and
/// both one-sided limits.
XReal envelope_at(const PiecewiseFn& f, double s, EpiSide side);

EpiEstimate epi_limit(const FnSequence& seq, double s, const EpiSchedule& sched, EpiSide side);
EpiEstimate epi_liminf(const FnSequence& seq, double s, const EpiSchedule& sched);
EpiEstimate epi_limsup(const FnSequence& seq, double s, const EpiSchedule& sched);

/// Same as calling epi_limit at every point, but each f_n is generated once.
/// Unless `always_scan` is set, points settled by a certificate or an
/// eventual form skip the cell scan and carry no inner values.
std::vector<EpiEstimate> epi_limit_batch(const FnSequence& seq, const std::vector<double>& points,
                                         const EpiSchedule& sched, EpiSide side, bool always_scan = false);

struct LimitExistence {
  std::vector<double> points;
  std::vector<bool> exists;           // per sample point
  std::vector<double> failures;       // sample points where the limit was not confirmed
  double exception_mass = 0.0;
  bool mass_exact = false;            // from certificates rather than sample cells
  bool exists_almost_everywhere = false;
};

/// Pointwise existence of the sequential epi-limit on sample points, plus the
/// mass of the exception set under m.
LimitExistence epi_limit_exists(const FnSequence& seq, const FiniteMeasure& m, const std::vector<double>& points,
                                const EpiSchedule& sched, double tol);

struct EpiIntegral {
  XReal value = 0.0;
  Certainty certainty = Certainty::window_truncated;
  std::string method;  // "certificate" or "sampled"
};

/// 257 evenly spaced points over the domain (finite part), plus every atom
/// of m.
std::vector<double> default_epi_grid(const Interval& domain, const FiniteMeasure& m);

/// Integral of the epi-liminf / epi-limsup against m; exact through the
/// certificate when present, otherwise a step function over the sample
/// points (atoms evaluated at their own location).
EpiIntegral epi_integral(const FnSequence& seq, const FiniteMeasure& m, EpiSide side, const EpiSchedule& sched,
                         const std::vector<double>& grid);

}  // namespace mlim
