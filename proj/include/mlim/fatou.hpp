#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mlim/epi.hpp"
#include "mlim/integrability.hpp"
#include "mlim/sequence.hpp"

namespace mlim {

struct Tolerances {
  double gap = 1e-9;    // Fatou / DCT gaps
  double ui = 1e-6;     // tail functional threshold
  double stab = 1e-12;  // window stabilization
  double epi = 1e-9;    // epi-limit agreement
  double eps = 0.1;     // level of the measure conditions in uniform checks
  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// Everything a check needs: mu_n -> mu, f_n, optional g_n and limit f.
struct Scenario {
  std::string name;
  Interval domain{};
  std::size_t n_max = 0;
  MeasureSequence measures;
  FiniteMeasure limit_measure;
  FnSequence f;
  std::optional<FnSequence> g;
  std::optional<PiecewiseFn> limit_function;
  std::vector<double> K_grid;
  EpiSchedule schedule;
  std::vector<double> epi_grid;  // empty: default grid
  Tolerances tol;
  CertificateKind certificate = CertificateKind::none;
  std::vector<BankFn> bank;      // empty: a default ramp bank

  /// Throws InvalidArgument when index ranges or domains disagree.
  void validate() const;
  std::size_t window_start() const { return default_window_start(n_max); }
};

enum class Conclusion { holds, violated, inconclusive };

std::string to_string(Conclusion c);

struct SeqLimit {
  XReal value = 0.0;
  bool stabilized = false;
  std::size_t window_start = 1;
  std::size_t window_end = 1;
};

/// min over the last `window` values; stabilized when they all lie within stab_tol.
SeqLimit seq_liminf(const std::vector<XReal>& values, std::size_t window, double stab_tol = 1e-12);
/// max over the last `window` values.
SeqLimit seq_limsup(const std::vector<XReal>& values, std::size_t window, double stab_tol = 1e-12);

/// integral of f_n d mu_n for n = 1..n_max.
std::vector<XReal> integral_series(const FnSequence& seq, const MeasureSequence& measures);

struct GapReport {
  XReal lhs = 0.0;
  Certainty lhs_certainty = Certainty::window_truncated;
  std::string lhs_method;
  XReal rhs = 0.0;
  Certainty rhs_certainty = Certainty::window_truncated;
  SeqLimit rhs_window;
  XReal gap = 0.0;  // rhs - lhs, equal infinities giving 0
  Conclusion conclusion = Conclusion::inconclusive;
  std::vector<XReal> integrals;

  std::optional<UiVerdict> aui_negative_part;  // of f_n^-
  std::optional<WeakGapSeries> weak;
  bool theorem_contradiction = false;  // violated while every hypothesis is certified
  bool degenerate = false;             // mu(S) = 0
  std::optional<XReal> raw_rhs;        // degenerate case: windowed rhs before zeroing
  std::vector<std::string> notes;
};

/// Fatou inequality: lhs = integral of the epi-liminf against mu, rhs =
/// liminf of the integrals.
GapReport fatou_report(const Scenario& sc);

struct MinorantReport {
  std::string variant;   // "limsup" (assumption as stated) or "liminf" (weakened)
  bool dominance = true;
  std::optional<std::size_t> dominance_index;
  std::optional<Region> dominance_witness;
  bool finite = true;    // epi integral of g > -inf
  bool inequality = true;
  XReal lhs = 0.0;       // integral of the epi-limit of g_n against mu
  Certainty lhs_certainty = Certainty::window_truncated;
  XReal rhs = 0.0;       // liminf of integral g_n d mu_n
  Certainty rhs_certainty = Certainty::window_truncated;
  Conclusion conclusion = Conclusion::inconclusive;
};

MinorantReport minorant_check(const Scenario& sc);
MinorantReport weakened_minorant_probe(const Scenario& sc);

struct MajorantReport {
  bool dominance = true;  // |f_n| <= g_n
  std::optional<std::size_t> dominance_index;
  std::optional<Region> dominance_witness;
  XReal lhs = 0.0;        // limsup of integral g_n d mu_n
  Certainty lhs_certainty = Certainty::window_truncated;
  XReal rhs = 0.0;        // integral of the epi-liminf of g_n against mu
  Certainty rhs_certainty = Certainty::window_truncated;
  bool inequality = true;
  bool finite = true;     // rhs < +inf
  Conclusion conclusion = Conclusion::inconclusive;
};

MajorantReport majorant_check(const Scenario& sc);

struct DctReport {
  GapReport gap;                     // lhs: integral of the limit, rhs: liminf of integrals
  XReal rhs_limsup = 0.0;
  bool limit_exists = false;         // epi-limit exists mu-a.e. on the sample grid
  LimitExistence existence;
  std::optional<UiVerdict> aui_absolute;  // of |f_n|
  std::optional<MajorantReport> majorant;
  bool sufficient = false;           // limit exists and (aui or majorant)
  bool equality = false;
};

DctReport dct_report(const Scenario& sc);

struct Theorem26Report {
  XReal upper_bound = 0.0;  // max over n of sup g_n
  MinorantReport minorant;
  std::optional<std::size_t> shift;
  bool inconsistency = false;  // minorant holds but no shift was found
};

/// Requires g_n uniformly bounded above on the index range (PreconditionFailed otherwise).
Theorem26Report theorem26_probe(const Scenario& sc);

/// Ramps of height 1 rising over each quarter of the (finite part of the) domain.
std::vector<BankFn> default_bank(const Interval& domain);

}  // namespace mlim
