#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mlim/measure.hpp"
#include "mlim/piecewise.hpp"

namespace mlim {

/// f_n restricted to a ball agrees with `fn` for every n >= from_index.
struct EventualForm {
  std::size_t from_index = 1;
  PiecewiseFn fn;
};

/// (center, radius) -> eventual form on the ball, if one is known.
using EventualFormFn = std::function<std::optional<EventualForm>(double, double)>;

/// f_1, ..., f_{n_max}, generated on demand. The optional certificates are
/// trusted closed forms of the sequential epi-limits.
class FnSequence {
 public:
  FnSequence() = default;
  FnSequence(Interval domain, std::size_t n_max, std::function<PiecewiseFn(std::size_t)> generator);

  const Interval& domain() const noexcept { return domain_; }
  std::size_t n_max() const noexcept { return n_max_; }
  /// 1-based.
  PiecewiseFn at(std::size_t n) const;

  std::optional<PiecewiseFn> liminf_certificate;
  std::optional<PiecewiseFn> limsup_certificate;
  EventualFormFn eventual_form;

  /// {-f_n}; certificates swap roles.
  FnSequence negated() const;
  /// {f_{n+N}}; the epi-limits do not change.
  FnSequence shifted(std::size_t N) const;
  /// {op(f_n)}; certificates are dropped.
  FnSequence mapped(std::function<PiecewiseFn(const PiecewiseFn&)> op) const;
  /// Same sequence with a shorter index range.
  FnSequence truncated(std::size_t n_max) const;

 private:
  Interval domain_{};
  std::size_t n_max_ = 0;
  std::function<PiecewiseFn(std::size_t)> generator_;
};

class MeasureSequence {
 public:
  MeasureSequence() = default;
  MeasureSequence(Interval domain, std::size_t n_max, std::function<FiniteMeasure(std::size_t)> generator);

  static MeasureSequence constant(const FiniteMeasure& m, std::size_t n_max);

  const Interval& domain() const noexcept { return domain_; }
  std::size_t n_max() const noexcept { return n_max_; }
  FiniteMeasure at(std::size_t n) const;
  MeasureSequence shifted(std::size_t N) const;
  MeasureSequence truncated(std::size_t n_max) const;

 private:
  Interval domain_{};
  std::size_t n_max_ = 0;
  std::function<FiniteMeasure(std::size_t)> generator_;
};

/// Trend of a nonnegative series over a trailing window, read as evidence
/// for or against convergence to 0.
enum class Trend { zero, vanishing, persistent, undetermined };

std::string to_string(Trend t);

/// `values[i]` belongs to index first_index + i. Only entries with index
/// >= window_start are inspected.
///   zero:        window max <= tol
///   vanishing:   nonincreasing over the window and the last value is at most
///                first * n_first / n_last + tol (at least 1/n decay)
///   persistent:  last value > tol and not below the first one minus tol
Trend classify_trend(const std::vector<double>& values, std::size_t first_index, std::size_t window_start, double tol);

/// Weak-convergence test function: bounded step function or Lipschitz ramp.
using BankFn = std::variant<PiecewiseFn, LinearFn>;

enum class CertificateKind { none, tv, builder };

std::string to_string(CertificateKind k);

struct WeakGapSeries {
  std::vector<double> gaps;          // gaps[n-1] = max over the bank of |int f dmu_n - int f dmu|
  CertificateKind basis = CertificateKind::none;
  bool certified = false;            // convergence backed by a certificate, not the bank
  std::optional<Trend> tv_trend;     // when basis == tv
};

/// Per-n bank witness of weak convergence. A large late gap witnesses
/// non-convergence; small gaps are evidence only.
WeakGapSeries weak_gap_bank(const MeasureSequence& seq, const FiniteMeasure& limit, const std::vector<BankFn>& bank,
                            CertificateKind certificate = CertificateKind::none, double tol = 1e-9);

/// tv_norm_diff(mu_n, mu) for n = 1..n_max.
std::vector<double> tv_series(const MeasureSequence& seq, const FiniteMeasure& limit);

}  // namespace mlim
