#include "mlim/integrability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mlim/compensated.hpp"
#include "mlim/errors.hpp"
#include "mlim/parallel.hpp"

namespace mlim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::vector<double> tail_values(const PiecewiseFn& f, const FiniteMeasure& m, const std::vector<double>& K_grid) {
  for (double K : K_grid)
    if (!(K > 0) || !std::isfinite(K)) throw InvalidArgument("tail level K must be positive and finite");
  if (!(f.domain() == m.domain())) throw DomainMismatch("tail integral across different domains");

  const std::size_t nk = K_grid.size();
  std::vector<CompensatedSum> acc(nk);
  std::vector<bool> infinite(nk, false);
  auto add = [&](std::size_t k, double v) {
    if (std::isinf(v))
      infinite[k] = true;
    else
      acc[k].add(v);
  };

  const auto cuts = merged_breaks(f.domain(), {&f});
  std::vector<double> mb = m.breaks();
  std::vector<double> all;
  std::merge(cuts.begin(), cuts.end(), mb.begin(), mb.end(), std::back_inserter(all));
  all.erase(std::unique(all.begin(), all.end()), all.end());

  std::vector<double> sub;
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    const double lo = all[i];
    const double hi = all[i + 1];
    const Kernel kern = m.kernel_on(lo, hi);
    if (kern.kind == Kernel::Kind::none) continue;
    const Piece p = f.piece_on(lo, hi);
    if (p.is_constant()) {
      const XReal a = p.c0 < XReal(0.0) ? -p.c0 : p.c0;
      const double mass = kern.mass(lo, hi);
      if (mass == 0.0 || a == XReal(0.0)) continue;
      for (std::size_t k = 0; k < nk; ++k)
        if (a >= XReal(K_grid[k])) add(k, times_mass(a, mass).value());
      continue;
    }
    if (kern.kind == Kernel::Kind::cdf)
      throw NoClosedForm("exponential function cell against segment '" + kern.segment->name() +
                         "' without an exponential density form");
    const ExpSum e = p.as_expsum();
    const ExpSum weighted = e * ExpSum(kern.form.scale, kern.form.rate);
    const auto zeros = e.sign_changes(lo, hi);
    for (std::size_t k = 0; k < nk; ++k) {
      sub = zeros;
      for (double t : {K_grid[k], -K_grid[k]}) {
        auto r = (e - ExpSum(t, 0.0)).sign_changes(lo, hi);
        sub.insert(sub.end(), r.begin(), r.end());
      }
      std::sort(sub.begin(), sub.end());
      sub.erase(std::unique(sub.begin(), sub.end()), sub.end());
      sub.push_back(hi);
      double a = lo;
      for (double b : sub) {
        const double v = e(interior_point(a, b));
        if (std::fabs(v) >= K_grid[k]) {
          const double part = weighted.integral(a, b);
          add(k, v < 0 ? -part : part);
        }
        a = b;
      }
    }
  }
  for (const auto& atom : m.atoms()) {
    const XReal v = f(atom.at);
    const XReal a = v < XReal(0.0) ? -v : v;
    for (std::size_t k = 0; k < nk; ++k)
      if (a >= XReal(K_grid[k])) add(k, times_mass(a, atom.weight).value());
  }

  std::vector<double> out(nk);
  for (std::size_t k = 0; k < nk; ++k) out[k] = infinite[k] ? kInf : acc[k].value();
  return out;
}

double tail_integral(const FnSequence& seq, const MeasureSequence& measures, std::size_t n, double K) {
  return tail_values(seq.at(n), measures.at(n), {K}).front();
}

std::size_t default_window_start(std::size_t n_max) {
  const std::size_t width = std::max<std::size_t>(8, n_max / 4);
  return width >= n_max ? 1 : n_max - width + 1;
}

std::vector<double> default_k_grid() {
  std::vector<double> g;
  for (int j = -1; j <= 12; ++j) g.push_back(std::ldexp(1.0, j));
  return g;
}

std::string TailCurve::to_csv() const {
  std::string out = "K";
  for (std::size_t n = 1; n <= rows.size(); ++n) out += ",n" + std::to_string(n);
  out += ",sup,limsup_window\r\n";
  for (std::size_t k = 0; k < K_grid.size(); ++k) {
    out += csv_number(K_grid[k]);
    for (const auto& r : rows) out += "," + csv_number(r[k]);
    out += "," + csv_number(sup[k]) + "," + csv_number(limsup_window[k]) + "\r\n";
  }
  return out;
}

TailCurve curve_from_rows(std::vector<double> K_grid, std::vector<std::vector<double>> rows, std::size_t window_start,
                          std::size_t stab_width, double stab_tol) {
  if (K_grid.empty()) throw InvalidArgument("empty K grid");
  if (!std::is_sorted(K_grid.begin(), K_grid.end())) throw InvalidArgument("K grid must be sorted");
  if (rows.empty()) throw InvalidArgument("tail curve needs at least one index");
  if (window_start < 1 || window_start > rows.size()) throw InvalidArgument("window start outside 1..n_max");
  TailCurve c;
  c.K_grid = std::move(K_grid);
  c.rows = std::move(rows);
  c.window_start = window_start;
  c.stab_width = std::max<std::size_t>(1, std::min(stab_width, c.rows.size()));
  c.stab_tol = stab_tol;
  const std::size_t nk = c.K_grid.size();
  for (std::size_t n = 0; n < c.rows.size(); ++n) {
    if (c.rows[n].size() != nk) throw InvalidArgument("tail row length differs from the K grid");
    for (std::size_t k = 1; k < nk; ++k)
      if (c.rows[n][k] > c.rows[n][k - 1])
        throw PreconditionFailed("tail row n=" + std::to_string(n + 1) + " increases in K");
  }
  c.sup.assign(nk, 0.0);
  c.limsup_window.assign(nk, 0.0);
  c.stabilized.assign(nk, false);
  for (std::size_t k = 0; k < nk; ++k) {
    double lo = kInf;
    double hi = -kInf;
    for (std::size_t n = 0; n < c.rows.size(); ++n) {
      const double v = c.rows[n][k];
      c.sup[k] = std::max(c.sup[k], v);
      if (n + 1 >= c.window_start) c.limsup_window[k] = std::max(c.limsup_window[k], v);
      if (n + c.stab_width >= c.rows.size()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    c.stabilized[k] = lo == hi || hi - lo < stab_tol;
  }
  return c;
}

TailCurve tail_curve(const FnSequence& seq, const MeasureSequence& measures, const std::vector<double>& K_grid,
                     std::size_t window_start, std::size_t stab_width, double stab_tol) {
  if (seq.n_max() != measures.n_max()) throw InvalidArgument("function and measure index ranges differ");
  std::vector<std::vector<double>> rows(seq.n_max());
  parallel_for(seq.n_max(), [&](std::size_t i) { rows[i] = tail_values(seq.at(i + 1), measures.at(i + 1), K_grid); });
  return curve_from_rows(K_grid, std::move(rows), window_start, stab_width, stab_tol);
}

std::string to_string(UiKind k) { return k == UiKind::ui ? "ui" : "aui"; }

std::optional<std::size_t> shift_from_row(const std::vector<double>& row, double tol, std::size_t N_max) {
  const std::size_t n_max = row.size();
  if (n_max == 0) return std::nullopt;
  // tail_max[N] = max over n in (N, n_max] of row[n - 1].
  std::vector<double> tail_max(n_max, 0.0);
  double run = 0.0;
  for (std::size_t N = n_max; N-- > 0;) {
    run = std::max(run, row[N]);
    tail_max[N] = run;
  }
  const std::size_t last = std::min(N_max, n_max - 1);
  for (std::size_t N = 0; N <= last; ++N)
    if (tail_max[N] <= tol) return N;
  return std::nullopt;
}

UiVerdict verdict(const TailCurve& curve, UiKind kind, double tol) {
  if (!(tol > 0)) throw InvalidArgument("tolerance must be positive");
  UiVerdict v;
  v.kind = kind;
  v.tol = tol;
  v.window_start = curve.window_start;
  v.n_max = curve.n_max();
  const auto& agg = kind == UiKind::ui ? curve.sup : curve.limsup_window;
  for (std::size_t k = 0; k < agg.size(); ++k) {
    if (agg[k] <= tol) {
      v.K_star = curve.K_grid[k];
      v.stabilized = curve.stabilized[k];
      std::vector<double> column;
      for (const auto& r : curve.rows) column.push_back(r[k]);
      v.shift_N = shift_from_row(column, tol, curve.n_max() - 1);
      break;
    }
  }
  v.passes = v.K_star.has_value();
  return v;
}

std::optional<std::size_t> shift_search(const FnSequence& seq, const MeasureSequence& measures, double tol,
                                        double K_max, std::size_t N_max) {
  if (!(tol > 0) || !(K_max > 0)) throw InvalidArgument("shift search bounds must be positive");
  if (seq.n_max() != measures.n_max()) throw InvalidArgument("function and measure index ranges differ");
  std::vector<double> row(seq.n_max());
  parallel_for(seq.n_max(), [&](std::size_t i) { row[i] = tail_values(seq.at(i + 1), measures.at(i + 1), {K_max})[0]; });
  return shift_from_row(row, tol, N_max);
}

KartashovResult kartashov_check(const std::vector<std::vector<double>>& eps, const std::vector<double>& K_grid,
                                std::size_t window_start, double tol) {
  const TailCurve c = curve_from_rows(K_grid, eps, window_start);
  KartashovResult r;
  for (std::size_t k = 0; k < K_grid.size(); ++k) {
    if (c.limsup_window[k] <= tol) {
      r.K_window = K_grid[k];
      break;
    }
  }
  r.triggered = r.K_window.has_value();
  if (!r.triggered) return r;

  // Rows that never reach tol on the grid fail the per-index limit condition;
  // the shift skips past all of them.
  const std::size_t last = K_grid.size() - 1;
  std::size_t shift = 0;
  for (std::size_t n = 0; n < eps.size(); ++n)
    if (eps[n][last] > tol) shift = n + 1;
  r.shift = shift;
  for (std::size_t k = 0; k < K_grid.size() && !r.K_uniform; ++k) {
    double worst = 0.0;
    for (std::size_t n = shift; n < eps.size(); ++n) worst = std::max(worst, eps[n][k]);
    if (worst <= tol) r.K_uniform = K_grid[k];
  }
  if (!r.K_uniform) {
    r.holds = false;
    std::size_t arg = shift;
    for (std::size_t n = shift; n < eps.size(); ++n)
      if (eps[n][last] > eps[arg][last]) arg = n;
    r.witness = std::make_pair(arg + 1, K_grid[last]);
  }
  return r;
}

}  // namespace mlim
