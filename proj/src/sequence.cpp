#include "mlim/sequence.hpp"

#include <algorithm>
#include <cmath>

#include "mlim/errors.hpp"
#include "mlim/parallel.hpp"

namespace mlim {

FnSequence::FnSequence(Interval domain, std::size_t n_max, std::function<PiecewiseFn(std::size_t)> generator)
    : domain_(domain), n_max_(n_max), generator_(std::move(generator)) {
  if (n_max_ == 0) throw InvalidArgument("a sequence needs at least one index");
  if (!generator_) throw InvalidArgument("sequence generator missing");
}

PiecewiseFn FnSequence::at(std::size_t n) const {
  if (n < 1 || n > n_max_) throw InvalidArgument("index " + std::to_string(n) + " outside 1.." + std::to_string(n_max_));
  PiecewiseFn f = generator_(n);
  if (!(f.domain() == domain_)) throw DomainMismatch("f_" + std::to_string(n) + " lives on a different domain");
  return f;
}

FnSequence FnSequence::negated() const {
  auto gen = generator_;
  FnSequence out(domain_, n_max_, [gen](std::size_t n) { return gen(n).negated(); });
  if (limsup_certificate) out.liminf_certificate = limsup_certificate->negated();
  if (liminf_certificate) out.limsup_certificate = liminf_certificate->negated();
  if (eventual_form) {
    auto ev = eventual_form;
    out.eventual_form = [ev](double s, double r) -> std::optional<EventualForm> {
      auto e = ev(s, r);
      if (!e) return std::nullopt;
      return EventualForm{e->from_index, e->fn.negated()};
    };
  }
  return out;
}

FnSequence FnSequence::shifted(std::size_t N) const {
  if (N >= n_max_) throw InvalidArgument("shift leaves no indices");
  auto gen = generator_;
  FnSequence out(domain_, n_max_ - N, [gen, N](std::size_t n) { return gen(n + N); });
  out.liminf_certificate = liminf_certificate;
  out.limsup_certificate = limsup_certificate;
  if (eventual_form) {
    auto ev = eventual_form;
    out.eventual_form = [ev, N](double s, double r) -> std::optional<EventualForm> {
      auto e = ev(s, r);
      if (!e) return std::nullopt;
      e->from_index = e->from_index > N + 1 ? e->from_index - N : 1;
      return e;
    };
  }
  return out;
}

FnSequence FnSequence::mapped(std::function<PiecewiseFn(const PiecewiseFn&)> op) const {
  auto gen = generator_;
  return FnSequence(domain_, n_max_, [gen, op](std::size_t n) { return op(gen(n)); });
}

FnSequence FnSequence::truncated(std::size_t n_max) const {
  if (n_max == 0 || n_max > n_max_) throw InvalidArgument("truncation must keep 1..n_max");
  FnSequence out = *this;
  out.n_max_ = n_max;
  return out;
}

MeasureSequence::MeasureSequence(Interval domain, std::size_t n_max, std::function<FiniteMeasure(std::size_t)> generator)
    : domain_(domain), n_max_(n_max), generator_(std::move(generator)) {
  if (n_max_ == 0) throw InvalidArgument("a sequence needs at least one index");
  if (!generator_) throw InvalidArgument("sequence generator missing");
}

MeasureSequence MeasureSequence::constant(const FiniteMeasure& m, std::size_t n_max) {
  return MeasureSequence(m.domain(), n_max, [m](std::size_t) { return m; });
}

FiniteMeasure MeasureSequence::at(std::size_t n) const {
  if (n < 1 || n > n_max_) throw InvalidArgument("index " + std::to_string(n) + " outside 1.." + std::to_string(n_max_));
  FiniteMeasure m = generator_(n);
  if (!(m.domain() == domain_)) throw DomainMismatch("mu_" + std::to_string(n) + " lives on a different domain");
  return m;
}

MeasureSequence MeasureSequence::shifted(std::size_t N) const {
  if (N >= n_max_) throw InvalidArgument("shift leaves no indices");
  auto gen = generator_;
  return MeasureSequence(domain_, n_max_ - N, [gen, N](std::size_t n) { return gen(n + N); });
}

MeasureSequence MeasureSequence::truncated(std::size_t n_max) const {
  if (n_max == 0 || n_max > n_max_) throw InvalidArgument("truncation must keep 1..n_max");
  MeasureSequence out = *this;
  out.n_max_ = n_max;
  return out;
}

std::string to_string(Trend t) {
  switch (t) {
    case Trend::zero: return "zero";
    case Trend::vanishing: return "vanishing";
    case Trend::persistent: return "persistent";
    case Trend::undetermined: return "undetermined";
  }
  return "undetermined";
}

Trend classify_trend(const std::vector<double>& values, std::size_t first_index, std::size_t window_start, double tol) {
  std::size_t begin = window_start > first_index ? window_start - first_index : 0;
  if (begin >= values.size()) begin = values.empty() ? 0 : values.size() - 1;
  if (values.empty()) return Trend::undetermined;
  double top = 0.0;
  bool monotone = true;
  for (std::size_t i = begin; i < values.size(); ++i) {
    top = std::max(top, std::fabs(values[i]));
    if (i > begin && std::fabs(values[i]) > std::fabs(values[i - 1]) + tol) monotone = false;
  }
  if (top <= tol) return Trend::zero;
  const double first = std::fabs(values[begin]);
  const double last = std::fabs(values.back());
  const double n_first = static_cast<double>(begin + first_index);
  const double n_last = static_cast<double>(values.size() - 1 + first_index);
  if (values.size() - begin >= 2 && monotone && last <= first * n_first / n_last + tol) return Trend::vanishing;
  if (last > tol && last >= first - tol) return Trend::persistent;
  return Trend::undetermined;
}

std::string to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::none: return "none";
    case CertificateKind::tv: return "tv";
    case CertificateKind::builder: return "builder";
  }
  return "none";
}

std::vector<double> tv_series(const MeasureSequence& seq, const FiniteMeasure& limit) {
  std::vector<double> out(seq.n_max());
  parallel_for(seq.n_max(), [&](std::size_t i) { out[i] = tv_norm_diff(seq.at(i + 1), limit); });
  return out;
}

WeakGapSeries weak_gap_bank(const MeasureSequence& seq, const FiniteMeasure& limit, const std::vector<BankFn>& bank,
                            CertificateKind certificate, double tol) {
  for (const auto& b : bank) {
    if (const auto* f = std::get_if<PiecewiseFn>(&b)) {
      if (!supremum(*f).is_finite() || !infimum(*f).is_finite())
        throw InvalidArgument("weak-gap bank functions must be bounded");
    }
  }
  auto integral = [](const BankFn& b, const FiniteMeasure& m) {
    if (const auto* f = std::get_if<PiecewiseFn>(&b)) return integrate(*f, m).value();
    return integrate(std::get<LinearFn>(b), m);
  };
  std::vector<double> reference;
  for (const auto& b : bank) reference.push_back(integral(b, limit));

  WeakGapSeries out;
  out.basis = certificate;
  out.gaps.assign(seq.n_max(), 0.0);
  parallel_for(seq.n_max(), [&](std::size_t i) {
    const FiniteMeasure m = seq.at(i + 1);
    double worst = 0.0;
    for (std::size_t k = 0; k < bank.size(); ++k) worst = std::max(worst, std::fabs(integral(bank[k], m) - reference[k]));
    out.gaps[i] = worst;
  });
  if (certificate == CertificateKind::builder) out.certified = true;
  if (certificate == CertificateKind::tv) {
    const auto tv = tv_series(seq, limit);
    const std::size_t width = std::max<std::size_t>(8, seq.n_max() / 4);
    const std::size_t window = width >= seq.n_max() ? 1 : seq.n_max() - width + 1;
    out.tv_trend = classify_trend(tv, 1, window, tol);
    out.certified = *out.tv_trend == Trend::zero || *out.tv_trend == Trend::vanishing;
  }
  return out;
}

}  // namespace mlim
