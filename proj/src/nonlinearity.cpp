#include "kirchhoff/nonlinearity.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "kirchhoff/errors.hpp"

namespace kirchhoff {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool in_open_half_line(double v) { return std::isfinite(v) && v > 0; }

LimitCheck sample_limit(double declared, std::array<double, 3> samples, double tol,
                        auto&& ratio) {
  LimitCheck check;
  check.declared = declared;
  check.samples = samples;
  check.applicable = !std::isnan(declared);
  if (!check.applicable) return check;
  for (int k = 0; k < 3; ++k) {
    check.ratios[k] = ratio(samples[k]);
    check.errors[k] = std::abs(check.ratios[k] - declared);
  }
  const double slack = 1e-13 * std::max(1.0, std::abs(declared));
  check.monotone = check.errors[1] <= check.errors[0] + slack &&
                   check.errors[2] <= check.errors[1] + slack;
  check.pass = check.monotone && check.errors[2] < tol && in_open_half_line(declared) &&
               std::isfinite(check.ratios[2]);
  return check;
}

}  // namespace

std::string_view to_string(NonlinearityKind kind) {
  switch (kind) {
    case NonlinearityKind::sum_linear_cubic: return "sum_linear_cubic";
    case NonlinearityKind::pure_linear: return "pure_linear";
    case NonlinearityKind::pure_cubic: return "pure_cubic";
    case NonlinearityKind::saturating: return "saturating";
  }
  return "unknown";
}

NonlinearityKind nonlinearity_kind_from_string(std::string_view name) {
  if (name == "sum_linear_cubic") return NonlinearityKind::sum_linear_cubic;
  if (name == "pure_linear") return NonlinearityKind::pure_linear;
  if (name == "pure_cubic") return NonlinearityKind::pure_cubic;
  if (name == "saturating") return NonlinearityKind::saturating;
  throw InvalidNonlinearityError("unknown nonlinearity kind '" + std::string(name) + "'");
}

double Nonlinearity::value(double s) const {
  switch (kind_) {
    case NonlinearityKind::saturating: {
      const double s2 = s * s;
      return linear_ * s + cubic_ * s2 * s2 * s / (1.0 + s2);
    }
    default:
      return linear_ * s + cubic_ * s * s * s;
  }
}

double Nonlinearity::derivative(double s) const {
  switch (kind_) {
    case NonlinearityKind::saturating: {
      const double s2 = s * s;
      const double d = 1.0 + s2;
      return linear_ + cubic_ * s2 * s2 * (5.0 + 3.0 * s2) / (d * d);
    }
    default:
      return linear_ + 3.0 * cubic_ * s * s;
  }
}

Nonlinearity Nonlinearity::with_declared(DeclaredConstants declared) const {
  Nonlinearity copy = *this;
  copy.declared_ = declared;
  return copy;
}

Nonlinearity make_nonlinearity(NonlinearityKind kind, const NonlinearityParams& p) {
  for (double v : {p.f0, p.f_inf, p.a, p.b, p.lambda1, p.mu1}) {
    if (!std::isfinite(v) || v < 0)
      throw InvalidNonlinearityError("nonlinearity parameters must be finite and nonnegative");
  }
  const bool uses_linear =
      kind == NonlinearityKind::sum_linear_cubic || kind == NonlinearityKind::saturating;
  const bool uses_cubic = kind != NonlinearityKind::pure_linear;
  if (uses_linear && p.f0 > 0 && !(p.lambda1 > 0))
    throw InvalidNonlinearityError(std::string(to_string(kind)) + " needs lambda1 > 0");
  if (uses_cubic && p.f_inf > 0 && !(p.b > 0 && p.mu1 > 0))
    throw InvalidNonlinearityError(std::string(to_string(kind)) + " needs b > 0 and mu1 > 0");

  Nonlinearity f;
  f.kind_ = kind;
  f.params_ = p;
  if (uses_linear) f.linear_ = (p.a > 0 ? p.a : 1.0) * p.lambda1 * p.f0;
  if (kind == NonlinearityKind::pure_linear) f.linear_ = 1.0;
  if (uses_cubic) f.cubic_ = p.b * p.mu1 * p.f_inf;

  DeclaredConstants& d = f.declared_;
  d.f0 = p.a > 0 && p.lambda1 > 0 ? f.linear_ / (p.a * p.lambda1) : kNaN;
  d.f0_tilde = p.lambda1 > 0 ? f.linear_ / p.lambda1 : kNaN;
  if (uses_linear && p.a > 0) d.f0 = p.f0;
  if (uses_linear && p.a == 0) d.f0_tilde = p.f0;
  d.f_inf = kind == NonlinearityKind::pure_linear ? 0.0 : (p.b > 0 && p.mu1 > 0 ? p.f_inf : kNaN);

  HypothesisFlags& h = f.flags_;
  h.f1 = f.linear_ >= 0 && f.cubic_ >= 0 && (f.linear_ > 0 || f.cubic_ > 0);
  h.f2 = in_open_half_line(d.f0);
  h.f3 = in_open_half_line(d.f_inf);
  h.f4 = in_open_half_line(d.f0_tilde);
  return f;
}

AsymptoticsReport verify_asymptotics(const Nonlinearity& f, double tol) {
  const NonlinearityParams& p = f.params();
  const DeclaredConstants& d = f.declared();
  AsymptoticsReport report;
  const bool has_small = p.a > 0 && p.lambda1 > 0;
  report.f2 = sample_limit(has_small ? d.f0 : kNaN, {1e-2, 1e-3, 1e-4}, tol,
                           [&](double s) { return f.value(s) / (p.a * p.lambda1 * s); });
  report.f4 = sample_limit(p.lambda1 > 0 ? d.f0_tilde : kNaN, {1e-2, 1e-3, 1e-4}, tol,
                           [&](double s) { return f.value(s) / (p.lambda1 * s); });
  const bool has_large = p.b > 0 && p.mu1 > 0;
  report.f3 = sample_limit(has_large ? d.f_inf : kNaN, {1e2, 1e3, 1e4}, tol,
                           [&](double s) { return f.value(s) / (p.b * p.mu1 * s * s * s); });
  return report;
}

HForm to_h_form(const Nonlinearity& f, double lambda) {
  HForm h{f, lambda, false};
  h.small_s_condition = lambda == 0.0 || std::abs(f.linear_coefficient() - 1.0) <= 1e-12;
  return h;
}

}  // namespace kirchhoff
