#pragma once

#include <array>
#include <string_view>

namespace kirchhoff {

enum class NonlinearityKind { sum_linear_cubic, pure_linear, pure_cubic, saturating };

std::string_view to_string(NonlinearityKind kind);
NonlinearityKind nonlinearity_kind_from_string(std::string_view name);

/// Shape parameters plus the context constants (a, b, lambda1, mu1) the
/// asymptotic normalizations refer to. With a = 0 the f0 parameter is read as
/// the small-s constant relative to lambda1 alone.
struct NonlinearityParams {
  double f0 = 0.0;
  double f_inf = 0.0;
  double a = 1.0;
  double b = 1.0;
  double lambda1 = 0.0;
  double mu1 = 0.0;
};

struct HypothesisFlags {
  bool f1 = false;  // f(s) s > 0 for s > 0
  bool f2 = false;  // f(s) / (a lambda1 s) -> f0 in (0, inf) as s -> 0+
  bool f3 = false;  // f(s) / (b mu1 s^3) -> f_inf in (0, inf) as s -> inf
  bool f4 = false;  // f(s) / (lambda1 s) -> f0_tilde in (0, inf) as s -> 0+
};

/// Limits the catalog entry claims; NaN where the normalization is undefined.
struct DeclaredConstants {
  double f0 = 0.0;
  double f0_tilde = 0.0;
  double f_inf = 0.0;
};

/// Spatially homogeneous nonlinearity f(s), extended oddly to s < 0.
class Nonlinearity {
 public:
  NonlinearityKind kind() const { return kind_; }
  const NonlinearityParams& params() const { return params_; }
  const HypothesisFlags& flags() const { return flags_; }
  const DeclaredConstants& declared() const { return declared_; }

  double value(double s) const;
  double derivative(double s) const;
  /// f'(0).
  double linear_coefficient() const { return linear_; }
  /// Coefficient of the s^3 growth at infinity.
  double cubic_coefficient() const { return cubic_; }

  /// Copy with different declared limits (used to probe mis-declared entries).
  Nonlinearity with_declared(DeclaredConstants declared) const;

 private:
  friend Nonlinearity make_nonlinearity(NonlinearityKind, const NonlinearityParams&);

  NonlinearityKind kind_ = NonlinearityKind::pure_linear;
  NonlinearityParams params_;
  double linear_ = 0.0;
  double cubic_ = 0.0;
  HypothesisFlags flags_;
  DeclaredConstants declared_;
};

/// sum_linear_cubic: a lambda1 f0 s + b mu1 f_inf s^3
/// pure_linear:      s
/// pure_cubic:       b mu1 f_inf s^3
/// saturating:       a lambda1 f0 s + b mu1 f_inf s^5 / (1 + s^2)
/// Throws InvalidNonlinearityError for negative parameters or missing context.
Nonlinearity make_nonlinearity(NonlinearityKind kind, const NonlinearityParams& params);

struct LimitCheck {
  bool applicable = false;  // the normalization constants are defined
  double declared = 0.0;
  std::array<double, 3> samples{};
  std::array<double, 3> ratios{};
  std::array<double, 3> errors{};
  bool monotone = false;
  bool pass = false;
};

struct AsymptoticsReport {
  LimitCheck f2;
  LimitCheck f3;
  LimitCheck f4;
};

/// Samples f(s)/(a lambda1 s) and f(s)/(lambda1 s) at s = 1e-2, 1e-3, 1e-4 and
/// f(s)/(b mu1 s^3) at s = 1e2, 1e3, 1e4. A check passes when the error to the
/// declared limit is non-increasing, ends below tol, and the limit lies in (0, inf).
AsymptoticsReport verify_asymptotics(const Nonlinearity& f, double tol);

/// h(s) = lambda f(s) - lambda s.
struct HForm {
  Nonlinearity f;
  double lambda = 0.0;
  /// h(s)/s -> 0 as s -> 0, i.e. f'(0) = 1 or lambda = 0.
  bool small_s_condition = false;

  double value(double s) const { return lambda * (f.value(s) - s); }
};

HForm to_h_form(const Nonlinearity& f, double lambda);

}  // namespace kirchhoff
