#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kirchhoff/errors.hpp"
#include "kirchhoff/nonlinearity.hpp"

using namespace kirchhoff;

namespace {

NonlinearityParams context(double f0, double f_inf) {
  NonlinearityParams p;
  p.f0 = f0;
  p.f_inf = f_inf;
  p.a = 1.5;
  p.b = 0.5;
  p.lambda1 = std::numbers::pi * std::numbers::pi;
  p.mu1 = 96.0;
  return p;
}

const NonlinearityKind kAll[] = {NonlinearityKind::sum_linear_cubic, NonlinearityKind::pure_linear,
                                 NonlinearityKind::pure_cubic, NonlinearityKind::saturating};

}  // namespace

TEST_CASE("catalog formulas") {
  const auto p = context(2, 1);
  const double l = p.a * p.lambda1 * p.f0;
  const double c = p.b * p.mu1 * p.f_inf;
  const double s = 0.7;
  CHECK(make_nonlinearity(NonlinearityKind::sum_linear_cubic, p).value(s) ==
        doctest::Approx(l * s + c * s * s * s));
  CHECK(make_nonlinearity(NonlinearityKind::pure_linear, p).value(s) == s);
  CHECK(make_nonlinearity(NonlinearityKind::pure_cubic, p).value(s) == doctest::Approx(c * s * s * s));
  CHECK(make_nonlinearity(NonlinearityKind::saturating, p).value(s) ==
        doctest::Approx(l * s + c * std::pow(s, 5) / (1 + s * s)));
  for (auto kind : kAll) {
    const Nonlinearity f = make_nonlinearity(kind, p);
    CHECK(f.value(0) == 0);
    CHECK(f.value(-s) == -f.value(s));
  }
}

TEST_CASE("hypothesis flags") {
  const auto slc = make_nonlinearity(NonlinearityKind::sum_linear_cubic, context(2, 1));
  CHECK(slc.flags().f1);
  CHECK(slc.flags().f2);
  CHECK(slc.flags().f3);
  const auto lin = make_nonlinearity(NonlinearityKind::pure_linear, context(2, 1));
  CHECK_FALSE(lin.flags().f3);
  CHECK(lin.declared().f_inf == 0);
  CHECK_FALSE(make_nonlinearity(NonlinearityKind::pure_cubic, context(2, 1)).flags().f2);
}

TEST_CASE("derivative agrees with centred differences") {
  for (auto kind : kAll) {
    const Nonlinearity f = make_nonlinearity(kind, context(0.8, 1.3));
    for (double s = 1e-3; s <= 10; s *= 1.37) {
      const double h = 1e-6 * std::max(1.0, s);
      const double fd = (f.value(s + h) - f.value(s - h)) / (2 * h);
      CHECK(std::abs(fd - f.derivative(s)) <= 1e-6 * std::abs(f.derivative(s)));
    }
  }
}

TEST_CASE("(f1) positivity on sampled s") {
  for (auto kind : kAll) {
    const Nonlinearity f = make_nonlinearity(kind, context(0.8, 1.3));
    if (!f.flags().f1) continue;
    for (int k = 1; k <= 1000; ++k) CHECK(f.value(0.1 * k) * (0.1 * k) > 0);
  }
}

TEST_CASE("verify_asymptotics") {
  const auto slc = verify_asymptotics(make_nonlinearity(NonlinearityKind::sum_linear_cubic, context(2, 1)), 1e-4);
  CHECK(slc.f2.pass);
  CHECK(slc.f3.pass);
  const auto sat = verify_asymptotics(make_nonlinearity(NonlinearityKind::saturating, context(2, 1)), 1e-3);
  CHECK(sat.f2.pass);
  CHECK(sat.f3.pass);
  const auto lin = make_nonlinearity(NonlinearityKind::pure_linear, context(2, 1));
  CHECK_FALSE(verify_asymptotics(lin, 1e-3).f3.pass);
  auto wrong = lin.declared();
  wrong.f_inf = 1.0;
  const auto mis = verify_asymptotics(lin.with_declared(wrong), 1e-3);
  CHECK_FALSE(mis.f3.pass);
  CHECK(mis.f3.ratios[2] < 1e-6);
}

TEST_CASE("a = 0 reads f0 as the lambda1-relative constant") {
  auto p = context(1.0, 0.5);
  p.a = 0.0;
  const Nonlinearity f = make_nonlinearity(NonlinearityKind::sum_linear_cubic, p);
  CHECK(f.linear_coefficient() == doctest::Approx(p.lambda1));
  CHECK(f.flags().f4);
  CHECK_FALSE(f.flags().f2);
  CHECK(verify_asymptotics(f, 1e-6).f4.pass);
}

TEST_CASE("h form") {
  const auto lin = make_nonlinearity(NonlinearityKind::pure_linear, context(2, 1));
  for (double lambda : {0.0, 0.3, 7.0}) {
    const HForm h = to_h_form(lin, lambda);
    CHECK(h.small_s_condition);
    for (double s : {-2.0, 0.1, 5.0}) CHECK(h.value(s) == 0.0);
  }
  auto p = context(0, 1);
  p.f0 = 1.0 / (p.a * p.lambda1);
  const HForm h = to_h_form(make_nonlinearity(NonlinearityKind::sum_linear_cubic, p), 2.5);
  CHECK(h.small_s_condition);
  CHECK(std::abs(h.value(1e-4) / 1e-4) < 1e-3);
  CHECK_FALSE(to_h_form(make_nonlinearity(NonlinearityKind::sum_linear_cubic, context(2, 1)), 1.0)
                  .small_s_condition);
  CHECK(to_h_form(make_nonlinearity(NonlinearityKind::pure_cubic, context(2, 1)), 0.0).value(3.0) == 0.0);
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(make_nonlinearity(NonlinearityKind::sum_linear_cubic, context(-1, 1)),
                  InvalidNonlinearityError);
  auto p = context(1, 1);
  p.mu1 = 0;
  CHECK_THROWS_AS(make_nonlinearity(NonlinearityKind::pure_cubic, p), InvalidNonlinearityError);
  CHECK_THROWS_AS(nonlinearity_kind_from_string("quintic"), InvalidNonlinearityError);
  CHECK(nonlinearity_kind_from_string("saturating") == NonlinearityKind::saturating);
}
