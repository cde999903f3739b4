#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dwave/coefficients.hpp"
#include "oracles.hpp"

using namespace dwave;
using namespace dwave::family;

namespace {

// Brute-force variation over a uniform partition (plus the interval ends).
double grid_variation(const Profile& p, double s, double t, double h) {
  double total = 0.0;
  double prev = p.eval(s);
  for (double x = s + h; x < t + 0.5 * h; x += h) {
    const double v = p.eval(std::min(x, t));
    total += std::abs(v - prev);
    prev = v;
  }
  return total;
}

}  // namespace

TEST_SUITE("coefficients") {
  TEST_CASE("evaluation examples") {
    CHECK(Profile(Constant{2.0}).eval(7.0) == 2.0);
    const Profile p = PowerPerturbation{1.0, 1.0, 2.0};
    CHECK(p.eval(0.0) == 2.0);
    CHECK(p.eval(1.0) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(Profile(ExpPerturbation{1.0, 0.5, 2.0}).eval(1.0) == doctest::Approx(1.0 + 0.5 * std::exp(-2.0)));
  }

  TEST_CASE("piecewise linear interpolates and extends constantly") {
    const Profile p = PiecewiseLinear{{0.0, 1.0, 2.0}, {2.0, 3.0, 2.0}};
    CHECK(p.eval(0.5) == doctest::Approx(2.5));
    CHECK(p.eval(1.5) == doctest::Approx(2.5));
    CHECK(p.eval(10.0) == 2.0);
    CHECK(p.limit() == 2.0);
    CHECK(p.supremum() == 3.0);
    CHECK(p.infimum() == 2.0);
  }

  TEST_CASE("step functions are right-continuous") {
    const Profile p = StepFunction{{1.0, 3.0}, {1.0, 2.0, 0.5}};
    CHECK(p.eval(0.999) == 1.0);
    CHECK(p.eval(1.0) == 2.0);
    CHECK(p.eval(3.0) == 0.5);
    CHECK(p.limit() == 0.5);
  }

  TEST_CASE("invalid profiles are rejected") {
    CHECK_THROWS_AS(Profile(PowerPerturbation{1.0, 1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(Profile(ExpPerturbation{1.0, 1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Profile(PiecewiseLinear{{0.0, 0.0}, {1.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Profile(StepFunction{{1.0}, {1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Profile(StepFunction{{0.0}, {1.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Profile(Constant{INFINITY}), std::invalid_argument);
    CHECK_THROWS_AS(SpeedProfile(Constant{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(SpeedProfile(PowerPerturbation{1.0, -1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(SpeedProfile(StepFunction{{2.0}, {1.0, -0.1}}), std::invalid_argument);
    CHECK_NOTHROW(SpeedProfile(PowerPerturbation{1.0, -0.5, 2.0}));
  }

  TEST_CASE("total variation examples") {
    CHECK(Profile(Constant{3.0}).total_variation(0.0, 10.0) == 0.0);
    const Profile ramp = PiecewiseLinear{{0.0, 1.0, 2.0}, {2.0, 3.0, 2.0}};
    CHECK(ramp.total_variation(0.0, 2.0) == doctest::Approx(2.0));
    CHECK(grid_variation(ramp, 0.0, 2.0, 1e-3) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(Profile(PowerPerturbation{1.0, 1.0, 2.0}).total_variation(0.0, kInfinity) == doctest::Approx(1.0));
    CHECK(Profile(ExpPerturbation{1.0, -0.3, 1.0}).total_variation(0.0, kInfinity) == doctest::Approx(0.3));
  }

  TEST_CASE("step variation counts jumps in (s, t], outer variation also at s") {
    const Profile p = StepFunction{{1.0, 2.0}, {1.0, 3.0, 2.5}};
    CHECK(p.total_variation(0.0, 1.0) == doctest::Approx(2.0));
    CHECK(p.total_variation(1.0, 1.5) == 0.0);
    CHECK(p.outer_variation(1.0, 1.5) == doctest::Approx(2.0));
    CHECK(p.total_variation(0.0, kInfinity) == doctest::Approx(2.5));
  }

  TEST_CASE("total variation is additive and dominates increments") {
    const std::vector<Profile> profiles{PiecewiseLinear{{0.0, 1.0, 2.5, 4.0}, {1.0, 2.0, 0.5, 1.5}},
                                        PowerPerturbation{1.0, -0.7, 1.5}, ExpPerturbation{2.0, 1.0, 0.3},
                                        StepFunction{{0.5, 1.0, 3.0}, {1.0, 2.0, 0.5, 1.2}}};
    for (const Profile& p : profiles) {
      for (double s : {0.0, 0.7, 2.2}) {
        for (double t : {s, s + 0.4, s + 1.9}) {
          for (double u : {t, t + 0.3, t + 5.0}) {
            CAPTURE(p.family_name());
            CHECK(p.total_variation(s, u) ==
                  doctest::Approx(p.total_variation(s, t) + p.total_variation(t, u)).epsilon(1e-13));
            CHECK(p.total_variation(s, u) >= std::abs(p.eval(u) - p.eval(s)) - 1e-15);
          }
        }
      }
      // The brute-force partition sum never exceeds the closed form and approaches it.
      const double grid = grid_variation(p, 0.0, 5.0, 1e-3);
      CHECK(grid <= p.total_variation(0.0, 5.0) + 1e-12);
      CHECK(grid == doctest::Approx(p.total_variation(0.0, 5.0)).epsilon(1e-3));
    }
  }

  TEST_CASE("antiderivative examples") {
    CHECK(Profile(Constant{2.0}).antiderivative(5.0) == doctest::Approx(10.0));
    CHECK(Profile(PowerPerturbation{1.0, 1.0, 2.0}).antiderivative(1.0) == doctest::Approx(1.5).epsilon(1e-15));
    const Profile e = ExpPerturbation{1.0, 1.0, 1.0};
    for (double t : {0.5, 3.0, 17.0}) {
      const double ref = oracle::simpson([&](double s) { return e.eval(s); }, 0.0, t, 1e-13);
      CHECK(std::abs(e.antiderivative(t) - ref) <= 1e-10);
    }
  }

  TEST_CASE("antiderivatives of piecewise families match quadrature") {
    const Profile pl = PiecewiseLinear{{0.0, 1.0, 2.5, 4.0}, {1.0, 2.0, 0.5, 1.5}};
    const Profile st = StepFunction{{0.5, 1.0, 3.0}, {1.0, 2.0, 0.5, 1.2}};
    for (double t : {0.3, 1.0, 2.7, 9.0}) {
      double ref_pl = 0.0;
      double ref_st = 0.0;
      double prev = 0.0;
      for (double cut : {0.5, 1.0, 2.5, 3.0, 4.0, t}) {
        if (cut <= prev || cut > t) continue;
        ref_pl += oracle::simpson([&](double s) { return pl.eval(s); }, prev, cut, 1e-14);
        ref_st += oracle::simpson([&](double s) { return st.eval(s); }, prev, cut, 1e-14);
        prev = cut;
      }
      CHECK(pl.antiderivative(t) == doctest::Approx(ref_pl).epsilon(1e-12));
      CHECK(st.antiderivative(t) == doctest::Approx(ref_st).epsilon(1e-12));
    }
  }

  TEST_CASE("drift examples") {
    CHECK(Profile(Constant{1.5}).drift(3.0) == 0.0);
    const Profile p2 = PowerPerturbation{1.0, 1.0, 2.0};
    CHECK(p2.drift(1e12) == doctest::Approx(1.0).epsilon(1e-11));
    const Profile p1 = PowerPerturbation{1.0, 1.0, 1.0};
    CHECK(p1.drift(std::numbers::e - 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    // No cancellation against c_inf * t at large times.
    const Profile big = PowerPerturbation{5.0, 1e-3, 2.0};
    CHECK(big.drift(1e8) == doctest::Approx(1e-3 * (1.0 - 1.0 / (1.0 + 1e8))).epsilon(1e-14));
  }

  TEST_CASE("drift classification examples") {
    const auto p2 = Profile(PowerPerturbation{1.0, 1.0, 2.0}).classify_drift();
    CHECK(p2.kind == DriftKind::Convergent);
    CHECK(p2.limit == doctest::Approx(1.0));
    CHECK(Profile(PowerPerturbation{1.0, 1.0, 1.0}).classify_drift().kind == DriftKind::DivergentToInfinity);
    CHECK(Profile(PowerPerturbation{1.0, -0.5, 0.5}).classify_drift().kind == DriftKind::DivergentToMinusInfinity);
    CHECK(Profile(PowerPerturbation{1.0, 0.0, 0.5}).classify_drift().kind == DriftKind::Convergent);
    CHECK(Profile(ExpPerturbation{1.0, 0.6, 2.0}).classify_drift().limit == doctest::Approx(0.3));

    const Profile pl = PiecewiseLinear{{0.0, 1.0, 2.0}, {2.0, 3.0, 2.0}};
    const auto d = pl.classify_drift();
    CHECK(d.kind == DriftKind::Convergent);
    const double area = oracle::simpson([&](double s) { return pl.eval(s) - 2.0; }, 0.0, 1.0, 1e-14) +
                        oracle::simpson([&](double s) { return pl.eval(s) - 2.0; }, 1.0, 2.0, 1e-14);
    CHECK(d.limit == doctest::Approx(area).epsilon(1e-13));
    CHECK_FALSE(d.certificate.empty());
  }

  TEST_CASE("drift kind names round-trip") {
    for (DriftKind k : {DriftKind::Convergent, DriftKind::DivergentToInfinity, DriftKind::DivergentToMinusInfinity,
                        DriftKind::Indeterminate})
      CHECK(drift_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(drift_kind_from_string("sideways"), std::invalid_argument);
  }

  TEST_CASE("drift tail is bounded by the L1 tail of c - c_inf") {
    const Profile p = PowerPerturbation{1.0, -0.8, 1.7};
    const double f_inf = p.classify_drift().limit;
    for (double t : {0.0, 1.0, 10.0, 1e3}) {
      const double tail = 0.8 * std::pow(1.0 + t, -0.7) / 0.7;
      CHECK(std::abs(p.drift(t) - f_inf) <= tail * (1.0 + 1e-13));
    }
  }

  TEST_CASE("L1 norms") {
    CHECK(Profile(Constant{0.0}).l1_norm(0.0, kInfinity) == 0.0);
    CHECK(Profile(ExpPerturbation{0.0, 1.0, 1.0}).l1_norm(0.0, kInfinity) == doctest::Approx(1.0));
    CHECK(Profile(PowerPerturbation{0.0, 1.0, 2.0}).l1_norm(0.0, kInfinity) == doctest::Approx(1.0));
    CHECK_THROWS_AS(Profile(PowerPerturbation{0.0, 1.0, 1.0}).l1_norm(0.0, kInfinity), std::domain_error);
    CHECK_THROWS_AS(Profile(Constant{0.1}).l1_norm(0.0, kInfinity), std::domain_error);
    // Sign change inside the interval.
    const Profile pl = PiecewiseLinear{{0.0, 2.0}, {-1.0, 1.0}};
    CHECK(pl.l1_norm(0.0, 2.0) == doctest::Approx(1.0));
    const Profile e = ExpPerturbation{-0.5, 1.0, 1.0};
    const double ref = oracle::simpson([&](double s) { return std::abs(e.eval(s)); }, 0.0, std::log(2.0), 1e-14) +
                       oracle::simpson([&](double s) { return std::abs(e.eval(s)); }, std::log(2.0), 5.0, 1e-14);
    CHECK(e.l1_norm(0.0, 5.0) == doctest::Approx(ref).epsilon(1e-12));
  }

  TEST_CASE("breakpoints list the kinks and jumps") {
    CHECK(Profile(PiecewiseLinear{{0.0, 1.0, 2.0}, {1.0, 2.0, 1.0}}).breakpoints() == std::vector<double>{1.0, 2.0});
    CHECK(Profile(StepFunction{{0.5}, {1.0, 2.0}}).breakpoints() == std::vector<double>{0.5});
    CHECK(Profile(PowerPerturbation{1.0, 1.0, 2.0}).breakpoints().empty());
  }

  TEST_CASE("mollifier kernel has unit mass and the right derivative") {
    CHECK(oracle::simpson(mollifier_kernel, -1.0, 1.0, 1e-14) == doctest::Approx(1.0).epsilon(1e-13));
    for (double x : {-0.7, -0.1, 0.3, 0.9}) {
      const double h = 1e-6;
      const double fd = (mollifier_kernel(x + h) - mollifier_kernel(x - h)) / (2 * h);
      CHECK(mollifier_kernel_derivative(x) == doctest::Approx(fd).epsilon(1e-8));
    }
    CHECK(mollifier_kernel(1.5) == 0.0);
  }

  TEST_CASE("mollified constant stays constant") {
    for (double delta : {1.0, 0.1, 0.01}) {
      const MollifiedProfile m(Constant{2.0}, delta);
      for (double t : {0.0, 0.005, 0.5, 10.0}) {
        CHECK(std::abs(m.eval(t) - 2.0) <= 1e-13);
        CHECK(std::abs(m.derivative(t)) < 1e-12);
      }
    }
    CHECK_THROWS_AS(mollify(Constant{1.0}, 0.0), std::invalid_argument);
  }

  TEST_CASE("mollified step: distance and derivative bounds") {
    const Profile step = StepFunction{{1.0}, {1.0, 2.0}};
    const MollifiedProfile m(step, 0.25);
    auto gap = [&](double t) { return std::abs(step.eval(t) - m.eval(t)); };
    const double distance = oracle::simpson(gap, 0.0, 1.0, 1e-13) + oracle::simpson(gap, 1.0, 2.0, 1e-13);
    CHECK(distance <= 0.25);
    CHECK(distance > 0.0);
    auto slope = [&](double t) { return std::abs(m.derivative(t)); };
    const double total = oracle::simpson(slope, 0.0, 0.75, 1e-13) + oracle::simpson(slope, 0.75, 1.25, 1e-13) +
                         oracle::simpson(slope, 1.25, 2.0, 1e-13);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("mollified derivative matches finite differences of the mollified value") {
    const Profile pl = PiecewiseLinear{{0.0, 1.0, 2.5}, {1.0, 2.0, 0.5}};
    const MollifiedProfile m(pl, 0.3);
    for (double t : {0.1, 0.9, 1.2, 2.4, 2.9}) {
      const double h = 1e-5;
      CHECK(m.derivative(t) == doctest::Approx((m.eval(t + h) - m.eval(t - h)) / (2 * h)).epsilon(1e-7));
    }
  }
}
