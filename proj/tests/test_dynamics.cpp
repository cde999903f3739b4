#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dwave/dynamics.hpp"
#include "dwave/error.hpp"
#include "dwave/rng.hpp"
#include "oracles.hpp"

using namespace dwave;
using namespace dwave::family;

namespace {

double mode_error(ModeState a, ModeState b) { return std::abs(a.w - b.w) + std::abs(a.z - b.z); }
double mode_size(ModeState a) { return std::abs(a.w) + std::abs(a.z); }

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("integrator configuration is validated") {
    IntegratorConfig c;
    CHECK_NOTHROW(c.validate());
    c.rel_tol = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.max_step = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }

  TEST_CASE("closed form examples") {
    const ModeState x0{Complex(0.3, -1.1), Complex(2.0, 0.4)};
    CHECK(closed_form_constant(2.0, x0, 1.3, 0.0) == x0);
    const double c0 = 1.3;
    const double lambda = 2.0;
    const auto q = closed_form_constant(lambda, x0, c0, std::numbers::pi / (2 * c0 * std::sqrt(lambda)));
    CHECK(mode_error(q, {x0.z / c0, -c0 * x0.w}) < 1e-14);
  }

  TEST_CASE("closed form satisfies the mode equations under finite differences") {
    const ModeState x0{Complex(0.7, 0.2), Complex(-0.4, 1.0)};
    const double lambda = 3.0;
    const double c0 = 0.8;
    const double r = std::sqrt(lambda);
    for (double t : {0.4, 2.0, 7.5}) {
      const double h = 1e-6;
      const auto p = closed_form_constant(lambda, x0, c0, t + h);
      const auto m = closed_form_constant(lambda, x0, c0, t - h);
      const auto x = closed_form_constant(lambda, x0, c0, t);
      CHECK(std::abs((p.w - m.w) / (2 * h) - r * x.z) < 1e-7);
      CHECK(std::abs((p.z - m.z) / (2 * h) + c0 * c0 * r * x.w) < 1e-7);
    }
  }

  TEST_CASE("evolve_mode quarter period example") {
    const auto x = evolve_mode(1.0, {1.0, 0.0}, Constant{2.0}, Constant{0.0}, 0.0, std::numbers::pi / 2);
    CHECK(mode_error(x, {-1.0, 0.0}) < 1e-10);
  }

  TEST_CASE("zero data stays zero") {
    const auto x = evolve_mode(4.0, {0.0, 0.0}, PowerPerturbation{1.0, 1.0, 2.0}, ExpPerturbation{0.0, 0.5, 1.0},
                               0.0, 20.0);
    CHECK(x == ModeState{0.0, 0.0});
  }

  TEST_CASE("evolve_mode matches the closed form for constant speed") {
    const ModeState x0{Complex(0.6, -0.2), Complex(0.1, 0.9)};
    for (double lambda : {0.25, 1.0, 9.0, 100.0}) {
      for (double t : {0.5, 10.0, 100.0}) {
        const auto x = evolve_mode(lambda, x0, Constant{1.7}, Constant{0.0}, 0.0, t);
        const auto ref = closed_form_constant(lambda, x0, 1.7, t);
        CHECK(mode_error(x, ref) <= 1e-8 * mode_size(ref));
      }
    }
  }

  TEST_CASE("variable speed agrees with a fine fixed-step RK4 reference") {
    const SpeedProfile c = PowerPerturbation{1.0, 1.0, 2.0};
    const Profile b = ExpPerturbation{0.0, 0.3, 1.0};
    const ModeState x0{1.0, 0.0};
    const auto x = evolve_mode(1.0, x0, c, b, 0.0, 10.0);
    const auto coarse = oracle::rk4_mode(1.0, x0, c, b, 0.0, 10.0, 2e-3);
    const auto fine = oracle::rk4_mode(1.0, x0, c, b, 0.0, 10.0, 1e-3);
    // Richardson extrapolation of the fourth-order reference.
    const ModeState ref{fine.w + (fine.w - coarse.w) / 15.0, fine.z + (fine.z - coarse.z) / 15.0};
    CHECK(mode_error(x, ref) < 1e-9);
  }

  TEST_CASE("jumps in the speed are resolved exactly at the breakpoint") {
    const SpeedProfile c = StepFunction{{1.0}, {1.0, 2.0}};
    const ModeState x0{Complex(0.5, 0.1), Complex(-0.3, 0.8)};
    const auto x = evolve_mode(2.0, x0, c, Constant{0.0}, 0.0, 3.0);
    const auto mid = closed_form_constant(2.0, x0, 1.0, 1.0);
    const auto ref = closed_form_constant(2.0, mid, 2.0, 2.0);
    CHECK(mode_error(x, ref) < 1e-9);
  }

  TEST_CASE("evolve equals per-mode evolve_mode bitwise") {
    const Spectrum s = Spectrum::dirichlet_interval(3, 2.0);
    const StateVector x0 = random_state(4, 3);
    const SpeedProfile c = PiecewiseLinear{{0.0, 1.0, 2.0}, {2.0, 3.0, 2.0}};
    const Profile b = PowerPerturbation{0.0, 0.5, 2.0};
    const std::vector<double> times{0.0, 5.0};
    const Trajectory tr = evolve(s, x0, c, b, times);
    for (std::size_t k = 0; k < 3; ++k) {
      const auto m = evolve_mode(s.eigenvalue(k), {x0.first()[k], x0.second()[k]}, c, b, 0.0, 5.0);
      CHECK(m.w == tr.states[1].first()[k]);
      CHECK(m.z == tr.states[1].second()[k]);
    }
    const Spectrum one(std::vector<double>{s.eigenvalue(1)});
    const Trajectory single = evolve(one, StateVector({x0.first()[1]}, {x0.second()[1]}), c, b, times);
    CHECK(single.states[1].first()[0] == tr.states[1].first()[1]);
  }

  TEST_CASE("trajectories are linear in the initial data") {
    const Spectrum s = Spectrum::dirichlet_interval(4, 3.0);
    const SpeedProfile c = ExpPerturbation{1.0, 0.5, 0.7};
    const Profile b = PowerPerturbation{0.0, -0.2, 2.0};
    const std::vector<double> times{0.0, 3.0, 30.0};
    const StateVector x = random_state(1, 4);
    const StateVector y = random_state(2, 4);
    const Complex alpha(0.3, -1.7);
    const Trajectory tx = evolve(s, x, c, b, times);
    const Trajectory ty = evolve(s, y, c, b, times);
    const Trajectory ts = evolve(s, alpha * x, c, b, times);
    const Trajectory tsum = evolve(s, x + y, c, b, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      CHECK(norm(ts.states[i] - alpha * tx.states[i]) <= 1e-12 * norm(ts.states[i]));
      CHECK(norm(tsum.states[i] - (tx.states[i] + ty.states[i])) <= 1e-11 * norm(tsum.states[i]));
    }
  }

  TEST_CASE("results do not depend on the thread count") {
    const Spectrum s = Spectrum::dirichlet_interval(5, 1.0);
    const StateVector x = random_state(9, 5);
    const std::vector<double> times{0.0, 1.0, 2.0};
    const SpeedProfile c = PowerPerturbation{1.0, 1.0, 1.0};
    const Trajectory a = evolve(s, x, c, Constant{0.0}, times, {}, 1);
    const Trajectory b = evolve(s, x, c, Constant{0.0}, times, {}, 4);
    CHECK(a.states == b.states);
  }

  TEST_CASE("evolve validates its inputs") {
    const Spectrum s(std::vector<double>{1.0});
    const StateVector x({1.0}, {0.0});
    CHECK_THROWS_AS(evolve(s, x, Constant{1.0}, Constant{0.0}, std::vector<double>{0.5, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(evolve(s, x, Constant{1.0}, Constant{0.0}, std::vector<double>{0.0, 2.0, 1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(evolve(s, StateVector::zeros(2), Constant{1.0}, Constant{0.0}, std::vector<double>{0.0, 1.0}),
                    std::invalid_argument);
  }

  TEST_CASE("integrator failures surface as numerical errors with mode context") {
    // Huge damping makes the system too stiff for the step-size floor.
    const Spectrum s(std::vector<double>{1.0});
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-14;
    cfg.abs_tol = 1e-300;
    try {
      evolve(s, StateVector({1.0}, {1.0}), Constant{1.0}, Constant{-1e300}, std::vector<double>{0.0, 1.0}, cfg);
      FAIL("expected a numerical failure");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("mode 0") != std::string::npos);
    }
  }

  TEST_CASE("energy examples") {
    CHECK(energy(StateVector::zeros(3), 2.0) == 0.0);
    CHECK(energy(StateVector({1.0}, {0.0}), 2.0) == doctest::Approx(2.0));
    const ModeState x0{Complex(0.2, 0.5), Complex(1.0, -0.3)};
    const double f0 = energy(StateVector({x0.w}, {x0.z}), 1.4);
    for (double t : {1.0, 17.0, 400.0}) {
      const auto x = closed_form_constant(5.0, x0, 1.4, t);
      CHECK(energy(StateVector({x.w}, {x.z}), 1.4) == doctest::Approx(f0).epsilon(1e-10));
    }
  }

  TEST_CASE("energy is conserved for constant speed without damping") {
    const Spectrum s = Spectrum::dirichlet_interval(3, 1.0);
    const StateVector x = random_state(12, 3);
    std::vector<double> times;
    for (int i = 0; i <= 100; ++i) times.push_back(10.0 * i);
    const Trajectory tr = evolve(s, x, Constant{0.9}, Constant{0.0}, times);
    const double f0 = energy(x, 0.9);
    for (const auto& st : tr.states) CHECK(std::abs(energy(st, 0.9) - f0) <= 1e-9 * f0);
  }

  TEST_CASE("energy decays monotonically under non-negative damping") {
    const Spectrum s = Spectrum::dirichlet_interval(3, 1.0);
    const StateVector x = random_state(13, 3);
    std::vector<double> times;
    for (int i = 0; i <= 400; ++i) times.push_back(0.05 * i);
    const Trajectory tr = evolve(s, x, Constant{1.1}, StepFunction{{5.0}, {0.4, 0.0}}, times);
    for (std::size_t i = 1; i < times.size(); ++i)
      CHECK(energy(tr.states[i], 1.1) <= energy(tr.states[i - 1], 1.1) * (1.0 + 1e-10));
  }

  TEST_CASE("energy lower bound examples") {
    CHECK(energy_lower_bound(3.0, Constant{2.0}, Constant{0.0}) == 3.0);
    CHECK(energy_lower_bound(3.0, Constant{1.0}, ExpPerturbation{0.0, 1.0, 1.0}) ==
          doctest::Approx(3.0 * std::exp(-2.0)));
    // Var = 1, c0 = 1: extra factor e^{-2}.
    CHECK(energy_lower_bound(1.0, PowerPerturbation{1.0, 1.0, 2.0}, Constant{0.0}) ==
          doctest::Approx(std::exp(-2.0)));
    CHECK_THROWS_AS(energy_lower_bound(-1.0, Constant{1.0}, Constant{0.0}), std::invalid_argument);
  }

  TEST_CASE("energy stays above the lower bound along simulated trajectories") {
    const Spectrum s = Spectrum::dirichlet_interval(3, 2.0);
    const std::vector<std::pair<SpeedProfile, Profile>> cases{
        {StepFunction{{1.0, 2.0}, {1.0, 0.5, 1.5}}, PowerPerturbation{0.0, 0.3, 2.0}},
        {PiecewiseLinear{{0.0, 3.0}, {2.0, 0.7}}, ExpPerturbation{0.0, -0.2, 1.0}},
        {PowerPerturbation{1.0, 1.0, 1.0}, Constant{0.0}}};
    std::vector<double> times;
    for (int i = 0; i <= 400; ++i) times.push_back(0.1 * i);
    for (std::size_t j = 0; j < cases.size(); ++j) {
      const auto& [c, b] = cases[j];
      const StateVector x = random_state(20 + j, 3);
      const Trajectory tr = evolve(s, x, c, b, times);
      const double bound = energy_lower_bound(energy(x, c.eval(0.0)), c, b);
      for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(energy(tr.states[i], c.eval(times[i])) >= bound * (1.0 - 1e-8));
    }
  }

  TEST_CASE("gronwall constant and tail bound") {
    CHECK(gronwall_constant(Constant{1.0}) == doctest::Approx(1.0));
    // C = 2, c0 = 1: sqrt2 * 2 * (1/sqrt2) * 2.
    CHECK(gronwall_constant(PowerPerturbation{1.0, 1.0, 2.0}) == doctest::Approx(4.0));
    CHECK(gronwall_tail_bound(2.0, Constant{1.5}, Constant{0.0}, 0.0, kInfinity) == 0.0);
    const SpeedProfile c = PowerPerturbation{1.0, 0.5, 1.5};
    const Profile b = ExpPerturbation{0.0, 0.2, 1.0};
    double prev = 0.0;
    for (double u : {1.0, 2.0, 5.0, 50.0, kInfinity}) {
      const double g = gronwall_tail_bound(1.0, c, b, 1.0, u);
      CHECK(g >= prev);
      prev = g;
    }
    CHECK(gronwall_tail_bound(0.0, c, b, 0.0, 5.0) == 0.0);
  }
}
