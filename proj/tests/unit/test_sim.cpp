#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "imtrack/error.hpp"
#include "imtrack/rate.hpp"
#include "imtrack/sim.hpp"
#include "imtrack/synth.hpp"
#include "oracles.hpp"

using namespace imtrack;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

const std::vector<std::vector<double>> kCubic{{0.0}, {1.0}, {0.0}, {-1.0 / 3.0}};

}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("optimum_at") {
    const auto c = QuadraticCostSpec::diagonal({1.0}, {{2.5}});
    CHECK(optimum_at(c, 0)(0) == 2.5);
    CHECK(optimum_at(c, 40)(0) == 2.5);
    CHECK(optimum_at(QuadraticCostSpec::diagonal({1.0}, {{0.0}, {1.0}}), 7)(0) == 7.0);
    CHECK(optimum_at(QuadraticCostSpec::diagonal({1.0}, kCubic), 2)(0) == doctest::Approx(-2.0 / 3.0));
    CHECK_THROWS_AS(optimum_at(c, -1), Error);
  }

  TEST_CASE("gradient") {
    const auto s = QuadraticCostSpec::diagonal({3.0, 3.0}, {{1.0, 1.0}, {0.5, -0.5}});
    CHECK(gradient(s, optimum_at(s, 4), 4).norm() == 0.0);
    const Eigen::VectorXd x = optimum_at(s, 2) + Eigen::Vector2d(1.0, -2.0);
    const Eigen::VectorXd g = gradient(s, x, 2);
    CHECK(g(0) == doctest::Approx(3.0));
    CHECK(g(1) == doctest::Approx(-6.0));
    CHECK(code_of([&] { gradient(s, Eigen::VectorXd::Zero(3), 0); }) == ErrorCode::DimensionMismatch);
  }

  TEST_CASE("gradient matches finite differences of the cost") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> N;
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd B(3, 3);
      for (int i = 0; i < 9; ++i) B(i / 3, i % 3) = N(rng);
      const Eigen::MatrixXd delta = B * B.transpose() + Eigen::MatrixXd::Identity(3, 3);
      const auto s = QuadraticCostSpec::full(delta, {{N(rng), N(rng), N(rng)}, {N(rng), N(rng), N(rng)}}, 2.0);
      Eigen::VectorXd x(3);
      for (int i = 0; i < 3; ++i) x(i) = N(rng);
      const Eigen::VectorXd g = gradient(s, x, 3);
      for (int i = 0; i < 3; ++i) {
        const double fd = testing::central_difference(
            [&](double v) {
              Eigen::VectorXd y = x;
              y(i) = v;
              return cost_value(s, y, 3);
            },
            x(i), 1e-5);
        CHECK(std::abs(fd - g(i)) <= 1e-6 * std::max(1.0, std::abs(g(i))));
      }
    }
  }

  TEST_CASE("cost offset never reaches the gradient") {
    const auto a = QuadraticCostSpec::diagonal({2.0}, {{1.0}}, 0.0);
    const auto b = QuadraticCostSpec::diagonal({2.0}, {{1.0}}, 5.0);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 3.0);
    CHECK(cost_value(b, x, 0) - cost_value(a, x, 0) == 5.0);
    CHECK(gradient(a, x, 0) == gradient(b, x, 0));
  }

  TEST_CASE("check_spec") {
    CHECK_NOTHROW(check_spec(QuadraticCostSpec::diagonal({1.0, 9.0}, {{0.0, 0.0}}), 1.0, 9.0));
    CHECK(code_of([] { check_spec(QuadraticCostSpec::diagonal({0.5}, {{0.0}}), 1.0, 9.0); }) == ErrorCode::BadSector);
    CHECK(code_of([] { check_spec(QuadraticCostSpec::diagonal({10.0}, {{0.0}}), 1.0, 9.0); }) == ErrorCode::BadSector);
    CHECK(code_of([] { check_spec(QuadraticCostSpec::diagonal({2.0}, {{0.0, 1.0}}), 1.0, 9.0); }) ==
          ErrorCode::DimensionMismatch);
    Eigen::MatrixXd asym(2, 2);
    asym << 2.0, 0.5, 0.0, 2.0;
    CHECK(code_of([&] { check_spec(QuadraticCostSpec::full(asym, {{0.0, 0.0}}), 1.0, 9.0); }) ==
          ErrorCode::InvalidArgument);
  }

  TEST_CASE("gradient_descent_params") {
    CHECK(gradient_descent_params(1.0, 9.0).alpha[0] == doctest::Approx(0.2));
    CHECK(gradient_descent_params(1.0, 1.0).alpha[0] == 1.0);
    CHECK(gradient_descent_params(1.0, 5.0).alpha[0] == doctest::Approx(1.0 / 3.0));
    CHECK(gradient_descent_params(1.0, 5.0).k == 0);
  }

  TEST_CASE("run: fixed point and heavy ball rate") {
    const AlgorithmParams gd = gradient_descent_params(1.0, 9.0);
    const auto c = QuadraticCostSpec::diagonal({4.0}, {{1.5}});
    const TrajectoryTrace still = run(gd, c, 50, default_init(gd, c, Eigen::VectorXd::Zero(1)));
    for (double e : still.errors) CHECK(e == 0.0);
    CHECK(still.converged_to_floor);
    CHECK_FALSE(still.fitted_rate.has_value());

    const AlgorithmParams hb = heavy_ball_params(1.0, 9.0);
    const auto s = QuadraticCostSpec::diagonal({1.0, 9.0}, {{0.3, -0.2}});
    const TrajectoryTrace tr = run(hb, s, 120, default_init(hb, s));
    REQUIRE(tr.fitted_rate.has_value());
    CHECK(std::abs(*tr.fitted_rate - 0.5) <= 0.05);
    CHECK(tr.times.size() == 121);
    CHECK(tr.iterates.size() == 121);
  }

  TEST_CASE("run: optimal design on the cubic trajectory") {
    const AlgorithmParams p = synthesize(1.0, 5.0, 4).params;
    const auto s = QuadraticCostSpec::diagonal({1.0}, kCubic);
    const TrajectoryTrace tr = run(p, s, 300, default_init(p, s));
    CHECK(tr.steady_state_error < 1e-8);
    REQUIRE(tr.fitted_rate.has_value());
    CHECK(std::abs(*tr.fitted_rate - 0.786151) <= 0.05);
  }

  TEST_CASE("run matches the recursion in original coordinates") {
    const auto check = [](const AlgorithmParams& p, const QuadraticCostSpec& s, int T) {
      const auto init = default_init(p, s);
      const TrajectoryTrace tr = run(p, s, T, init);
      const auto direct = testing::simulate_original(p, s, T, init);
      double worst = 0.0;
      for (int t = 0; t <= T; ++t)
        for (int d = 0; d < s.p; ++d) {
          const double x = static_cast<double>(direct[t][d]);
          worst = std::max(worst, std::abs(tr.iterates[t](d) - x) / std::max(1.0, std::abs(x)));
        }
      CHECK(worst <= 1e-12);
    };
    check(gradient_descent_params(1.0, 5.0), QuadraticCostSpec::diagonal({1.0}, kCubic), 200);
    check(heavy_ball_params(1.0, 9.0), QuadraticCostSpec::diagonal({1.0, 9.0}, {{1.0, 0.0}, {0.5, 1.0}}), 150);
    check(synthesize(1.0, 5.0, 2).params,
          QuadraticCostSpec::diagonal({2.0, 4.0}, {{0.0, 1.0}, {1.0, 0.0}, {0.1, 0.2}}), 150);
    AlgorithmParams custom;
    custom.k = 2;
    custom.alpha = {0.1, 0.05, 0.02};
    custom.beta = {0.3, -0.1};
    custom.m = 1.0;
    custom.L = 5.0;
    check(custom, QuadraticCostSpec::diagonal({1.0, 5.0}, {{1.0, 1.0}, {-0.5, 0.25}}), 150);
  }

  TEST_CASE("run_shifted is the original run seen from the optimum") {
    const auto n1 = QuadraticCostSpec::diagonal({2.0}, {{3.0}});
    const AlgorithmParams hb = heavy_ball_params(1.0, 9.0);
    const TrajectoryTrace a = run(hb, n1, 60, default_init(hb, n1));
    const TrajectoryTrace b = run_shifted(hb, n1, 60, default_init(hb, n1));
    CHECK(b.shifted);
    CHECK_FALSE(a.shifted);
    for (int t = 0; t <= 60; ++t) CHECK((a.iterates[t] - b.iterates[t] - b.optima[t]).norm() <= 1e-12);

    const AlgorithmParams p = synthesize(1.0, 5.0, 2).params;
    const auto ramp = QuadraticCostSpec::diagonal({1.0}, {{0.0}, {1.0}});
    const TrajectoryTrace c = run(p, ramp, 200, default_init(p, ramp));
    const TrajectoryTrace d = run_shifted(p, ramp, 200, default_init(p, ramp));
    double worst = 0.0;
    for (int t = 0; t <= 200; ++t) worst = std::max(worst, (c.iterates[t] - d.iterates[t] - d.optima[t]).cwiseAbs().maxCoeff());
    CHECK(worst <= 1e-9);

    CHECK(code_of([&] { run_shifted(hb, ramp, 50, default_init(hb, ramp)); }) == ErrorCode::Condition1Violated);
  }

  TEST_CASE("steady state of gradient descent on a ramp") {
    const AlgorithmParams gd = gradient_descent_params(1.0, 5.0);
    const auto ramp = QuadraticCostSpec::diagonal({1.0}, {{0.0}, {1.0}});
    const TrajectoryTrace tr = run(gd, ramp, 200, default_init(gd, ramp));
    // e(t+1) = (1 - a) e(t) - 1 settles at -1/a
    CHECK(steady_state_error(tr, 20) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(tr.errors[150] - tr.errors[200]) <= 1e-12);
    CHECK(std::abs(testing::gd_asymptote(gd.alpha[0], {0.0, 1.0}, 200)) == doctest::Approx(3.0));
  }

  TEST_CASE("gradient descent on the cubic follows its polynomial asymptote") {
    const AlgorithmParams gd = gradient_descent_params(1.0, 5.0);
    const auto s = QuadraticCostSpec::diagonal({1.0}, kCubic);
    const TrajectoryTrace tr = run(gd, s, 300, default_init(gd, s));
    for (int t : {200, 250, 300}) {
      const double expected = std::abs(testing::gd_asymptote(gd.alpha[0], {0.0, 1.0, 0.0, -1.0 / 3.0}, t));
      CHECK(tr.errors[t] == doctest::Approx(expected).epsilon(1e-9));
    }
  }

  TEST_CASE("an order-n design leaves a plateau on an order n+1 trajectory") {
    for (int n = 1; n <= 3; ++n) {
      const AlgorithmParams p = synthesize(1.0, 5.0, n).params;
      std::vector<std::vector<double>> exact(n, {0.0}), over(n + 1, {0.0});
      exact.back() = {0.5};
      over.back() = {0.5};
      const auto a = QuadraticCostSpec::diagonal({2.0}, exact);
      const auto b = QuadraticCostSpec::diagonal({2.0}, over);
      CHECK(run(p, a, 300, default_init(p, a)).steady_state_error < 1e-8);
      const TrajectoryTrace tb = run(p, b, 300, default_init(p, b));
      CHECK(tb.steady_state_error > 1e-3);
      CHECK(std::abs(tb.errors[300] - tb.errors[250]) <= 1e-9 * tb.errors[300]);
    }
  }

  TEST_CASE("fitted rate agrees with the worst-case rate") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (const AlgorithmParams& p : {heavy_ball_params(1.0, 9.0), synthesize(1.0, 9.0, 2).params}) {
      const RateReport r = sup_rate(build_transfer(p), 1.0, 9.0);
      double best = 0.0;
      for (int i = 0; i < 10; ++i) {
        const auto s = QuadraticCostSpec::diagonal({r.argmax_lambda, 1.0 + 8.0 * U(rng)}, {{U(rng), U(rng)}});
        const TrajectoryTrace tr = run(p, s, 200, default_init(p, s));
        REQUIRE(tr.fitted_rate.has_value());
        CHECK(*tr.fitted_rate <= r.sup_rate + 0.05);
        best = std::max(best, *tr.fitted_rate);
      }
      CHECK(best >= r.sup_rate - 0.05);
    }
  }

  TEST_CASE("divergence is reported with its step") {
    AlgorithmParams p = gradient_descent_params(1.0, 9.0);
    p.alpha[0] = 0.5;
    const auto s = QuadraticCostSpec::diagonal({9.0}, {{0.0}});
    try {
      run(p, s, 100, default_init(p, s));
      FAIL("expected Divergence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Divergence);
      CHECK(std::string(e.what()).find("step 23") != std::string::npos);
    }
  }

  TEST_CASE("run input checks") {
    const AlgorithmParams hb = heavy_ball_params(1.0, 9.0);
    const auto s = QuadraticCostSpec::diagonal({1.0}, {{0.0}});
    CHECK(code_of([&] { run(hb, s, 1, default_init(hb, s)); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { run(hb, s, 10, {Eigen::VectorXd::Zero(1)}); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { run(hb, s, 10, {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)}); }) ==
          ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { default_init(hb, s, Eigen::VectorXd::Zero(3)); }) == ErrorCode::DimensionMismatch);
    const auto wide = QuadraticCostSpec::diagonal({20.0}, {{0.0}});
    CHECK(code_of([&] { run(hb, wide, 10, default_init(hb, wide)); }) == ErrorCode::BadSector);
  }

  TEST_CASE("default initialization") {
    const AlgorithmParams p = synthesize(1.0, 5.0, 2).params;
    const auto s = QuadraticCostSpec::diagonal({1.0, 2.0}, {{1.0, -1.0}, {3.0, 3.0}});
    const auto init = default_init(p, s);
    CHECK(init.size() == 4);
    for (const auto& x : init) {
      CHECK(x(0) == 2.0);
      CHECK(x(1) == 0.0);
    }
  }

  TEST_CASE("fit_geometric_rate") {
    std::vector<double> e;
    for (int t = 0; t < 200; ++t) e.push_back(std::pow(0.7, t));
    REQUIRE(fit_geometric_rate(e).has_value());
    CHECK(*fit_geometric_rate(e) == doctest::Approx(0.7).epsilon(1e-9));
    CHECK_FALSE(fit_geometric_rate(std::vector<double>{1e-3, 1e-4}).has_value());
    CHECK_FALSE(fit_geometric_rate(std::vector<double>(50, 1e-14)).has_value());
    CHECK_FALSE(fit_geometric_rate(std::vector<double>(50, 1.0)).has_value());
  }

  TEST_CASE("steady_state_error and window") {
    TrajectoryTrace tr;
    tr.errors = {4.0, 3.0, 2.0, 1.0};
    CHECK(steady_state_error(tr, 2) == 1.5);
    CHECK(steady_state_error(tr, 4) == 2.5);
    CHECK_THROWS_AS(steady_state_error(tr, 5), Error);
    CHECK_THROWS_AS(steady_state_error(tr, 0), Error);
    CHECK(default_window(300) == 30);
    CHECK(default_window(5) == 1);
  }

  TEST_CASE("forcing_coefficients") {
    const AlgorithmParams hb = heavy_ball_params(1.0, 9.0);
    const auto g = forcing_coefficients(hb, 3);
    // compare with sum_j beta_j (x*(t-j) - x*(t-j-1)) - (x*(t+1) - x*(t)) for x* = t and x* = t^2
    const double b = hb.beta[0];
    CHECK(g[1][0] == doctest::Approx(b - 1.0));
    for (int t : {3, 7}) {
      const double direct = b * (t * t - (t - 1.0) * (t - 1.0)) - ((t + 1.0) * (t + 1.0) - t * t);
      CHECK(g[2][0] + g[2][1] * t == doctest::Approx(direct));
    }
    for (const auto& row : forcing_coefficients(synthesize(1.0, 5.0, 4).params, 4))
      for (double v : row) CHECK(v == 0.0);
  }

  TEST_CASE("trace CSV layout") {
    const AlgorithmParams hb = heavy_ball_params(1.0, 9.0);
    const auto s = QuadraticCostSpec::diagonal({1.0, 2.0}, {{0.0, 1.0}});
    const TrajectoryTrace tr = run(hb, s, 5, default_init(hb, s));
    std::ostringstream os;
    write_trace_csv(os, tr);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,err,x_0,x_1,xstar_0,xstar_1");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 6);
  }
}
