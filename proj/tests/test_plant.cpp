#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pekit/csv.hpp"
#include "pekit/plant.hpp"
#include "test_helpers.hpp"

using namespace pekit;

namespace {

LtiPlant scalar_half_plant() {
    Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1), d(1, 1);
    a << 0.5;
    b << 1.0;
    c << 1.0;
    d << 0.0;
    return LtiPlant(a, b, c, d);
}

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

} // namespace

TEST_CASE("zero input from the origin stays at the origin") {
    const LtiPlant lti = scalar_half_plant();
    const Trajectory traj = simulate(lti, Eigen::VectorXd::Zero(1), TimeSeries::zeros(1, 6));
    CHECK(traj.states.samples().norm() == 0.0);
    CHECK(traj.outputs.samples().norm() == 0.0);

    const FlatPlant flat = example_flat_system();
    const Trajectory ftraj = simulate(flat, Eigen::VectorXd::Zero(2), TimeSeries::zeros(1, 6));
    CHECK(ftraj.states.samples().norm() == 0.0);
    REQUIRE(ftraj.synthetic_inputs.has_value());
    CHECK(ftraj.synthetic_inputs->samples().norm() == 0.0);
}

TEST_CASE("scalar recursion by hand") {
    const LtiPlant plant = scalar_half_plant();
    const Trajectory traj =
        simulate(plant, Eigen::VectorXd::Zero(1), TimeSeries::scalar({1.0, 0.0}));
    REQUIRE(traj.states.length() == 3);
    CHECK(traj.states.samples()(0, 0) == 0.0);
    CHECK(traj.states.samples()(0, 1) == 1.0);
    CHECK(traj.states.samples()(0, 2) == 0.5);
    CHECK(traj.outputs.samples()(0, 0) == 0.0);
    CHECK(traj.outputs.samples()(0, 1) == 1.0);
}

TEST_CASE("benchmark chain system evaluates its printed drift") {
    const FlatPlant plant = example_flat_system();
    CHECK(plant.chain_input(Eigen::VectorXd::Zero(2), 0.0) == 0.0);

    Eigen::VectorXd x(2);
    x << std::numbers::pi / 2.0, 0.0;
    CHECK(plant.chain_input(x, 0.0) == doctest::Approx(-1.0).epsilon(1e-14));

    x << 1.0, 1.0;
    CHECK(plant.chain_input(x, 0.0) == doctest::Approx(-std::sin(1.0)).epsilon(1e-14));
}

TEST_CASE("a pulse from rest feeds straight through the chain input") {
    const FlatPlant plant = example_flat_system();
    const double delta = 0.37;
    const Trajectory traj =
        simulate(plant, Eigen::VectorXd::Zero(2), TimeSeries::scalar({delta}));
    REQUIRE(traj.synthetic_inputs.has_value());
    CHECK(traj.synthetic_inputs->samples()(0, 0) == delta);
}

TEST_CASE("state reconstruction from outputs") {
    SUBCASE("hand example") {
        const TimeSeries xi = flat_state_from_outputs(TimeSeries::scalar({1.0, 2.0, 3.0}), 2);
        REQUIRE(xi.dim() == 2);
        REQUIRE(xi.length() == 2);
        CHECK(xi.samples()(0, 0) == 1.0);
        CHECK(xi.samples()(1, 0) == 2.0);
        CHECK(xi.samples()(0, 1) == 2.0);
        CHECK(xi.samples()(1, 1) == 3.0);
    }
    SUBCASE("zero outputs give zero states") {
        CHECK(flat_state_from_outputs(TimeSeries::zeros(1, 5), 3).samples().norm() == 0.0);
    }
    SUBCASE("rejects too-short series") {
        CHECK_THROWS_AS(flat_state_from_outputs(TimeSeries::scalar({1.0}), 2),
                        std::invalid_argument);
    }
    SUBCASE("matches the simulator states on the benchmark system") {
        std::mt19937_64 rng(3);
        const FlatPlant plant = example_flat_system();
        const TimeSeries u = testing::random_scalar_series(rng, 10);
        const Trajectory traj = simulate(plant, Eigen::VectorXd::Zero(2), u);
        const TimeSeries xi = flat_state_from_outputs(traj.outputs, 2);
        for (Eigen::Index k = 0; k < xi.length(); ++k) {
            CHECK((xi.sample(k) - traj.states.sample(k)).norm() == 0.0);
        }
    }
}

TEST_CASE("synthetic input recovery via the chain shift") {
    const FlatPlant plant = example_flat_system();
    SUBCASE("zero trajectory") {
        const Trajectory traj =
            simulate(plant, Eigen::VectorXd::Zero(2), TimeSeries::zeros(1, 4));
        CHECK(extract_synthetic_input(traj).samples().norm() == 0.0);
    }
    SUBCASE("pulse then rest") {
        const double delta = -0.8;
        const Trajectory traj =
            simulate(plant, Eigen::VectorXd::Zero(2), TimeSeries::scalar({delta, 0.0}));
        const TimeSeries v = extract_synthetic_input(traj);
        CHECK(v.samples()(0, 0) == delta);
    }
    SUBCASE("matches the recorded chain input on random runs") {
        std::mt19937_64 rng(5);
        for (int rep = 0; rep < 10; ++rep) {
            const TimeSeries u = testing::random_scalar_series(rng, 8);
            Eigen::VectorXd x0(2);
            x0 << 0.3, -0.2;
            const Trajectory traj = simulate(plant, x0, u);
            REQUIRE(traj.synthetic_inputs.has_value());
            const TimeSeries v = extract_synthetic_input(traj);
            CHECK((v.samples() - traj.synthetic_inputs->samples()).cwiseAbs().maxCoeff() <
                  1e-12);
        }
    }
}

TEST_CASE("chain states shift exactly") {
    std::mt19937_64 rng(9);
    const FlatPlant plant = example_flat_system();
    const TimeSeries u = testing::random_scalar_series(rng, 12);
    const Trajectory traj = simulate(plant, Eigen::VectorXd::Zero(2), u);
    for (Eigen::Index k = 0; k + 1 < traj.states.length(); ++k) {
        CHECK(traj.states.samples()(0, k + 1) == traj.states.samples()(1, k));
    }
}

TEST_CASE("distinct pulses give distinct chain responses from rest") {
    const FlatPlant plant = example_flat_system();
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(2);
    for (int rep = 0; rep < 100; ++rep) {
        const double d1 = dist(rng);
        const double d2 = dist(rng);
        if (d1 == d2) {
            continue;
        }
        CHECK(plant.chain_input(origin, d1) != plant.chain_input(origin, d2));
    }
}

TEST_CASE("identity-gain chain matches the equivalent LTI simulation") {
    const Eigen::Index n = 3;
    const FlatPlant chain(n, [](const Eigen::VectorXd&) { return 0.0; });

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    a.topRightCorner(n - 1, n - 1).setIdentity();
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, 1);
    b(n - 1, 0) = 1.0;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, n);
    c(0, 0) = 1.0;
    const LtiPlant lti(a, b, c, Eigen::MatrixXd::Zero(1, 1));
    CHECK(lti.controllable());

    std::mt19937_64 rng(21);
    const TimeSeries u = testing::random_scalar_series(rng, 9);
    const Trajectory t1 = simulate(chain, Eigen::VectorXd::Zero(n), u);
    const Trajectory t2 = simulate(lti, Eigen::VectorXd::Zero(n), u);
    CHECK((t1.states.samples() - t2.states.samples()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((t1.outputs.samples() - t2.outputs.samples()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("controllability rank test") {
    Eigen::MatrixXd a(2, 2), b(2, 1), c(1, 2), d(1, 1);
    a << 0, 1, 0, 0;
    b << 0, 1;
    c << 1, 0;
    d << 0;
    CHECK(LtiPlant(a, b, c, d).controllable());

    a.setIdentity();
    b << 1, 0;
    CHECK_FALSE(LtiPlant(a, b, c, d).controllable());
}

TEST_CASE("input nonlinearity must vanish at the origin") {
    Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1), d(1, 1);
    a << 0.5;
    b << 1.0;
    c << 1.0;
    d << 0.0;
    CHECK_THROWS_AS(HammersteinPlant(a, b, c, d, 1,
                                     [](const Eigen::VectorXd& u) {
                                         return Eigen::VectorXd::Constant(1, u(0) + 1.0);
                                     }),
                    std::invalid_argument);
}

TEST_CASE("squared-input plant recursion by hand") {
    Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1), d(1, 1);
    a << 0.5;
    b << 1.0;
    c << 1.0;
    d << 0.0;
    const HammersteinPlant plant(a, b, c, d, 1, [](const Eigen::VectorXd& u) {
        return Eigen::VectorXd::Constant(1, u(0) * u(0));
    });
    const Trajectory traj =
        simulate(plant, Eigen::VectorXd::Zero(1), TimeSeries::scalar({2.0, 0.0}));
    CHECK(traj.states.samples()(0, 1) == 4.0);
    CHECK(traj.states.samples()(0, 2) == 2.0);
}

TEST_CASE("simulation rejects mismatched dimensions") {
    const LtiPlant plant = scalar_half_plant();
    CHECK_THROWS_AS(simulate(plant, Eigen::VectorXd::Zero(2), TimeSeries::zeros(1, 3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate(plant, Eigen::VectorXd::Zero(1), TimeSeries::zeros(2, 3)),
                    std::invalid_argument);
}

TEST_CASE("unstable runs are truncated at the first non-finite sample") {
    Eigen::MatrixXd a(1, 1), b(1, 1), c(1, 1), d(1, 1);
    a << 1e100;
    b << 1.0;
    c << 1.0;
    d << 0.0;
    const LtiPlant plant(a, b, c, d);
    const Trajectory traj =
        simulate(plant, Eigen::VectorXd::Constant(1, 1.0), TimeSeries::zeros(1, 10));
    CHECK(traj.truncated);
    CHECK(traj.first_bad_index == 3); // 1, 1e100, 1e200, 1e300, then overflow
    CHECK(traj.states.samples().allFinite());
    CHECK(traj.states.length() == traj.inputs.length() + 1);
}

TEST_CASE("plant JSON loading") {
    SUBCASE("lti") {
        const auto plant = parse_plant_json(R"({
            "kind": "lti",
            "A": [[0.5]], "B": [[1.0]], "C": [[1.0]], "D": [[0.0]]
        })");
        const Trajectory traj =
            simulate(*plant, Eigen::VectorXd::Zero(1), TimeSeries::scalar({1.0, 0.0}));
        CHECK(traj.states.samples()(0, 2) == 0.5);
    }
    SUBCASE("hammerstein with monomial channel map") {
        const auto plant = parse_plant_json(R"({
            "kind": "hammerstein", "m": 1,
            "A": [[0.0]], "B": [[1.0]], "C": [[1.0]], "D": [[0.0]],
            "gamma": [{"kind": "monomial", "power": 2, "index": 0}]
        })");
        const Trajectory traj =
            simulate(*plant, Eigen::VectorXd::Zero(1), TimeSeries::scalar({3.0}));
        CHECK(traj.states.samples()(0, 1) == 9.0);
    }
    SUBCASE("flat benchmark terms") {
        const auto plant = parse_plant_json(R"({
            "kind": "flat", "n": 2, "b_const": 1.0,
            "a_terms": [
                {"coef": -1.0, "sin_of": 1},
                {"coef": 1.0, "powers": [1, 2]},
                {"coef": -1.0, "powers": [3, 1]}
            ]
        })");
        const FlatPlant reference = example_flat_system();
        std::mt19937_64 rng(33);
        std::uniform_real_distribution<double> dist(-1.5, 1.5);
        for (int rep = 0; rep < 20; ++rep) {
            Eigen::VectorXd x(2);
            x << dist(rng), dist(rng);
            const double u = dist(rng);
            const auto got = plant->synthetic_input(x, vec1(u));
            REQUIRE(got.has_value());
            CHECK(*got == doctest::Approx(reference.chain_input(x, u)).epsilon(1e-15));
        }
    }
    SUBCASE("unknown kind") {
        CHECK_THROWS_AS(parse_plant_json(R"({"kind": "nope"})"), IoError);
    }
}
