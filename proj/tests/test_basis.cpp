#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pekit/basis.hpp"
#include "pekit/excite.hpp"
#include "pekit/plant.hpp"

using namespace pekit;

namespace {

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

} // namespace

TEST_CASE("monomial input basis evaluates power stacks") {
    const BasisSet basis = monomial_basis(0, 1, 2);
    REQUIRE(basis.size() == 2);
    const Eigen::VectorXd out = basis.eval_stack(vec1(2.0));
    CHECK(out(0) == 2.0);
    CHECK(out(1) == 4.0);
}

TEST_CASE("monomial basis ordering puts input powers first") {
    SUBCASE("n=1, t=2 at (x, u) = (3, 2)") {
        const BasisSet basis = monomial_basis(1, 1, 2);
        REQUIRE(basis.size() == 4);
        const Eigen::VectorXd out = basis.eval_stack(vec1(3.0), vec1(2.0));
        CHECK(out(0) == 2.0);
        CHECK(out(1) == 4.0);
        CHECK(out(2) == 3.0);
        CHECK(out(3) == 9.0);
    }
    SUBCASE("n=2, t=1") {
        const BasisSet basis = monomial_basis(2, 1, 1);
        REQUIRE(basis.size() == 3);
        Eigen::VectorXd x(2);
        x << 5.0, 7.0;
        const Eigen::VectorXd out = basis.eval_stack(x, vec1(-1.0));
        CHECK(out(0) == -1.0);
        CHECK(out(1) == 5.0);
        CHECK(out(2) == 7.0);
        CHECK(basis.descriptors()[0].label == "u");
        CHECK(basis.descriptors()[1].label == "x1");
    }
    SUBCASE("input-only powers up to 3") {
        const BasisSet basis = monomial_basis(0, 1, 3);
        REQUIRE(basis.size() == 3);
        const Eigen::VectorXd out = basis.eval_stack(vec1(-2.0));
        CHECK(out(0) == -2.0);
        CHECK(out(1) == 4.0);
        CHECK(out(2) == -8.0);
    }
}

TEST_CASE("affine-input monomial basis keeps u linear") {
    const BasisSet basis = monomial_basis_affine_input(2, 3);
    REQUIRE(basis.size() == 7);
    Eigen::VectorXd x(2);
    x << 2.0, -1.0;
    const Eigen::VectorXd out = basis.eval_stack(x, vec1(0.5));
    // (u, x1, x2, x1^2, x2^2, x1^3, x2^3)
    CHECK(out(0) == 0.5);
    CHECK(out(1) == 2.0);
    CHECK(out(2) == -1.0);
    CHECK(out(3) == 4.0);
    CHECK(out(4) == 1.0);
    CHECK(out(5) == 8.0);
    CHECK(out(6) == -1.0);
    CHECK(basis.pure_input_component() == 0);
}

TEST_CASE("every constructed basis vanishes at the origin") {
    const std::vector<BasisSet> sets = {
        monomial_basis(0, 1, 4),
        monomial_basis(2, 1, 3),
        monomial_basis_affine_input(3, 2),
    };
    for (const BasisSet& basis : sets) {
        const Eigen::VectorXd at_origin = basis.eval_stack(
            Eigen::VectorXd::Zero(basis.state_dim()), Eigen::VectorXd::Zero(basis.input_dim()));
        CHECK(at_origin.norm() == 0.0);
    }
}

TEST_CASE("non-vanishing components are shifted and the shift recorded") {
    std::vector<BasisSet::Component> comps;
    comps.push_back([](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
        return std::cos(u(0)); // cos(0) = 1, needs shifting
    });
    std::vector<ComponentDescriptor> descs;
    descs.push_back({"custom", 0, 0, 0.0, "cos(u)"});
    const BasisSet basis = BasisSet::input_only(1, std::move(comps), std::move(descs));
    CHECK(basis.eval_stack(vec1(0.0))(0) == 0.0);
    CHECK(basis.descriptors()[0].shift == 1.0);
    CHECK(basis.eval_stack(vec1(1.0))(0) == doctest::Approx(std::cos(1.0) - 1.0));
}

TEST_CASE("eval_stack rejects mismatched dimensions") {
    const BasisSet basis = monomial_basis(2, 1, 1);
    CHECK_THROWS_AS(basis.eval_stack(vec1(1.0), vec1(1.0)), std::invalid_argument);
    Eigen::VectorXd x(2);
    x.setZero();
    CHECK_THROWS_AS(basis.eval_stack(x, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("amplitude matrix of the quadratic pair") {
    const BasisSet basis = monomial_basis(0, 1, 2);
    SUBCASE("distinct amplitudes give det 2") {
        const StructuredMatrix lambda = build_lambda(basis, std::vector<double>{1.0, 2.0});
        Eigen::MatrixXd expected(2, 2);
        expected << 1, 2, 1, 4;
        CHECK((lambda.matrix - expected).norm() == 0.0);
        CHECK(lambda.matrix.determinant() == doctest::Approx(2.0));
        CHECK(check_invertible(lambda).invertible);
    }
    SUBCASE("repeated amplitude is singular") {
        const StructuredMatrix lambda = build_lambda(basis, std::vector<double>{1.0, 1.0});
        CHECK_FALSE(check_invertible(lambda).invertible);
    }
    SUBCASE("zero amplitude gives a zero column") {
        const StructuredMatrix lambda = build_lambda(basis, std::vector<double>{0.0, 2.0});
        CHECK(lambda.matrix.col(0).norm() == 0.0);
        CHECK_FALSE(check_invertible(lambda).invertible);
    }
    SUBCASE("wrong amplitude count is rejected") {
        CHECK_THROWS_AS(build_lambda(basis, std::vector<double>{1.0}), std::invalid_argument);
    }
}

TEST_CASE("power matrix of chain values") {
    SUBCASE("distinct nonzero values invert") {
        const StructuredMatrix omega = build_omega({1.0, 2.0});
        Eigen::MatrixXd expected(2, 2);
        expected << 1, 2, 1, 4;
        CHECK((omega.matrix - expected).norm() == 0.0);
        CHECK(check_invertible(omega).invertible);
    }
    SUBCASE("repeated value is singular") {
        CHECK_FALSE(check_invertible(build_omega({1.0, 1.0})).invertible);
    }
    SUBCASE("zero value is singular") {
        const StructuredMatrix omega = build_omega({0.0, 2.0});
        CHECK(omega.matrix.col(0).norm() == 0.0);
        CHECK_FALSE(check_invertible(omega).invertible);
    }
}

TEST_CASE("random distinct nonzero values always invert; spoiling one breaks it") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    int checked = 0;
    while (checked < 200) {
        const size_t t = 1 + rng() % 5;
        std::vector<double> values(t);
        bool ok = true;
        for (double& v : values) {
            v = dist(rng);
            if (std::abs(v) < 0.05) {
                ok = false;
            }
        }
        for (size_t a = 0; a < t && ok; ++a) {
            for (size_t b = a + 1; b < t; ++b) {
                if (std::abs(values[a] - values[b]) < 0.05) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) {
            continue; // resample: near-collisions are a conditioning question, not rank
        }
        ++checked;
        CHECK(check_invertible(build_omega(values)).invertible);

        if (t >= 2) {
            std::vector<double> dup = values;
            dup[t - 1] = dup[0];
            CHECK(check_invertible(build_omega(dup)).rank < static_cast<Eigen::Index>(t));
        }
        std::vector<double> zeroed = values;
        zeroed[0] = 0.0;
        CHECK(check_invertible(build_omega(zeroed)).rank < static_cast<Eigen::Index>(t));
    }
}

TEST_CASE("endpoint matrix from resting experiments is zero") {
    const BasisSet basis = monomial_basis(2, 1, 1);
    const std::vector<EndpointRecord> records(3, {Eigen::VectorXd::Zero(2),
                                                  Eigen::VectorXd::Zero(1)});
    const StructuredMatrix w = build_w(basis, records);
    CHECK(w.matrix.norm() == 0.0);
}

TEST_CASE("endpoint matrix of the designed chain experiments is block anti-diagonal") {
    // Chain order 2, first-power basis, pulse values (1, 2, 3).
    const FlatPlant plant = example_flat_system();
    const BasisSet basis = monomial_basis(2, 1, 1);
    const std::vector<TimeSeries> windows = flat_eta_sequences(2, 1, {1.0, 2.0, 3.0});
    const Eigen::Index L = 1;
    const ExcitationPlan plan = reachable_multi_experiment(
        windows, L, 2, std::vector<Eigen::Index>(3, 2 * L + 2 - 1));
    const std::vector<EndpointRecord> records = endpoint_records(plant, plan);
    const StructuredMatrix w = build_w(basis, records);

    Eigen::MatrixXd expected(3, 3);
    expected << 0, 0, 3,
                0, 2, 0,
                1, 0, 0;
    CHECK((w.matrix - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(check_invertible(w).invertible);
}

TEST_CASE("single-component endpoint matrix") {
    std::vector<BasisSet::Component> comps;
    comps.push_back([](const Eigen::VectorXd&, const Eigen::VectorXd& u) { return u(0); });
    std::vector<ComponentDescriptor> descs;
    descs.push_back({"monomial", 1, 0, 0.0, "u"});
    const BasisSet basis = BasisSet::state_input(1, 1, std::move(comps), std::move(descs));
    const StructuredMatrix w = build_w(basis, {{Eigen::VectorXd::Zero(1), vec1(5.0)}});
    CHECK(w.matrix(0, 0) == 5.0);
}

TEST_CASE("invertibility report values") {
    SUBCASE("identity") {
        StructuredMatrix m;
        m.matrix = Eigen::MatrixXd::Identity(3, 3);
        const InvertibilityReport report = check_invertible(m);
        CHECK(report.invertible);
        CHECK(report.condition == doctest::Approx(1.0));
    }
    SUBCASE("known 2x2 condition") {
        Eigen::MatrixXd m(2, 2);
        m << 1, 2, 1, 4;
        const InvertibilityReport report = check_invertible(m);
        CHECK(report.invertible);
        // singular values from eigenvalues of M'M: 11 +- 4*sqrt(6)
        const double expected = std::sqrt((11.0 + 4.0 * std::sqrt(6.0)) /
                                          (11.0 - 4.0 * std::sqrt(6.0)));
        CHECK(report.condition == doctest::Approx(expected).epsilon(1e-10));
    }
    SUBCASE("zero row flags infinity") {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
        m(0, 0) = 1.0;
        const InvertibilityReport report = check_invertible(m);
        CHECK_FALSE(report.invertible);
        CHECK(std::isinf(report.condition));
    }
    SUBCASE("rectangular input is rejected") {
        CHECK_THROWS_AS(check_invertible(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
    }
}
