#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "pekit/plant.hpp"
#include "pekit/timeseries.hpp"

namespace pekit::testing {

/// Exact rank of an integer matrix by fraction-free (Bareiss) elimination
/// with column pivoting. Independent of any floating-point path; intermediate
/// values are exact minors, kept in 128-bit integers.
inline int exact_integer_rank(const Eigen::MatrixXi& input) {
    const Eigen::Index rows = input.rows();
    const Eigen::Index cols = input.cols();
    std::vector<std::vector<__int128>> m(static_cast<size_t>(rows),
                                         std::vector<__int128>(static_cast<size_t>(cols)));
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m[static_cast<size_t>(i)][static_cast<size_t>(j)] = input(i, j);
        }
    }

    int rank = 0;
    __int128 prev = 1;
    for (Eigen::Index c = 0; c < cols && rank < rows; ++c) {
        // find a pivot in column c at or below row `rank`
        Eigen::Index pivot = -1;
        for (Eigen::Index i = rank; i < rows; ++i) {
            if (m[static_cast<size_t>(i)][static_cast<size_t>(c)] != 0) {
                pivot = i;
                break;
            }
        }
        if (pivot < 0) {
            continue;
        }
        std::swap(m[static_cast<size_t>(pivot)], m[static_cast<size_t>(rank)]);
        const auto& prow = m[static_cast<size_t>(rank)];
        for (Eigen::Index i = rank + 1; i < rows; ++i) {
            auto& row = m[static_cast<size_t>(i)];
            const __int128 factor = row[static_cast<size_t>(c)];
            for (Eigen::Index j = c; j < cols; ++j) {
                row[static_cast<size_t>(j)] =
                    (prow[static_cast<size_t>(c)] * row[static_cast<size_t>(j)] -
                     factor * prow[static_cast<size_t>(j)]) /
                    prev;
            }
        }
        prev = prow[static_cast<size_t>(c)];
        ++rank;
    }
    return rank;
}

/// Random scalar series with entries in [-1, 1].
inline TimeSeries random_scalar_series(std::mt19937_64& rng, Eigen::Index length) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::MatrixXd m(1, length);
    for (Eigen::Index k = 0; k < length; ++k) {
        m(0, k) = dist(rng);
    }
    return TimeSeries(std::move(m));
}

/// Random vector series with entries in [-1, 1].
inline TimeSeries random_series(std::mt19937_64& rng, Eigen::Index dim, Eigen::Index length) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::MatrixXd m(dim, length);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index k = 0; k < length; ++k) {
            m(i, k) = dist(rng);
        }
    }
    return TimeSeries(std::move(m));
}

/// Random controllable SISO plant with spectral radius capped below 1 so
/// short open-loop experiments stay well scaled.
inline LtiPlant random_controllable_siso(std::mt19937_64& rng, Eigen::Index order) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    while (true) {
        Eigen::MatrixXd a(order, order);
        Eigen::MatrixXd b(order, 1);
        Eigen::MatrixXd c(1, order);
        Eigen::MatrixXd d(1, 1);
        for (Eigen::Index i = 0; i < order; ++i) {
            for (Eigen::Index j = 0; j < order; ++j) {
                a(i, j) = dist(rng);
            }
            b(i, 0) = dist(rng);
            c(0, i) = dist(rng);
        }
        d(0, 0) = dist(rng);
        const double radius = a.eigenvalues().cwiseAbs().maxCoeff();
        if (radius > 0.9) {
            a *= 0.9 / radius;
        }
        LtiPlant plant(a, b, c, d);
        if (plant.controllable()) {
            return plant;
        }
    }
}

} // namespace pekit::testing
