#include "pekit/pe.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pekit {

namespace {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

} // namespace

HankelView::HankelView(std::vector<TimeSeries> sources, Eigen::Index depth)
    : sources_(std::move(sources)), depth_(depth) {
    if (sources_.empty()) {
        throw std::invalid_argument("Hankel construction needs at least one series");
    }
    if (depth_ < 1) {
        throw std::invalid_argument("Hankel depth must be >= 1, got " + std::to_string(depth_));
    }
    eta_ = sources_.front().dim();
    Eigen::Index total_cols = 0;
    for (size_t j = 0; j < sources_.size(); ++j) {
        const TimeSeries& z = sources_[j];
        if (z.dim() != eta_) {
            throw std::invalid_argument("series " + std::to_string(j) +
                                        " has dimension " + std::to_string(z.dim()) +
                                        ", expected " + std::to_string(eta_));
        }
        if (z.length() < depth_) {
            throw std::invalid_argument("series " + std::to_string(j) + " is too short: N = " +
                                        std::to_string(z.length()) + " < depth L = " +
                                        std::to_string(depth_) + "; need N >= " +
                                        std::to_string(depth_));
        }
        total_cols += z.length() - depth_ + 1;
    }
    matrix_.resize(eta_ * depth_, total_cols);
    Eigen::Index col = 0;
    for (const TimeSeries& z : sources_) {
        const Eigen::Index block_cols = z.length() - depth_ + 1;
        for (Eigen::Index c = 0; c < block_cols; ++c) {
            matrix_.col(col + c) = z.window(c, c + depth_ - 1);
        }
        col += block_cols;
    }
}

Eigen::Index HankelView::sample_count() const {
    Eigen::Index n = 0;
    for (const TimeSeries& z : sources_) {
        n += z.length();
    }
    return n;
}

HankelView build_hankel(const TimeSeries& z, Eigen::Index depth) {
    return HankelView(std::vector<TimeSeries>{z}, depth);
}

HankelView build_mosaic_hankel(const std::vector<TimeSeries>& series, Eigen::Index depth) {
    return HankelView(series, depth);
}

double rank_threshold(double sigma_max, Eigen::Index rows, Eigen::Index cols, double tol) {
    return tol * sigma_max * static_cast<double>(std::max(rows, cols));
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& m, double tol) {
    const Eigen::VectorXd sv = singular_values(m);
    if (sv.size() == 0) {
        return 0;
    }
    const double threshold = rank_threshold(sv(0), m.rows(), m.cols(), tol);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > threshold) {
            ++rank;
        }
    }
    return rank;
}

PEReport pe_check(const HankelView& view, Eigen::Index eta, Eigen::Index depth, double tol) {
    if (eta != view.eta()) {
        throw std::invalid_argument("pe_check: view was built from dimension-" +
                                    std::to_string(view.eta()) + " data, not " +
                                    std::to_string(eta));
    }
    if (depth != view.depth()) {
        throw std::invalid_argument("pe_check: view was built with depth " +
                                    std::to_string(view.depth()) + ", not " +
                                    std::to_string(depth));
    }

    PEReport report;
    report.eta = eta;
    report.depth = depth;
    report.rows = view.rows();
    report.cols = view.cols();
    report.tolerance = tol;
    report.shape_ok = view.cols() >= view.rows();

    const Eigen::VectorXd sv = singular_values(view.matrix());
    report.sigma_min = sv(sv.size() - 1);
    const double threshold = rank_threshold(sv(0), view.rows(), view.cols(), tol);
    report.rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > threshold) {
            ++report.rank;
        }
    }
    report.full_order_rank = (report.rank == eta * depth);

    // Gram sum over all raw samples of all source series. Its eigenvalues are
    // the squared singular values of the depth-1 Hankel matrix, so the verdict
    // threshold mirrors the rank criterion applied at depth 1.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(eta, eta);
    for (const TimeSeries& z : view.sources()) {
        gram.selfadjointView<Eigen::Lower>().rankUpdate(z.samples());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd ev = es.eigenvalues(); // ascending
    report.nu_min = ev(0);
    const double sigma_equiv_min = std::sqrt(std::max(ev(0), 0.0));
    const double sigma_equiv_max = std::sqrt(std::max(ev(ev.size() - 1), 0.0));
    const double gram_threshold =
        rank_threshold(sigma_equiv_max, eta, view.sample_count(), tol);
    report.gram_positive = sigma_equiv_min > gram_threshold;

    return report;
}

Eigen::Index pe_order_max(const TimeSeries& z, double tol) {
    Eigen::Index best = 0;
    // Full row rank needs at least as many columns as rows:
    // N - L + 1 >= eta * L, i.e. L <= (N + 1) / (eta + 1).
    const Eigen::Index max_depth = (z.length() + 1) / (z.dim() + 1);
    for (Eigen::Index L = 1; L <= max_depth; ++L) {
        const PEReport report = pe_check(build_hankel(z, L), z.dim(), L, tol);
        if (!report.full_order_rank) {
            break;
        }
        best = L;
    }
    return best;
}

} // namespace pekit
