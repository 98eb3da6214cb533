#include "pekit/behavior.hpp"

#include <Eigen/SVD>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "pekit/csv.hpp"

namespace pekit {

using nlohmann::json;

namespace {

/// Minimum-norm least-squares solve with the toolkit rank threshold.
Eigen::VectorXd pinv_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol,
                           Eigen::Index* rank_out = nullptr) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double threshold =
        sv.size() > 0 ? rank_threshold(sv(0), A.rows(), A.cols(), tol) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > threshold) {
            ++rank;
        }
    }
    if (rank_out != nullptr) {
        *rank_out = rank;
    }
    const Eigen::VectorXd c = svd.matrixU().leftCols(rank).transpose() * b;
    Eigen::VectorXd scaled(rank);
    for (Eigen::Index i = 0; i < rank; ++i) {
        scaled(i) = c(i) / sv(i);
    }
    return svd.matrixV().leftCols(rank) * scaled;
}

} // namespace

DataDictionary::DataDictionary(std::vector<TimeSeries> input_series,
                               std::vector<TimeSeries> output_series, Eigen::Index depth,
                               double tol)
    : input_series_(std::move(input_series)), depth_(depth) {
    if (input_series_.empty() || input_series_.size() != output_series.size()) {
        throw std::invalid_argument("need matching, non-empty input and output experiment lists");
    }
    for (size_t j = 0; j < input_series_.size(); ++j) {
        if (input_series_[j].length() != output_series[j].length()) {
            throw std::invalid_argument(
                "experiment " + std::to_string(j) + " has misaligned lengths: inputs " +
                std::to_string(input_series_[j].length()) + ", outputs " +
                std::to_string(output_series[j].length()));
        }
    }

    const HankelView input_block = build_mosaic_hankel(input_series_, depth_);
    const HankelView output_block = build_mosaic_hankel(output_series, depth_);
    input_dim_ = input_block.eta();
    output_dim_ = output_block.eta();

    stacked_.resize(input_block.rows() + output_block.rows(), input_block.cols());
    stacked_.topRows(input_block.rows()) = input_block.matrix();
    stacked_.bottomRows(output_block.rows()) = output_block.matrix();

    input_report_ = pe_check(input_block, input_dim_, depth_, tol);
}

bool DataDictionary::input_pe_of_order(Eigen::Index order, double tol) const {
    for (const TimeSeries& z : input_series_) {
        if (z.length() < order) {
            return false;
        }
    }
    const HankelView view = build_mosaic_hankel(input_series_, order);
    return pe_check(view, input_dim_, order, tol).full_order_rank;
}

DataDictionary build_dictionary(const std::vector<TimeSeries>& input_series,
                                const std::vector<TimeSeries>& output_series, Eigen::Index depth,
                                double tol) {
    return DataDictionary(input_series, output_series, depth, tol);
}

MembershipResult membership(const DataDictionary& dict, const TimeSeries& u_bar,
                            const TimeSeries& y_bar, double tol) {
    if (u_bar.dim() != dict.input_dim() || y_bar.dim() != dict.output_dim()) {
        throw std::invalid_argument("query dimensions do not match the dictionary blocks");
    }
    if (u_bar.length() != dict.depth() || y_bar.length() != dict.depth()) {
        throw std::invalid_argument("query length must equal the dictionary depth L = " +
                                    std::to_string(dict.depth()));
    }

    Eigen::VectorXd q(dict.stacked().rows());
    q.head(dict.input_rows()) = u_bar.stacked();
    q.tail(dict.output_rows()) = y_bar.stacked();

    MembershipResult result;
    result.beta = pinv_solve(dict.stacked(), q, kDefaultRankTol);
    result.residual = (dict.stacked() * result.beta - q).norm();
    result.threshold = tol * (1.0 + q.norm());
    result.is_member = result.residual <= result.threshold;
    return result;
}

PredictionResult predict(const DataDictionary& dict, const TimeSeries& u_bar,
                         const TimeSeries& y_init, double tol) {
    if (u_bar.dim() != dict.input_dim() || y_init.dim() != dict.output_dim()) {
        throw std::invalid_argument("query dimensions do not match the dictionary blocks");
    }
    if (u_bar.length() != dict.depth()) {
        throw std::invalid_argument("input window length must equal the dictionary depth L = " +
                                    std::to_string(dict.depth()));
    }
    const Eigen::Index n_init = y_init.length();
    if (n_init >= dict.depth()) {
        throw std::invalid_argument("initial output window must be shorter than the depth");
    }

    const Eigen::Index p = dict.output_dim();
    const Eigen::Index constrained_rows = dict.input_rows() + n_init * p;
    Eigen::MatrixXd M(constrained_rows, dict.cols());
    M.topRows(dict.input_rows()) = dict.stacked().topRows(dict.input_rows());
    M.bottomRows(n_init * p) =
        dict.stacked().middleRows(dict.input_rows(), n_init * p);

    Eigen::VectorXd b(constrained_rows);
    b.head(dict.input_rows()) = u_bar.stacked();
    b.tail(n_init * p) = y_init.stacked();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double threshold =
        sv.size() > 0 ? rank_threshold(sv(0), M.rows(), M.cols(), tol) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > threshold) {
            ++rank;
        }
    }

    // Free directions of the constrained system must not change the predicted
    // outputs, otherwise the completion is not well defined.
    const Eigen::MatrixXd free_output_rows =
        dict.stacked().bottomRows(dict.output_rows() - n_init * p);
    const Eigen::MatrixXd null_basis = svd.matrixV().rightCols(M.cols() - rank);
    const double influence =
        null_basis.cols() == 0 ? 0.0 : (free_output_rows * null_basis).cwiseAbs().maxCoeff();
    const double influence_cap =
        tol * std::max(1.0, free_output_rows.cwiseAbs().maxCoeff()) *
        static_cast<double>(std::max(M.rows(), M.cols()));
    if (influence > influence_cap) {
        throw std::invalid_argument(
            "prediction underdetermined: constrained block has rank " + std::to_string(rank) +
            " of " + std::to_string(M.cols()) + " columns and " +
            std::to_string(M.cols() - rank) +
            " free directions that change the predicted outputs; the input data is not "
            "persistently exciting of a high enough order");
    }

    PredictionResult result;
    const Eigen::VectorXd c = svd.matrixU().leftCols(rank).transpose() * b;
    Eigen::VectorXd scaled(rank);
    for (Eigen::Index i = 0; i < rank; ++i) {
        scaled(i) = c(i) / sv(i);
    }
    result.beta = svd.matrixV().leftCols(rank) * scaled;
    result.residual = (M * result.beta - b).norm();

    const Eigen::VectorXd y_full = dict.stacked().bottomRows(dict.output_rows()) * result.beta;
    Eigen::MatrixXd y(p, dict.depth());
    for (Eigen::Index k = 0; k < dict.depth(); ++k) {
        y.col(k) = y_full.segment(k * p, p);
    }
    result.outputs = TimeSeries(std::move(y));
    result.input_pe_ok = dict.input_pe_of_order(dict.depth() + n_init, tol);
    return result;
}

void export_dictionary(const DataDictionary& dict, const std::filesystem::path& csv_path,
                       const std::filesystem::path& json_path) {
    std::ostringstream out;
    char buf[64];
    for (Eigen::Index i = 0; i < dict.stacked().rows(); ++i) {
        for (Eigen::Index c = 0; c < dict.stacked().cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", dict.stacked()(i, c));
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
    write_file_atomic(csv_path, out.str());

    const PEReport& r = dict.input_report();
    json sidecar = {
        {"input_dim", dict.input_dim()},
        {"output_dim", dict.output_dim()},
        {"depth", dict.depth()},
        {"columns", dict.cols()},
        {"input_block_report",
         {{"rank", r.rank},
          {"sigma_min", r.sigma_min},
          {"nu_min", r.nu_min},
          {"full_order_rank", r.full_order_rank},
          {"gram_positive", r.gram_positive},
          {"shape_ok", r.shape_ok},
          {"tolerance", r.tolerance}}},
    };
    write_file_atomic(json_path, sidecar.dump(2) + "\n");
}

} // namespace pekit
