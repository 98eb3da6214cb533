#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "pekit/pe.hpp"
#include "pekit/timeseries.hpp"

namespace pekit {

/// Stacked input/output Hankel pair used as a trajectory library. The input
/// block may carry raw inputs or basis-lifted sequences; both blocks are
/// column-aligned (column c of each block comes from the same window of the
/// same experiment). Immutable after construction.
class DataDictionary {
  public:
    DataDictionary(std::vector<TimeSeries> input_series, std::vector<TimeSeries> output_series,
                   Eigen::Index depth, double tol = kDefaultRankTol);

    Eigen::Index depth() const { return depth_; }
    Eigen::Index input_dim() const { return input_dim_; }
    Eigen::Index output_dim() const { return output_dim_; }
    Eigen::Index cols() const { return stacked_.cols(); }

    /// Input-block rows on top, output-block rows below.
    const Eigen::MatrixXd& stacked() const { return stacked_; }
    Eigen::Index input_rows() const { return input_dim_ * depth_; }
    Eigen::Index output_rows() const { return output_dim_ * depth_; }

    const PEReport& input_report() const { return input_report_; }
    const std::vector<TimeSeries>& input_series() const { return input_series_; }

    /// Whether the stored input series are persistently exciting of the
    /// given order (used to warn before prediction).
    bool input_pe_of_order(Eigen::Index order, double tol = kDefaultRankTol) const;

  private:
    std::vector<TimeSeries> input_series_;
    Eigen::Index depth_ = 0;
    Eigen::Index input_dim_ = 0;
    Eigen::Index output_dim_ = 0;
    Eigen::MatrixXd stacked_;
    PEReport input_report_;
};

/// Builds the column-aligned dictionary from matched experiment lists.
DataDictionary build_dictionary(const std::vector<TimeSeries>& input_series,
                                const std::vector<TimeSeries>& output_series, Eigen::Index depth,
                                double tol = kDefaultRankTol);

struct MembershipResult {
    bool is_member = false;
    Eigen::VectorXd beta;
    double residual = 0.0;
    double threshold = 0.0;
};

/// Tests whether (u_bar, y_bar) lies in the dictionary's span: solves the
/// stacked linear system in the minimum-norm least-squares sense and compares
/// the residual against tol * (1 + ||query||).
MembershipResult membership(const DataDictionary& dict, const TimeSeries& u_bar,
                            const TimeSeries& y_bar, double tol = 1e-6);

struct PredictionResult {
    TimeSeries outputs;     ///< length-L output window, first samples pinned
    Eigen::VectorXd beta;
    double residual = 0.0;  ///< constraint residual of the solved system
    bool input_pe_ok = true; ///< stored inputs were PE of order L + n_init
};

/// Completes a length-L output window from a length-L input window and the
/// first n_init output samples (which fix the latent initial condition).
/// Throws when the data leaves free directions that change the prediction,
/// reporting the rank shortfall.
PredictionResult predict(const DataDictionary& dict, const TimeSeries& u_bar,
                         const TimeSeries& y_init, double tol = kDefaultRankTol);

/// Writes the stacked matrix as CSV (one row per Hankel row) plus a JSON
/// sidecar with dimensions and the input-block excitation report.
void export_dictionary(const DataDictionary& dict, const std::filesystem::path& csv_path,
                       const std::filesystem::path& json_path);

} // namespace pekit
