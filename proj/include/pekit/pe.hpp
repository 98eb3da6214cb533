#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "pekit/timeseries.hpp"

namespace pekit {

/// Default relative tolerance for numerical rank decisions. A singular value
/// counts toward the rank when it exceeds tol * sigma_max * max(rows, cols).
inline constexpr double kDefaultRankTol = 100.0 * std::numeric_limits<double>::epsilon();

/// Realized depth-L (mosaic) Hankel matrix together with the series it was
/// built from. Column c of a single-series block is the stacked window
/// z_[c, c+L-1]; a mosaic concatenates the per-series blocks in list order.
class HankelView {
  public:
    HankelView(std::vector<TimeSeries> sources, Eigen::Index depth);

    Eigen::Index depth() const { return depth_; }
    Eigen::Index eta() const { return eta_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }
    const std::vector<TimeSeries>& sources() const { return sources_; }

    Eigen::Index rows() const { return matrix_.rows(); }
    Eigen::Index cols() const { return matrix_.cols(); }

    /// Total number of raw samples across all source series.
    Eigen::Index sample_count() const;

  private:
    std::vector<TimeSeries> sources_;
    Eigen::Index depth_ = 0;
    Eigen::Index eta_ = 0;
    Eigen::MatrixXd matrix_;
};

/// Verdicts and numeric evidence for the supported excitation definitions.
///
///  - full_order_rank ("order-L" PE): rank(H_L(z)) == eta*L.
///  - gram_positive (classical excitation): smallest eigenvalue of the
///    sample Gram sum over all raw samples is positive within tolerance.
///  - quantitative PE is judged by the caller from sigma_min; shape_ok
///    records whether the matrix has at least as many columns as rows,
///    the shape required for that notion to be meaningful.
struct PEReport {
    Eigen::Index eta = 0;
    Eigen::Index depth = 0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    Eigen::Index rank = 0;
    double sigma_min = 0.0; ///< smallest singular value of the Hankel matrix
    double nu_min = 0.0;    ///< smallest eigenvalue of the sample Gram sum
    double tolerance = kDefaultRankTol;
    bool full_order_rank = false;
    bool gram_positive = false;
    bool shape_ok = false;
};

/// Depth-L Hankel matrix of a single series. Requires N >= L.
HankelView build_hankel(const TimeSeries& z, Eigen::Index depth);

/// Horizontal concatenation of per-series Hankel blocks, in list order.
/// All series must share the sample dimension and satisfy N_j >= L.
HankelView build_mosaic_hankel(const std::vector<TimeSeries>& series, Eigen::Index depth);

/// Evaluates every verdict for a realized Hankel view. `eta` and `depth`
/// must match the view; they are taken explicitly so callers state what
/// order they believe they are checking.
PEReport pe_check(const HankelView& view, Eigen::Index eta, Eigen::Index depth,
                  double tol = kDefaultRankTol);

/// Largest L such that rank(H_L(z)) = eta*L, or 0 when even L = 1 fails.
/// Scans upward and stops at the first failure (rank order is monotone).
Eigen::Index pe_order_max(const TimeSeries& z, double tol = kDefaultRankTol);

/// Singular-value rank with the toolkit's relative threshold.
Eigen::Index numerical_rank(const Eigen::MatrixXd& m, double tol = kDefaultRankTol);

/// Threshold applied to singular values by numerical_rank.
double rank_threshold(double sigma_max, Eigen::Index rows, Eigen::Index cols, double tol);

} // namespace pekit
