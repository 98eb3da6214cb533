#pragma once

#include <Eigen/Dense>
#include <initializer_list>
#include <vector>

namespace pekit {

/// Length-N sequence of real vectors, the universal data carrier of the
/// toolkit (inputs, outputs, states, or basis evaluations). Samples are
/// stored as columns of an eta x N matrix; time is the unit-step index k.
class TimeSeries {
  public:
    TimeSeries() = default;

    /// Takes ownership of an eta x N sample matrix (one sample per column).
    explicit TimeSeries(Eigen::MatrixXd samples);

    /// Scalar (eta = 1) series from a list of values.
    static TimeSeries scalar(const std::vector<double>& values);
    static TimeSeries scalar(std::initializer_list<double> values);

    static TimeSeries zeros(Eigen::Index dim, Eigen::Index length);

    Eigen::Index dim() const { return samples_.rows(); }
    Eigen::Index length() const { return samples_.cols(); }
    bool empty() const { return samples_.size() == 0; }

    const Eigen::MatrixXd& samples() const { return samples_; }
    Eigen::MatrixXd& samples() { return samples_; }

    /// Sample z_k (bounds-checked).
    Eigen::VectorXd sample(Eigen::Index k) const;
    void set_sample(Eigen::Index k, const Eigen::VectorXd& value);

    /// Stacked window z_[first,last] = [z_first; ...; z_last].
    Eigen::VectorXd window(Eigen::Index first, Eigen::Index last) const;

    /// Stacked vector of the whole sequence, z_[0,N-1].
    Eigen::VectorXd stacked() const { return window(0, length() - 1); }

    /// Samples [first, first+count) as a shorter series.
    TimeSeries segment(Eigen::Index first, Eigen::Index count) const;

  private:
    Eigen::MatrixXd samples_;
};

} // namespace pekit
