#include "pekit/timeseries.hpp"

#include <stdexcept>
#include <string>

namespace pekit {

TimeSeries::TimeSeries(Eigen::MatrixXd samples) : samples_(std::move(samples)) {
    if (samples_.rows() < 1 || samples_.cols() < 1) {
        throw std::invalid_argument("TimeSeries requires dimension >= 1 and length >= 1, got " +
                                    std::to_string(samples_.rows()) + "x" +
                                    std::to_string(samples_.cols()));
    }
}

TimeSeries TimeSeries::scalar(const std::vector<double>& values) {
    Eigen::MatrixXd m(1, static_cast<Eigen::Index>(values.size()));
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
        m(0, k) = values[static_cast<size_t>(k)];
    }
    return TimeSeries(std::move(m));
}

TimeSeries TimeSeries::scalar(std::initializer_list<double> values) {
    return scalar(std::vector<double>(values));
}

TimeSeries TimeSeries::zeros(Eigen::Index dim, Eigen::Index length) {
    return TimeSeries(Eigen::MatrixXd::Zero(dim, length));
}

Eigen::VectorXd TimeSeries::sample(Eigen::Index k) const {
    if (k < 0 || k >= length()) {
        throw std::out_of_range("TimeSeries sample index " + std::to_string(k) +
                                " out of range [0, " + std::to_string(length() - 1) + "]");
    }
    return samples_.col(k);
}

void TimeSeries::set_sample(Eigen::Index k, const Eigen::VectorXd& value) {
    if (k < 0 || k >= length()) {
        throw std::out_of_range("TimeSeries sample index " + std::to_string(k) +
                                " out of range [0, " + std::to_string(length() - 1) + "]");
    }
    if (value.size() != dim()) {
        throw std::invalid_argument("sample dimension mismatch: expected " +
                                    std::to_string(dim()) + ", got " +
                                    std::to_string(value.size()));
    }
    samples_.col(k) = value;
}

Eigen::VectorXd TimeSeries::window(Eigen::Index first, Eigen::Index last) const {
    if (first < 0 || last >= length() || first > last) {
        throw std::out_of_range("invalid window [" + std::to_string(first) + ", " +
                                std::to_string(last) + "] for series of length " +
                                std::to_string(length()));
    }
    const Eigen::Index count = last - first + 1;
    Eigen::VectorXd w(dim() * count);
    for (Eigen::Index i = 0; i < count; ++i) {
        w.segment(i * dim(), dim()) = samples_.col(first + i);
    }
    return w;
}

TimeSeries TimeSeries::segment(Eigen::Index first, Eigen::Index count) const {
    if (first < 0 || count < 1 || first + count > length()) {
        throw std::out_of_range("invalid segment [" + std::to_string(first) + ", " +
                                std::to_string(first + count - 1) + "] for series of length " +
                                std::to_string(length()));
    }
    return TimeSeries(samples_.middleCols(first, count));
}

} // namespace pekit
