#pragma once

#include <span>

#include <Eigen/Dense>

namespace l2e {

/// Pairwise (cascade) summation. Error grows as O(log n) instead of O(n).
double pairwise_sum(std::span<const double> values);

inline double pairwise_sum(const Eigen::VectorXd& v)
{
    return pairwise_sum(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

/// Sum of a[i] * b[i] with pairwise reduction.
double pairwise_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// X^T v where each column reduction uses pairwise summation.
Eigen::VectorXd pairwise_transpose_times(const Eigen::MatrixXd& X, const Eigen::VectorXd& v);

/// Median; even lengths average the two middle order statistics.
double median(std::span<const double> values);

/// Unscaled median absolute deviation about the median.
double median_absolute_deviation(std::span<const double> values);

} // namespace l2e
