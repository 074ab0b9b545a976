#include "l2e/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "l2e/error.hpp"

namespace l2e {

namespace {

constexpr std::size_t kPairwiseBlock = 16;

double pairwise_sum_impl(const double* x, std::size_t n)
{
    if (n <= kPairwiseBlock) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_impl(x, half) + pairwise_sum_impl(x + half, n - half);
}

} // namespace

double pairwise_sum(std::span<const double> values)
{
    return pairwise_sum_impl(values.data(), values.size());
}

double pairwise_dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    if (a.size() != b.size()) throw InvalidArgument("pairwise_dot: length mismatch");
    const Eigen::VectorXd prod = a.cwiseProduct(b);
    return pairwise_sum(prod);
}

Eigen::VectorXd pairwise_transpose_times(const Eigen::MatrixXd& X, const Eigen::VectorXd& v)
{
    if (X.rows() != v.size()) throw InvalidArgument("pairwise_transpose_times: row mismatch");
    Eigen::VectorXd out(X.cols());
    Eigen::VectorXd scratch(X.rows());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        scratch = X.col(j).cwiseProduct(v);
        out[j] = pairwise_sum(scratch);
    }
    return out;
}

double median(std::span<const double> values)
{
    if (values.empty()) throw InvalidArgument("median of an empty sequence");
    std::vector<double> v(values.begin(), values.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double median_absolute_deviation(std::span<const double> values)
{
    const double center = median(values);
    std::vector<double> dev(values.size());
    std::transform(values.begin(), values.end(), dev.begin(),
                   [center](double x) { return std::abs(x - center); });
    return median(dev);
}

} // namespace l2e
