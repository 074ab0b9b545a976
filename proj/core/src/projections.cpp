#include "l2e/projections.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "l2e/error.hpp"

namespace l2e {

std::string ConstraintSet::describe() const
{
    switch (kind) {
    case SetKind::whole_space: return "whole-space";
    case SetKind::isotonic: return "isotonic";
    case SetKind::nonnegative: return "nonnegative";
    case SetKind::sparse: return "sparse(" + std::to_string(k) + ")";
    }
    return "unknown";
}

VectorXd project_isotonic(const VectorXd& v, const VectorXd& w)
{
    if (v.size() != w.size()) throw InvalidArgument("project_isotonic: v and w differ in length");
    for (Index i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0.0)) throw InvalidArgument("project_isotonic: weights must be positive");
    }

    // Singletons carry v_i itself so feasible inputs come back bit-exact.
    struct Block {
        double wsum;
        double wvsum;
        double value;
        Index len;
    };
    std::vector<Block> stack;
    stack.reserve(static_cast<std::size_t>(v.size()));

    for (Index i = 0; i < v.size(); ++i) {
        stack.push_back({w[i], w[i] * v[i], v[i], 1});
        while (stack.size() > 1) {
            const Block& top = stack.back();
            const Block& below = stack[stack.size() - 2];
            if (below.value <= top.value) break;
            const double wsum = below.wsum + top.wsum;
            const double wvsum = below.wvsum + top.wvsum;
            const Index len = below.len + top.len;
            stack.pop_back();
            stack.back() = {wsum, wvsum, wvsum / wsum, len};
        }
    }

    VectorXd out(v.size());
    Index pos = 0;
    for (const Block& b : stack) {
        out.segment(pos, b.len).setConstant(b.value);
        pos += b.len;
    }
    return out;
}

VectorXd project_isotonic(const VectorXd& v)
{
    return project_isotonic(v, VectorXd::Ones(v.size()));
}

VectorXd project_antitonic(const VectorXd& v, const VectorXd& w)
{
    const VectorXd negated = -v;
    return -project_isotonic(negated, w);
}

VectorXd project_sparse(const VectorXd& v, Index k)
{
    if (k < 1) throw InvalidArgument("project_sparse: k must be positive");
    if (k >= v.size()) return v;
    std::vector<Index> order(static_cast<std::size_t>(v.size()));
    std::iota(order.begin(), order.end(), Index{0});
    auto before = [&v](Index a, Index b) {
        const double ma = std::abs(v[a]);
        const double mb = std::abs(v[b]);
        return ma > mb || (ma == mb && a < b);
    };
    std::nth_element(order.begin(), order.begin() + k, order.end(), before);
    VectorXd out = VectorXd::Zero(v.size());
    for (Index i = 0; i < k; ++i) {
        const Index j = order[static_cast<std::size_t>(i)];
        out[j] = v[j];
    }
    return out;
}

VectorXd project_nonneg(const VectorXd& v)
{
    return v.cwiseMax(0.0);
}

VectorXd project(const ConstraintSet& set, const VectorXd& v)
{
    switch (set.kind) {
    case SetKind::whole_space: return v;
    case SetKind::isotonic: return project_isotonic(v);
    case SetKind::nonnegative: return project_nonneg(v);
    case SetKind::sparse: return project_sparse(v, set.k);
    }
    throw InvalidArgument("project: unknown set kind");
}

double distance_to_set(const ConstraintSet& set, const VectorXd& v)
{
    return (v - project(set, v)).norm();
}

FusionMatrix FusionMatrix::identity(Index p)
{
    if (p < 1) throw InvalidArgument("FusionMatrix::identity: p must be positive");
    Sparse m(p, p);
    m.setIdentity();
    return FusionMatrix(std::move(m), true);
}

FusionMatrix FusionMatrix::difference(Index n, int order)
{
    if (order != 1 && order != 2) throw InvalidArgument("difference_matrix: order must be 1 or 2");
    if (n < order + 1)
        throw InvalidArgument("difference_matrix: need at least " + std::to_string(order + 1)
                              + " points for order " + std::to_string(order));
    const Index rows = n - order;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(rows * (order + 1)));
    for (Index i = 0; i < rows; ++i) {
        if (order == 1) {
            trips.emplace_back(i, i, -1.0);
            trips.emplace_back(i, i + 1, 1.0);
        } else {
            trips.emplace_back(i, i, 1.0);
            trips.emplace_back(i, i + 1, -2.0);
            trips.emplace_back(i, i + 2, 1.0);
        }
    }
    Sparse m(rows, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return FusionMatrix(std::move(m), false);
}

FusionMatrix FusionMatrix::from_sparse(Sparse m)
{
    const bool ident = m.rows() == m.cols() && MatrixXd(m).isIdentity(0.0);
    return FusionMatrix(std::move(m), ident);
}

VectorXd FusionMatrix::apply(const VectorXd& beta) const
{
    if (beta.size() != cols()) throw InvalidArgument("FusionMatrix::apply: length mismatch");
    if (identity_) return beta;
    return mat_ * beta;
}

VectorXd FusionMatrix::apply_transpose(const VectorXd& v) const
{
    if (v.size() != rows()) throw InvalidArgument("FusionMatrix::apply_transpose: length mismatch");
    if (identity_) return v;
    return mat_.transpose() * v;
}

FusionMatrix difference_matrix(Index n, int order)
{
    return FusionMatrix::difference(n, order);
}

} // namespace l2e
