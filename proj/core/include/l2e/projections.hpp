#pragma once

#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "l2e/model.hpp"

namespace l2e {

enum class SetKind { whole_space, isotonic, sparse, nonnegative };

/// Closed set C used by indicator and distance penalties.
struct ConstraintSet {
    SetKind kind = SetKind::whole_space;
    Index k = 0; ///< sparsity level, used only when kind == sparse

    static ConstraintSet whole_space() { return {SetKind::whole_space, 0}; }
    static ConstraintSet isotonic() { return {SetKind::isotonic, 0}; }
    static ConstraintSet nonnegative() { return {SetKind::nonnegative, 0}; }
    static ConstraintSet sparse(Index k) { return {SetKind::sparse, k}; }

    bool is_convex() const { return kind != SetKind::sparse; }
    std::string describe() const;
};

/// Weighted isotonic least squares: argmin sum w_i (v_i - b_i)^2 over nondecreasing b.
/// Stack-based pool-adjacent-violators, O(n).
VectorXd project_isotonic(const VectorXd& v, const VectorXd& w);
VectorXd project_isotonic(const VectorXd& v);

/// Nonincreasing fit, via negation around project_isotonic.
VectorXd project_antitonic(const VectorXd& v, const VectorXd& w);

/// Keep the k largest-magnitude entries. Ties at the cutoff keep the lower index.
VectorXd project_sparse(const VectorXd& v, Index k);

VectorXd project_nonneg(const VectorXd& v);

/// Euclidean projection onto `set` (unit weights for isotonic).
VectorXd project(const ConstraintSet& set, const VectorXd& v);

/// dist(v, C) = ||v - P_C(v)||.
double distance_to_set(const ConstraintSet& set, const VectorXd& v);

/// Linear map D for fusion constraints D beta in C. Stored sparse, row-major.
class FusionMatrix {
public:
    using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    static FusionMatrix identity(Index p);
    /// Order-1 rows (-1, 1) or order-2 rows (1, -2, 1), shifted along the diagonal.
    static FusionMatrix difference(Index n, int order);
    static FusionMatrix from_sparse(Sparse m);

    Index rows() const noexcept { return mat_.rows(); }
    Index cols() const noexcept { return mat_.cols(); }
    bool is_identity() const noexcept { return identity_; }

    VectorXd apply(const VectorXd& beta) const;
    VectorXd apply_transpose(const VectorXd& v) const;
    const Sparse& sparse() const noexcept { return mat_; }
    MatrixXd dense() const { return MatrixXd(mat_); }

private:
    explicit FusionMatrix(Sparse m, bool identity) : mat_(std::move(m)), identity_(identity) {}

    Sparse mat_;
    bool identity_ = false;
};

FusionMatrix difference_matrix(Index n, int order);

} // namespace l2e
