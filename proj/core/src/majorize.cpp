#include "l2e/majorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>

#include "l2e/error.hpp"
#include "l2e/numeric.hpp"

namespace l2e {

namespace {

constexpr Index kDenseSolveMaxCols = 500;
constexpr double kCgTolerance = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kRefineEvery = 5;
constexpr double kNormalEqMinRatio = 1e-6;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double soft_threshold(double x, double t)
{
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

double sign(double x)
{
    return static_cast<double>((x > 0.0) - (x < 0.0));
}

double mcp_value(double b, double lambda, double gamma)
{
    const double a = std::abs(b);
    if (a <= gamma * lambda) return lambda * a - a * a / (2.0 * gamma);
    return 0.5 * gamma * lambda * lambda;
}

// argmin_b 0.5 v (b - z)^2 + lambda |b|, with g = v z.
double lasso_coordinate(double g, double v, double lambda)
{
    return soft_threshold(g, lambda) / v;
}

// argmin_b 0.5 v (b - z)^2 + MCP(b; lambda, gamma), with g = v z. The 1-D problem is
// nonconvex when v gamma <= 1, so candidates are compared by value; ties go to the
// smaller magnitude.
double mcp_coordinate(double g, double v, double lambda, double gamma)
{
    const double z = g / v;
    const double gl = gamma * lambda;
    auto f = [&](double b) { return 0.5 * v * (b - z) * (b - z) + mcp_value(b, lambda, gamma); };

    double best = 0.0;
    double best_val = f(0.0);
    auto consider = [&](double b) {
        const double val = f(b);
        if (val < best_val) {
            best = b;
            best_val = val;
        }
    };
    if (v * gamma > 1.0) {
        const double b1 = soft_threshold(g, lambda) / (v - 1.0 / gamma);
        if (std::abs(b1) <= gl) consider(b1);
        if (std::abs(z) > gl) consider(z);
        return best;
    }
    consider(sign(z) * gl);
    if (std::abs(z) > gl) consider(z);
    return best;
}

VectorXd column_sq_norms(const MatrixXd& X)
{
    return X.colwise().squaredNorm().transpose();
}

VectorXd solve_normal_cg(const MatrixXd& A, const VectorXd& rhs, const VectorXd* guess)
{
    Eigen::ConjugateGradient<MatrixXd, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(kCgTolerance);
    cg.setMaxIterations(std::max<Index>(10 * A.cols(), 1000));
    cg.compute(A);
    VectorXd out = guess ? cg.solveWithGuess(rhs, *guess) : VectorXd(cg.solve(rhs));
    if (!out.allFinite()) throw NumericalError("conjugate gradient produced a non-finite solution");
    return out;
}

// Diagonal of X~ when the system is diagonal (structurally or flagged); nullopt otherwise.
std::optional<VectorXd> diagonal_of(const WeightedSystem& sys)
{
    if (sys.diagonal) return sys.sqrt_w;
    const MatrixXd& X = sys.X_tilde;
    if (X.rows() != X.cols()) return std::nullopt;
    const VectorXd d = X.diagonal();
    MatrixXd off = X;
    off.diagonal().setZero();
    if (!off.isZero(0.0)) return std::nullopt;
    if ((d.array() == 0.0).any()) return std::nullopt;
    return d;
}

enum class CdKind { lasso, mcp };

VectorXd coordinate_descent(const WeightedSystem& sys, CdKind kind, double lambda, double gamma,
                            const std::optional<VectorXd>& warm, const CoordinateDescentOptions& opts)
{
    if (lambda < 0.0) throw InvalidArgument("penalty lambda must be nonnegative");
    if (kind == CdKind::mcp && !(gamma > 0.0)) throw InvalidArgument("MCP gamma must be positive");
    const Index p = sys.cols();
    VectorXd beta = warm ? *warm : VectorXd::Zero(p);
    if (beta.size() != p) throw InvalidArgument("warm start has the wrong length");

    auto coord = [&](double g, double v) {
        return kind == CdKind::lasso ? lasso_coordinate(g, v, lambda) : mcp_coordinate(g, v, lambda, gamma);
    };

    if (sys.diagonal) {
        // Separable: one pass is exact.
        for (Index j = 0; j < p; ++j) {
            const double d = sys.sqrt_w[j];
            beta[j] = coord(d * sys.y_tilde[j], d * d);
        }
        return beta;
    }

    const MatrixXd& X = sys.X_tilde;
    // Zero-solution threshold.
    if (kind == CdKind::lasso && lambda >= (X.transpose() * sys.y_tilde).lpNorm<Eigen::Infinity>())
        return VectorXd::Zero(p);
    const VectorXd v = column_sq_norms(X);
    VectorXd r = sys.y_tilde - X * beta;
    auto kkt = [&](const VectorXd& b) {
        return kind == CdKind::lasso ? lasso_kkt_violation(sys, b, lambda)
                                     : mcp_kkt_violation(sys, b, lambda, gamma);
    };
    auto objective = [&](const VectorXd& b, const VectorXd& res) {
        double pen = 0.0;
        for (Index j = 0; j < p; ++j)
            pen += kind == CdKind::lasso ? lambda * std::abs(b[j]) : mcp_value(b[j], lambda, gamma);
        return 0.5 * res.squaredNorm() + pen;
    };

    // Solves the stationarity equations on the current support with signs (and MCP
    // regions) held fixed. Kept only if the pattern survives and the objective does
    // not increase; coordinate sweeps then certify the result as usual.
    std::optional<MatrixXd> gram;
    std::optional<VectorXd> xty;
    std::vector<int> last_pattern;
    auto refine = [&] {
        std::vector<int> pattern(static_cast<std::size_t>(p), 0);
        std::vector<Index> act;
        for (Index j = 0; j < p; ++j) {
            if (beta[j] == 0.0 || v[j] == 0.0) continue;
            act.push_back(j);
            const bool flat = kind == CdKind::mcp && std::abs(beta[j]) > gamma * lambda;
            pattern[static_cast<std::size_t>(j)] = static_cast<int>(sign(beta[j])) * (flat ? 2 : 1);
        }
        if (act.empty() || pattern == last_pattern) return;
        last_pattern = pattern;
        if (!gram) {
            gram = X.transpose() * X;
            xty = X.transpose() * sys.y_tilde;
        }
        const auto m = static_cast<Index>(act.size());
        MatrixXd H(m, m);
        VectorXd rhs(m);
        for (Index a = 0; a < m; ++a) {
            const Index j = act[static_cast<std::size_t>(a)];
            for (Index b = 0; b < m; ++b) H(a, b) = (*gram)(j, act[static_cast<std::size_t>(b)]);
            rhs[a] = (*xty)[j];
            if (std::abs(pattern[static_cast<std::size_t>(j)]) == 1) {
                rhs[a] -= lambda * sign(beta[j]);
                if (kind == CdKind::mcp) H(a, a) -= 1.0 / gamma;
            }
        }
        const VectorXd bA = Eigen::PartialPivLU<MatrixXd>(H).solve(rhs);
        VectorXd cand = VectorXd::Zero(p);
        for (Index a = 0; a < m; ++a) {
            const Index j = act[static_cast<std::size_t>(a)];
            const double bj = bA[a];
            const int code = pattern[static_cast<std::size_t>(j)];
            if (!std::isfinite(bj) || sign(bj) != sign(beta[j])) return;
            if (kind == CdKind::mcp && (std::abs(bj) > gamma * lambda) != (std::abs(code) == 2)) return;
            cand[j] = bj;
        }
        const VectorXd rc = sys.y_tilde - X * cand;
        if (objective(cand, rc) <= objective(beta, r)) {
            beta = cand;
            r = rc;
        }
    };

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double max_delta = 0.0;
        for (Index j = 0; j < p; ++j) {
            if (v[j] == 0.0) {
                beta[j] = 0.0;
                continue;
            }
            const double g = X.col(j).dot(r) + v[j] * beta[j];
            const double b = coord(g, v[j]);
            const double delta = b - beta[j];
            if (delta != 0.0) {
                r.noalias() -= delta * X.col(j);
                beta[j] = b;
                max_delta = std::max(max_delta, v[j] * std::abs(delta));
            }
        }
        if (max_delta < opts.tol) {
            r = sys.y_tilde - X * beta;
            if (kkt(beta) < opts.tol) break;
        }
        if (sweep % kRefineEvery == kRefineEvery - 1) refine();
    }
    return beta;
}

} // namespace

void validate_penalty(const Penalty& pen)
{
    std::visit(overloaded{
                   [](const NoPenalty&) {},
                   [](const LassoPenalty& p) {
                       if (!(p.lambda >= 0.0)) throw InvalidArgument("lasso lambda must be nonnegative");
                   },
                   [](const McpPenalty& p) {
                       if (!(p.lambda >= 0.0)) throw InvalidArgument("MCP lambda must be nonnegative");
                       if (!(p.gamma > 1.0)) throw InvalidArgument("MCP gamma must exceed 1");
                   },
                   [](const IndicatorPenalty& p) {
                       if (p.set.kind == SetKind::sparse && p.set.k < 1)
                           throw InvalidArgument("sparse set needs k >= 1");
                   },
                   [](const DistancePenalty& p) {
                       if (!(p.rho > 0.0)) throw InvalidArgument("distance penalty rho must be positive");
                       if (p.set.kind == SetKind::sparse && p.set.k < 1)
                           throw InvalidArgument("sparse set needs k >= 1");
                   },
               },
               pen);
}

std::string describe_penalty(const Penalty& pen)
{
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const NoPenalty&) { os << "none"; },
                   [&](const LassoPenalty& p) { os << "lasso(lambda=" << p.lambda << ")"; },
                   [&](const McpPenalty& p) { os << "mcp(lambda=" << p.lambda << ", gamma=" << p.gamma << ")"; },
                   [&](const IndicatorPenalty& p) { os << "indicator(" << p.set.describe() << ")"; },
                   [&](const DistancePenalty& p) {
                       os << "distance(rho=" << p.rho << ", D="
                          << (p.fusion ? (p.fusion->is_identity() ? "I" : "fusion") : "I") << ", "
                          << p.set.describe() << ")";
                   },
               },
               pen);
    return os.str();
}

double penalty_value(const Penalty& pen, const VectorXd& beta)
{
    return std::visit(overloaded{
                          [](const NoPenalty&) { return 0.0; },
                          [&](const LassoPenalty& p) { return p.lambda * beta.lpNorm<1>(); },
                          [&](const McpPenalty& p) {
                              double s = 0.0;
                              for (Index j = 0; j < beta.size(); ++j) s += mcp_value(beta[j], p.lambda, p.gamma);
                              return s;
                          },
                          [&](const IndicatorPenalty& p) {
                              if (p.set.kind == SetKind::whole_space) return 0.0;
                              return project(p.set, beta) == beta ? 0.0 : kInf;
                          },
                          [&](const DistancePenalty& p) {
                              const double d = distance_to_set(p.set, p.apply_fusion(beta));
                              return 0.5 * p.rho * d * d;
                          },
                      },
                      pen);
}

double penalized_objective(const Dataset& data, const VectorXd& beta, double eta, const Penalty& pen)
{
    return l2e_loss(data, beta, eta).value + penalty_value(pen, beta);
}

QuadraticMajorizer sharp_majorizer(double rk, double a)
{
    if (!(a > 0.0) || !std::isfinite(a)) throw InvalidArgument("sharp_majorizer: a must be positive and finite");
    if (!std::isfinite(rk)) throw InvalidArgument("sharp_majorizer: anchor must be finite");
    const double e = std::exp(-a * rk * rk);
    return {-e - a * e * rk * rk, a * e};
}

double surrogate_scale(Index n, double eta)
{
    return std::exp(3.0 * eta) * std::sqrt(2.0 / std::numbers::pi) / static_cast<double>(n);
}

Penalty scale_penalty(const Penalty& pen, double c)
{
    if (!(c > 0.0) || !std::isfinite(c)) throw NumericalError("surrogate scale must be positive and finite");
    return std::visit(overloaded{
                          [](const NoPenalty& p) -> Penalty { return p; },
                          [&](const LassoPenalty& p) -> Penalty { return LassoPenalty{p.lambda / c}; },
                          // MCP(b; lambda, gamma) / c == MCP(b; lambda / c, gamma * c)
                          [&](const McpPenalty& p) -> Penalty { return McpPenalty{p.lambda / c, p.gamma * c}; },
                          [](const IndicatorPenalty& p) -> Penalty { return p; },
                          [&](const DistancePenalty& p) -> Penalty {
                              DistancePenalty q = p;
                              q.rho = p.rho / c;
                              return q;
                          },
                      },
                      pen);
}

MatrixXd WeightedSystem::design() const
{
    if (diagonal) return MatrixXd(sqrt_w.asDiagonal());
    return X_tilde;
}

double WeightedSystem::surrogate(const VectorXd& beta) const
{
    const VectorXd res = diagonal ? VectorXd(y_tilde - sqrt_w.cwiseProduct(beta)) : VectorXd(y_tilde - X_tilde * beta);
    return 0.5 * pairwise_dot(res, res);
}

WeightedSystem build_weighted_system(const Dataset& data, const VectorXd& weights)
{
    if (weights.size() != data.n())
        throw InvalidArgument("build_weighted_system: weights length " + std::to_string(weights.size())
                              + " does not match n = " + std::to_string(data.n()));
    if (!weights.allFinite() || (weights.array() <= 0.0).any())
        throw InvalidArgument("build_weighted_system: weights must be positive and finite");
    WeightedSystem sys;
    sys.sqrt_w = weights.cwiseSqrt();
    sys.y_tilde = sys.sqrt_w.cwiseProduct(data.y());
    if (data.has_identity_design()) {
        sys.diagonal = true;
    } else {
        sys.X_tilde = sys.sqrt_w.asDiagonal() * data.X();
    }
    return sys;
}

VectorXd solve_wls(const WeightedSystem& sys)
{
    if (sys.diagonal) return sys.y_tilde.cwiseQuotient(sys.sqrt_w);
    const MatrixXd& X = sys.X_tilde;
    if (X.cols() <= kDenseSolveMaxCols) {
        Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(X);
        VectorXd beta = cod.solve(sys.y_tilde);
        if (!beta.allFinite()) throw NumericalError("solve_wls: non-finite solution");
        return beta;
    }
    const MatrixXd A = X.transpose() * X;
    const VectorXd rhs = X.transpose() * sys.y_tilde;
    return solve_normal_cg(A, rhs, nullptr);
}

VectorXd solve_wls_lasso(const WeightedSystem& sys, double lambda, const std::optional<VectorXd>& warm_start,
                         const CoordinateDescentOptions& opts)
{
    return coordinate_descent(sys, CdKind::lasso, lambda, 0.0, warm_start, opts);
}

VectorXd solve_wls_mcp(const WeightedSystem& sys, double lambda, double gamma,
                       const std::optional<VectorXd>& warm_start, const CoordinateDescentOptions& opts)
{
    if (!(gamma > 1.0)) throw InvalidArgument("MCP gamma must exceed 1");
    return coordinate_descent(sys, CdKind::mcp, lambda, gamma, warm_start, opts);
}

double lasso_kkt_violation(const WeightedSystem& sys, const VectorXd& beta, double lambda)
{
    const MatrixXd X = sys.design();
    const VectorXd g = X.transpose() * (sys.y_tilde - X * beta);
    double worst = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        const double viol = beta[j] == 0.0 ? std::max(std::abs(g[j]) - lambda, 0.0)
                                           : std::abs(g[j] - lambda * sign(beta[j]));
        worst = std::max(worst, viol);
    }
    return worst;
}

double mcp_kkt_violation(const WeightedSystem& sys, const VectorXd& beta, double lambda, double gamma)
{
    const MatrixXd X = sys.design();
    const VectorXd g = X.transpose() * (sys.y_tilde - X * beta);
    double worst = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        const double a = std::abs(beta[j]);
        double viol = 0.0;
        if (beta[j] == 0.0) {
            viol = std::max(std::abs(g[j]) - lambda, 0.0);
        } else if (a <= gamma * lambda) {
            viol = std::abs(g[j] - sign(beta[j]) * (lambda - a / gamma));
        } else {
            viol = std::abs(g[j]);
        }
        worst = std::max(worst, viol);
    }
    return worst;
}

VectorXd solve_wls_indicator(const WeightedSystem& sys, const ConstraintSet& set)
{
    if (set.kind == SetKind::whole_space) return solve_wls(sys);
    const std::optional<VectorXd> d = diagonal_of(sys);
    if (!d)
        throw UnsupportedConfiguration("indicator penalty on " + set.describe()
                                       + " requires an identity design (diagonal weighted system)");
    const VectorXd v = sys.y_tilde.cwiseQuotient(*d);
    switch (set.kind) {
    case SetKind::isotonic: return project_isotonic(v, d->cwiseAbs2());
    case SetKind::nonnegative: return project_nonneg(v);
    case SetKind::sparse: {
        // Keeping coordinate i saves d_i^2 v_i^2 = y~_i^2, so rank by |y~_i|.
        const VectorXd kept = project_sparse(sys.y_tilde, set.k);
        VectorXd out = VectorXd::Zero(v.size());
        for (Index i = 0; i < v.size(); ++i) {
            if (kept[i] != 0.0) out[i] = v[i];
        }
        return out;
    }
    case SetKind::whole_space: break;
    }
    return v;
}

VectorXd solve_wls_distance(const WeightedSystem& sys, const DistancePenalty& pen, const VectorXd& beta_prev)
{
    if (!(pen.rho > 0.0)) throw InvalidArgument("distance penalty rho must be positive");
    const Index p = sys.cols();
    if (beta_prev.size() != p) throw InvalidArgument("solve_wls_distance: beta_prev has the wrong length");
    if (pen.fusion && pen.fusion->cols() != p)
        throw InvalidArgument("solve_wls_distance: fusion matrix has " + std::to_string(pen.fusion->cols())
                              + " columns, expected " + std::to_string(p));
    const bool identity_fusion = !pen.fusion || pen.fusion->is_identity();
    const VectorXd target = project(pen.set, pen.apply_fusion(beta_prev));
    const double rho = pen.rho;

    if (sys.diagonal) {
        const VectorXd d2 = sys.sqrt_w.cwiseAbs2();
        const VectorXd dy = sys.sqrt_w.cwiseProduct(sys.y_tilde);
        if (identity_fusion) {
            return (dy + rho * target).cwiseQuotient((d2.array() + rho).matrix());
        }
        using SpMat = Eigen::SparseMatrix<double>;
        const SpMat D = pen.fusion->sparse();
        SpMat A = rho * SpMat(D.transpose() * D);
        for (Index i = 0; i < p; ++i) A.coeffRef(i, i) += d2[i];
        const VectorXd rhs = dy + rho * pen.fusion->apply_transpose(target);
        Eigen::SimplicialLDLT<SpMat> ldlt(A);
        if (ldlt.info() != Eigen::Success) throw NumericalError("solve_wls_distance: sparse factorization failed");
        VectorXd beta = ldlt.solve(rhs);
        if (!beta.allFinite()) throw NumericalError("solve_wls_distance: non-finite solution");
        return beta;
    }

    const MatrixXd& X = sys.X_tilde;
    // With D = I the normal matrix has smallest eigenvalue >= rho, so its condition
    // number is at most 1 + ||X~||_F^2 / rho and Cholesky is accurate.
    if (identity_fusion && p <= kDenseSolveMaxCols && rho >= kNormalEqMinRatio * X.squaredNorm()) {
        MatrixXd A = MatrixXd::Zero(p, p);
        A.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
        A.diagonal().array() += rho;
        const Eigen::LLT<MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            VectorXd beta = llt.solve(X.transpose() * sys.y_tilde + rho * target);
            if (!beta.allFinite()) throw NumericalError("solve_wls_distance: non-finite solution");
            return beta;
        }
    }
    const MatrixXd D = identity_fusion ? MatrixXd::Identity(p, p) : pen.fusion->dense();
    const double sr = std::sqrt(rho);
    if (p <= kDenseSolveMaxCols) {
        MatrixXd stacked(X.rows() + D.rows(), p);
        stacked << X, sr * D;
        VectorXd rhs(X.rows() + D.rows());
        rhs << sys.y_tilde, sr * target;
        Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(stacked);
        VectorXd beta = cod.solve(rhs);
        if (!beta.allFinite()) throw NumericalError("solve_wls_distance: non-finite solution");
        return beta;
    }
    const MatrixXd A = X.transpose() * X + rho * (D.transpose() * D);
    const VectorXd rhs = X.transpose() * sys.y_tilde + rho * (D.transpose() * target);
    return solve_normal_cg(A, rhs, &beta_prev);
}

VectorXd solve_surrogate(const WeightedSystem& sys, const Penalty& scaled_pen, const VectorXd& beta_prev)
{
    return std::visit(overloaded{
                          [&](const NoPenalty&) { return solve_wls(sys); },
                          [&](const LassoPenalty& p) {
                              return solve_wls_lasso(sys, p.lambda, std::optional<VectorXd>(beta_prev));
                          },
                          [&](const McpPenalty& p) {
                              // gamma here is rescaled by the surrogate constant and may be <= 1.
                              return coordinate_descent(sys, CdKind::mcp, p.lambda, p.gamma, beta_prev, {});
                          },
                          [&](const IndicatorPenalty& p) { return solve_wls_indicator(sys, p.set); },
                          [&](const DistancePenalty& p) { return solve_wls_distance(sys, p, beta_prev); },
                      },
                      scaled_pen);
}

BetaUpdate mm_beta_update(const Dataset& data, const FitState& state, const Penalty& pen, int max_inner, double tol)
{
    if (max_inner < 1) throw InvalidArgument("mm_beta_update: max_inner must be at least 1");
    if (state.beta.size() != data.p()) throw InvalidArgument("mm_beta_update: beta has the wrong length");
    validate_penalty(pen);

    const double eta = state.eta;
    const Penalty scaled = scale_penalty(pen, surrogate_scale(data.n(), eta));

    BetaUpdate out;
    out.beta = state.beta;
    VectorXd r = residuals(data, out.beta);
    double f_prev = l2e_loss_from_residuals(r, eta).value + penalty_value(pen, out.beta);

    for (int it = 0; it < max_inner; ++it) {
        const WeightedSystem sys = build_weighted_system(data, case_weights(r, eta));
        VectorXd next = solve_surrogate(sys, scaled, out.beta);
        VectorXd r_next = residuals(data, next);
        const double f = l2e_loss_from_residuals(r_next, eta).value + penalty_value(pen, next);
        // MM cannot increase the objective; an increase here is rounding in the solve.
        if (!(f <= f_prev)) {
            out.stalled = true;
            break;
        }
        out.beta = std::move(next);
        r = std::move(r_next);
        out.objective_trace.push_back(f);
        out.iterations = it + 1;
        if (std::isfinite(f_prev)
            && std::abs(f_prev - f) <= tol * std::max(std::abs(f_prev), std::numeric_limits<double>::min())) {
            out.converged = true;
            break;
        }
        f_prev = f;
    }
    return out;
}

} // namespace l2e
