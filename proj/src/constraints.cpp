#include "frfit/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace frfit {

namespace {

constexpr double kIllConditioned = 1e12;

double matrix_condition(const Mat& m) {
    if (m.rows() == 0 || m.cols() == 0) return 1.0;
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

// Null-space basis of A (columns span {x : A x = 0}).
Mat null_space_basis(const Mat& A, Eigen::Index& rank_out) {
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
    const Vec& sv = svd.singularValues();
    const double tol = std::max(A.rows(), A.cols()) * Eigen::NumTraits<double>::epsilon() *
                       (sv.size() ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++rank;
    rank_out = rank;
    return svd.matrixV().rightCols(A.cols() - rank);
}

Vec min_norm_solve(const Mat& A, const Vec& b) {
    return A.completeOrthogonalDecomposition().solve(b);
}

}  // namespace

CoefficientMap build_coefficient_map(const BasisSet& basis, const BilinearMap& map) {
    const int r = basis.order;
    const int n = r + 1;
    const double node_tol = 1e-8;

    CoefficientMap out;
    out.alpha = map.alpha;

    for (int attempt = 0; attempt < 4; ++attempt) {
        // Circle nodes in the scaled variable u = s/alpha, offset half a
        // step off the roots of unity (plus a further half-step per retry)
        // to dodge u = 1 (where q blows up) and basis poles.
        CVec u_nodes(n), q_nodes(n);
        bool singular = false;
        for (int t = 0; t < n && !singular; ++t) {
            const double theta =
                (2.0 * std::numbers::pi * t + std::numbers::pi * (1.0 + 0.5 * attempt)) / n;
            const Cplx u(std::cos(theta), std::sin(theta));
            if (std::abs(u - Cplx(1.0, 0.0)) <= node_tol) {
                singular = true;
                break;
            }
            const Cplx q = (1.0 + u) / (1.0 - u);  // = to_disk(map, alpha*u)
            for (Eigen::Index k = 0; k < basis.points.size(); ++k) {
                if (std::abs(q - basis.points(k)) <= node_tol) {
                    singular = true;
                    break;
                }
            }
            u_nodes(t) = u;
            q_nodes(t) = q;
        }
        if (singular) continue;

        // With s = alpha*u: sum_v d_v alpha^v u^v =
        //   d(q(u)) * alpha^r (1-u)^r prod(q - p), so
        //   diag(alpha^v) theta_s = alpha^r V(u)^{-1} diag((1-u_t)^r prod) B theta_q
        // and the alpha-free core below carries everything except exact
        // diagonal scalings.
        CMat V(n, n);
        for (int t = 0; t < n; ++t) {
            Cplx p(1.0, 0.0);
            for (int v = 0; v < n; ++v) {
                V(t, v) = p;
                p *= u_nodes(t);
            }
        }
        CVec diag(n);
        for (int t = 0; t < n; ++t) {
            Cplx g = std::pow(Cplx(1.0, 0.0) - u_nodes(t), r);
            for (Eigen::Index k = 0; k < basis.points.size(); ++k)
                g *= q_nodes(t) - basis.points(k);
            diag(t) = g;
        }
        CMat B(n, n);
        for (int t = 0; t < n; ++t) B.row(t) = eval_basis(basis, q_nodes(t));

        const CMat core_c = (V.adjoint() * (diag.asDiagonal() * B)) / static_cast<double>(n);
        out.core = core_c.real();
        out.max_imag_residue =
            core_c.imag().cwiseAbs().maxCoeff() / std::max(1.0, out.core.cwiseAbs().maxCoeff());

        out.T = out.core;
        double row_scale = std::pow(map.alpha, r);
        for (int v = 0; v < n; ++v) {
            out.T.row(v) *= row_scale;  // alpha^(r-v)
            row_scale /= map.alpha;
        }
        out.nodes_vandermonde = u_nodes;
        out.nodes_s = map.alpha * u_nodes;
        out.nodes_q = q_nodes;
        const double diag_cond = std::pow(std::max(map.alpha, 1.0 / map.alpha), r);
        out.condition = matrix_condition(out.core) * diag_cond;
        out.ill_conditioned = out.condition > kIllConditioned;
        return out;
    }
    throw NodeSingularity("could not place evaluation nodes away from basis poles");
}

Vec CoefficientMap::solve(const Vec& theta_s) const {
    const int n = static_cast<int>(T.rows());
    const int r = n - 1;
    Vec scaled(n);
    double row_scale = std::pow(alpha, -r);  // alpha^(v-r)
    for (int v = 0; v < n; ++v) {
        scaled(v) = theta_s(v) * row_scale;
        row_scale *= alpha;
    }
    return core.fullPivLu().solve(scaled);
}

namespace {

Eigen::Index ref_position(const ConstraintSet::CoefficientRef& ref, const OrderSpec& orders) {
    const int n = orders.basis_order() + 1;
    if (ref.index < 0 || ref.index >= n) throw std::invalid_argument("constraint index out of range");
    if (ref.is_denominator) return static_cast<Eigen::Index>(orders.channels) * n + ref.index;
    if (ref.channel < 0 || ref.channel >= orders.channels)
        throw std::invalid_argument("constraint channel out of range");
    return static_cast<Eigen::Index>(ref.channel) * n + ref.index;
}

}  // namespace

CompiledConstraints compile_constraints(const ConstraintSet& cs, const CoefficientMap& num_map,
                                        const CoefficientMap& den_map, const OrderSpec& orders) {
    const int r = orders.basis_order();
    const int n = r + 1;
    const Eigen::Index P = static_cast<Eigen::Index>(orders.channels + 1) * n;

    // Gather s-domain rows: user fixes, user affine rows, implicit degree
    // rows. Coordinate fixes are deduplicated (an implicit zero row may
    // repeat an explicit user fix).
    std::vector<std::pair<Eigen::Index, double>> coordinate_fixes;
    auto add_fix = [&](Eigen::Index pos, double value) {
        for (const auto& [p, v] : coordinate_fixes) {
            if (p == pos) {
                if (v != value)
                    throw RankDeficient("conflicting fixed values for one coefficient");
                return;
            }
        }
        coordinate_fixes.emplace_back(pos, value);
    };
    for (const ConstraintSet::Fix& f : cs.fixes) add_fix(ref_position(f.ref, orders), f.value);
    for (int ch = 0; ch < orders.channels; ++ch)
        for (int idx = orders.num_order + 1; idx <= r; ++idx)
            add_fix(static_cast<Eigen::Index>(ch) * n + idx, 0.0);
    for (int idx = orders.den_order + 1; idx <= r; ++idx)
        add_fix(static_cast<Eigen::Index>(orders.channels) * n + idx, 0.0);

    const Eigen::Index extra = cs.general_A.rows();
    if (extra > 0 && cs.general_A.cols() != P)
        throw DimensionMismatch("general constraint rows have wrong width");

    const Eigen::Index rows = static_cast<Eigen::Index>(coordinate_fixes.size()) + extra;
    Mat As = Mat::Zero(rows, P);
    Vec bs = Vec::Zero(rows);
    Eigen::Index rr = 0;
    for (const auto& [pos, value] : coordinate_fixes) {
        As(rr, pos) = 1.0;
        bs(rr) = value;
        ++rr;
    }
    if (extra > 0) {
        As.bottomRows(extra) = cs.general_A;
        bs.tail(extra) = cs.general_b;
    }

    // Transport to q-parameters: A_q = A_s blockdiag(T_num ... T_num, T_den).
    auto transport = [&](const Mat& rows_s) {
        Mat rows_q(rows_s.rows(), P);
        for (int ch = 0; ch < orders.channels; ++ch)
            rows_q.middleCols(static_cast<Eigen::Index>(ch) * n, n) =
                rows_s.middleCols(static_cast<Eigen::Index>(ch) * n, n) * num_map.T;
        rows_q.middleCols(static_cast<Eigen::Index>(orders.channels) * n, n) =
            rows_s.middleCols(static_cast<Eigen::Index>(orders.channels) * n, n) * den_map.T;
        return rows_q;
    };

    CompiledConstraints out;
    out.s_rows = As;
    out.s_rhs = bs;
    out.A = transport(As);
    out.b = bs;

    if (rows > 0) {
        Eigen::ColPivHouseholderQR<Mat> qr(out.A.transpose());
        if (qr.rank() < rows) throw RankDeficient("compiled equality constraints lost rank");
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double nrm = out.A.row(i).norm();
            out.A.row(i) /= nrm;
            out.b(i) /= nrm;
        }
    }

    if (!cs.bounds.empty()) {
        Mat brows_s = Mat::Zero(static_cast<Eigen::Index>(cs.bounds.size()), P);
        out.bound_lower = Vec(brows_s.rows());
        out.bound_upper = Vec(brows_s.rows());
        for (size_t i = 0; i < cs.bounds.size(); ++i) {
            brows_s(static_cast<Eigen::Index>(i), ref_position(cs.bounds[i].ref, orders)) = 1.0;
            out.bound_lower(static_cast<Eigen::Index>(i)) = cs.bounds[i].lower;
            out.bound_upper(static_cast<Eigen::Index>(i)) = cs.bounds[i].upper;
        }
        out.bound_rows = transport(brows_s);
    }
    return out;
}

ConstrainedLlsResult solve_constrained_lls(const Mat& M, const Vec& y, const Mat& Aeq,
                                           const Vec& beq, bool column_scaling) {
    if (M.rows() != y.size()) throw DimensionMismatch("regressor/target size mismatch");

    Mat Ms = M;
    Vec col_scale = Vec::Ones(M.cols());
    if (column_scaling) {
        for (Eigen::Index c = 0; c < Ms.cols(); ++c) {
            const double nrm = Ms.col(c).norm();
            if (nrm > 0.0) {
                col_scale(c) = nrm;
                Ms.col(c) /= nrm;
            }
        }
    }
    // In the scaled variable theta' = D theta the equalities become
    // Aeq D^{-1} theta' = beq.
    Mat As = Aeq;
    for (Eigen::Index c = 0; c < As.cols() && column_scaling; ++c) As.col(c) /= col_scale(c);

    ConstrainedLlsResult res;
    if (Aeq.rows() == 0) {
        res.theta = min_norm_solve(Ms, y);
        res.condition = matrix_condition(Ms);
        res.theta = res.theta.cwiseQuotient(col_scale);
        return res;
    }

    const Vec theta_p = min_norm_solve(As, beq);
    if ((As * theta_p - beq).norm() > 1e-8 * (1.0 + beq.norm()))
        throw InfeasibleConstraints("equality constraints are inconsistent");

    Eigen::Index rank = 0;
    const Mat Z = null_space_basis(As, rank);
    if (Z.cols() == 0) {
        res.theta = theta_p.cwiseQuotient(col_scale);
        res.condition = 1.0;
        return res;
    }
    const Mat MZ = Ms * Z;
    const Vec zeta = min_norm_solve(MZ, y - Ms * theta_p);
    res.theta = (theta_p + Z * zeta).cwiseQuotient(col_scale);
    res.condition = matrix_condition(MZ);
    return res;
}

Vec solve_constrained_stationarity(const Mat& G, const Vec& g, const Mat& Aeq, const Vec& beq) {
    const Eigen::Index p = G.rows();
    if (G.cols() != p || g.size() != p) throw DimensionMismatch("stationarity system must be square");

    const Eigen::Index m = Aeq.rows();
    Mat K(p + m, p + m);
    K.topLeftCorner(p, p) = G;
    Vec rhs(p + m);
    rhs.head(p) = g;
    if (m > 0) {
        K.topRightCorner(p, m) = Aeq.transpose();
        K.bottomLeftCorner(m, p) = Aeq;
        K.bottomRightCorner(m, m).setZero();
        rhs.tail(m) = beq;
    }

    Eigen::FullPivLU<Mat> lu(K);
    if (!lu.isInvertible()) throw SingularKKT("bordered stationarity system is singular");
    Vec sol = lu.solve(rhs);
    Vec theta = sol.head(p);
    if (m > 0) {
        // cheap feasibility restoration
        theta -= Aeq.transpose() * (Aeq * Aeq.transpose()).ldlt().solve(Aeq * theta - beq);
        if ((Aeq * theta - beq).norm() > 1e-10 * (1.0 + beq.norm()))
            throw SingularKKT("constraint residual did not close");
    }
    return theta;
}

namespace {

// Shared primal active-set driver. solve(rows, rhs) must return the
// minimizer subject to [cc.A; rows] theta = [cc.b; rhs]; multiplier(theta)
// returns the stationarity residual used to price active bounds.
template <typename Solver, typename Residual>
Vec active_set_loop(const CompiledConstraints& cc, Solver solve, Residual stationarity_residual) {
    const Eigen::Index nb = cc.bound_rows.rows();
    std::vector<int> active(nb, 0);  // -1 lower, +1 upper, 0 inactive

    const int max_iter = static_cast<int>(3 * nb + 10);
    Vec theta;
    for (int it = 0; it < max_iter; ++it) {
        std::vector<Eigen::Index> act;
        for (Eigen::Index i = 0; i < nb; ++i)
            if (active[i] != 0) act.push_back(i);

        Mat rows(static_cast<Eigen::Index>(act.size()), cc.bound_rows.cols());
        Vec rhs(rows.rows());
        for (size_t k = 0; k < act.size(); ++k) {
            rows.row(static_cast<Eigen::Index>(k)) = cc.bound_rows.row(act[k]);
            rhs(static_cast<Eigen::Index>(k)) =
                active[act[k]] < 0 ? cc.bound_lower(act[k]) : cc.bound_upper(act[k]);
        }
        theta = solve(rows, rhs);

        // most violated inactive bound joins the active set
        Eigen::Index worst = -1;
        double worst_violation = 0.0;
        int worst_side = 0;
        for (Eigen::Index i = 0; i < nb; ++i) {
            if (active[i] != 0) continue;
            const double v = cc.bound_rows.row(i).dot(theta);
            const double scale = 1.0 + std::abs(cc.bound_lower(i)) + std::abs(cc.bound_upper(i));
            if (v < cc.bound_lower(i) - 1e-10 * scale &&
                cc.bound_lower(i) - v > worst_violation) {
                worst_violation = cc.bound_lower(i) - v;
                worst = i;
                worst_side = -1;
            }
            if (v > cc.bound_upper(i) + 1e-10 * scale &&
                v - cc.bound_upper(i) > worst_violation) {
                worst_violation = v - cc.bound_upper(i);
                worst = i;
                worst_side = +1;
            }
        }
        if (worst >= 0) {
            active[worst] = worst_side;
            continue;
        }
        if (act.empty()) return theta;

        // price active bounds: grad + [A; rows]^T nu = 0; release the worst
        // wrong-sign multiplier (upper bounds need nu >= 0, lower nu <= 0).
        const Vec grad = stationarity_residual(theta);
        Mat C(cc.A.rows() + rows.rows(), cc.A.cols());
        if (cc.A.rows() > 0) C.topRows(cc.A.rows()) = cc.A;
        C.bottomRows(rows.rows()) = rows;
        const Vec nu = min_norm_solve(C.transpose(), -grad);
        Eigen::Index release = -1;
        double worst_sign = -1e-12;
        for (size_t k = 0; k < act.size(); ++k) {
            const double mult = nu(cc.A.rows() + static_cast<Eigen::Index>(k));
            const double signed_mult = active[act[k]] > 0 ? mult : -mult;
            if (signed_mult < worst_sign) {
                worst_sign = signed_mult;
                release = act[k];
            }
        }
        if (release < 0) return theta;
        active[release] = 0;
    }
    return theta;  // iteration cap: accept the last feasible-equality solve
}

}  // namespace

ConstrainedLlsResult solve_lls_with_bounds(const Mat& M, const Vec& y,
                                           const CompiledConstraints& cc, bool column_scaling) {
    if (!cc.has_bounds()) return solve_constrained_lls(M, y, cc.A, cc.b, column_scaling);

    ConstrainedLlsResult last;
    auto solve = [&](const Mat& rows, const Vec& rhs) {
        Mat A(cc.A.rows() + rows.rows(), M.cols());
        Vec b(A.rows());
        if (cc.A.rows() > 0) {
            A.topRows(cc.A.rows()) = cc.A;
            b.head(cc.A.rows()) = cc.b;
        }
        A.bottomRows(rows.rows()) = rows;
        b.tail(rows.rows()) = rhs;
        last = solve_constrained_lls(M, y, A, b, column_scaling);
        return last.theta;
    };
    auto residual = [&](const Vec& theta) -> Vec { return 2.0 * M.transpose() * (M * theta - y); };
    const Vec theta = active_set_loop(cc, solve, residual);
    last.theta = theta;
    return last;
}

Vec solve_stationarity_with_bounds(const Mat& G, const Vec& g, const CompiledConstraints& cc) {
    if (!cc.has_bounds()) return solve_constrained_stationarity(G, g, cc.A, cc.b);

    auto solve = [&](const Mat& rows, const Vec& rhs) {
        Mat A(cc.A.rows() + rows.rows(), G.cols());
        Vec b(A.rows());
        if (cc.A.rows() > 0) {
            A.topRows(cc.A.rows()) = cc.A;
            b.head(cc.A.rows()) = cc.b;
        }
        A.bottomRows(rows.rows()) = rows;
        b.tail(rows.rows()) = rhs;
        return solve_constrained_stationarity(G, g, A, b);
    };
    auto residual = [&](const Vec& theta) -> Vec { return G * theta - g; };
    return active_set_loop(cc, solve, residual);
}

}  // namespace frfit
