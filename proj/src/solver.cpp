#include "frfit/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "frfit/polynomial.hpp"
#include "frfit/realization.hpp"

namespace frfit {

namespace {

struct Layout {
    int r = 0;
    int channels = 1;
    bool free_d0 = false;  // SumRealOne keeps d_q0 as a free parameter

    Eigen::Index block() const { return r + 1; }
    Eigen::Index full_size() const { return static_cast<Eigen::Index>(channels + 1) * block(); }
    Eigen::Index free_size() const {
        return static_cast<Eigen::Index>(channels) * block() + (free_d0 ? r + 1 : r);
    }
    Eigen::Index num_pos(int ch, int v) const { return static_cast<Eigen::Index>(ch) * block() + v; }
    // position of denominator coefficient v in the free vector (v >= 1 when d0 is pinned)
    Eigen::Index den_pos(int v) const {
        return static_cast<Eigen::Index>(channels) * block() + (free_d0 ? v : v - 1);
    }
};

Layout make_layout(const BasisSet& basis, const QData& dq, const EstimationOptions& opt) {
    Layout lay;
    lay.r = basis.order;
    lay.channels = dq.channels();
    lay.free_d0 = opt.normalization == Normalization::SumRealOne;
    return lay;
}

// Complex regression rows for the linearized problem. `values` holds the
// per-frequency, per-channel quantity multiplying the denominator columns:
// scaled measurements for the residual rows, previous-model responses for
// instrument rows. `row_weight` is the real per-frequency scale.
void assemble_rows(const QData& dq, const CMat& Bm, const CMat& values, const Vec& row_weight,
                   const Layout& lay, CMat& M, CVec& y) {
    const int l = dq.scaled.size();
    const int C = lay.channels;
    const int r = lay.r;
    M = CMat::Zero(static_cast<Eigen::Index>(l) * C, lay.free_size());
    y = CVec::Zero(static_cast<Eigen::Index>(l) * C);
    for (int i = 0; i < l; ++i) {
        const double u = row_weight(i);
        for (int ch = 0; ch < C; ++ch) {
            const Eigen::Index row = static_cast<Eigen::Index>(i) * C + ch;
            M.block(row, lay.num_pos(ch, 0), 1, r + 1) = u * Bm.row(i);
            const Cplx v = values(i, ch);
            if (lay.free_d0) {
                for (int k = 0; k <= r; ++k) M(row, lay.den_pos(k)) = -u * v * Bm(i, k);
                y(row) = Cplx(0.0, 0.0);
            } else {
                for (int k = 1; k <= r; ++k) M(row, lay.den_pos(k)) = -u * v * Bm(i, k);
                y(row) = u * v;  // d_q0 = 1 moved to the right-hand side
            }
        }
    }
}

void split_real(const CMat& M, const CVec& y, Mat& Mr, Vec& yr) {
    Mr.resize(2 * M.rows(), M.cols());
    Mr.topRows(M.rows()) = M.real();
    Mr.bottomRows(M.rows()) = M.imag();
    yr.resize(2 * y.size());
    yr.head(y.size()) = y.real();
    yr.tail(y.size()) = y.imag();
}

// Reduce constraints compiled over the full q-parameter stack to the free
// layout; under the d_q0 = 1 normalization the pinned column moves to the
// right-hand side. SumRealOne appends the trivial-solution row instead.
CompiledConstraints reduce_for_layout(const CompiledConstraints& cc, const Layout& lay,
                                      const CMat& Bm) {
    CompiledConstraints out = cc;
    const Eigen::Index d0_col = static_cast<Eigen::Index>(lay.channels) * lay.block();

    auto reduce_rows = [&](const Mat& rows, const Vec* rhs, Vec* rhs_out) {
        if (lay.free_d0) return rows;
        Mat reduced(rows.rows(), lay.free_size());
        reduced.leftCols(d0_col) = rows.leftCols(d0_col);
        reduced.rightCols(lay.r) = rows.rightCols(lay.r);
        if (rhs && rhs_out) *rhs_out = *rhs - rows.col(d0_col);
        return reduced;
    };

    if (cc.A.rows() > 0) {
        Vec b2 = cc.b;
        out.A = reduce_rows(cc.A, &cc.b, &b2);
        out.b = b2;
    } else {
        out.A = Mat(0, lay.free_size());
        out.b = Vec(0);
    }
    if (cc.bound_rows.rows() > 0) {
        Vec lo = cc.bound_lower, hi = cc.bound_upper;
        Vec shift = Vec::Zero(cc.bound_rows.rows());
        if (!lay.free_d0) shift = cc.bound_rows.col(d0_col);
        out.bound_rows = reduce_rows(cc.bound_rows, nullptr, nullptr);
        out.bound_lower = lo - shift;
        out.bound_upper = hi - shift;
    } else {
        out.bound_rows = Mat(0, lay.free_size());
    }

    if (lay.free_d0) {
        // sum_i Re(d(q_i)) = 1 excludes the trivial zero solution
        Vec row = Vec::Zero(lay.free_size());
        for (int k = 0; k <= lay.r; ++k) row(lay.den_pos(k)) = Bm.col(k).real().sum();
        const double nrm = row.norm();
        Mat A2(out.A.rows() + 1, lay.free_size());
        Vec b2(out.A.rows() + 1);
        if (out.A.rows() > 0) {
            A2.topRows(out.A.rows()) = out.A;
            b2.head(out.A.rows()) = out.b;
        }
        A2.bottomRows(1) = row.transpose() / nrm;
        b2(out.A.rows()) = 1.0 / nrm;
        out.A = A2;
        out.b = b2;
    }
    return out;
}

IterationState build_state(BasisSet basis, const Vec& theta, const Layout& lay, const CMat& Bm,
                           const QData& dq, double condition) {
    IterationState st;
    st.basis = std::move(basis);
    st.num_q = Mat(lay.r + 1, lay.channels);
    for (int ch = 0; ch < lay.channels; ++ch)
        st.num_q.col(ch) = theta.segment(lay.num_pos(ch, 0), lay.r + 1);
    st.den_q = Vec(lay.r + 1);
    if (lay.free_d0) {
        for (int k = 0; k <= lay.r; ++k) st.den_q(k) = theta(lay.den_pos(k));
    } else {
        st.den_q(0) = 1.0;
        for (int k = 1; k <= lay.r; ++k) st.den_q(k) = theta(lay.den_pos(k));
    }
    st.den_at_data = Bm * st.den_q.cast<Cplx>();
    st.condition = condition;
    st.cost = 0.0;
    const int l = dq.scaled.size();
    for (int i = 0; i < l; ++i) {
        const double w = dq.scaled.weight(i);
        const CVec num_vals = (Bm.row(i) * st.num_q.cast<Cplx>()).transpose();
        for (int ch = 0; ch < lay.channels; ++ch) {
            const Cplx h = dq.scaled.responses[i](ch / dq.scaled.inputs, ch % dq.scaled.inputs);
            const Cplx resid = num_vals(ch) / st.den_at_data(i) - h;
            st.cost += w * w * std::norm(resid);
        }
    }
    return st;
}

CMat scaled_values(const QData& dq, const Layout& lay) {
    const int l = dq.scaled.size();
    CMat v(l, lay.channels);
    for (int i = 0; i < l; ++i)
        for (int ch = 0; ch < lay.channels; ++ch)
            v(i, ch) = dq.scaled.responses[i](ch / dq.scaled.inputs, ch % dq.scaled.inputs);
    return v;
}

CompiledConstraints compile_for_basis(const BasisSet& basis, const QData& dq,
                                      const EstimationOptions& opt) {
    const CoefficientMap map = build_coefficient_map(basis, dq.map);
    OrderSpec orders;
    orders.num_order = opt.effective_num_order();
    orders.den_order = opt.den_order;
    orders.channels = dq.channels();
    static const ConstraintSet kEmpty;
    const ConstraintSet& cs = opt.constraints ? *opt.constraints : kEmpty;
    return compile_constraints(cs, map, map, orders);
}

// Interpolation points for the next basis: zeros of the current denominator,
// refilled with lightly damped log-spaced images when the count collapses.
CVec next_interpolation_points(const IterationState& state, const QData& dq,
                               const EstimationOptions& opt) {
    CVec zeros;
    if (state.basis.kind == BasisKind::Monomial) {
        zeros = poly_roots(state.den_q);
    } else {
        zeros = denominator_zeros(realize_denominator(state.basis, state.den_q));
    }
    const int r = opt.basis_order();
    const int missing = r - static_cast<int>(zeros.size());
    if (missing > 0) {
        const double w_lo = dq.scaled.frequencies(0);
        const double w_hi = dq.scaled.frequencies(dq.scaled.size() - 1);
        std::vector<Cplx> fill;
        const int pairs = missing / 2;
        for (int k = 0; k < pairs; ++k) {
            const double t = pairs == 1 ? 0.5 : static_cast<double>(k) / (pairs - 1);
            const double w = w_lo * std::pow(w_hi / w_lo, t);
            const Cplx q = to_disk(dq.map, Cplx(-0.01 * w, w));
            fill.push_back(q);
            fill.push_back(std::conj(q));
        }
        if (missing % 2 == 1)
            fill.push_back(to_disk(dq.map, Cplx(-std::sqrt(w_lo * w_hi), 0.0)));
        CVec extended(r);
        extended.head(zeros.size()) = zeros;
        for (int k = 0; k < missing; ++k) extended(zeros.size() + k) = fill[k];
        zeros = extended;
    }
    return sanitize_points(zeros);
}

double relative_point_change(const CVec& a, const CVec& b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    std::vector<bool> used(b.size(), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index best_k = -1;
        for (Eigen::Index k = 0; k < b.size(); ++k) {
            if (used[k]) continue;
            const double d = std::abs(a(i) - b(k));
            if (d < best) {
                best = d;
                best_k = k;
            }
        }
        used[best_k] = true;
        worst = std::max(worst, best / (1.0 + std::abs(b(best_k))));
    }
    return worst;
}

}  // namespace

void EstimationOptions::validate() const {
    if (den_order < 0 || (num_order < -1)) throw std::invalid_argument("orders must be >= 0");
    if (max_sk < 0 || max_iv < 0) throw std::invalid_argument("iteration caps must be >= 0");
    if (param_tol <= 0.0 || cost_tol <= 0.0) throw std::invalid_argument("tolerances must be > 0");
    if (alpha && (!std::isfinite(*alpha) || *alpha <= 0.0))
        throw BadRange("alpha override must be finite and > 0");
}

QData prepare_problem(const FrequencyResponseData& data, const EstimationOptions& options) {
    data.validate();
    options.validate();
    const double alpha = options.alpha
                             ? *options.alpha
                             : select_alpha(data.frequencies(0), data.frequencies(data.size() - 1));
    BilinearMap map(alpha);

    ChannelScaling scaling = options.enable_measurement_scaling
                                 ? compute_scaling(data)
                                 : ChannelScaling::unit(data.outputs, data.inputs);
    QData dq{apply_scaling(data, scaling), CVec(data.size()), map, scaling};
    for (int i = 0; i < data.size(); ++i)
        dq.q(i) = to_disk(map, Cplx(0.0, data.frequencies(i)));
    return dq;
}

Vec IterationState::parameter_vector() const {
    const int r = basis.order;
    const int C = static_cast<int>(num_q.cols());
    Vec theta(static_cast<Eigen::Index>(C) * (r + 1) + r);
    for (int ch = 0; ch < C; ++ch) theta.segment(static_cast<Eigen::Index>(ch) * (r + 1), r + 1) = num_q.col(ch);
    theta.tail(r) = den_q.tail(r);
    return theta;
}

IterationState initial_fit(const QData& dq, const EstimationOptions& opt) {
    const int r = opt.basis_order();
    BasisSet basis = BasisSet::monomial(r);
    const Layout lay = make_layout(basis, dq, opt);

    const int l = dq.scaled.size();
    if (lay.free_size() > 2 * static_cast<Eigen::Index>(l) * lay.channels)
        throw std::invalid_argument("parameter count exceeds available equations");

    const CMat Bm = basis_matrix(basis, dq.q);

    // d^(0): flat, or lightly damped roots spread across the band.
    Vec row_weight(l);
    if (opt.initial_denominator == InitialDenominator::One) {
        for (int i = 0; i < l; ++i) row_weight(i) = dq.scaled.weight(i);
    } else {
        IterationState seed_state;
        seed_state.basis = basis;
        seed_state.den_q = Vec::Zero(r + 1);
        seed_state.den_q(0) = 1.0;
        CVec pts = next_interpolation_points(seed_state, dq, opt);  // log-spaced refill
        CVec d0 = poly_from_roots(pts);
        for (int i = 0; i < l; ++i)
            row_weight(i) = dq.scaled.weight(i) / std::abs(eval_poly(d0, dq.q(i)));
    }

    CMat Mc;
    CVec yc;
    assemble_rows(dq, Bm, scaled_values(dq, lay), row_weight, lay, Mc, yc);
    Mat Mr;
    Vec yr;
    split_real(Mc, yc, Mr, yr);

    const CompiledConstraints cc = reduce_for_layout(compile_for_basis(basis, dq, opt), lay, Bm);

    Eigen::JacobiSVD<Mat> probe(Mr);
    if (probe.singularValues().size() == 0 || probe.singularValues()(0) == 0.0)
        throw SolveFailure("regressor matrix is numerically rank-zero");

    ConstrainedLlsResult res = solve_lls_with_bounds(Mr, yr, cc, opt.column_scaling);
    return build_state(std::move(basis), res.theta, lay, Bm, dq, res.condition);
}

IterationState sk_step(const IterationState& state, const QData& dq,
                       const EstimationOptions& opt) {
    CVec points = next_interpolation_points(state, dq, opt);

    for (int attempt = 0;; ++attempt) {
        BasisSet basis = BasisSet::orthonormal_disk(points);
        const Layout lay = make_layout(basis, dq, opt);
        const CMat Bm = basis_matrix(basis, dq.q);

        Vec row_weight(dq.scaled.size());
        for (int i = 0; i < dq.scaled.size(); ++i) row_weight(i) = dq.scaled.weight(i);

        CMat Mc;
        CVec yc;
        assemble_rows(dq, Bm, scaled_values(dq, lay), row_weight, lay, Mc, yc);
        Mat Mr;
        Vec yr;
        split_real(Mc, yc, Mr, yr);

        const CompiledConstraints cc =
            reduce_for_layout(compile_for_basis(basis, dq, opt), lay, Bm);
        ConstrainedLlsResult res = solve_lls_with_bounds(Mr, yr, cc, opt.column_scaling);
        IterationState next = build_state(std::move(basis), res.theta, lay, Bm, dq, res.condition);

        // A denominator that vanishes on a data point cannot be evaluated or
        // relocated; nudge the interpolation points inward and re-solve.
        const double den_scale = next.den_at_data.cwiseAbs().maxCoeff();
        if (attempt < 2 && den_scale > 0.0 &&
            next.den_at_data.cwiseAbs().minCoeff() <= 1e-12 * den_scale) {
            points = sanitize_points((points.array() * Cplx(1.0 - 1e-6, 0.0)).matrix());
            continue;
        }
        return next;
    }
}

IterationState iv_step(const IterationState& state, const QData& dq,
                       const EstimationOptions& opt) {
    const BasisSet& basis = state.basis;  // frozen during the IV stage
    const Layout lay = make_layout(basis, dq, opt);
    const CMat Bm = basis_matrix(basis, dq.q);
    const int l = dq.scaled.size();

    Vec row_weight(l);
    for (int i = 0; i < l; ++i) {
        const double dmag = std::abs(state.den_at_data(i));
        if (dmag == 0.0) throw SingularIVSystem("previous denominator vanishes at a data point");
        row_weight(i) = dq.scaled.weight(i) / dmag;
    }

    // Residual rows use the measurements; instrument rows use the previous
    // model's response.
    CMat prev_response(l, lay.channels);
    for (int i = 0; i < l; ++i) {
        const CVec num_vals = (Bm.row(i) * state.num_q.cast<Cplx>()).transpose();
        for (int ch = 0; ch < lay.channels; ++ch)
            prev_response(i, ch) = num_vals(ch) / state.den_at_data(i);
    }

    CMat Mc, Psic;
    CVec yc, psi_y;
    assemble_rows(dq, Bm, scaled_values(dq, lay), row_weight, lay, Mc, yc);
    assemble_rows(dq, Bm, prev_response, row_weight, lay, Psic, psi_y);

    Mat Mr, Psir;
    Vec yr, unused;
    split_real(Mc, yc, Mr, yr);
    split_real(Psic, psi_y, Psir, unused);

    const Mat G = Psir.transpose() * Mr;
    const Vec g = Psir.transpose() * yr;
    const CompiledConstraints cc = reduce_for_layout(compile_for_basis(basis, dq, opt), lay, Bm);

    Vec theta;
    try {
        theta = solve_stationarity_with_bounds(G, g, cc);
    } catch (const SingularKKT& e) {
        throw SingularIVSystem(e.what());
    }
    if (!theta.allFinite()) throw SingularIVSystem("stationarity solve produced non-finite values");

    IterationState next = build_state(basis, theta, lay, Bm, dq, condition_diagnostics(G));
    return next;
}

double state_cost(const IterationState& state, const QData& dq) { return state.cost; }

namespace {

// Zeros of a coefficient combination over the state's basis.
CVec combination_zeros(const BasisSet& basis, const Vec& coeffs) {
    if (basis.kind == BasisKind::Monomial) return poly_roots(coeffs);
    return denominator_zeros(realize_denominator(basis, coeffs));
}

Cplx state_channel_response(const IterationState& state, int ch, Cplx q) {
    const CVec b = eval_basis(state.basis, q);
    const Cplx num = (b.transpose() * state.num_q.col(ch).cast<Cplx>())(0);
    const Cplx den = (b.transpose() * state.den_q.cast<Cplx>())(0);
    return num / den;
}

}  // namespace

RationalModel emit_model(const IterationState& state, const QData& dq,
                         const EstimationOptions& opt) {
    const Layout lay = make_layout(state.basis, dq, opt);
    const int r = lay.r;
    const CoefficientMap cmap = build_coefficient_map(state.basis, dq.map);

    // Disk-domain zero-pole-gain form first: root extraction stays on
    // well-scaled disk quantities, and the pointwise inverse map preserves
    // relative pole accuracy across arbitrarily wide bands.
    RationalModel qm;
    qm.domain = Domain::QDisk;
    qm.outputs = dq.scaled.outputs;
    qm.inputs = dq.scaled.inputs;
    qm.poles = combination_zeros(state.basis, state.den_q);
    qm.zeros.resize(lay.channels);
    qm.gains = Mat::Zero(qm.outputs, qm.inputs);
    for (int ch = 0; ch < lay.channels; ++ch) {
        const Vec nc = state.num_q.col(ch);
        if (nc.cwiseAbs().maxCoeff() == 0.0) continue;
        qm.zeros[ch] = combination_zeros(state.basis, nc);
    }
    // Numerator zeros pushed toward q = -1 encode s-zeros at infinity
    // (requested relative degree); snap them so the inverse map drops them.
    for (CVec& zs : qm.zeros)
        for (Eigen::Index k = 0; k < zs.size(); ++k)
            if (std::abs(zs(k) + Cplx(1.0, 0.0)) <= 1e-6) zs(k) = Cplx(-1.0, 0.0);

    // gains from agreement with the state's response at reference points
    constexpr double kGolden = 1.6180339887498949;
    for (int ch = 0; ch < lay.channels; ++ch) {
        if (state.num_q.col(ch).cwiseAbs().maxCoeff() == 0.0) continue;
        bool matched = false;
        for (int attempt = 0; attempt < 4 && !matched; ++attempt) {
            const Cplx s_ref(0.0, dq.map.alpha * std::pow(kGolden, attempt));
            const Cplx q_ref = to_disk(dq.map, s_ref);
            try {
                const Cplx want = state_channel_response(state, ch, q_ref);
                RationalModel probe = qm;
                probe.gains(ch / qm.inputs, ch % qm.inputs) = 1.0;
                const Cplx have =
                    eval_channel(probe, ch / qm.inputs, ch % qm.inputs, q_ref);
                if (std::abs(have) == 0.0 || std::abs(want) == 0.0) continue;
                qm.gains(ch / qm.inputs, ch % qm.inputs) = (want / have).real();
                matched = true;
            } catch (const std::exception&) {
                continue;
            }
        }
        if (!matched) throw GainReferenceHit("could not place a gain reference point");
    }

    RationalModel model = map_model(dq.map, qm, MapDirection::QToS);
    model.den_coeffs.reset();
    model.num_coeffs.reset();

    // Coefficient form through the coefficient map, with exact restoration
    // of the compiled equality constraints.
    Vec theta_s(lay.full_size());
    for (int ch = 0; ch < lay.channels; ++ch)
        theta_s.segment(lay.num_pos(ch, 0), r + 1) = cmap.T * state.num_q.col(ch);
    theta_s.tail(r + 1) = cmap.T * state.den_q;

    OrderSpec orders{opt.effective_num_order(), opt.den_order, lay.channels};
    static const ConstraintSet kEmpty;
    const ConstraintSet& cs = opt.constraints ? *opt.constraints : kEmpty;
    const CompiledConstraints cc = compile_constraints(cs, cmap, cmap, orders);
    if (cc.s_rows.rows() > 0) {
        Mat A = cc.s_rows;
        Vec b = cc.s_rhs;
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            const double nrm = A.row(i).norm();
            A.row(i) /= nrm;
            b(i) /= nrm;
        }
        theta_s -= A.transpose() * (A * A.transpose()).ldlt().solve(A * theta_s - b);
        // coordinate fixes are snapped exactly
        for (Eigen::Index i = 0; i < cc.s_rows.rows(); ++i) {
            Eigen::Index nonzero = -1;
            bool unit_row = true;
            for (Eigen::Index cidx = 0; cidx < cc.s_rows.cols(); ++cidx) {
                if (cc.s_rows(i, cidx) == 0.0) continue;
                if (nonzero >= 0 || cc.s_rows(i, cidx) != 1.0) {
                    unit_row = false;
                    break;
                }
                nonzero = cidx;
            }
            if (unit_row && nonzero >= 0) theta_s(nonzero) = cc.s_rhs(i);
        }
    }

    std::vector<Vec> numerators(lay.channels);
    for (int ch = 0; ch < lay.channels; ++ch)
        numerators[ch] = theta_s.segment(lay.num_pos(ch, 0), opt.effective_num_order() + 1).eval();
    Vec denominator =
        theta_s.segment(static_cast<Eigen::Index>(lay.channels) * lay.block(), opt.den_order + 1)
            .eval();

    // Prefer the coefficient-derived model when its response reproduces the
    // transported zpk (constraints are then satisfied exactly and the two
    // forms are consistent); at very high order over wide bands the expanded
    // polynomials are too ill-conditioned and the transported zpk stands
    // alone without a coefficient form.
    try {
        const RationalModel coeff_model = model_from_coefficients(
            numerators, denominator, qm.outputs, qm.inputs, Domain::SPlane);
        double worst = 0.0;
        const int probes = std::min(dq.scaled.size(), 12);
        for (int k = 0; k < probes; ++k) {
            const int i = k * (dq.scaled.size() - 1) / std::max(1, probes - 1);
            const Cplx s(0.0, dq.scaled.frequencies(i));
            for (int ch = 0; ch < lay.channels; ++ch) {
                const Cplx a = eval_channel(coeff_model, ch / qm.inputs, ch % qm.inputs, s);
                const Cplx b = eval_channel(model, ch / qm.inputs, ch % qm.inputs, s);
                worst = std::max(worst, std::abs(a - b) / std::max(1e-300, std::abs(b)));
            }
        }
        if (worst <= 1e-7 && coeff_model.poles.allFinite()) {
            return unscale_model(coeff_model, dq.scaling);
        }
    } catch (const std::exception&) {
        // fall through to the zpk-only form
    }

    return unscale_model(model, dq.scaling);
}

std::pair<RationalModel, FitReport> run_pipeline(const FrequencyResponseData& data,
                                                 const EstimationOptions& opt) {
    QData dq = prepare_problem(data, opt);
    FitReport report;

    IterationState state;
    try {
        state = initial_fit(dq, opt);
    } catch (const std::exception& e) {
        throw EstimationError("initial", e.what());
    }
    report.initial_costs.push_back(state.cost);
    report.condition_numbers.push_back(state.condition);

    IterationState best = state;
    Stage best_stage = Stage::Initial;

    // SK stage: relocate the basis each step until the interpolation points
    // or the cost settle.
    for (int k = 0; k < opt.max_sk; ++k) {
        IterationState next;
        try {
            next = sk_step(state, dq, opt);
        } catch (const std::exception&) {
            break;  // keep the best solution found so far
        }
        report.sk_costs.push_back(next.cost);
        report.condition_numbers.push_back(next.condition);
        ++report.sk_iterations;
        if (next.cost < best.cost) {
            best = next;
            best_stage = Stage::Sk;
        }
        const bool points_settled =
            state.basis.kind == BasisKind::OrthonormalDisk &&
            relative_point_change(next.basis.points, state.basis.points) < opt.param_tol;
        const bool cost_settled =
            std::abs(next.cost - state.cost) <= opt.cost_tol * (1.0 + state.cost);
        state = next;
        if (points_settled || cost_settled) {
            report.sk_converged = true;
            break;
        }
    }

    if (opt.enable_iv) {
        for (int k = 0; k < opt.max_iv; ++k) {
            IterationState next;
            try {
                next = iv_step(state, dq, opt);
            } catch (const std::exception&) {
                report.iv_converged = false;
                break;  // keep the previous state
            }
            report.iv_costs.push_back(next.cost);
            report.condition_numbers.push_back(next.condition);
            ++report.iv_iterations;
            if (next.cost < best.cost) {
                best = next;
                best_stage = Stage::Iv;
            }
            const Vec prev_theta = state.parameter_vector();
            const Vec new_theta = next.parameter_vector();
            const bool param_settled =
                (new_theta - prev_theta).norm() <= opt.param_tol * (1.0 + prev_theta.norm());
            const bool cost_settled =
                std::abs(next.cost - state.cost) <= opt.cost_tol * (1.0 + state.cost);
            state = next;
            if (param_settled || cost_settled) {
                report.iv_converged = true;
                break;
            }
        }
    }

    report.best_stage = best_stage;
    report.best_cost = best.cost;
    report.worst_condition_number =
        report.condition_numbers.empty()
            ? 0.0
            : *std::max_element(report.condition_numbers.begin(), report.condition_numbers.end());

    RationalModel model;
    try {
        model = emit_model(best, dq, opt);
    } catch (const std::exception& e) {
        throw EstimationError("emit", e.what());
    }
    return {std::move(model), std::move(report)};
}

double condition_diagnostics(const Mat& matrix, bool column_scaling) {
    if (matrix.rows() == 0 || matrix.cols() == 0)
        throw std::invalid_argument("condition_diagnostics needs a nonempty matrix");
    Mat m = matrix;
    if (column_scaling) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double nrm = m.col(c).norm();
            if (nrm > 0.0) m.col(c) /= nrm;
        }
    }
    Eigen::JacobiSVD<Mat> svd(m);
    const Vec& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smin;
}

double probe_sk_condition(const RationalModel& truth, const Vec& omega,
                          const ConditioningProbe& probe) {
    const int l = static_cast<int>(omega.size());
    const int r = static_cast<int>(truth.poles.size());
    const BilinearMap map(select_alpha(omega(0), omega(l - 1)));

    CVec eval_points(l);
    CVec h(l);
    for (int i = 0; i < l; ++i) {
        const Cplx s(0.0, omega(i));
        h(i) = eval_channel(truth, 0, 0, s);
        eval_points(i) = probe.q_domain ? to_disk(map, s) : s;
    }

    BasisSet basis = BasisSet::monomial(r);
    if (probe.basis == BasisKind::Barycentric) {
        CVec pts = truth.poles;
        if (probe.q_domain)
            for (int k = 0; k < r; ++k) pts(k) = to_disk(map, truth.poles(k));
        basis = BasisSet::barycentric(pts);
    } else if (probe.basis == BasisKind::OrthonormalDisk) {
        if (!probe.q_domain)
            throw std::invalid_argument("orthonormal-disk basis is defined on the disk only");
        CVec pts(r);
        for (int k = 0; k < r; ++k) pts(k) = to_disk(map, truth.poles(k));
        basis = BasisSet::orthonormal_disk(sanitize_points(pts));
    }

    CMat Mc(l, 2 * r + 1);
    for (int i = 0; i < l; ++i) {
        const CVec b = eval_basis(basis, eval_points(i));
        Mc.block(i, 0, 1, r + 1) = b.transpose();
        for (int k = 1; k <= r; ++k) Mc(i, r + k) = -h(i) * b(k);
    }
    Mat Mr(2 * l, Mc.cols());
    Mr.topRows(l) = Mc.real();
    Mr.bottomRows(l) = Mc.imag();
    return condition_diagnostics(Mr, probe.column_scaling);
}

}  // namespace frfit
