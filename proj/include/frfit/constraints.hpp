#pragma once

#include <vector>

#include "frfit/basis.hpp"
#include "frfit/mapping.hpp"
#include "frfit/types.hpp"

namespace frfit {

/// Affine constraints on s-domain transfer function coefficients. The
/// stacked coefficient vector is [numerator ch 0 | ... | numerator ch C-1 |
/// denominator], each block of length r+1 in ascending powers, channels
/// row-major over (output, input).
struct ConstraintSet {
    struct CoefficientRef {
        bool is_denominator = false;
        int channel = 0;  // ignored for denominator refs
        int index = 0;    // ascending power
    };
    struct Fix {
        CoefficientRef ref;
        double value = 0.0;
    };
    struct Bound {
        CoefficientRef ref;
        double lower = 0.0;
        double upper = 0.0;
    };

    std::vector<Fix> fixes;
    std::vector<Bound> bounds;
    Mat general_A;  // optional extra affine rows over the stacked vector
    Vec general_b;

    void fix_numerator(int channel, int index, double value) {
        fixes.push_back({{false, channel, index}, value});
    }
    void fix_denominator(int index, double value) {
        fixes.push_back({{true, 0, index}, value});
    }
    void bound_numerator(int channel, int index, double lower, double upper) {
        if (lower > upper) throw std::invalid_argument("bound requires lower <= upper");
        bounds.push_back({{false, channel, index}, lower, upper});
    }
    void bound_denominator(int index, double lower, double upper) {
        if (lower > upper) throw std::invalid_argument("bound requires lower <= upper");
        bounds.push_back({{true, 0, index}, lower, upper});
    }
    bool empty() const {
        return fixes.empty() && bounds.empty() && general_A.rows() == 0;
    }
};

/// Linear map T from q-basis parameters of one polynomial to its s-domain
/// coefficients (theta_s = T theta_q), built by evaluating both expansions
/// at r+1 nodes s_t = alpha * u_t with u_t spread on the unit circle, which
/// keeps the Vandermonde factor unitary in the scaled variable u = s/alpha.
/// T then factors as diag(alpha^(r-v)) * core with an alpha-free core, so
/// rows stay accurate and the inverse can be applied stably at any alpha.
struct CoefficientMap {
    Mat T;                 // (r+1) x (r+1), dense product form
    Mat core;              // alpha-free factor (T = diag(alpha^(r-v)) * core)
    double condition = 1.0;         // of the dense map
    bool ill_conditioned = false;   // condition > 1e12 (warning, not fatal)
    double alpha = 1.0;
    CVec nodes_s;           // evaluation nodes, radius-alpha circle
    CVec nodes_vandermonde; // u_t = s_t/alpha; V(u)/sqrt(r+1) is unitary
    CVec nodes_q;
    double max_imag_residue = 0.0;  // |Im| left when casting the core to real

    // theta_q = T^{-1} theta_s through the factored form.
    Vec solve(const Vec& theta_s) const;
};

CoefficientMap build_coefficient_map(const BasisSet& basis, const BilinearMap& map);

/// Constraint system compiled to q-basis parameters: equalities
/// A theta_q = b over the full stacked q-parameter vector (numerators per
/// channel then denominator, each r+1 long), plus transported bound rows.
/// s_rows/s_rhs retain the same constraints in s-coefficient space for
/// exact feasibility restoration at model emission.
struct CompiledConstraints {
    Mat A;   // row-normalized
    Vec b;
    Mat s_rows;
    Vec s_rhs;
    Mat bound_rows;  // over theta_q
    Vec bound_lower;
    Vec bound_upper;

    bool has_equalities() const { return A.rows() > 0; }
    bool has_bounds() const { return bound_rows.rows() > 0; }
};

/// Degree bookkeeping: polynomials are estimated over the shared basis of
/// order r = max(num_order, den_order); coefficients above the requested
/// order are pinned to zero through implicit equality rows.
struct OrderSpec {
    int num_order = 0;
    int den_order = 0;
    int channels = 1;
    int basis_order() const { return std::max(num_order, den_order); }
};

CompiledConstraints compile_constraints(const ConstraintSet& cs, const CoefficientMap& num_map,
                                        const CoefficientMap& den_map, const OrderSpec& orders);

/// Result of an equality-constrained least-squares solve.
struct ConstrainedLlsResult {
    Vec theta;
    double condition = 1.0;  // of the reduced (null-space) regressor
};

// Minimize ||M theta - y||_2 subject to Aeq theta = beq by the null-space
// method: particular solution from the pseudoinverse, then an unconstrained
// solve in the null-space basis of Aeq. With no constraints this is plain
// least squares. Throws InfeasibleConstraints when beq is out of range.
ConstrainedLlsResult solve_constrained_lls(const Mat& M, const Vec& y, const Mat& Aeq,
                                           const Vec& beq, bool column_scaling = false);

// Solve the square stationarity system G theta = g subject to Aeq theta =
// beq through the bordered KKT matrix [[G, Aeq^T], [Aeq, 0]]. Throws
// SingularKKT when the bordered system is numerically singular.
Vec solve_constrained_stationarity(const Mat& G, const Vec& g, const Mat& Aeq, const Vec& beq);

// Primal active-set loop for box bounds around an equality-constrained
// solver: a violated bound becomes a temporary equality at its boundary and
// is released on a wrong-sign multiplier.
ConstrainedLlsResult solve_lls_with_bounds(const Mat& M, const Vec& y, const CompiledConstraints& cc,
                                           bool column_scaling = false);
Vec solve_stationarity_with_bounds(const Mat& G, const Vec& g, const CompiledConstraints& cc);

}  // namespace frfit
