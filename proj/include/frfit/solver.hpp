#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "frfit/constraints.hpp"
#include "frfit/mapping.hpp"
#include "frfit/model.hpp"
#include "frfit/scaling.hpp"
#include "frfit/types.hpp"

namespace frfit {

enum class Normalization { FixFirstDenominator, SumRealOne };
enum class InitialDenominator { One, LightlyDamped };

struct EstimationOptions {
    int num_order = -1;  // -1: same as den_order
    int den_order = 0;
    int max_sk = 20;
    int max_iv = 20;
    double param_tol = 1e-8;   // relative parameter / interpolation-point change
    double cost_tol = 1e-10;   // relative cost change
    std::optional<double> alpha;
    bool column_scaling = false;  // diagnostic; off in the normal pipeline
    bool enable_iv = true;
    bool enable_measurement_scaling = true;
    std::uint64_t seed = 0;
    std::optional<ConstraintSet> constraints;
    Normalization normalization = Normalization::FixFirstDenominator;
    InitialDenominator initial_denominator = InitialDenominator::One;

    int effective_num_order() const { return num_order < 0 ? den_order : num_order; }
    int basis_order() const { return std::max(effective_num_order(), den_order); }
    void validate() const;
};

/// The estimation problem after domain mapping and measurement scaling.
struct QData {
    FrequencyResponseData scaled;  // scaled measurements, s-domain labels
    CVec q;                        // to_disk(j w_i)
    BilinearMap map;
    ChannelScaling scaling;

    int channels() const { return scaled.outputs * scaled.inputs; }
};

QData prepare_problem(const FrequencyResponseData& data, const EstimationOptions& options);

/// One fixed-point iterate: current basis, q-basis coefficients (numerators
/// per channel and the shared denominator), cached denominator values at the
/// data points, and the solve diagnostics.
struct IterationState {
    BasisSet basis;
    Mat num_q;         // (r+1) x channels
    Vec den_q;         // (r+1); first entry 1 under FixFirstDenominator
    CVec den_at_data;  // d(q_i), never zero at a data point
    double cost = 0.0;       // Eq-style NLS cost of the implied model on scaled data
    double condition = 1.0;  // of the solved system

    Vec parameter_vector() const;  // free parameters (numerators + d_1..d_r)
};

// Monomial-basis least-squares fit with the flat initial denominator.
IterationState initial_fit(const QData& dq, const EstimationOptions& options);

// One denominator-relocation step: rebuild the orthonormal-disk basis at the
// previous denominator's zeros and re-solve the weighted linear problem.
IterationState sk_step(const IterationState& state, const QData& dq,
                       const EstimationOptions& options);

// One instrumental-variable step on the frozen basis: the stationarity
// system pairs the linearized residual rows against instrument rows in
// which measured responses are replaced by the previous model's response.
IterationState iv_step(const IterationState& state, const QData& dq,
                       const EstimationOptions& options);

// NLS cost of the state's model on the scaled data.
double state_cost(const IterationState& state, const QData& dq);

// Full pipeline: map, scale, initial fit, SK iterations, IV iterations,
// best-solution selection, inverse map, unscale, coefficient emission.
std::pair<RationalModel, FitReport> run_pipeline(const FrequencyResponseData& data,
                                                 const EstimationOptions& options);

// Emit the s-domain model implied by a state (coefficient-map transport,
// exact restoration of the compiled equality constraints, unscaling).
RationalModel emit_model(const IterationState& state, const QData& dq,
                         const EstimationOptions& options);

// 2-norm condition number, optionally after Euclidean column scaling.
double condition_diagnostics(const Mat& matrix, bool column_scaling = false);

/// Single-iteration regressor conditioning probe across basis/domain
/// choices, using the model's own poles as interpolation points.
struct ConditioningProbe {
    BasisKind basis = BasisKind::Barycentric;
    bool q_domain = true;
    bool column_scaling = false;
};

double probe_sk_condition(const RationalModel& truth, const Vec& omega,
                          const ConditioningProbe& probe);

}  // namespace frfit
