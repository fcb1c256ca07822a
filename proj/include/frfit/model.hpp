#pragma once

#include "frfit/types.hpp"

namespace frfit {

// --- construction ---

// SISO model from zero-pole-gain data; coefficient form materialized when
// the point sets are conjugate-closed.
RationalModel siso_zpk(CVec zeros, CVec poles, double gain, Domain domain = Domain::SPlane);

// Model from real ascending coefficient vectors: one numerator per channel
// (row-major over outputs x inputs) and a shared denominator. The zpk form
// is materialized via rootfinding.
RationalModel model_from_coefficients(const std::vector<Vec>& numerators, const Vec& denominator,
                                      int outputs, int inputs, Domain domain = Domain::SPlane);

RationalModel siso_from_coefficients(const Vec& numerator, const Vec& denominator,
                                     Domain domain = Domain::SPlane);

// Fill in the real coefficient form from the zpk form (no-op when present).
// Throws BadPoint when poles/zeros are not conjugate-closed.
void materialize_coefficients(RationalModel& model, double pairing_tol = 1e-8);

// --- evaluation ---

// Evaluate one channel at a point from the zpk form (or the coefficient form
// when zpk data is absent). Throws PoleHit when the point sits on a pole.
Cplx eval_channel(const RationalModel& model, int out, int in, Cplx point);

// Evaluate the full p x m response at each point.
std::vector<CMat> eval_model(const RationalModel& model, const CVec& points);

// Convenience for SISO sweeps.
CVec eval_siso(const RationalModel& model, const CVec& points);

// --- cost ---

// Weighted nonlinear least-squares cost
//   sum_i || W_i (H_model(j w_i) - H_i) ||_F^2
// with W_i = 1 when the data carries no weights. The model must be in the
// s-plane domain.
double nls_cost(const RationalModel& model, const FrequencyResponseData& data);

// Goodness-of-fit percentage 100*(1 - ||H_fit - H|| / ||H - mean(H)||),
// computed per channel and averaged.
double nrmse_fit_percent(const RationalModel& model, const FrequencyResponseData& data);

}  // namespace frfit
