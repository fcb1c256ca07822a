#include "frfit/model.hpp"

#include <cmath>

#include "frfit/polynomial.hpp"

namespace frfit {

namespace {

constexpr double kPoleHitTol = 1e-13;

Cplx eval_zpk_channel(const CVec& zeros, const CVec& poles, double gain, Cplx s) {
    Cplx num(gain, 0.0);
    for (Eigen::Index k = 0; k < zeros.size(); ++k) num *= s - zeros(k);
    Cplx den(1.0, 0.0);
    for (Eigen::Index k = 0; k < poles.size(); ++k) {
        const Cplx d = s - poles(k);
        if (std::abs(d) <= kPoleHitTol * std::max(1.0, std::abs(poles(k))))
            throw PoleHit("evaluation point coincides with a pole");
        den *= d;
    }
    return num / den;
}

}  // namespace

RationalModel siso_zpk(CVec zeros, CVec poles, double gain, Domain domain) {
    RationalModel m;
    m.domain = domain;
    m.outputs = 1;
    m.inputs = 1;
    m.poles = std::move(poles);
    m.zeros = {std::move(zeros)};
    m.gains = Mat::Constant(1, 1, gain);
    if (conjugate_closed(m.poles) && conjugate_closed(m.zeros[0])) materialize_coefficients(m);
    return m;
}

RationalModel model_from_coefficients(const std::vector<Vec>& numerators, const Vec& denominator,
                                      int outputs, int inputs, Domain domain) {
    if (static_cast<int>(numerators.size()) != outputs * inputs)
        throw DimensionMismatch("one numerator per channel required");
    RationalModel m;
    m.domain = domain;
    m.outputs = outputs;
    m.inputs = inputs;
    m.den_coeffs = denominator;
    m.num_coeffs = numerators;
    m.poles = poly_roots(denominator);

    Eigen::Index den_hi = denominator.size() - 1;
    while (den_hi > 0 && denominator(den_hi) == 0.0) --den_hi;
    const double den_lead = denominator(den_hi);

    m.gains = Mat::Zero(outputs, inputs);
    m.zeros.resize(numerators.size());
    for (size_t ch = 0; ch < numerators.size(); ++ch) {
        const Vec& num = numerators[ch];
        if (num.size() == 0 || num.cwiseAbs().maxCoeff() == 0.0) {
            m.zeros[ch] = CVec();
            continue;  // identically zero channel
        }
        m.zeros[ch] = poly_roots(num);
        Eigen::Index num_hi = num.size() - 1;
        while (num_hi > 0 && num(num_hi) == 0.0) --num_hi;
        m.gains(static_cast<int>(ch) / inputs, static_cast<int>(ch) % inputs) =
            num(num_hi) / den_lead;
    }
    return m;
}

RationalModel siso_from_coefficients(const Vec& numerator, const Vec& denominator, Domain domain) {
    return model_from_coefficients({numerator}, denominator, 1, 1, domain);
}

void materialize_coefficients(RationalModel& model, double pairing_tol) {
    if (model.den_coeffs && model.num_coeffs) return;
    model.den_coeffs = real_poly_from_roots(model.poles, pairing_tol);
    std::vector<Vec> nums;
    nums.reserve(model.zeros.size());
    for (size_t ch = 0; ch < model.zeros.size(); ++ch) {
        const double g = model.gains(static_cast<int>(ch) / model.inputs,
                                     static_cast<int>(ch) % model.inputs);
        nums.push_back(g * real_poly_from_roots(model.zeros[ch], pairing_tol));
    }
    model.num_coeffs = std::move(nums);
}

Cplx eval_channel(const RationalModel& model, int out, int in, Cplx point) {
    if (model.poles.size() > 0 || !model.den_coeffs) {
        return eval_zpk_channel(model.channel_zeros(out, in), model.poles,
                                model.channel_gain(out, in), point);
    }
    // coefficient-only path (all-zero channels included)
    const Cplx den = eval_poly(*model.den_coeffs, point);
    if (std::abs(den) == 0.0) throw PoleHit("denominator vanished at evaluation point");
    return eval_poly((*model.num_coeffs)[out * model.inputs + in], point) / den;
}

std::vector<CMat> eval_model(const RationalModel& model, const CVec& points) {
    std::vector<CMat> out(points.size(), CMat(model.outputs, model.inputs));
    for (Eigen::Index k = 0; k < points.size(); ++k) {
        for (int i = 0; i < model.outputs; ++i)
            for (int j = 0; j < model.inputs; ++j)
                out[k](i, j) = eval_channel(model, i, j, points(k));
    }
    return out;
}

CVec eval_siso(const RationalModel& model, const CVec& points) {
    CVec out(points.size());
    for (Eigen::Index k = 0; k < points.size(); ++k) out(k) = eval_channel(model, 0, 0, points(k));
    return out;
}

double nls_cost(const RationalModel& model, const FrequencyResponseData& data) {
    if (model.domain != Domain::SPlane)
        throw std::invalid_argument("nls_cost expects an s-plane model");
    data.validate();
    double cost = 0.0;
    for (int i = 0; i < data.size(); ++i) {
        const Cplx s(0.0, data.frequencies(i));
        const double w = data.weight(i);
        for (int a = 0; a < data.outputs; ++a)
            for (int b = 0; b < data.inputs; ++b) {
                const Cplx r = eval_channel(model, a, b, s) - data.responses[i](a, b);
                cost += w * w * std::norm(r);
            }
    }
    return cost;
}

double nrmse_fit_percent(const RationalModel& model, const FrequencyResponseData& data) {
    data.validate();
    const int l = data.size();
    double acc = 0.0;
    int channels = 0;
    for (int a = 0; a < data.outputs; ++a) {
        for (int b = 0; b < data.inputs; ++b) {
            Cplx mean(0.0, 0.0);
            for (int i = 0; i < l; ++i) mean += data.responses[i](a, b);
            mean /= static_cast<double>(l);
            double err = 0.0, spread = 0.0;
            for (int i = 0; i < l; ++i) {
                const Cplx s(0.0, data.frequencies(i));
                const Cplx h = data.responses[i](a, b);
                err += std::norm(eval_channel(model, a, b, s) - h);
                spread += std::norm(h - mean);
            }
            double fit;
            if (spread == 0.0) {
                fit = err == 0.0 ? 100.0 : 0.0;
            } else {
                fit = 100.0 * (1.0 - std::sqrt(err / spread));
            }
            acc += fit;
            ++channels;
        }
    }
    return acc / channels;
}

}  // namespace frfit
