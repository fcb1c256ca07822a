#include "frfit/scaling.hpp"

#include <cmath>
#include <limits>

namespace frfit {

ChannelScaling compute_scaling(const FrequencyResponseData& data) {
    data.validate();
    Mat factors = Mat::Ones(data.outputs, data.inputs);
    for (int a = 0; a < data.outputs; ++a) {
        for (int b = 0; b < data.inputs; ++b) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = 0.0;
            for (const CMat& h : data.responses) {
                const double mag = std::abs(h(a, b));
                if (mag == 0.0) continue;  // min over nonzero samples
                lo = std::min(lo, mag);
                hi = std::max(hi, mag);
            }
            factors(a, b) = hi > 0.0 ? std::sqrt(hi * lo) : 1.0;
        }
    }
    return ChannelScaling{factors};
}

FrequencyResponseData apply_scaling(const FrequencyResponseData& data,
                                    const ChannelScaling& scaling) {
    if (scaling.factors.rows() != data.outputs || scaling.factors.cols() != data.inputs)
        throw DimensionMismatch("scaling factors do not match data dimensions");
    FrequencyResponseData out = data;
    for (CMat& h : out.responses) h = h.cwiseQuotient(scaling.factors.cast<Cplx>());
    return out;
}

RationalModel unscale_model(const RationalModel& model, const ChannelScaling& scaling) {
    if (scaling.factors.rows() != model.outputs || scaling.factors.cols() != model.inputs)
        throw DimensionMismatch("scaling factors do not match model dimensions");
    RationalModel out = model;
    out.gains = model.gains.cwiseProduct(scaling.factors);
    if (out.num_coeffs) {
        for (int a = 0; a < model.outputs; ++a)
            for (int b = 0; b < model.inputs; ++b)
                (*out.num_coeffs)[a * model.inputs + b] *= scaling.factors(a, b);
    }
    return out;
}

}  // namespace frfit
