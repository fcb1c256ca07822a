#pragma once

#include "frfit/types.hpp"

namespace frfit {

/// Per-channel magnitude scale factors gamma(i,j) > 0.
struct ChannelScaling {
    Mat factors;  // p x m, strictly positive

    static ChannelScaling unit(int outputs, int inputs) {
        return ChannelScaling{Mat::Ones(outputs, inputs)};
    }
};

// gamma(i,j) = sqrt(max_t |H_t(i,j)| * min_t |H_t(i,j)|), the geometric mean
// of the extreme channel magnitudes. The min runs over nonzero samples;
// identically-zero channels fall back to gamma = 1.
ChannelScaling compute_scaling(const FrequencyResponseData& data);

// Divide each channel by its factor, centering the magnitude range at 1.
FrequencyResponseData apply_scaling(const FrequencyResponseData& data, const ChannelScaling& scaling);

// Multiply each channel gain by its factor, undoing apply_scaling on a
// model fitted to scaled data.
RationalModel unscale_model(const RationalModel& model, const ChannelScaling& scaling);

}  // namespace frfit
