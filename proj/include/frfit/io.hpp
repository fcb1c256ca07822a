#pragma once

#include <string>

#include "frfit/types.hpp"

namespace frfit {

inline constexpr const char* kToolVersion = "0.1.0";

// CSV dataset layout: header `freq_rad_s,re_y1u1,im_y1u1,...[,weight]`,
// channels row-major over (output, input), shortest-round-trip decimal
// serialization, atomic write-then-rename. A `freq_hz` header is accepted on
// read and converted to rad/s.
void write_dataset_csv(const std::string& path, const FrequencyResponseData& data);
FrequencyResponseData read_dataset_csv(const std::string& path);

// One weight value per line.
Vec read_weight_file(const std::string& path);

/// Optional report fields carried inside a model file.
struct ModelFileMetadata {
    std::string constraints_echo;  // human-readable constraint summary
    double nrmse_percent = std::numeric_limits<double>::quiet_NaN();
    double final_cost = std::numeric_limits<double>::quiet_NaN();
    int sk_iterations = 0;
    int iv_iterations = 0;
    double worst_condition_number = 0.0;
    std::string best_stage;
    bool has_fit = false;
};

// JSON model document: domain, ascending coefficients, zpk form, gains,
// optional fit metrics and constraint echo, tool version. No timestamps, so
// writes are byte-deterministic.
void write_model_json(const std::string& path, const RationalModel& model,
                      const ModelFileMetadata& meta = {});
RationalModel read_model_json(const std::string& path);

}  // namespace frfit
