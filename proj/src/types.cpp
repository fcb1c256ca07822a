#include "frfit/types.hpp"

#include <algorithm>
#include <cmath>

namespace frfit {

void FrequencyResponseData::validate() const {
    const int l = size();
    if (l == 0) throw std::invalid_argument("frequency response data is empty");
    if (outputs < 1 || inputs < 1) throw std::invalid_argument("bad channel dimensions");
    for (int i = 0; i < l; ++i) {
        const double w = frequencies(i);
        if (!std::isfinite(w) || w <= 0.0)
            throw std::invalid_argument("frequencies must be finite and > 0");
        if (i > 0 && frequencies(i) <= frequencies(i - 1))
            throw std::invalid_argument("frequencies must be strictly ascending");
    }
    if (static_cast<int>(responses.size()) != l)
        throw std::invalid_argument("responses length must match frequencies length");
    for (const CMat& h : responses) {
        if (h.rows() != outputs || h.cols() != inputs)
            throw std::invalid_argument("response sample has wrong dimensions");
        if (!h.allFinite()) throw std::invalid_argument("response sample has non-finite entries");
    }
    if (weights) {
        if (weights->size() != l)
            throw std::invalid_argument("weights length must match frequencies length");
        if ((weights->array() < 0.0).any() || !weights->allFinite())
            throw std::invalid_argument("weights must be finite and nonnegative");
        if (weights->maxCoeff() <= 0.0)
            throw std::invalid_argument("at least one weight must be positive");
    }
}

FrequencyResponseData FrequencyResponseData::siso(Vec w, CVec h, std::optional<Vec> weights) {
    FrequencyResponseData data;
    data.frequencies = std::move(w);
    data.responses.reserve(h.size());
    for (Eigen::Index i = 0; i < h.size(); ++i) {
        CMat m(1, 1);
        m(0, 0) = h(i);
        data.responses.push_back(std::move(m));
    }
    data.weights = std::move(weights);
    data.outputs = 1;
    data.inputs = 1;
    data.validate();
    return data;
}

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Initial: return "initial";
        case Stage::Sk: return "sk";
        case Stage::Iv: return "iv";
    }
    return "?";
}

std::vector<double> FitReport::all_costs() const {
    std::vector<double> out;
    out.insert(out.end(), initial_costs.begin(), initial_costs.end());
    out.insert(out.end(), sk_costs.begin(), sk_costs.end());
    out.insert(out.end(), iv_costs.begin(), iv_costs.end());
    return out;
}

}  // namespace frfit
