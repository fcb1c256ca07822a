#include "frfit/mapping.hpp"

#include <cmath>

#include "frfit/model.hpp"
#include "frfit/polynomial.hpp"

namespace frfit {

namespace {

constexpr double kSingularTol = 1e-14;
constexpr double kGoldenRatio = 1.6180339887498949;

bool maps_to_infinity_s(const BilinearMap& map, Cplx s) {
    return std::abs(s - Cplx(map.alpha, 0.0)) <= kSingularTol * map.alpha;
}

bool maps_to_infinity_q(Cplx q) { return std::abs(q + Cplx(1.0, 0.0)) <= kSingularTol; }

}  // namespace

double select_alpha(double omega_min, double omega_max) {
    if (!std::isfinite(omega_min) || !std::isfinite(omega_max) || omega_min <= 0.0 ||
        omega_max < omega_min) {
        throw BadRange("need 0 < omega_min <= omega_max, finite");
    }
    return std::sqrt(omega_min * omega_max);
}

Cplx to_disk(const BilinearMap& map, Cplx s) {
    if (maps_to_infinity_s(map, s))
        throw MapSingularity("point coincides with alpha; image is at infinity");
    return (Cplx(map.alpha, 0.0) + s) / (Cplx(map.alpha, 0.0) - s);
}

Cplx from_disk(const BilinearMap& map, Cplx q) {
    if (maps_to_infinity_q(q))
        throw PointAtInfinity("q = -1 corresponds to s at infinity");
    return map.alpha * (q - Cplx(1.0, 0.0)) / (q + Cplx(1.0, 0.0));
}

RationalModel map_model(const BilinearMap& map, const RationalModel& model,
                        MapDirection direction) {
    const bool to_q = direction == MapDirection::SToQ;
    if (to_q && model.domain != Domain::SPlane)
        throw std::invalid_argument("map_model s->q expects an s-plane model");
    if (!to_q && model.domain != Domain::QDisk)
        throw std::invalid_argument("map_model q->s expects a disk-domain model");

    RationalModel out;
    out.domain = to_q ? Domain::QDisk : Domain::SPlane;
    out.outputs = model.outputs;
    out.inputs = model.inputs;

    auto transport = [&](const CVec& pts, int& dropped) {
        std::vector<Cplx> mapped;
        mapped.reserve(pts.size());
        for (Eigen::Index k = 0; k < pts.size(); ++k) {
            const Cplx p = pts(k);
            if (to_q ? maps_to_infinity_s(map, p) : maps_to_infinity_q(p)) {
                ++dropped;
                continue;
            }
            mapped.push_back(to_q ? to_disk(map, p) : from_disk(map, p));
        }
        return Eigen::Map<const CVec>(mapped.data(), static_cast<Eigen::Index>(mapped.size()))
            .eval();
    };

    out.poles = transport(model.poles, out.poles_dropped_at_infinity);
    out.zeros.resize(model.zeros.size());
    for (size_t ch = 0; ch < model.zeros.size(); ++ch)
        out.zeros[ch] = transport(model.zeros[ch], out.zeros_dropped_at_infinity);

    // Relative degree bookkeeping: s-zeros (or poles) at infinity surface as
    // explicit q-points at -1 so that per-channel order counts stay exact.
    if (to_q) {
        const Eigen::Index np = model.poles.size();
        for (size_t ch = 0; ch < out.zeros.size(); ++ch) {
            const Eigen::Index nz = model.zeros[ch].size();
            if (nz < np) {
                CVec extended(out.zeros[ch].size() + (np - nz));
                extended.head(out.zeros[ch].size()) = out.zeros[ch];
                extended.tail(np - nz).setConstant(Cplx(-1.0, 0.0));
                out.zeros[ch] = extended;
            }
        }
    }

    // Gain per channel from agreement at the reference point.
    out.gains = Mat::Zero(model.outputs, model.inputs);
    for (int a = 0; a < model.outputs; ++a) {
        for (int b = 0; b < model.inputs; ++b) {
            if (model.channel_gain(a, b) == 0.0) continue;  // identically zero channel
            bool matched = false;
            for (int attempt = 0; attempt < 4 && !matched; ++attempt) {
                const Cplx s_ref(0.0, map.alpha * std::pow(kGoldenRatio, attempt));
                const Cplx q_ref = to_disk(map, s_ref);
                try {
                    const Cplx src = eval_channel(model, a, b, to_q ? s_ref : q_ref);
                    RationalModel probe = out;
                    probe.gains(a, b) = 1.0;
                    const Cplx img = eval_channel(probe, a, b, to_q ? q_ref : s_ref);
                    if (std::abs(img) == 0.0 || std::abs(src) == 0.0) continue;
                    const Cplx ratio = src / img;
                    out.gains(a, b) = ratio.real();
                    matched = true;
                } catch (const PoleHit&) {
                    continue;
                }
            }
            if (!matched)
                throw GainReferenceHit("all gain reference points hit a pole or zero");
        }
    }

    if (conjugate_closed(out.poles)) {
        bool all_closed = true;
        for (const CVec& z : out.zeros) all_closed = all_closed && conjugate_closed(z);
        if (all_closed) materialize_coefficients(out);
    }
    return out;
}

}  // namespace frfit
