#pragma once

#include "frfit/types.hpp"

namespace frfit {

/// Bilinear map q(s) = (alpha + s)/(alpha - s) between the s-plane and the
/// unit disk; the imaginary axis lands on the unit circle.
struct BilinearMap {
    double alpha = 1.0;

    explicit BilinearMap(double a) : alpha(a) {
        if (!std::isfinite(a) || a <= 0.0) throw BadRange("alpha must be finite and > 0");
    }
};

// Band-center choice maximizing |q(j w_min) - q(j w_max)| over alpha:
// sqrt(w_min * w_max). Throws BadRange on a nonpositive or unordered range.
double select_alpha(double omega_min, double omega_max);

Cplx to_disk(const BilinearMap& map, Cplx s);
Cplx from_disk(const BilinearMap& map, Cplx q);

enum class MapDirection { SToQ, QToS };

// Transport a model's poles and zeros pointwise through the map. Relative
// degree is carried across explicitly: s-zeros at infinity become q-zeros at
// -1 and vice versa; points mapped to infinity are dropped and counted on
// the result. The gain is matched at the reference point s = j*alpha
// (q = j), falling back to golden-ratio multiples when a pole sits there.
RationalModel map_model(const BilinearMap& map, const RationalModel& model, MapDirection direction);

}  // namespace frfit
