#pragma once

#include <cstdint>

#include "frfit/types.hpp"

namespace frfit {

/// Randomly generated sum of lightly damped second-order modes
/// sum_k r_k w_k^2 / (s^2 + 2 z_k w_k s + w_k^2).
struct ModalModelSpec {
    int modes = 10;
    double residue_min = 0.1;
    double residue_max = 10.0;  // magnitude range; sign drawn separately
    double omega_min = 1.0;
    double omega_max = 3.16227766016838e5;  // log-uniform draw range, rad/s
    double zeta_min = 0.005;
    double zeta_max = 0.05;
    std::uint64_t seed = 0;
};

/// Multiplicative measurement noise H (1 + n1 e^{j n2}) with zero-mean
/// Gaussian n1, n2; variance 0.01 each gives roughly 20 dB SNR.
struct NoiseSpec {
    double variance_n1 = 0.01;
    double variance_n2 = 0.01;
    std::uint64_t seed = 0;
};

RationalModel modal_model(const ModalModelSpec& spec);

// Fifth-order SISO benchmark with an integrator and relative degree 3:
// (1.2e8 s^2 + 4.8e7 s + 5e10) / (s^5 + 200 s^4 + 4e6 s^3 + 1.7e6 s^2 + 1.6e9 s).
RationalModel greybox_benchmark_model();

FrequencyResponseData sample_with_noise(const RationalModel& model, const Vec& frequencies,
                                        const NoiseSpec& noise);

// n logarithmically spaced values over [lo, hi].
Vec logspace(double lo, double hi, int n);

// Deterministic cross-platform random stream (splitmix64 core, Box-Muller
// normals); exposed for test oracles.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed);
    double normal();     // standard normal
    double uniform01();  // open interval (0, 1)
    double uniform(double lo, double hi);

  private:
    std::uint64_t state_;
};

}  // namespace frfit
