#include "frfit/datagen.hpp"

#include <cmath>
#include <numbers>

#include "frfit/model.hpp"
#include "frfit/polynomial.hpp"

namespace frfit {

RandomStream::RandomStream(std::uint64_t seed) : state_(seed + 0x9e3779b97f4a7c15ULL) {}

double RandomStream::uniform01() {
    // splitmix64 step
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return (static_cast<double>(z >> 11) + 1.0) / 9007199254740993.0;  // (0, 1)
}

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double RandomStream::normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec logspace(double lo, double hi, int n) {
    if (n < 1 || lo <= 0.0 || hi < lo) throw BadRange("logspace needs 0 < lo <= hi, n >= 1");
    Vec out(n);
    if (n == 1) {
        out(0) = lo;
        return out;
    }
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) out(i) = lo * std::exp(step * i);
    out(n - 1) = hi;
    return out;
}

RationalModel modal_model(const ModalModelSpec& spec) {
    if (spec.modes < 1) throw BadRange("need at least one mode");
    if (spec.omega_min <= 0.0 || spec.omega_max < spec.omega_min)
        throw BadRange("bad natural frequency range");
    if (spec.zeta_min <= 0.0 || spec.zeta_max >= 1.0 || spec.zeta_max < spec.zeta_min)
        throw BadRange("damping must satisfy 0 < zeta < 1");

    RandomStream rng(spec.seed);
    const int K = spec.modes;
    Vec residues(K), omegas(K), zetas(K);
    for (int k = 0; k < K; ++k) {
        residues(k) = rng.uniform(spec.residue_min, spec.residue_max);
        if (rng.uniform01() < 0.5) residues(k) = -residues(k);
        omegas(k) = std::exp(rng.uniform(std::log(spec.omega_min), std::log(spec.omega_max)));
        zetas(k) = rng.uniform(spec.zeta_min, spec.zeta_max);
    }

    // Common-denominator expansion of the modal sum.
    std::vector<Vec> quads(K);
    for (int k = 0; k < K; ++k) {
        Vec q(3);
        q << omegas(k) * omegas(k), 2.0 * zetas(k) * omegas(k), 1.0;
        quads[k] = q;
    }
    Vec den = Vec::Ones(1);
    for (int k = 0; k < K; ++k) den = convolve(den, quads[k]);
    Vec num = Vec::Zero(den.size() - 2);
    for (int k = 0; k < K; ++k) {
        Vec term = Vec::Ones(1);
        for (int j = 0; j < K; ++j)
            if (j != k) term = convolve(term, quads[j]);
        num.head(term.size()) += residues(k) * omegas(k) * omegas(k) * term;
    }

    RationalModel m = siso_from_coefficients(num, den);
    // exact analytic poles replace the rooted ones
    CVec poles(2 * K);
    for (int k = 0; k < K; ++k) {
        const double re = -zetas(k) * omegas(k);
        const double im = omegas(k) * std::sqrt(1.0 - zetas(k) * zetas(k));
        poles(2 * k) = Cplx(re, im);
        poles(2 * k + 1) = Cplx(re, -im);
    }
    m.poles = poles;
    return m;
}

RationalModel greybox_benchmark_model() {
    Vec num(3);
    num << 5e10, 4.8e7, 1.2e8;
    Vec den(6);
    den << 0.0, 1.6e9, 1.7e6, 4e6, 200.0, 1.0;
    return siso_from_coefficients(num, den);
}

FrequencyResponseData sample_with_noise(const RationalModel& model, const Vec& frequencies,
                                        const NoiseSpec& noise) {
    if (noise.variance_n1 < 0.0 || noise.variance_n2 < 0.0)
        throw BadRange("noise variances must be nonnegative");
    RandomStream rng(noise.seed);
    const double s1 = std::sqrt(noise.variance_n1);
    const double s2 = std::sqrt(noise.variance_n2);

    FrequencyResponseData data;
    data.frequencies = frequencies;
    data.outputs = model.outputs;
    data.inputs = model.inputs;
    data.responses.reserve(frequencies.size());
    for (Eigen::Index i = 0; i < frequencies.size(); ++i) {
        const Cplx s(0.0, frequencies(i));
        CMat h(model.outputs, model.inputs);
        for (int a = 0; a < model.outputs; ++a) {
            for (int b = 0; b < model.inputs; ++b) {
                const double n1 = s1 * rng.normal();
                const double n2 = s2 * rng.normal();
                const Cplx eps = n1 * std::exp(Cplx(0.0, n2));
                h(a, b) = eval_channel(model, a, b, s) * (1.0 + eps);
            }
        }
        data.responses.push_back(std::move(h));
    }
    data.validate();
    return data;
}

}  // namespace frfit
