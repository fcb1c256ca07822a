#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace frfit {

using Cplx = std::complex<double>;
using Vec  = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat  = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PoleHit : Error { using Error::Error; };
struct AllZero : Error { using Error::Error; };
struct BadRange : Error { using Error::Error; };
struct MapSingularity : Error { using Error::Error; };
struct PointAtInfinity : Error { using Error::Error; };
struct GainReferenceHit : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct BasisSingularity : Error { using Error::Error; };
struct BadPoint : Error { using Error::Error; };
struct DegenerateDenominator : Error { using Error::Error; };
struct NodeSingularity : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct InfeasibleConstraints : Error { using Error::Error; };
struct SingularKKT : Error { using Error::Error; };
struct SolveFailure : Error { using Error::Error; };
struct SingularIVSystem : Error { using Error::Error; };

// Estimation failures carry the pipeline stage they occurred in.
struct EstimationError : Error {
    std::string stage;
    EstimationError(std::string stage_, const std::string& what_)
        : Error("[" + stage_ + "] " + what_), stage(std::move(stage_)) {}
};

/// Complex frequency response samples H(j*omega_i) of a p-output, m-input
/// system, with optional per-frequency scalar weights.
struct FrequencyResponseData {
    Vec frequencies;              // rad/s, strictly ascending, all > 0
    std::vector<CMat> responses;  // one p x m matrix per frequency
    std::optional<Vec> weights;   // nonnegative, at least one positive
    int outputs = 1;
    int inputs  = 1;

    int size() const { return static_cast<int>(frequencies.size()); }
    double weight(int i) const { return weights ? (*weights)(i) : 1.0; }

    // Throws std::invalid_argument when an invariant is violated.
    void validate() const;

    static FrequencyResponseData siso(Vec w, CVec h, std::optional<Vec> weights = {});
};

enum class Domain { SPlane, QDisk };

/// Rational model N(s)/d(s) with a common denominator across channels.
/// Held in zero-pole-gain form; the polynomial coefficient form (ascending
/// powers, real) can be materialized alongside. Improper models (more zeros
/// than poles) are allowed.
struct RationalModel {
    Domain domain = Domain::SPlane;
    int outputs = 1;
    int inputs  = 1;

    CVec poles;                   // common denominator roots
    std::vector<CVec> zeros;      // per channel, row-major over (output, input)
    Mat gains;                    // p x m, real

    std::optional<Vec> den_coeffs;               // ascending, real
    std::optional<std::vector<Vec>> num_coeffs;  // per channel, ascending, real

    // Points transported to infinity and dropped by a domain map.
    int zeros_dropped_at_infinity = 0;
    int poles_dropped_at_infinity = 0;

    int channels() const { return outputs * inputs; }
    const CVec& channel_zeros(int out, int in) const { return zeros[out * inputs + in]; }
    double channel_gain(int out, int in) const { return gains(out, in); }
};

enum class Stage { Initial, Sk, Iv };

const char* stage_name(Stage s);

/// Per-stage cost trace and numerical health record of one estimation run.
struct FitReport {
    std::vector<double> initial_costs;
    std::vector<double> sk_costs;
    std::vector<double> iv_costs;
    std::vector<double> condition_numbers;  // one entry per linear solve

    Stage best_stage = Stage::Initial;
    double best_cost = 0.0;
    int sk_iterations = 0;
    int iv_iterations = 0;
    bool sk_converged = false;
    bool iv_converged = false;
    double worst_condition_number = 0.0;

    std::vector<double> all_costs() const;
};

}  // namespace frfit
