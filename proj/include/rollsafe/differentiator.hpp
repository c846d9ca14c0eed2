#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "rollsafe/errors.hpp"

namespace rollsafe {

// High-gain observer gains. The estimation error obeys e' = A e + B_v v + B_w p0''
// with A = [[-k1 ell, 1], [-k2 ell^2, 0]].
struct HgoParams {
    double k1 = 2.0;
    double k2 = 1.0;
    double ell = 50.0;

    void validate() const;
    std::array<std::complex<double>, 2> error_eigenvalues() const;
    // min |Re(lambda)| over the error-dynamics eigenvalues.
    double slowest_decay_rate() const;
};

struct HgoRates {
    double mu1_rate = 0.0;
    double mu2_rate = 0.0;
};

// State of one differentiated signal plus the coefficients of its ISS envelope
//   M_i(t) = c1 e^{-c2 t} e0_bound + c3 v_inf + accel_term.
// accel_term carries the contribution of the bounded second derivative of the
// signal; it is zero for signals with constant slope.
struct DiffChannel {
    double mu1_hat = 0.0;
    double mu2_hat = 0.0;
    double e0_bound = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double accel_term = 0.0;
};

HgoRates hgo_derivative(const DiffChannel& channel, const HgoParams& params, double p);

double iss_envelope(const DiffChannel& channel, double t, double v_inf);
double iss_envelope_rate(const DiffChannel& channel, double t);

// (1/lambda) log sum exp(lambda M_i), evaluated with the max-shift.
double smooth_max(std::span<const double> values, double lambda);
// Softmax weights exp(lambda M_i) / sum_j exp(lambda M_j).
std::vector<double> smooth_max_weights(std::span<const double> values, double lambda);
double smooth_max_rate(std::span<const double> values, std::span<const double> rates,
                       double lambda);

// Three-point backward difference over the last three samples.
class BackwardDiffWindow {
public:
    explicit BackwardDiffWindow(double sample_period);

    void push(double p);
    void reset() { count_ = 0; }
    // True until three samples have arrived.
    bool warming_up() const { return count_ < 3; }
    double sample_period() const { return sample_period_; }

    double p_n() const { return p_[0]; }
    double p_n1() const { return p_[1]; }
    double p_n2() const { return p_[2]; }

private:
    double sample_period_;
    std::array<double, 3> p_{};
    int count_ = 0;
};

// (3 p_n - 4 p_{n-1} + p_{n-2}) / (2 T_s); 0 while warming up.
double backward_diff(const BackwardDiffWindow& window);
double backward_diff(double p_n, double p_n1, double p_n2, double sample_period);

// 2x2 matrix exponential, closed form. Row-major {a00, a01, a10, a11}.
using Mat2 = std::array<double, 4>;
Mat2 expm2(const Mat2& a, double t);
double spectral_norm2(const Mat2& m);

struct EnvelopeCoefficients {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double accel_term = 0.0;
    // Raw worst-case gains before the safety factor.
    double transient_peak = 0.0;
    double noise_gain = 0.0;
    double accel_gain = 0.0;
};

// Envelope coefficients for the linear HGO error system. c2 is 0.9 of the
// slowest decay rate; c1 is the peak of ||e^{At}|| e^{c2 t}; c3 and accel_term
// are the L1 norms of the noise and curvature impulse responses (the worst
// case over every input bounded by v_inf, resp. accel_bound). All but c2 are
// scaled by safety_factor.
EnvelopeCoefficients calibrate_envelope(const HgoParams& params, double accel_bound,
                                        double safety_factor = 1.25);

struct DifferentiatorConfig {
    HgoParams hgo;
    double lambda = 100.0;        // smooth-max sharpness
    double rate_bound = 0.0;      // assumed |p0'|, seeds e0_bound
    double accel_bound = 0.0;     // assumed |p0''|
    double safety_factor = 1.25;

    void validate() const;
};

// One HGO per parameter, sharing gains and envelope calibration.
class DifferentiatorBank {
public:
    DifferentiatorBank() = default;
    // mu1_hat starts at the first measurement, mu2_hat at zero, so
    // e0_bound = v_inf + rate_bound.
    DifferentiatorBank(const DifferentiatorConfig& config, double v_inf,
                       std::span<const double> first_measurements);

    std::size_t size() const { return channels_.size(); }
    const std::vector<DiffChannel>& channels() const { return channels_; }
    std::vector<DiffChannel>& channels() { return channels_; }
    const HgoParams& hgo() const { return config_.hgo; }
    const DifferentiatorConfig& config() const { return config_; }
    double v_inf() const { return v_inf_; }
    double lambda() const { return config_.lambda; }

    double channel_envelope(std::size_t i, double t) const;
    double envelope(double t) const;
    double envelope_rate(double t) const;

private:
    DifferentiatorConfig config_;
    double v_inf_ = 0.0;
    std::vector<DiffChannel> channels_;
};

}  // namespace rollsafe
