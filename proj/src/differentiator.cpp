#include "rollsafe/differentiator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rollsafe {

void HgoParams::validate() const {
    if (!(k1 > 0.0) || !(k2 > 0.0) || !(ell > 0.0)) {
        throw DomainError("HgoParams: k1, k2 and ell must be positive");
    }
    for (const auto& ev : error_eigenvalues()) {
        if (!(ev.real() < 0.0)) throw DomainError("HgoParams: error dynamics not Hurwitz");
    }
}

std::array<std::complex<double>, 2> HgoParams::error_eigenvalues() const {
    // s^2 + k1 ell s + k2 ell^2
    const double b = k1 * ell;
    const double c = k2 * ell * ell;
    const std::complex<double> root = std::sqrt(std::complex<double>(b * b - 4.0 * c, 0.0));
    return {(-b + root) / 2.0, (-b - root) / 2.0};
}

double HgoParams::slowest_decay_rate() const {
    const auto ev = error_eigenvalues();
    return std::min(std::abs(ev[0].real()), std::abs(ev[1].real()));
}

HgoRates hgo_derivative(const DiffChannel& ch, const HgoParams& params, double p) {
    const double innovation = p - ch.mu1_hat;
    return {ch.mu2_hat + params.k1 * params.ell * innovation,
            params.k2 * params.ell * params.ell * innovation};
}

double iss_envelope(const DiffChannel& ch, double t, double v_inf) {
    if (!(t >= 0.0)) throw DomainError("iss_envelope: t must be >= 0");
    return ch.c1 * std::exp(-ch.c2 * t) * ch.e0_bound + ch.c3 * v_inf + ch.accel_term;
}

double iss_envelope_rate(const DiffChannel& ch, double t) {
    if (!(t >= 0.0)) throw DomainError("iss_envelope_rate: t must be >= 0");
    return -ch.c1 * ch.c2 * std::exp(-ch.c2 * t) * ch.e0_bound;
}

namespace {

void check_smooth_max_args(std::span<const double> values, double lambda) {
    if (values.empty()) throw DomainError("smooth_max: empty input");
    if (!(lambda > 0.0)) throw DomainError("smooth_max: lambda must be positive");
}

}  // namespace

double smooth_max(std::span<const double> values, double lambda) {
    check_smooth_max_args(values, lambda);
    const double top = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double m : values) sum += std::exp(lambda * (m - top));
    return top + std::log(sum) / lambda;
}

std::vector<double> smooth_max_weights(std::span<const double> values, double lambda) {
    check_smooth_max_args(values, lambda);
    const double top = *std::max_element(values.begin(), values.end());
    std::vector<double> w(values.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        w[i] = std::exp(lambda * (values[i] - top));
        sum += w[i];
    }
    for (double& wi : w) wi /= sum;
    return w;
}

double smooth_max_rate(std::span<const double> values, std::span<const double> rates,
                       double lambda) {
    if (values.size() != rates.size()) throw DomainError("smooth_max_rate: length mismatch");
    const auto w = smooth_max_weights(values, lambda);
    double out = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) out += w[i] * rates[i];
    return out;
}

BackwardDiffWindow::BackwardDiffWindow(double sample_period) : sample_period_(sample_period) {
    if (!(sample_period > 0.0)) throw DomainError("BackwardDiffWindow: T_s must be positive");
}

void BackwardDiffWindow::push(double p) {
    p_[2] = p_[1];
    p_[1] = p_[0];
    p_[0] = p;
    if (count_ < 3) ++count_;
}

double backward_diff(double p_n, double p_n1, double p_n2, double sample_period) {
    if (!(sample_period > 0.0)) throw DomainError("backward_diff: T_s must be positive");
    return (3.0 * p_n - 4.0 * p_n1 + p_n2) / (2.0 * sample_period);
}

double backward_diff(const BackwardDiffWindow& w) {
    if (w.warming_up()) return 0.0;
    return backward_diff(w.p_n(), w.p_n1(), w.p_n2(), w.sample_period());
}

Mat2 expm2(const Mat2& a, double t) {
    // e^{At} = e^{st} [C(t) I + S(t) (A - sI)], s = tr/2, q^2 = s^2 - det,
    // C = cosh(qt), S = sinh(qt)/q (analytic continuation for q^2 <= 0).
    const double s = 0.5 * (a[0] + a[3]);
    const double det = a[0] * a[3] - a[1] * a[2];
    const double q2 = s * s - det;
    double ec = 0.0;  // e^{st} C
    double es = 0.0;  // e^{st} S
    if (std::abs(q2) * t * t < 1e-10) {
        const double e = std::exp(s * t);
        ec = e * (1.0 + 0.5 * q2 * t * t);
        es = e * t * (1.0 + q2 * t * t / 6.0);
    } else if (q2 > 0.0) {
        const double q = std::sqrt(q2);
        const double ep = std::exp((s + q) * t);
        const double em = std::exp((s - q) * t);
        ec = 0.5 * (ep + em);
        es = 0.5 * (ep - em) / q;
    } else {
        const double w = std::sqrt(-q2);
        const double e = std::exp(s * t);
        ec = e * std::cos(w * t);
        es = e * std::sin(w * t) / w;
    }
    return {ec + es * (a[0] - s), es * a[1], es * a[2], ec + es * (a[3] - s)};
}

double spectral_norm2(const Mat2& m) {
    const double p = m[0] * m[0] + m[2] * m[2];
    const double r = m[0] * m[1] + m[2] * m[3];
    const double q = m[1] * m[1] + m[3] * m[3];
    const double half = 0.5 * (p - q);
    return std::sqrt(0.5 * (p + q) + std::sqrt(half * half + r * r));
}

EnvelopeCoefficients calibrate_envelope(const HgoParams& params, double accel_bound,
                                        double safety_factor) {
    params.validate();
    if (!(accel_bound >= 0.0)) throw DomainError("calibrate_envelope: accel_bound must be >= 0");
    if (!(safety_factor >= 1.0)) throw DomainError("calibrate_envelope: safety_factor must be >= 1");

    const double kl = params.k1 * params.ell;
    const double kl2 = params.k2 * params.ell * params.ell;
    const Mat2 a{-kl, 1.0, -kl2, 0.0};
    const std::array<double, 2> b_noise{kl, kl2};
    const std::array<double, 2> b_accel{0.0, -1.0};

    const auto ev = params.error_eigenvalues();
    const double slow = params.slowest_decay_rate();
    const double fast = std::max(std::abs(ev[0]), std::abs(ev[1]));

    EnvelopeCoefficients out;
    out.c2 = 0.9 * slow;

    // Sweep the impulse responses until well past the slowest mode.
    const double t_end = 80.0 / slow;
    const double dt = std::min(1.0 / (2000.0 * fast), t_end / 2000.0);
    const auto n = static_cast<std::size_t>(std::ceil(t_end / dt));

    auto response_norm = [](const Mat2& phi, const std::array<double, 2>& b) {
        const double e1 = phi[0] * b[0] + phi[1] * b[1];
        const double e2 = phi[2] * b[0] + phi[3] * b[1];
        return std::hypot(e1, e2);
    };

    double peak = 0.0;
    double noise_gain = 0.0;
    double accel_gain = 0.0;
    double prev_noise = response_norm(expm2(a, 0.0), b_noise);
    double prev_accel = response_norm(expm2(a, 0.0), b_accel);
    peak = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double t = static_cast<double>(k) * dt;
        const Mat2 phi = expm2(a, t);
        peak = std::max(peak, spectral_norm2(phi) * std::exp(out.c2 * t));
        const double rn = response_norm(phi, b_noise);
        const double ra = response_norm(phi, b_accel);
        noise_gain += 0.5 * dt * (rn + prev_noise);
        accel_gain += 0.5 * dt * (ra + prev_accel);
        prev_noise = rn;
        prev_accel = ra;
    }

    out.transient_peak = peak;
    out.noise_gain = noise_gain;
    out.accel_gain = accel_gain;
    out.c1 = safety_factor * peak;
    out.c3 = safety_factor * noise_gain;
    out.accel_term = safety_factor * accel_gain * accel_bound;
    return out;
}

void DifferentiatorConfig::validate() const {
    hgo.validate();
    if (!(lambda > 0.0)) throw DomainError("DifferentiatorConfig: lambda must be positive");
    if (!(rate_bound >= 0.0) || !(accel_bound >= 0.0)) {
        throw DomainError("DifferentiatorConfig: rate and accel bounds must be >= 0");
    }
    if (!(safety_factor >= 1.0)) throw DomainError("DifferentiatorConfig: safety_factor must be >= 1");
}

DifferentiatorBank::DifferentiatorBank(const DifferentiatorConfig& config, double v_inf,
                                       std::span<const double> first_measurements)
    : config_(config), v_inf_(v_inf) {
    config_.validate();
    if (!(v_inf >= 0.0)) throw DomainError("DifferentiatorBank: v_inf must be >= 0");
    if (first_measurements.empty()) throw DomainError("DifferentiatorBank: no channels");
    const auto coeffs = calibrate_envelope(config_.hgo, config_.accel_bound, config_.safety_factor);
    for (double p0 : first_measurements) {
        DiffChannel ch;
        ch.mu1_hat = p0;
        ch.mu2_hat = 0.0;
        ch.e0_bound = v_inf + config_.rate_bound;
        ch.c1 = coeffs.c1;
        ch.c2 = coeffs.c2;
        ch.c3 = coeffs.c3;
        ch.accel_term = coeffs.accel_term;
        channels_.push_back(ch);
    }
}

double DifferentiatorBank::channel_envelope(std::size_t i, double t) const {
    return iss_envelope(channels_.at(i), t, v_inf_);
}

double DifferentiatorBank::envelope(double t) const {
    std::vector<double> m(channels_.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = iss_envelope(channels_[i], t, v_inf_);
    return smooth_max(m, config_.lambda);
}

double DifferentiatorBank::envelope_rate(double t) const {
    std::vector<double> m(channels_.size());
    std::vector<double> r(channels_.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] = iss_envelope(channels_[i], t, v_inf_);
        r[i] = iss_envelope_rate(channels_[i], t);
    }
    return smooth_max_rate(m, r, config_.lambda);
}

}  // namespace rollsafe
