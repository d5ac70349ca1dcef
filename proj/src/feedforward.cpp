#include "softland/feedforward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "softland/errors.hpp"

namespace softland {

ControlParams ControlParams::ones() noexcept {
    ControlParams c;
    c.theta.fill(1.0);
    return c;
}

PhysicalParams effective_params(const PhysicalParams& p_nom, const ControlParams& theta) {
    auto values = p_nom.uncertain();
    for (std::size_t i = 0; i < kNumUncertain; ++i) {
        values[i] *= theta[i];
    }
    return PhysicalParams::from_uncertain(values, p_nom.R_coil);
}

double flat_flux(double z, double z_ddot, const PhysicalParams& p) {
    const double radicand = -2.0 * (p.k_s * (z - p.z_s) + p.m * z_ddot) / d_reluctance_dz(z, p);
    if (!(radicand >= 0.0)) {
        throw InfeasibleFlatnessError("negative radicand in flat flux", z, z_ddot);
    }
    const double lambda = std::sqrt(radicand);
    if (!(lambda < p.lambda_sat)) {
        throw InfeasibleFlatnessError("flat flux at or above saturation", z, z_ddot);
    }
    return lambda;
}

double flat_flux_rate(double z, double z_dot, double z_ddot, double z_dddot,
                      const PhysicalParams& p) {
    const double lambda = flat_flux(z, z_ddot, p);
    if (lambda == 0.0) {
        throw InfeasibleFlatnessError("zero flux in flat flux rate", z, z_ddot);
    }
    const double num = -p.k_s * z_dot - p.m * z_dddot -
                       0.5 * lambda * lambda * d2_reluctance_dz2(z, p) * z_dot;
    return num / (lambda * d_reluctance_dz(z, p));
}

double flat_voltage(const TrajectoryPoint& pt, const PhysicalParams& p) {
    const double lambda = flat_flux(pt.z, pt.ddz, p);
    const double lambda_dot = flat_flux_rate(pt.z, pt.dz, pt.ddz, pt.dddz, p);
    return p.R_coil * reluctance(pt.z, lambda, p) * lambda + lambda_dot;
}

double feedforward_voltage(double t, const ControlParams& theta, const Trajectory& traj,
                           const PhysicalParams& p_nom) {
    return flat_voltage(traj.eval(t), effective_params(p_nom, theta));
}

double initial_flux(const ControlParams& theta, const Trajectory& traj,
                    const PhysicalParams& p_nom) {
    const auto pt = traj.eval(traj.spec().t0);
    return flat_flux(pt.z, pt.ddz, effective_params(p_nom, theta));
}

double FeedforwardSignal::voltage_at(double t) const noexcept {
    if (values.empty()) {
        return hold_value;
    }
    if (t <= times.front()) {
        return values.front();
    }
    if (t >= times.back()) {
        return hold_value;
    }
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    auto i = static_cast<std::size_t>((t - times.front()) / dt);
    i = std::min(i, times.size() - 2);
    const double w = (t - times[i]) / (times[i + 1] - times[i]);
    return values[i] + w * (values[i + 1] - values[i]);
}

FeedforwardOutcome sample_feedforward(const ControlParams& theta, const Trajectory& traj,
                                      const PhysicalParams& p_nom, std::size_t n_samples) {
    if (n_samples < 2) {
        throw std::invalid_argument("feedforward needs at least two samples");
    }
    const auto& spec = traj.spec();
    const PhysicalParams p = effective_params(p_nom, theta);

    FeedforwardSignal sig;
    sig.times.resize(n_samples);
    sig.values.resize(n_samples);
    const double step = spec.duration() / static_cast<double>(n_samples - 1);
    double t = spec.t0;
    try {
        for (std::size_t i = 0; i < n_samples; ++i) {
            t = (i + 1 == n_samples) ? spec.tf : spec.t0 + step * static_cast<double>(i);
            sig.times[i] = t;
            sig.values[i] = flat_voltage(traj.eval(t), p);
            if (!std::isfinite(sig.values[i])) {
                return InvalidCandidate{t, "non-finite feedforward voltage"};
            }
        }
        const auto start = traj.eval(spec.t0);
        sig.initial_flux = flat_flux(start.z, start.ddz, p);
    } catch (const std::domain_error& e) {
        return InvalidCandidate{t, e.what()};
    }
    sig.hold_value = sig.values.back();
    return sig;
}

void write_signal_csv(std::ostream& os, const FeedforwardSignal& signal) {
    const auto old = os.precision(std::numeric_limits<double>::max_digits10);
    os << "time_s,voltage_V\n";
    for (std::size_t i = 0; i < signal.times.size(); ++i) {
        os << signal.times[i] << ',' << signal.values[i] << '\n';
    }
    os.precision(old);
}

}  // namespace softland
