#include "softland/plant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "softland/errors.hpp"

namespace softland {

namespace {

struct Vec3 {
    double z, v, lambda;
};

Vec3 axpy(const ActuatorState& s, double h, const StateDerivative& d) {
    return {s.z + h * d.dz, s.v + h * d.dv, s.lambda + h * d.dlambda};
}

ActuatorState as_state(const Vec3& x) { return {x.z, x.v, x.lambda}; }

bool finite(const ActuatorState& s) {
    return std::isfinite(s.z) && std::isfinite(s.v) && std::isfinite(s.lambda);
}

// Cubic Hermite on [0, h] through (y0, dy0) and (y1, dy1), evaluated at tau.
double hermite(double y0, double dy0, double y1, double dy1, double h, double tau) {
    const double s = tau / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * dy0 + (-2 * s3 + 3 * s2) * y1 +
           (s3 - s2) * h * dy1;
}

template <class Voltage>
OperationResult integrate(const PhysicalParams& p, Voltage&& voltage, const ActuatorState& init,
                          const SimOptions& opts) {
    opts.validate();
    OperationResult res;
    res.penalty_cost = opts.penalty_cost;

    const double h = opts.dt;
    const auto n_steps = static_cast<std::size_t>(std::ceil(opts.t_max / h - 1e-9));
    ActuatorState s = init;
    double t = opts.t_start;

    auto record = [&](std::size_t k, double tk, const ActuatorState& st) {
        if (opts.record_trace && k % opts.trace_stride == 0) {
            res.trace.push_back({tk, st.z, st.v, st.lambda, voltage(tk)});
        }
    };

    try {
        for (std::size_t k = 0; k < n_steps; ++k) {
            record(k, t, s);
            const double u0 = voltage(t);
            const double um = voltage(t + 0.5 * h);
            const double u1 = voltage(t + h);
            const auto k1 = state_derivative(s, u0, p);
            const auto k2 = state_derivative(as_state(axpy(s, 0.5 * h, k1)), um, p);
            const auto k3 = state_derivative(as_state(axpy(s, 0.5 * h, k2)), um, p);
            const auto k4 = state_derivative(as_state(axpy(s, h, k3)), u1, p);
            ActuatorState next{
                s.z + h / 6.0 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz),
                s.v + h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv),
                s.lambda + h / 6.0 * (k1.dlambda + 2.0 * k2.dlambda + 2.0 * k3.dlambda + k4.dlambda)};
            if (!finite(next)) {
                throw SimulationDivergedError("non-finite state at t=" + std::to_string(t + h));
            }

            if (next.z <= opts.z_lower && s.z > opts.z_lower) {
                // Refine the crossing on the Hermite interpolant of the step.
                const auto d1 = state_derivative(next, u1, p);
                double lo = 0.0;
                double hi = h;
                while (hi - lo > opts.impact_tol) {
                    const double mid = 0.5 * (lo + hi);
                    if (hermite(s.z, s.v, next.z, next.v, h, mid) > opts.z_lower) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                const double tau = 0.5 * (lo + hi);
                const double vc = hermite(s.v, k1.dv, next.v, d1.dv, h, tau);
                res.status = OperationStatus::Impact;
                res.impact_time = t + tau;
                res.impact_velocity = vc;
                res.cost = std::abs(vc);
                res.final_state = {opts.z_lower, vc, s.lambda + tau / h * (next.lambda - s.lambda)};
                record(0, t + tau, res.final_state);
                return res;
            }

            if (next.z > opts.z_upper && next.v > 0.0) {
                next.z = opts.z_upper;
                next.v = 0.0;
            }
            s = next;
            t += h;
        }
    } catch (const SaturationError& e) {
        throw SimulationDivergedError(std::string("plant flux saturated: ") + e.what());
    }
    record(0, t, s);
    res.status = OperationStatus::Timeout;
    res.cost = opts.penalty_cost;
    res.final_state = s;
    return res;
}

}  // namespace

void SimOptions::validate(double horizon) const {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("sim dt must be positive");
    }
    if (!(t_max > horizon)) {
        throw std::invalid_argument("sim t_max must exceed the trajectory duration");
    }
    if (!(impact_tol > 0.0)) {
        throw std::invalid_argument("sim impact_tol must be positive");
    }
    if (!(penalty_cost > 0.0)) {
        throw std::invalid_argument("sim penalty_cost must be positive");
    }
    if (trace_stride == 0) {
        throw std::invalid_argument("sim trace_stride must be at least 1");
    }
}

SimOptions default_sim_options(const TrajectorySpec& spec) {
    SimOptions o;
    o.t_start = spec.t0;
    o.t_max = 3.0 * spec.duration();
    o.z_upper = std::max(spec.z0, spec.zf);
    o.z_lower = std::min(spec.z0, spec.zf);
    return o;
}

bool OperationResult::operator==(const OperationResult& o) const {
    auto same_trace = [&] {
        if (trace.size() != o.trace.size()) return false;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const auto& a = trace[i];
            const auto& b = o.trace[i];
            if (a.t != b.t || a.z != b.z || a.v != b.v || a.lambda != b.lambda || a.u != b.u) {
                return false;
            }
        }
        return true;
    };
    return status == o.status && impact_time == o.impact_time &&
           impact_velocity == o.impact_velocity && penalty_cost == o.penalty_cost &&
           cost == o.cost && final_state.z == o.final_state.z && final_state.v == o.final_state.v &&
           final_state.lambda == o.final_state.lambda && same_trace();
}

double cost_of(const OperationResult& result) noexcept {
    if (result.impact_velocity) {
        return std::abs(*result.impact_velocity);
    }
    return result.penalty_cost;
}

OperationResult simulate_operation(const PhysicalParams& p_true, const FeedforwardSignal& input,
                                   const ActuatorState& init, const SimOptions& opts) {
    return integrate(p_true, [&](double t) { return input.voltage_at(t); }, init, opts);
}

OperationResult simulate_operation(const PhysicalParams& p_true, ConstantVoltage input,
                                   const ActuatorState& init, const SimOptions& opts) {
    return integrate(p_true, [v = input.volts](double) { return v; }, init, opts);
}

OperationResult simulate_operation(const PhysicalParams& p_true, const FeedforwardOutcome& input,
                                   const ActuatorState& init, const SimOptions& opts) {
    if (const auto* sig = std::get_if<FeedforwardSignal>(&input)) {
        return simulate_operation(p_true, *sig, init, opts);
    }
    opts.validate();
    OperationResult res;
    res.status = OperationStatus::InvalidInput;
    res.penalty_cost = opts.penalty_cost;
    res.cost = opts.penalty_cost;
    res.final_state = init;
    return res;
}

ActuatorState closing_start(const TrajectorySpec& spec, const FeedforwardOutcome& input,
                            bool precharge) {
    ActuatorState s{spec.z0, 0.0, 0.0};
    if (precharge) {
        if (const auto* sig = std::get_if<FeedforwardSignal>(&input)) {
            s.lambda = sig->initial_flux;
        }
    }
    return s;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceSample>& trace) {
    const auto old = os.precision(std::numeric_limits<double>::max_digits10);
    os << "t,z,v,lambda,u\n";
    for (const auto& r : trace) {
        os << r.t << ',' << r.z << ',' << r.v << ',' << r.lambda << ',' << r.u << '\n';
    }
    os.precision(old);
}

}  // namespace softland
