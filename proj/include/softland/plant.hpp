#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "softland/feedforward.hpp"
#include "softland/model.hpp"
#include "softland/trajectory.hpp"

namespace softland {

/// |v_c| of a 30 V constant-voltage closing on the nominal plant, from a
/// reference run at dt = 1e-7 s with a 1e-13 s event tolerance. Used to
/// scale the default penalty.
inline constexpr double kNominalBaselineCost = 1.9774530897339286;

struct SimOptions {
    double dt = 1e-6;
    double t_start = 0.0;
    /// Simulated time allowed after t_start before giving up.
    double t_max = 3.0 * 3.5e-3;
    double impact_tol = 1e-9;
    double penalty_cost = 2.0 * kNominalBaselineCost;
    double z_upper = 1e-3;  // upper mechanical stop
    double z_lower = 0.0;   // landing position
    bool record_trace = false;
    std::size_t trace_stride = 1;

    /// Throws std::invalid_argument on dt <= 0, non-positive penalty or a
    /// timeout that ends before `horizon` (typically tf - t0).
    void validate(double horizon = 0.0) const;
};

/// Defaults tied to a trajectory: stroke limits from the trajectory and a
/// timeout of three trajectory durations.
SimOptions default_sim_options(const TrajectorySpec& spec);

struct ConstantVoltage {
    double volts = 0.0;
};

struct TraceSample {
    double t, z, v, lambda, u;
};

enum class OperationStatus { Impact, Timeout, InvalidInput };

struct OperationResult {
    OperationStatus status = OperationStatus::Timeout;
    std::optional<double> impact_time;
    std::optional<double> impact_velocity;
    double penalty_cost = 0.0;
    double cost = 0.0;
    ActuatorState final_state;
    std::vector<TraceSample> trace;

    bool operator==(const OperationResult& o) const;
};

/// J = |v_c| for a landed operation, the penalty otherwise.
double cost_of(const OperationResult& result) noexcept;

/// Fixed-step RK4 integration of the plant from `init` until the core first
/// crosses z_lower (landing) or the timeout expires. Invalid candidates are
/// not simulated and receive the penalty cost. Throws
/// SimulationDivergedError on a non-finite or saturated state.
OperationResult simulate_operation(const PhysicalParams& p_true, const FeedforwardOutcome& input,
                                   const ActuatorState& init, const SimOptions& opts);
OperationResult simulate_operation(const PhysicalParams& p_true, const FeedforwardSignal& input,
                                   const ActuatorState& init, const SimOptions& opts);
OperationResult simulate_operation(const PhysicalParams& p_true, ConstantVoltage input,
                                   const ActuatorState& init, const SimOptions& opts);

/// Starting state for a closing operation: at rest on the upper stop,
/// optionally with the coil pre-charged to the signal's initial flux.
ActuatorState closing_start(const TrajectorySpec& spec, const FeedforwardOutcome& input,
                            bool precharge);

/// CSV with header t,z,v,lambda,u.
void write_trace_csv(std::ostream& os, const std::vector<TraceSample>& trace);

}  // namespace softland
