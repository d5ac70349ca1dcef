#pragma once

// Monte-Carlo comparison of search parameterizations. Every trial draws a
// perturbed "true" plant, runs the run-to-run loop for a fixed number of
// operations and records the per-operation cost. Plants depend only on
// (seed, trial index), so all cases are evaluated on the same plants.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "softland/feedforward.hpp"
#include "softland/model.hpp"
#include "softland/optimizer.hpp"
#include "softland/plant.hpp"
#include "softland/sensitivity.hpp"
#include "softland/trajectory.hpp"

namespace softland {

struct CaseSpec {
    std::string id;
    ReductionKind kind = ReductionKind::IndexSubset;
    std::size_t r = kNumUncertain;

    bool operator==(const CaseSpec&) const = default;
};

/// Cases A-G: index subsets with r = 9, 7, 4, 2 and orthogonal bases with
/// r = 7, 4, 2.
const std::vector<CaseSpec>& standard_cases();

/// Accepts a standard letter (case-insensitive) or a custom
/// "subset:<r>" / "orthogonal:<r>". Throws std::invalid_argument listing
/// the valid forms otherwise.
CaseSpec parse_case(const std::string& text);

/// Everything needed to run one switching operation.
struct OperationSetup {
    TrajectorySpec trajectory;
    PhysicalParams p_nom;
    SimOptions sim;
    std::size_t n_samples = kDefaultSamples;
    bool precharge = true;
    double baseline_voltage = 30.0;
};

OperationSetup default_operation_setup();

struct CampaignConfig {
    OperationSetup setup = default_operation_setup();
    SensitivityOptions sensitivity;
    SearchSettings search;
    ThetaBox box;
    OrthogonalMap orthogonal_map = OrthogonalMap::Affine;
    std::vector<CaseSpec> cases = standard_cases();
    std::size_t n_trials = 200;
    std::size_t n_ops = 300;
    std::uint64_t seed = 1;
    double half_width = 0.05;
    double halve_quantile = 0.9;
    std::size_t jobs = 0;  // 0: hardware concurrency

    void validate() const;
};

/// Splittable sub-seed for a trial: splitmix64(seed ^ splitmix64(trial)).
std::uint64_t trial_key(std::uint64_t seed, std::uint64_t trial_index) noexcept;

/// Uniform draws in [0, 1) from the splitmix64 stream started at `key`,
/// using the top 53 bits of each output.
std::vector<double> uniform_stream(std::uint64_t key, std::size_t count);

/// Each uncertain parameter multiplied by an independent U[1-w, 1+w] draw
/// (the i-th draw of the trial's stream scales the i-th parameter). The coil
/// resistance is not perturbed.
PhysicalParams perturb_params(std::uint64_t seed, std::uint64_t trial_index,
                              const PhysicalParams& nominal, double half_width = 0.05);

/// |v_c| of the constant-voltage activation of plant p_true.
double uncontrolled_cost(const PhysicalParams& p_true, const OperationSetup& setup);

/// One switching operation with controller parameters theta.
OperationResult run_operation(const ControlParams& theta, const PhysicalParams& p_true,
                              const Trajectory& traj, const OperationSetup& setup);

struct TrialRecord {
    std::vector<double> costs;
    std::vector<HistoryEntry> history;
};

/// The run-to-run loop: ask, build the feedforward, simulate against
/// p_true, tell the cost. Simulation divergence propagates as
/// SimulationDivergedError.
TrialRecord run_trial(const Reduction& reduction, const PhysicalParams& p_true,
                      std::size_t n_ops, const OperationSetup& setup,
                      const SearchSettings& search, bool keep_history = false);

/// Builds the reduction for a case from the nominal analysis.
Reduction reduction_for_case(const CaseSpec& c, const NominalAnalysis& analysis, ThetaBox box,
                             OrthogonalMap map);

/// Prefix sums of the cost series.
std::vector<double> integrated_cost(const std::vector<double>& series);

/// Running minimum of the cost series.
std::vector<double> best_so_far(const std::vector<double>& series);

/// Linear interpolation between order statistics at rank p/100 * (N-1).
/// Throws std::invalid_argument on empty input or p outside [0, 100].
double percentile(std::vector<double> values, double p);

/// Smallest 1-based n at which at least a fraction q of the trials have a
/// best-so-far cost at or below half their uncontrolled cost; nullopt if
/// never.
std::optional<std::size_t> ops_to_halve(const std::vector<std::vector<double>>& series,
                                        const std::vector<double>& baselines, double q = 0.9);

/// Smallest 1-based n such that a fraction q of the trials keep their raw
/// cost at or below half their uncontrolled cost from n through the end of
/// the series; nullopt if never.
std::optional<std::size_t> ops_to_halve_sustained(const std::vector<std::vector<double>>& series,
                                                  const std::vector<double>& baselines,
                                                  double q = 0.9);

struct TrialOutcome {
    std::size_t index = 0;
    bool failed = false;
    std::string error;
    double baseline = 0.0;
    std::vector<double> costs;
};

struct CaseMetrics {
    std::vector<double> p10, p50, p90;
    std::vector<double> mean_best;
    std::vector<double> mean_integrated;
    std::optional<std::size_t> ops_to_halve;
    std::optional<std::size_t> ops_to_halve_sustained;
    double final_mean_integrated = 0.0;
    std::size_t n_valid = 0;
    std::size_t n_failed = 0;
};

/// Metrics over the non-failed trials. Throws std::invalid_argument if
/// none are valid.
CaseMetrics aggregate_case(const std::vector<TrialOutcome>& trials, std::size_t n_ops,
                           double halve_quantile);

struct CaseResult {
    CaseSpec spec;
    Reduction reduction;
    std::vector<TrialOutcome> trials;
    CaseMetrics metrics;
};

struct CampaignResult {
    NominalAnalysis analysis;
    double nominal_baseline = 0.0;
    std::vector<CaseResult> cases;

    /// True when every case has at most 1% failed trials.
    bool within_failure_budget() const;
};

CampaignResult run_campaign(const CampaignConfig& cfg);

}  // namespace softland
