#include "softland/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "softland/errors.hpp"

namespace softland {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t x) noexcept { return splitmix64(x); }

std::size_t worker_count(std::size_t requested, std::size_t items) {
    std::size_t n = requested;
    if (n == 0) {
        n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    return std::max<std::size_t>(1, std::min(n, items));
}

// Runs body(i) for i in [0, count) on a small worker pool. Each index is
// processed exactly once; results must be written to index-addressed slots.
template <class Body>
void parallel_for(std::size_t count, std::size_t jobs, Body&& body) {
    const std::size_t workers = worker_count(jobs, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

const std::vector<CaseSpec>& standard_cases() {
    static const std::vector<CaseSpec> cases = {
        {"A", ReductionKind::IndexSubset, 9}, {"B", ReductionKind::IndexSubset, 7},
        {"C", ReductionKind::IndexSubset, 4}, {"D", ReductionKind::IndexSubset, 2},
        {"E", ReductionKind::Orthogonal, 7},  {"F", ReductionKind::Orthogonal, 4},
        {"G", ReductionKind::Orthogonal, 2},
    };
    return cases;
}

CaseSpec parse_case(const std::string& text) {
    const std::string usage =
        "unknown case '" + text + "'; valid cases are A, B, C, D, E, F, G, subset:<r>, orthogonal:<r>";
    if (text.size() == 1) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
        for (const auto& s : standard_cases()) {
            if (s.id[0] == c) return s;
        }
        throw std::invalid_argument(usage);
    }
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument(usage);
    const std::string kind = text.substr(0, colon);
    const std::string rank = text.substr(colon + 1);
    if (rank.empty() || !std::all_of(rank.begin(), rank.end(),
                                     [](unsigned char ch) { return std::isdigit(ch) != 0; })) {
        throw std::invalid_argument(usage);
    }
    const auto r = static_cast<std::size_t>(std::stoul(rank));
    if (r < 1 || r > kNumUncertain) throw std::invalid_argument(usage);
    if (kind == "subset") return {text, ReductionKind::IndexSubset, r};
    if (kind == "orthogonal") return {text, ReductionKind::Orthogonal, r};
    throw std::invalid_argument(usage);
}

OperationSetup default_operation_setup() {
    OperationSetup s;
    s.sim = default_sim_options(s.trajectory);
    return s;
}

void CampaignConfig::validate() const {
    setup.trajectory.validate();
    setup.p_nom.validate(std::max(setup.trajectory.z0, setup.trajectory.zf));
    setup.sim.validate(setup.trajectory.duration());
    search.validate();
    if (setup.n_samples < 2) throw std::invalid_argument("n_samples must be at least 2");
    if (cases.empty()) throw std::invalid_argument("campaign needs at least one case");
    if (n_trials < 1) throw std::invalid_argument("n_trials must be at least 1");
    if (n_ops < 1) throw std::invalid_argument("n_ops must be at least 1");
    if (!(half_width >= 0.0 && half_width < 0.3)) {
        throw std::invalid_argument("perturbation half-width must lie in [0, 0.3)");
    }
    if (!(halve_quantile > 0.0 && halve_quantile <= 1.0)) {
        throw std::invalid_argument("halve quantile must lie in (0, 1]");
    }
    if (!(box.lo < 1.0 && box.hi > 1.0)) {
        throw std::invalid_argument("theta box must contain the nominal point");
    }
}

std::uint64_t trial_key(std::uint64_t seed, std::uint64_t trial_index) noexcept {
    return mix(seed ^ mix(trial_index));
}

std::vector<double> uniform_stream(std::uint64_t key, std::size_t count) {
    std::vector<double> u(count);
    std::uint64_t state = key;
    for (auto& x : u) {
        x = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    }
    return u;
}

PhysicalParams perturb_params(std::uint64_t seed, std::uint64_t trial_index,
                              const PhysicalParams& nominal, double half_width) {
    const auto u = uniform_stream(trial_key(seed, trial_index), kNumUncertain);
    auto values = nominal.uncertain();
    for (std::size_t i = 0; i < kNumUncertain; ++i) {
        values[i] *= 1.0 - half_width + 2.0 * half_width * u[i];
    }
    return PhysicalParams::from_uncertain(values, nominal.R_coil);
}

double uncontrolled_cost(const PhysicalParams& p_true, const OperationSetup& setup) {
    const ActuatorState start{setup.trajectory.z0, 0.0, 0.0};
    return simulate_operation(p_true, ConstantVoltage{setup.baseline_voltage}, start, setup.sim)
        .cost;
}

OperationResult run_operation(const ControlParams& theta, const PhysicalParams& p_true,
                              const Trajectory& traj, const OperationSetup& setup) {
    const auto ff = sample_feedforward(theta, traj, setup.p_nom, setup.n_samples);
    const auto start = closing_start(traj.spec(), ff, setup.precharge);
    return simulate_operation(p_true, ff, start, setup.sim);
}

TrialRecord run_trial(const Reduction& reduction, const PhysicalParams& p_true, std::size_t n_ops,
                      const OperationSetup& setup, const SearchSettings& search,
                      bool keep_history) {
    const Trajectory traj(setup.trajectory);
    PatternSearch opt({reduction, search});
    TrialRecord rec;
    rec.costs.reserve(n_ops);
    for (std::size_t n = 0; n < n_ops; ++n) {
        const auto& cand = opt.ask();
        const double cost = run_operation(cand.theta, p_true, traj, setup).cost;
        opt.tell(cost);
        rec.costs.push_back(cost);
    }
    if (keep_history) {
        rec.history = opt.history();
    }
    return rec;
}

Reduction reduction_for_case(const CaseSpec& c, const NominalAnalysis& analysis, ThetaBox box,
                             OrthogonalMap map) {
    if (c.kind == ReductionKind::IndexSubset) {
        return make_subset_reduction(analysis.s_is, c.r, box);
    }
    return make_orthogonal_reduction(analysis.eigen, c.r, box, map);
}

std::vector<double> integrated_cost(const std::vector<double>& series) {
    std::vector<double> out(series.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        acc += series[i];
        out[i] = acc;
    }
    return out;
}

std::vector<double> best_so_far(const std::vector<double>& series) {
    std::vector<double> out(series.size());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < series.size(); ++i) {
        best = std::min(best, series[i]);
        out[i] = best;
    }
    return out;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("percentile of an empty set");
    if (!(p >= 0.0 && p <= 100.0)) throw std::invalid_argument("percentile rank outside [0, 100]");
    std::sort(values.begin(), values.end());
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return values[lo] + w * (values[hi] - values[lo]);
}

std::optional<std::size_t> ops_to_halve(const std::vector<std::vector<double>>& series,
                                        const std::vector<double>& baselines, double q) {
    if (series.empty() || series.size() != baselines.size()) {
        throw std::invalid_argument("ops_to_halve needs one baseline per trial");
    }
    std::size_t len = series.front().size();
    for (const auto& s : series) len = std::min(len, s.size());
    const double needed = q * static_cast<double>(series.size());

    std::vector<double> best(series.size(), std::numeric_limits<double>::infinity());
    for (std::size_t n = 0; n < len; ++n) {
        std::size_t hits = 0;
        for (std::size_t k = 0; k < series.size(); ++k) {
            best[k] = std::min(best[k], series[k][n]);
            if (best[k] <= 0.5 * baselines[k]) ++hits;
        }
        if (static_cast<double>(hits) >= needed - 1e-9) return n + 1;
    }
    return std::nullopt;
}

std::optional<std::size_t> ops_to_halve_sustained(const std::vector<std::vector<double>>& series,
                                                  const std::vector<double>& baselines, double q) {
    if (series.empty() || series.size() != baselines.size()) {
        throw std::invalid_argument("ops_to_halve_sustained needs one baseline per trial");
    }
    std::size_t len = series.front().size();
    for (const auto& s : series) len = std::min(len, s.size());
    // Per trial, the first 1-based n after its last cost above half the
    // baseline; len + 1 means the tail never settles.
    std::vector<std::size_t> start;
    start.reserve(series.size());
    for (std::size_t k = 0; k < series.size(); ++k) {
        std::size_t s = 1;
        for (std::size_t n = 0; n < len; ++n) {
            if (series[k][n] > 0.5 * baselines[k]) s = n + 2;
        }
        start.push_back(s);
    }
    std::sort(start.begin(), start.end());
    const double needed = q * static_cast<double>(series.size());
    const auto rank = static_cast<std::size_t>(std::ceil(needed - 1e-9));
    const std::size_t n = start[std::max<std::size_t>(rank, 1) - 1];
    if (n > len) return std::nullopt;
    return n;
}

CaseMetrics aggregate_case(const std::vector<TrialOutcome>& trials, std::size_t n_ops,
                           double halve_quantile) {
    CaseMetrics m;
    std::vector<std::vector<double>> series;
    std::vector<std::vector<double>> bests;
    std::vector<std::vector<double>> integrals;
    std::vector<double> baselines;
    for (const auto& t : trials) {
        if (t.failed) {
            ++m.n_failed;
            continue;
        }
        if (t.costs.size() != n_ops) {
            throw std::invalid_argument("trial cost series has the wrong length");
        }
        series.push_back(t.costs);
        bests.push_back(best_so_far(t.costs));
        integrals.push_back(integrated_cost(t.costs));
        baselines.push_back(t.baseline);
    }
    m.n_valid = series.size();
    if (series.empty()) throw std::invalid_argument("no valid trials to aggregate");

    const auto count = static_cast<double>(series.size());
    std::vector<double> column(series.size());
    for (std::size_t n = 0; n < n_ops; ++n) {
        double sum_best = 0.0;
        double sum_int = 0.0;
        for (std::size_t k = 0; k < series.size(); ++k) {
            column[k] = series[k][n];
            sum_best += bests[k][n];
            sum_int += integrals[k][n];
        }
        m.p10.push_back(percentile(column, 10.0));
        m.p50.push_back(percentile(column, 50.0));
        m.p90.push_back(percentile(column, 90.0));
        m.mean_best.push_back(sum_best / count);
        m.mean_integrated.push_back(sum_int / count);
    }
    m.final_mean_integrated = m.mean_integrated.back();
    m.ops_to_halve = ops_to_halve(series, baselines, halve_quantile);
    m.ops_to_halve_sustained = ops_to_halve_sustained(series, baselines, halve_quantile);
    return m;
}

bool CampaignResult::within_failure_budget() const {
    for (const auto& c : cases) {
        const auto total = static_cast<double>(c.trials.size());
        if (static_cast<double>(c.metrics.n_failed) > 0.01 * total) return false;
    }
    return true;
}

CampaignResult run_campaign(const CampaignConfig& cfg) {
    cfg.validate();
    CampaignResult result;
    const Trajectory traj(cfg.setup.trajectory);
    result.analysis = analyze_nominal(traj, cfg.setup.p_nom, cfg.sensitivity);
    result.nominal_baseline = uncontrolled_cost(cfg.setup.p_nom, cfg.setup);

    std::vector<PhysicalParams> plants(cfg.n_trials);
    std::vector<double> baselines(cfg.n_trials);
    for (std::size_t i = 0; i < cfg.n_trials; ++i) {
        plants[i] = perturb_params(cfg.seed, i, cfg.setup.p_nom, cfg.half_width);
    }
    parallel_for(cfg.n_trials, cfg.jobs,
                 [&](std::size_t i) { baselines[i] = uncontrolled_cost(plants[i], cfg.setup); });

    for (const auto& c : cfg.cases) {
        CaseResult cr;
        cr.spec = c;
        cr.reduction = reduction_for_case(c, result.analysis, cfg.box, cfg.orthogonal_map);
        cr.trials.resize(cfg.n_trials);
        result.cases.push_back(std::move(cr));
    }

    const std::size_t n_cases = result.cases.size();
    parallel_for(n_cases * cfg.n_trials, cfg.jobs, [&](std::size_t item) {
        auto& cr = result.cases[item / cfg.n_trials];
        const std::size_t i = item % cfg.n_trials;
        auto& out = cr.trials[i];
        out.index = i;
        out.baseline = baselines[i];
        try {
            out.costs = run_trial(cr.reduction, plants[i], cfg.n_ops, cfg.setup, cfg.search).costs;
        } catch (const std::exception& e) {
            out.failed = true;
            out.error = e.what();
            out.costs.clear();
        }
    });

    for (auto& cr : result.cases) {
        cr.metrics = aggregate_case(cr.trials, cfg.n_ops, cfg.halve_quantile);
    }
    return result;
}

}  // namespace softland
