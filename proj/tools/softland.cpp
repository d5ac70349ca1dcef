// softland: batch front end for analysis, single operations and campaigns.
//
// Exit status: 0 on success, 1 on a runtime failure (including a campaign
// over its failure budget), 2 on a usage or configuration error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "softland/campaign.hpp"
#include "softland/campaign_io.hpp"
#include "softland/config.hpp"
#include "softland/errors.hpp"
#include "softland/manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace softland;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kDigits = std::numeric_limits<double>::max_digits10;

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

AppConfig load_app_config(const CommonOptions& common) {
    try {
        return common.config_path.empty() ? config_from_json(json::object())
                                          : load_config(common.config_path);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

// --seed, then the config file, then SOFTLAND_SEED, then the built-in default.
std::uint64_t resolve_seed(const CommonOptions& common, const AppConfig& app) {
    if (common.seed) return *common.seed;
    if (app.seed_from_file) return app.campaign.seed;
    if (const char* env = std::getenv("SOFTLAND_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument(env);
            return v;
        } catch (const std::exception&) {
            throw UsageError(std::string("SOFTLAND_SEED is not an unsigned integer: ") + env);
        }
    }
    return app.campaign.seed;
}

fs::path output_dir(const CommonOptions& common, const AppConfig& app) {
    fs::path dir = common.out_dir.empty() ? fs::path(app.output_dir) : fs::path(common.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> values;
    std::string cell;
    std::istringstream ss(text);
    while (std::getline(ss, cell, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size()) {
            throw UsageError(std::string("malformed ") + what + " entry '" + cell + "'");
        }
        values.push_back(v);
    }
    return values;
}

ControlParams parse_theta(const std::string& text) {
    const auto values = parse_list(text, "--theta");
    if (values.size() != kNumUncertain) {
        throw UsageError("--theta needs exactly 9 comma-separated values, got " +
                         std::to_string(values.size()));
    }
    ControlParams theta;
    std::copy(values.begin(), values.end(), theta.theta.begin());
    return theta;
}

std::vector<CaseSpec> parse_cases(const std::string& text) {
    std::vector<CaseSpec> cases;
    std::string cell;
    std::istringstream ss(text);
    while (std::getline(ss, cell, ',')) {
        try {
            cases.push_back(parse_case(cell));
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    if (cases.empty()) throw UsageError("--cases is empty");
    return cases;
}

RunManifest start_manifest(const std::string& command, int argc, char** argv) {
    RunManifest m;
    m.command = command;
    m.argv.assign(argv, argv + argc);
    m.started_utc = utc_now();
    return m;
}

void finish_manifest(RunManifest& m, const fs::path& dir, const std::vector<fs::path>& files) {
    add_files(m, dir, files);
    m.finished_utc = utc_now();
    const auto path = write_manifest(dir, m);
    std::cout << "wrote " << files.size() << " files and " << path.string() << '\n';
}

// ---------------------------------------------------------------- analyze

std::string reduction_report(const NominalAnalysis& a) {
    std::ostringstream os;
    os << std::setprecision(4);
    os << "Integral-square sensitivities at theta = 1 (descending)\n";
    std::vector<std::size_t> order(kNumUncertain);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return a.s_is(static_cast<Eigen::Index>(x)) > a.s_is(static_cast<Eigen::Index>(y));
    });
    for (auto i : order) {
        os << "  theta_" << i + 1 << "  " << std::setw(12) << uncertain_name(i) << "  "
           << a.s_is(static_cast<Eigen::Index>(i)) << '\n';
    }
    os << "Least influential pair: theta_" << order[kNumUncertain - 1] + 1 << ", theta_"
       << order[kNumUncertain - 2] + 1 << "\n\n";

    const double trace = a.eigen.values.sum();
    os << "Fisher eigenvalues (descending), cumulative share of the trace\n";
    double acc = 0.0;
    for (Eigen::Index k = 0; k < a.eigen.values.size(); ++k) {
        acc += a.eigen.values(k);
        os << "  phi_" << k + 1 << "  " << std::setw(12) << a.eigen.values(k) << "  "
           << std::setw(8) << acc / trace << '\n';
    }
    os << '\n';

    os << "Suggested reductions\n";
    for (const auto& c : standard_cases()) {
        os << "  case " << c.id << "  r = " << c.r << "  ";
        if (c.kind == ReductionKind::IndexSubset) {
            const auto red = make_subset_reduction(a.s_is, c.r);
            os << "subset, free:";
            for (auto i : red.free_indices) os << " theta_" << i + 1;
            if (c.r < kNumUncertain) {
                os << "; fixed at 1:";
                for (std::size_t i = 0; i < kNumUncertain; ++i) {
                    if (std::find(red.free_indices.begin(), red.free_indices.end(), i) ==
                        red.free_indices.end()) {
                        os << " theta_" << i + 1;
                    }
                }
            }
        } else {
            double share = 0.0;
            for (std::size_t k = 0; k < c.r; ++k) share += a.eigen.values(static_cast<Eigen::Index>(k));
            os << "orthogonal, phi_1..phi_" << c.r << " (" << share / trace << " of the trace)";
        }
        os << '\n';
    }
    return os.str();
}

int cmd_analyze(const CommonOptions& common, int argc, char** argv) {
    auto manifest = start_manifest("analyze", argc, argv);
    const auto app = load_app_config(common);
    const auto dir = output_dir(common, app);
    const auto& setup = app.campaign.setup;
    const Trajectory traj(setup.trajectory);
    const auto a = analyze_nominal(traj, setup.p_nom, app.campaign.sensitivity);

    std::ostringstream s_is, values, vectors;
    for (auto* os : {&s_is, &values, &vectors}) os->precision(kDigits);
    s_is << "index,name,S_IS\n";
    for (std::size_t i = 0; i < kNumUncertain; ++i) {
        s_is << i + 1 << ',' << uncertain_name(i) << ',' << a.s_is(static_cast<Eigen::Index>(i))
             << '\n';
    }
    values << "k,eigenvalue\n";
    for (Eigen::Index k = 0; k < a.eigen.values.size(); ++k) {
        values << k + 1 << ',' << a.eigen.values(k) << '\n';
    }
    vectors << "index";
    for (Eigen::Index k = 0; k < a.eigen.vectors.cols(); ++k) vectors << ",v_" << k + 1;
    vectors << '\n';
    for (Eigen::Index i = 0; i < a.eigen.vectors.rows(); ++i) {
        vectors << i + 1;
        for (Eigen::Index k = 0; k < a.eigen.vectors.cols(); ++k) {
            vectors << ',' << a.eigen.vectors(i, k);
        }
        vectors << '\n';
    }

    const std::vector<fs::path> files{dir / "s_is.csv", dir / "eigenvalues.csv",
                                      dir / "eigenvectors.csv", dir / "reduction_report.txt"};
    write_text(files[0], s_is.str());
    write_text(files[1], values.str());
    write_text(files[2], vectors.str());
    const auto report = reduction_report(a);
    write_text(files[3], report);
    std::cout << report;

    manifest.config = config_to_json(app);
    manifest.seed = resolve_seed(common, app);
    finish_manifest(manifest, dir, files);
    return 0;
}

// --------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string theta;
    std::optional<double> voltage;
    std::optional<std::uint64_t> trial;
    bool no_precharge = false;
    std::size_t stride = 10;
};

const char* status_name(OperationStatus s) {
    switch (s) {
        case OperationStatus::Impact: return "impact";
        case OperationStatus::Timeout: return "timeout";
        case OperationStatus::InvalidInput: return "invalid_input";
    }
    return "unknown";
}

int cmd_simulate(const CommonOptions& common, const SimulateOptions& opt, int argc, char** argv) {
    if (opt.theta.empty() == !opt.voltage.has_value()) {
        throw UsageError("simulate needs exactly one of --theta or --voltage");
    }
    std::optional<ControlParams> theta;
    if (!opt.theta.empty()) theta = parse_theta(opt.theta);
    if (opt.stride == 0) throw UsageError("--stride must be positive");

    auto manifest = start_manifest("simulate", argc, argv);
    auto app = load_app_config(common);
    const auto seed = resolve_seed(common, app);
    app.campaign.seed = seed;
    const auto dir = output_dir(common, app);
    auto setup = app.campaign.setup;
    if (opt.no_precharge) setup.precharge = false;

    PhysicalParams p_true = setup.p_nom;
    if (opt.trial) p_true = perturb_params(seed, *opt.trial, setup.p_nom, app.campaign.half_width);

    SimOptions sim = setup.sim;
    sim.record_trace = true;
    sim.trace_stride = opt.stride;

    OperationResult result;
    json input;
    if (theta) {
        const Trajectory traj(setup.trajectory);
        const auto ff = sample_feedforward(*theta, traj, setup.p_nom, setup.n_samples);
        if (const auto* bad = std::get_if<InvalidCandidate>(&ff)) {
            std::cerr << "warning: infeasible feedforward at t = " << bad->time << " s: "
                      << bad->reason << '\n';
        }
        result = simulate_operation(p_true, ff, closing_start(traj.spec(), ff, setup.precharge), sim);
        input = {{"mode", "feedforward"},
                 {"theta", theta->theta},
                 {"precharge", setup.precharge}};
    } else {
        const ActuatorState start{setup.trajectory.z0, 0.0, 0.0};
        result = simulate_operation(p_true, ConstantVoltage{*opt.voltage}, start, sim);
        input = {{"mode", "constant_voltage"}, {"voltage", *opt.voltage}};
    }
    const double baseline = uncontrolled_cost(p_true, setup);

    const auto trace_path = dir / "trace.csv";
    {
        std::ostringstream os;
        write_trace_csv(os, result.trace);
        write_text(trace_path, os.str());
    }
    json j{{"input", input},
           {"plant", p_true},
           {"trial", opt.trial ? json(*opt.trial) : json(nullptr)},
           {"seed", seed},
           {"status", status_name(result.status)},
           {"impact_time", result.impact_time ? json(*result.impact_time) : json(nullptr)},
           {"impact_velocity",
            result.impact_velocity ? json(*result.impact_velocity) : json(nullptr)},
           {"cost", result.cost},
           {"penalty_cost", result.penalty_cost},
           {"uncontrolled_cost", baseline},
           {"cost_ratio", result.cost / baseline},
           {"final_state",
            {{"z", result.final_state.z},
             {"v", result.final_state.v},
             {"lambda", result.final_state.lambda}}}};
    const auto result_path = dir / "result.json";
    write_text(result_path, j.dump(2) + "\n");

    std::cout << std::setprecision(kDigits) << "status " << status_name(result.status) << "\nJ "
              << result.cost << "\nJ_unc " << baseline << '\n';

    manifest.config = config_to_json(app);
    manifest.seed = seed;
    finish_manifest(manifest, dir, {trace_path, result_path});
    return 0;
}

// --------------------------------------------------------------- campaign

struct CampaignOptions {
    std::string cases;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> ops;
    std::optional<std::size_t> jobs;
};

void print_table(const CampaignResult& result) {
    std::cout << "case  kind        r  ops_to_halve  sustained  mean_I_final  failed\n";
    for (const auto& c : result.cases) {
        const auto show = [](const std::optional<std::size_t>& n) {
            return n ? std::to_string(*n) : std::string("-");
        };
        std::cout << std::left << std::setw(6) << c.spec.id << std::setw(12)
                  << (c.spec.kind == ReductionKind::IndexSubset ? "subset" : "orthogonal")
                  << std::setw(3) << c.spec.r << std::setw(14) << show(c.metrics.ops_to_halve)
                  << std::setw(11) << show(c.metrics.ops_to_halve_sustained) << std::setw(14)
                  << std::setprecision(6) << c.metrics.final_mean_integrated << c.metrics.n_failed
                  << '\n';
    }
}

int cmd_campaign(const CommonOptions& common, const CampaignOptions& opt, int argc, char** argv) {
    auto manifest = start_manifest("campaign", argc, argv);
    auto app = load_app_config(common);
    auto& cfg = app.campaign;
    if (!opt.cases.empty()) cfg.cases = parse_cases(opt.cases);
    if (opt.trials) cfg.n_trials = *opt.trials;
    if (opt.ops) cfg.n_ops = *opt.ops;
    if (opt.jobs) cfg.jobs = *opt.jobs;
    cfg.seed = resolve_seed(common, app);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const auto dir = output_dir(common, app);

    const auto result = run_campaign(cfg);
    const auto echo = config_to_json(app);
    const auto files = write_campaign_outputs(dir, result, echo, cfg.setup.sim.penalty_cost);
    print_table(result);

    manifest.config = echo;
    manifest.seed = cfg.seed;
    finish_manifest(manifest, dir, files);

    if (!result.within_failure_budget()) {
        for (const auto& c : result.cases) {
            for (const auto& t : c.trials) {
                if (t.failed) std::cerr << "case " << c.spec.id << " trial " << t.index << ": " << t.error << '\n';
            }
        }
        std::cerr << "error: more than 1% of the trials failed in at least one case\n";
        return 1;
    }
    return 0;
}

// ----------------------------------------------------------------- report

int cmd_report(const std::string& dir_text, int argc, char** argv) {
    auto manifest = start_manifest("report", argc, argv);
    const fs::path dir(dir_text);
    if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir_text);
    reaggregate_outputs(dir);

    std::ifstream in(dir / "summary.json");
    const auto summary = json::parse(in);
    manifest.config = summary.at("config");
    manifest.seed = summary.at("seed").get<std::uint64_t>();

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& c : summary.at("cases")) {
        std::cout << "case " << c.at("id").get<std::string>() << ": ops_to_halve "
                  << c.at("ops_to_halve").dump() << ", sustained "
                  << c.at("ops_to_halve_sustained").dump() << ", mean_I_final "
                  << c.at("final_mean_integrated").get<double>() << '\n';
    }
    finish_manifest(manifest, dir, files);
    return summary.at("within_failure_budget").get<bool>() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Soft-landing run-to-run control: sensitivity analysis, simulation and campaigns"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    const auto add_common = [](CLI::App* sub, CommonOptions& common) {
        sub->add_option("-c,--config", common.config_path, "JSON configuration file")
            ->check(CLI::ExistingFile);
        sub->add_option("-o,--out", common.out_dir, "Output directory (default: config or 'out')");
        sub->add_option("--seed", common.seed, "Random seed (overrides config and SOFTLAND_SEED)");
    };

    CommonOptions analyze_common, simulate_common, campaign_common;

    auto* analyze = app.add_subcommand("analyze", "Sensitivities, Fisher eigenbasis and reductions");
    add_common(analyze, analyze_common);

    SimulateOptions sim_opt;
    auto* simulate = app.add_subcommand("simulate", "Simulate one closing operation");
    add_common(simulate, simulate_common);
    simulate->add_option("--theta", sim_opt.theta, "Nine comma-separated controller parameters");
    simulate->add_option("--voltage", sim_opt.voltage, "Constant coil voltage [V]");
    simulate->add_option("--trial", sim_opt.trial, "Use the perturbed plant of this trial index");
    simulate->add_flag("--no-precharge", sim_opt.no_precharge, "Start with zero coil flux");
    simulate->add_option("--stride", sim_opt.stride, "Record every n-th integration step");

    CampaignOptions camp_opt;
    auto* campaign = app.add_subcommand("campaign", "Run the Monte-Carlo reduction comparison");
    add_common(campaign, campaign_common);
    campaign->add_option("--cases", camp_opt.cases, "Comma-separated cases, e.g. A,D,G or subset:3");
    campaign->add_option("--trials", camp_opt.trials, "Trials per case");
    campaign->add_option("--ops", camp_opt.ops, "Operations per trial");
    campaign->add_option("--jobs", camp_opt.jobs, "Worker threads (0: all cores)");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Re-aggregate the raw outputs of a campaign");
    report->add_option("dir", report_dir, "Campaign output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*analyze) return cmd_analyze(analyze_common, argc, argv);
        if (*simulate) return cmd_simulate(simulate_common, sim_opt, argc, argv);
        if (*campaign) return cmd_campaign(campaign_common, camp_opt, argc, argv);
        if (*report) return cmd_report(report_dir, argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
