#pragma once

// JSON configuration shared by every command. All sections and keys are
// optional; missing values fall back to the built-in nominal setup.
//
// {
//   "params":      { "k_s": 55, ..., "kappa6": 9.73e-3, "R_coil": 50 },
//   "trajectory":  { "t0": 0, "tf": 3.5e-3, "z0": 1e-3, "zf": 0 },
//   "sim":         { "dt": 1e-6, "t_max": 1.05e-2, "impact_tol": 1e-9, "penalty_cost": 3.95 },
//   "feedforward": { "n_samples": 701, "precharge": true },
//   "sensitivity": { "n_nodes": 701, "step": 1e-6 },
//   "search":      { "delta0": 0.05, "shrink": 0.5, "delta_min": 1e-4,
//                    "theta_min": 0.7, "theta_max": 1.3, "orthogonal_map": "affine" },
//   "campaign":    { "cases": ["A", "D", "G"], "n_trials": 200, "n_ops": 300, "seed": 1,
//                    "half_width": 0.05, "baseline_voltage": 30, "halve_quantile": 0.9,
//                    "jobs": 0, "output_dir": "out" }
// }
//
// Unknown keys are rejected so that typos do not silently fall back to
// defaults.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "softland/campaign.hpp"
#include "softland/model.hpp"

namespace softland {

void to_json(nlohmann::json& j, const PhysicalParams& p);
void from_json(const nlohmann::json& j, PhysicalParams& p);

struct AppConfig {
    CampaignConfig campaign;
    /// Seed given explicitly in the file (as opposed to the default).
    bool seed_from_file = false;
    std::string output_dir = "out";
};

/// Throws std::invalid_argument on unknown keys, wrong types or values that
/// fail validation.
AppConfig config_from_json(const nlohmann::json& j);
AppConfig load_config(const std::filesystem::path& path);

/// Echo of every setting that affects results, loadable by
/// config_from_json. Execution knobs (jobs, output_dir) are left out so the
/// echo is identical across machines and output locations.
nlohmann::json config_to_json(const AppConfig& cfg);

}  // namespace softland
