#include "softland/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace softland {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& section, const std::set<std::string>& known) {
    if (!j.is_object()) {
        throw std::invalid_argument("config section '" + section + "' must be an object");
    }
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) {
            throw std::invalid_argument("unknown config key '" + section + "." + key + "'");
        }
    }
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) {
        try {
            out = it->get<T>();
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
        }
    }
}

const char* map_name(OrthogonalMap m) { return m == OrthogonalMap::Affine ? "affine" : "literal"; }

}  // namespace

void to_json(json& j, const PhysicalParams& p) {
    j = json{{"k_s", p.k_s},       {"z_s", p.z_s},       {"m", p.m},
             {"kappa1", p.kappa1}, {"lambda_sat", p.lambda_sat},
             {"kappa3", p.kappa3}, {"kappa4", p.kappa4}, {"kappa5", p.kappa5},
             {"kappa6", p.kappa6}, {"R_coil", p.R_coil}};
}

void from_json(const json& j, PhysicalParams& p) {
    reject_unknown(j, "params",
                   {"k_s", "z_s", "m", "kappa1", "lambda_sat", "kappa3", "kappa4", "kappa5",
                    "kappa6", "R_coil"});
    read(j, "k_s", p.k_s);
    read(j, "z_s", p.z_s);
    read(j, "m", p.m);
    read(j, "kappa1", p.kappa1);
    read(j, "lambda_sat", p.lambda_sat);
    read(j, "kappa3", p.kappa3);
    read(j, "kappa4", p.kappa4);
    read(j, "kappa5", p.kappa5);
    read(j, "kappa6", p.kappa6);
    read(j, "R_coil", p.R_coil);
}

AppConfig config_from_json(const json& j) {
    reject_unknown(j, "<root>",
                   {"params", "trajectory", "sim", "feedforward", "sensitivity", "search",
                    "campaign"});
    AppConfig app;
    auto& cfg = app.campaign;
    auto& setup = cfg.setup;

    if (auto it = j.find("params"); it != j.end()) {
        PhysicalParams p = setup.p_nom;
        from_json(*it, p);
        setup.p_nom = p;
    }
    if (auto it = j.find("trajectory"); it != j.end()) {
        reject_unknown(*it, "trajectory", {"t0", "tf", "z0", "zf"});
        read(*it, "t0", setup.trajectory.t0);
        read(*it, "tf", setup.trajectory.tf);
        read(*it, "z0", setup.trajectory.z0);
        read(*it, "zf", setup.trajectory.zf);
    }
    setup.trajectory.validate();
    setup.sim = default_sim_options(setup.trajectory);
    if (auto it = j.find("sim"); it != j.end()) {
        reject_unknown(*it, "sim", {"dt", "t_max", "impact_tol", "penalty_cost"});
        read(*it, "dt", setup.sim.dt);
        read(*it, "t_max", setup.sim.t_max);
        read(*it, "impact_tol", setup.sim.impact_tol);
        read(*it, "penalty_cost", setup.sim.penalty_cost);
    }
    if (auto it = j.find("feedforward"); it != j.end()) {
        reject_unknown(*it, "feedforward", {"n_samples", "precharge"});
        read(*it, "n_samples", setup.n_samples);
        read(*it, "precharge", setup.precharge);
    }
    if (auto it = j.find("sensitivity"); it != j.end()) {
        reject_unknown(*it, "sensitivity", {"n_nodes", "step"});
        read(*it, "n_nodes", cfg.sensitivity.n_nodes);
        read(*it, "step", cfg.sensitivity.step);
    }
    if (auto it = j.find("search"); it != j.end()) {
        reject_unknown(*it, "search",
                       {"delta0", "shrink", "delta_min", "theta_min", "theta_max", "orthogonal_map"});
        read(*it, "delta0", cfg.search.delta0);
        read(*it, "shrink", cfg.search.shrink);
        read(*it, "delta_min", cfg.search.delta_min);
        read(*it, "theta_min", cfg.box.lo);
        read(*it, "theta_max", cfg.box.hi);
        std::string map = map_name(cfg.orthogonal_map);
        read(*it, "orthogonal_map", map);
        if (map == "affine") {
            cfg.orthogonal_map = OrthogonalMap::Affine;
        } else if (map == "literal") {
            cfg.orthogonal_map = OrthogonalMap::Literal;
        } else {
            throw std::invalid_argument("search.orthogonal_map must be 'affine' or 'literal'");
        }
    }
    if (auto it = j.find("campaign"); it != j.end()) {
        reject_unknown(*it, "campaign",
                       {"cases", "n_trials", "n_ops", "seed", "half_width", "baseline_voltage",
                        "halve_quantile", "jobs", "output_dir"});
        if (auto c = it->find("cases"); c != it->end()) {
            std::vector<std::string> ids;
            read(*it, "cases", ids);
            cfg.cases.clear();
            for (const auto& id : ids) cfg.cases.push_back(parse_case(id));
        }
        read(*it, "n_trials", cfg.n_trials);
        read(*it, "n_ops", cfg.n_ops);
        app.seed_from_file = it->contains("seed");
        read(*it, "seed", cfg.seed);
        read(*it, "half_width", cfg.half_width);
        read(*it, "baseline_voltage", setup.baseline_voltage);
        read(*it, "halve_quantile", cfg.halve_quantile);
        read(*it, "jobs", cfg.jobs);
        read(*it, "output_dir", app.output_dir);
    }
    cfg.validate();
    return app;
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open config file " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("malformed config " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const AppConfig& app) {
    const auto& cfg = app.campaign;
    const auto& setup = cfg.setup;
    std::vector<std::string> cases;
    for (const auto& c : cfg.cases) cases.push_back(c.id);
    return json{
        {"params", setup.p_nom},
        {"trajectory",
         {{"t0", setup.trajectory.t0},
          {"tf", setup.trajectory.tf},
          {"z0", setup.trajectory.z0},
          {"zf", setup.trajectory.zf}}},
        {"sim",
         {{"dt", setup.sim.dt},
          {"t_max", setup.sim.t_max},
          {"impact_tol", setup.sim.impact_tol},
          {"penalty_cost", setup.sim.penalty_cost}}},
        {"feedforward", {{"n_samples", setup.n_samples}, {"precharge", setup.precharge}}},
        {"sensitivity", {{"n_nodes", cfg.sensitivity.n_nodes}, {"step", cfg.sensitivity.step}}},
        {"search",
         {{"delta0", cfg.search.delta0},
          {"shrink", cfg.search.shrink},
          {"delta_min", cfg.search.delta_min},
          {"theta_min", cfg.box.lo},
          {"theta_max", cfg.box.hi},
          {"orthogonal_map", map_name(cfg.orthogonal_map)}}},
        {"campaign",
         {{"cases", cases},
          {"n_trials", cfg.n_trials},
          {"n_ops", cfg.n_ops},
          {"seed", cfg.seed},
          {"half_width", cfg.half_width},
          {"baseline_voltage", setup.baseline_voltage},
          {"halve_quantile", cfg.halve_quantile}}},
    };
}

}  // namespace softland
