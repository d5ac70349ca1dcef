#include "softland/campaign_io.hpp"

#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace softland {

using nlohmann::json;

namespace {

constexpr int kDigits = std::numeric_limits<double>::max_digits10;

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed number '" + s + "' in raw file");
    }
    if (used != s.size()) throw std::invalid_argument("malformed number '" + s + "' in raw file");
    return v;
}

json optional_count(const std::optional<std::size_t>& n) {
    return n ? json(*n) : json(nullptr);
}

const char* kind_name(ReductionKind k) {
    return k == ReductionKind::IndexSubset ? "subset" : "orthogonal";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

template <class Writer>
std::string render(Writer&& w) {
    std::ostringstream os;
    w(os);
    return os.str();
}

void fill_metrics(json& entry, const CaseMetrics& m) {
    entry["ops_to_halve"] = optional_count(m.ops_to_halve);
    entry["ops_to_halve_sustained"] = optional_count(m.ops_to_halve_sustained);
    entry["final_mean_integrated"] = m.final_mean_integrated;
    entry["final_mean_best"] = m.mean_best.empty() ? 0.0 : m.mean_best.back();
    entry["n_valid"] = m.n_valid;
    entry["n_failed"] = m.n_failed;
}

}  // namespace

void write_costs_csv(std::ostream& os, const CaseMetrics& m) {
    const auto old = os.precision(kDigits);
    os << "n,P10,P50,P90,mean_best\n";
    for (std::size_t n = 0; n < m.p50.size(); ++n) {
        os << n + 1 << ',' << m.p10[n] << ',' << m.p50[n] << ',' << m.p90[n] << ','
           << m.mean_best[n] << '\n';
    }
    os.precision(old);
}

void write_integrated_csv(std::ostream& os, const CaseMetrics& m) {
    const auto old = os.precision(kDigits);
    os << "n,mean_I\n";
    for (std::size_t n = 0; n < m.mean_integrated.size(); ++n) {
        os << n + 1 << ',' << m.mean_integrated[n] << '\n';
    }
    os.precision(old);
}

void write_raw_csv(std::ostream& os, const std::vector<TrialOutcome>& trials, std::size_t n_ops) {
    const auto old = os.precision(kDigits);
    os << "trial,failed,baseline";
    for (std::size_t n = 1; n <= n_ops; ++n) os << ",J_" << n;
    os << '\n';
    for (const auto& t : trials) {
        os << t.index << ',' << (t.failed ? 1 : 0) << ',' << t.baseline;
        for (std::size_t n = 0; n < n_ops; ++n) {
            os << ',';
            if (!t.failed) os << t.costs.at(n);
        }
        os << '\n';
    }
    os.precision(old);
}

std::vector<TrialOutcome> read_raw_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("raw file is empty");
    const auto header = split(line);
    if (header.size() < 4 || header[0] != "trial" || header[1] != "failed" ||
        header[2] != "baseline") {
        throw std::invalid_argument("raw file has an unexpected header");
    }
    const std::size_t n_ops = header.size() - 3;
    std::vector<TrialOutcome> trials;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw std::invalid_argument("raw file row has " + std::to_string(cells.size()) +
                                        " cells, expected " + std::to_string(header.size()));
        }
        TrialOutcome t;
        t.index = static_cast<std::size_t>(std::stoull(cells[0]));
        t.failed = cells[1] == "1";
        t.baseline = parse_double(cells[2]);
        if (!t.failed) {
            t.costs.reserve(n_ops);
            for (std::size_t n = 0; n < n_ops; ++n) t.costs.push_back(parse_double(cells[3 + n]));
        } else {
            t.error = "failed in original run";
        }
        trials.push_back(std::move(t));
    }
    return trials;
}

json case_summary(const CaseResult& c) {
    json entry{{"id", c.spec.id}, {"kind", kind_name(c.spec.kind)}, {"r", c.spec.r}};
    if (c.reduction.kind == ReductionKind::IndexSubset) {
        std::vector<std::size_t> free;
        for (auto i : c.reduction.free_indices) free.push_back(i + 1);
        entry["free_theta"] = free;
    } else {
        std::vector<std::vector<double>> cols;
        for (Eigen::Index k = 0; k < c.reduction.basis.cols(); ++k) {
            std::vector<double> col(9);
            for (Eigen::Index i = 0; i < 9; ++i) col[static_cast<std::size_t>(i)] = c.reduction.basis(i, k);
            cols.push_back(col);
        }
        entry["basis_columns"] = cols;
    }
    fill_metrics(entry, c.metrics);
    return entry;
}

json campaign_summary(const CampaignResult& result, const json& config_echo, double penalty_cost) {
    std::vector<double> s_is(9), eig(9);
    for (Eigen::Index i = 0; i < 9; ++i) {
        s_is[static_cast<std::size_t>(i)] = result.analysis.s_is(i);
        eig[static_cast<std::size_t>(i)] = result.analysis.eigen.values(i);
    }
    json cases = json::array();
    for (const auto& c : result.cases) cases.push_back(case_summary(c));
    return json{{"config", config_echo},
                {"seed", config_echo.at("campaign").at("seed")},
                {"nominal_baseline", result.nominal_baseline},
                {"penalty_cost", penalty_cost},
                {"s_is", s_is},
                {"eigenvalues", eig},
                {"within_failure_budget", result.within_failure_budget()},
                {"cases", cases}};
}

std::vector<std::filesystem::path> write_campaign_outputs(const std::filesystem::path& dir,
                                                          const CampaignResult& result,
                                                          const json& config_echo,
                                                          double penalty_cost) {
    std::filesystem::create_directories(dir);
    const std::size_t n_ops = config_echo.at("campaign").at("n_ops").get<std::size_t>();
    std::vector<std::filesystem::path> written;
    for (const auto& c : result.cases) {
        const auto costs = dir / ("costs_" + c.spec.id + ".csv");
        const auto integrated = dir / ("integrated_" + c.spec.id + ".csv");
        const auto raw = dir / ("raw_" + c.spec.id + ".csv");
        write_file(costs, render([&](std::ostream& os) { write_costs_csv(os, c.metrics); }));
        write_file(integrated,
                   render([&](std::ostream& os) { write_integrated_csv(os, c.metrics); }));
        write_file(raw, render([&](std::ostream& os) { write_raw_csv(os, c.trials, n_ops); }));
        written.insert(written.end(), {costs, integrated, raw});
    }
    const auto summary = dir / "summary.json";
    write_file(summary, campaign_summary(result, config_echo, penalty_cost).dump(2) + "\n");
    written.push_back(summary);
    return written;
}

std::vector<std::filesystem::path> reaggregate_outputs(const std::filesystem::path& dir) {
    const auto summary_path = dir / "summary.json";
    std::ifstream in(summary_path);
    if (!in) throw std::invalid_argument("no summary.json in " + dir.string());
    json summary;
    try {
        in >> summary;
    } catch (const json::exception& e) {
        throw std::invalid_argument("malformed summary.json: " + std::string(e.what()));
    }
    in.close();
    const auto& campaign = summary.at("config").at("campaign");
    const auto n_ops = campaign.at("n_ops").get<std::size_t>();
    const auto q = campaign.at("halve_quantile").get<double>();

    std::vector<std::filesystem::path> written;
    bool budget_ok = true;
    for (auto& entry : summary.at("cases")) {
        const auto id = entry.at("id").get<std::string>();
        std::ifstream raw_in(dir / ("raw_" + id + ".csv"));
        if (!raw_in) throw std::invalid_argument("missing raw_" + id + ".csv in " + dir.string());
        const auto trials = read_raw_csv(raw_in);
        const auto m = aggregate_case(trials, n_ops, q);
        if (static_cast<double>(m.n_failed) > 0.01 * static_cast<double>(trials.size())) {
            budget_ok = false;
        }
        const auto costs = dir / ("costs_" + id + ".csv");
        const auto integrated = dir / ("integrated_" + id + ".csv");
        write_file(costs, render([&](std::ostream& os) { write_costs_csv(os, m); }));
        write_file(integrated, render([&](std::ostream& os) { write_integrated_csv(os, m); }));
        written.insert(written.end(), {costs, integrated});
        fill_metrics(entry, m);
    }
    summary["within_failure_budget"] = budget_ok;
    write_file(summary_path, summary.dump(2) + "\n");
    written.push_back(summary_path);
    return written;
}

}  // namespace softland
