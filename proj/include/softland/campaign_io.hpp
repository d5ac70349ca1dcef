#pragma once

// File formats of a campaign run. Per case <id>:
//   costs_<id>.csv       n,P10,P50,P90,mean_best
//   integrated_<id>.csv  n,mean_I
//   raw_<id>.csv         trial,failed,baseline,J_1,...,J_<n_ops>
// plus summary.json for the whole run. The raw files carry everything the
// `report` command needs to rebuild the aggregates.

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "softland/campaign.hpp"

namespace softland {

void write_costs_csv(std::ostream& os, const CaseMetrics& m);
void write_integrated_csv(std::ostream& os, const CaseMetrics& m);
void write_raw_csv(std::ostream& os, const std::vector<TrialOutcome>& trials, std::size_t n_ops);

/// Throws std::invalid_argument on a malformed file.
std::vector<TrialOutcome> read_raw_csv(std::istream& is);

nlohmann::json case_summary(const CaseResult& c);
nlohmann::json campaign_summary(const CampaignResult& result, const nlohmann::json& config_echo,
                                double penalty_cost);

/// Writes every per-case file and summary.json into dir (created if
/// needed). Returns the paths written, in a fixed order.
std::vector<std::filesystem::path> write_campaign_outputs(const std::filesystem::path& dir,
                                                          const CampaignResult& result,
                                                          const nlohmann::json& config_echo,
                                                          double penalty_cost);

/// Rebuilds costs/integrated CSVs and the metric fields of summary.json from
/// the raw files of an earlier run. Returns the paths rewritten.
std::vector<std::filesystem::path> reaggregate_outputs(const std::filesystem::path& dir);

}  // namespace softland
