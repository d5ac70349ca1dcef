#pragma once

// Run-to-run adaptation: a compass pattern search driven one switching
// operation at a time. The caller asks for the next controller parameters,
// runs the device once and tells the search the resulting cost.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "softland/feedforward.hpp"
#include "softland/sensitivity.hpp"

namespace softland {

struct SearchSettings {
    double delta0 = 0.05;
    double shrink = 0.5;
    double delta_min = 1e-4;

    /// Throws std::invalid_argument unless 0 < shrink < 1 and
    /// 0 < delta_min < delta0.
    void validate() const;
};

struct SearchConfig {
    Reduction reduction;
    SearchSettings settings;
};

struct Candidate {
    ControlParams theta;
    Eigen::VectorXd x;  // reduced coordinates before clamping
    bool clamped = false;
};

struct HistoryEntry {
    std::size_t n = 0;  // 1-based operation index
    ControlParams theta;
    double cost = 0.0;
};

struct BestPoint {
    ControlParams theta;
    double cost = 0.0;
};

/// Opportunistic compass search. Polls center +/- delta along each reduced
/// coordinate in ascending order (+ before -), recentres on the first
/// strict improvement and shrinks delta after a full unsuccessful cycle.
/// Once delta falls below delta_min it keeps proposing the center.
class PatternSearch {
public:
    explicit PatternSearch(SearchConfig cfg);

    /// Candidate for the next operation. Repeated calls without a tell
    /// return the same candidate.
    const Candidate& ask();

    /// Report the cost of the last asked candidate. Throws ProtocolError if
    /// nothing is pending.
    void tell(double cost);

    std::optional<BestPoint> best() const;

    bool exhausted() const noexcept { return exhausted_; }
    std::size_t operations() const noexcept { return n_; }
    double delta() const noexcept { return delta_; }
    const Eigen::VectorXd& center() const noexcept { return center_; }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }
    const SearchConfig& config() const noexcept { return cfg_; }

private:
    Candidate make_candidate(const Eigen::VectorXd& x) const;

    SearchConfig cfg_;
    Eigen::VectorXd center_;
    std::optional<double> center_cost_;
    ControlParams center_theta_;
    double delta_;
    std::size_t poll_ = 0;  // next poll: coordinate poll_/2, sign from poll_%2
    std::size_t n_ = 0;
    bool exhausted_ = false;
    std::optional<Candidate> pending_;
    std::vector<HistoryEntry> history_;
};

/// CSV with header n,theta_1..theta_9,J.
void write_history_csv(std::ostream& os, const std::vector<HistoryEntry>& history);

}  // namespace softland
