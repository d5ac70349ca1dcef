#include "softland/optimizer.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "softland/errors.hpp"

namespace softland {

void SearchSettings::validate() const {
    if (!(shrink > 0.0 && shrink < 1.0)) {
        throw std::invalid_argument("search shrink must lie in (0, 1)");
    }
    if (!(delta_min > 0.0 && delta_min < delta0)) {
        throw std::invalid_argument("search requires 0 < delta_min < delta0");
    }
}

PatternSearch::PatternSearch(SearchConfig cfg) : cfg_(std::move(cfg)), delta_(cfg_.settings.delta0) {
    cfg_.settings.validate();
    center_ = cfg_.reduction.anchor();
    center_theta_ = theta_from_reduced(cfg_.reduction, center_).theta;
}

Candidate PatternSearch::make_candidate(const Eigen::VectorXd& x) const {
    const auto mapped = theta_from_reduced(cfg_.reduction, x);
    return {mapped.theta, x, mapped.clamped};
}

const Candidate& PatternSearch::ask() {
    if (pending_) {
        return *pending_;
    }
    if (!center_cost_ || exhausted_) {
        pending_ = make_candidate(center_);
    } else {
        Eigen::VectorXd x = center_;
        const auto coord = static_cast<Eigen::Index>(poll_ / 2);
        x(coord) += (poll_ % 2 == 0) ? delta_ : -delta_;
        pending_ = make_candidate(x);
    }
    return *pending_;
}

void PatternSearch::tell(double cost) {
    if (!pending_) {
        throw ProtocolError("tell() without a pending ask()");
    }
    const Candidate cand = std::move(*pending_);
    pending_.reset();
    ++n_;
    history_.push_back({n_, cand.theta, cost});

    if (!center_cost_) {
        center_cost_ = cost;
        center_theta_ = cand.theta;
        return;
    }
    if (exhausted_) {
        // Only the center is proposed now; keep the lowest cost seen for it.
        center_cost_ = std::min(*center_cost_, cost);
        return;
    }
    if (cost < *center_cost_) {
        center_ = cand.x;
        center_cost_ = cost;
        center_theta_ = cand.theta;
        poll_ = 0;
        return;
    }
    if (++poll_ == 2 * cfg_.reduction.r) {
        poll_ = 0;
        delta_ *= cfg_.settings.shrink;
        if (delta_ < cfg_.settings.delta_min) {
            exhausted_ = true;
        }
    }
}

std::optional<BestPoint> PatternSearch::best() const {
    if (!center_cost_) {
        return std::nullopt;
    }
    return BestPoint{center_theta_, *center_cost_};
}

void write_history_csv(std::ostream& os, const std::vector<HistoryEntry>& history) {
    const auto old = os.precision(std::numeric_limits<double>::max_digits10);
    os << "n";
    for (std::size_t i = 1; i <= kNumUncertain; ++i) os << ",theta_" << i;
    os << ",J\n";
    for (const auto& h : history) {
        os << h.n;
        for (double v : h.theta.theta) os << ',' << v;
        os << ',' << h.cost << '\n';
    }
    os.precision(old);
}

}  // namespace softland
