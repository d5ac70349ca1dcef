#include <doctest.h>

#include <cmath>

#include "softland/campaign.hpp"

using namespace softland;

namespace {

CampaignConfig small_config(std::vector<std::string> ids, std::size_t trials, std::size_t ops) {
    CampaignConfig cfg;
    cfg.cases.clear();
    for (const auto& id : ids) cfg.cases.push_back(parse_case(id));
    cfg.n_trials = trials;
    cfg.n_ops = ops;
    cfg.seed = 12345;
    cfg.jobs = 1;
    return cfg;
}

}  // namespace

TEST_CASE("standard cases") {
    const auto& cs = standard_cases();
    REQUIRE(cs.size() == 7);
    const std::vector<std::pair<std::string, std::size_t>> expect{
        {"A", 9}, {"B", 7}, {"C", 4}, {"D", 2}, {"E", 7}, {"F", 4}, {"G", 2}};
    for (std::size_t k = 0; k < cs.size(); ++k) {
        CHECK(cs[k].id == expect[k].first);
        CHECK(cs[k].r == expect[k].second);
        CHECK(cs[k].kind == (k < 4 ? ReductionKind::IndexSubset : ReductionKind::Orthogonal));
    }
    CHECK(parse_case("g") == cs[6]);
    CHECK(parse_case("subset:3").r == 3);
    CHECK(parse_case("orthogonal:5").kind == ReductionKind::Orthogonal);
    CHECK_THROWS_AS(parse_case("H"), std::invalid_argument);
    CHECK_THROWS_AS(parse_case("subset:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_case("orthogonal:10"), std::invalid_argument);
    try {
        parse_case("Q");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("A, B, C, D, E, F, G") != std::string::npos);
    }
}

TEST_CASE("perturbation of the plant") {
    const auto nominal = nominal_params();
    CHECK(perturb_params(1, 0, nominal, 0.0) == nominal);
    CHECK(perturb_params(3, 8, nominal) == perturb_params(3, 8, nominal));
    CHECK_FALSE(perturb_params(3, 8, nominal) == perturb_params(3, 9, nominal));
    CHECK_FALSE(perturb_params(3, 8, nominal) == perturb_params(4, 8, nominal));
    CHECK(perturb_params(3, 8, nominal).R_coil == nominal.R_coil);

    double lo = 2.0, hi = 0.0, sum = 0.0;
    std::size_t count = 0;
    const auto base = nominal.uncertain();
    for (std::uint64_t trial = 0; trial < 10000; ++trial) {
        const auto v = perturb_params(2024, trial, nominal).uncertain();
        for (std::size_t i = 0; i < kNumUncertain; ++i) {
            const double ratio = v[i] / base[i];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            sum += ratio;
            ++count;
        }
    }
    CHECK(lo >= 0.95);
    CHECK(hi <= 1.05);
    CHECK(std::abs(sum / count - 1.0) < 1e-3);
}

TEST_CASE("uniform stream") {
    const auto a = uniform_stream(trial_key(1, 2), 1000);
    CHECK(a == uniform_stream(trial_key(1, 2), 1000));
    for (double u : a) {
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    CHECK(trial_key(1, 2) != trial_key(2, 1));
}

TEST_CASE("run_trial on the nominal plant") {
    const auto setup = default_operation_setup();
    const auto analysis = analyze_nominal(Trajectory(setup.trajectory), setup.p_nom);
    const auto red = reduction_for_case(parse_case("A"), analysis, {}, OrthogonalMap::Affine);
    const auto rec = run_trial(red, setup.p_nom, 40, setup, {}, true);
    REQUIRE(rec.costs.size() == 40);
    CHECK(rec.history.size() == 40);
    const double j_unc = uncontrolled_cost(setup.p_nom, setup);
    CHECK(j_unc == doctest::Approx(kNominalBaselineCost).epsilon(1e-5));
    CHECK(rec.costs.front() <= 0.01 * j_unc);
    const auto best = best_so_far(rec.costs);
    for (std::size_t n = 1; n < best.size(); ++n) CHECK(best[n] <= best[n - 1]);
}

TEST_CASE("integrated cost") {
    const std::vector<double> c(10, 0.3);
    const auto i = integrated_cost(c);
    for (std::size_t n = 0; n < i.size(); ++n) CHECK(i[n] == doctest::Approx(0.3 * (n + 1)));
    const std::vector<double> j{0.5, 0.1, 2.0, 0.0};
    const auto ij = integrated_cost(j);
    CHECK(ij.front() == j.front());
    for (std::size_t n = 1; n < ij.size(); ++n) CHECK(ij[n] >= ij[n - 1]);
    CHECK(ij.back() == doctest::Approx(2.6));
}

TEST_CASE("percentile convention") {
    CHECK(percentile({1, 2, 3, 4, 5}, 50) == 3.0);
    CHECK(percentile({5, 1, 4, 2, 3}, 0) == 1.0);
    CHECK(percentile({5, 1, 4, 2, 3}, 100) == 5.0);
    CHECK(percentile({1, 2, 3, 4}, 50) == 2.5);
    CHECK(percentile({1, 2, 3, 4}, 10) == doctest::Approx(1.3));
    CHECK(percentile({7}, 90) == 7.0);
    CHECK_THROWS_AS(percentile({}, 50), std::invalid_argument);
    CHECK_THROWS_AS(percentile({1.0}, 101), std::invalid_argument);
}

TEST_CASE("operations to halve") {
    const std::vector<double> base{2.0, 2.0, 2.0};
    CHECK(ops_to_halve({{0.5, 0.5}, {0.1, 3.0}, {0.9, 0.9}}, base, 0.9) == 1u);
    CHECK_FALSE(ops_to_halve({{1.5, 1.5}, {0.1, 3.0}, {0.9, 0.9}}, base, 0.9).has_value());
    // Best-so-far: the third trial halves at n = 3 and stays counted.
    CHECK(ops_to_halve({{0.5, 3, 3}, {3, 0.9, 3}, {3, 3, 1.0}}, base, 0.9) == 3u);
    CHECK(ops_to_halve({{0.5, 3, 3}, {3, 0.9, 3}, {3, 3, 1.0}}, base, 0.6) == 2u);
    CHECK_THROWS_AS(ops_to_halve({{1.0}}, {1.0, 2.0}, 0.9), std::invalid_argument);
}

TEST_CASE("sustained operations to halve") {
    const std::vector<double> base{2.0, 2.0, 2.0};
    CHECK(ops_to_halve_sustained({{0.5, 0.5}, {0.1, 0.2}, {0.9, 0.9}}, base, 0.9) == 1u);
    CHECK_FALSE(ops_to_halve_sustained({{0.5, 3, 3}, {3, 0.9, 3}, {3, 3, 1.0}}, base, 0.9).has_value());
    CHECK(ops_to_halve_sustained({{3, 0.5, 0.5}, {3, 3, 0.9}, {0.1, 3, 1.0}}, base, 0.9) == 3u);
    CHECK(ops_to_halve_sustained({{3, 0.5, 0.5}, {3, 3, 0.9}, {0.1, 3, 1.0}}, base, 0.3) == 2u);
}

TEST_CASE("campaign determinism, trial independence and metric invariants") {
    auto cfg = small_config({"A", "D"}, 10, 50);
    const auto a = run_campaign(cfg);
    cfg.jobs = 3;
    const auto b = run_campaign(cfg);
    REQUIRE(a.cases.size() == 2);
    for (std::size_t c = 0; c < a.cases.size(); ++c) {
        const auto& ca = a.cases[c];
        const auto& cb = b.cases[c];
        REQUIRE(ca.trials.size() == 10);
        for (std::size_t k = 0; k < ca.trials.size(); ++k) {
            CHECK(ca.trials[k].index == k);
            CHECK(ca.trials[k].costs == cb.trials[k].costs);
            CHECK(ca.trials[k].baseline == cb.trials[k].baseline);
        }
        CHECK(ca.metrics.p50 == cb.metrics.p50);
        CHECK(ca.metrics.mean_integrated == cb.metrics.mean_integrated);
        CHECK(ca.metrics.ops_to_halve == cb.metrics.ops_to_halve);

        const auto& m = ca.metrics;
        REQUIRE(m.p50.size() == 50);
        for (std::size_t n = 0; n < 50; ++n) {
            CHECK(m.p10[n] <= m.p50[n]);
            CHECK(m.p50[n] <= m.p90[n]);
            if (n > 0) CHECK(m.mean_integrated[n] >= m.mean_integrated[n - 1]);
            if (n > 0) CHECK(m.mean_best[n] <= m.mean_best[n - 1]);
        }
        CHECK(m.final_mean_integrated == m.mean_integrated.back());
        for (const auto& t : ca.trials) {
            CHECK(t.baseline >= 0.5 * a.nominal_baseline);
            CHECK(t.baseline <= 2.0 * a.nominal_baseline);
        }
    }
    CHECK(a.within_failure_budget());
}

TEST_CASE("growing the trial count keeps earlier trials") {
    const auto small = run_campaign(small_config({"C"}, 3, 20));
    const auto large = run_campaign(small_config({"C"}, 6, 20));
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(small.cases[0].trials[k].costs == large.cases[0].trials[k].costs);
    }
}

TEST_CASE("zero perturbation lands softly from the first operation") {
    auto cfg = small_config({"A"}, 4, 5);
    cfg.half_width = 0.0;
    const auto r = run_campaign(cfg);
    for (const auto& t : r.cases[0].trials) {
        CHECK(t.costs.front() <= 0.01 * t.baseline);
        const auto best = best_so_far(t.costs);
        CHECK(best.back() <= 0.01 * t.baseline);
    }
    CHECK(r.cases[0].metrics.ops_to_halve == 1u);
}

TEST_CASE("failed trials are excluded from the metrics") {
    std::vector<TrialOutcome> trials(4);
    for (std::size_t k = 0; k < trials.size(); ++k) {
        trials[k].index = k;
        trials[k].baseline = 2.0;
        trials[k].costs = {1.0 + static_cast<double>(k), 0.5};
    }
    trials[2].failed = true;
    trials[2].costs.clear();
    const auto m = aggregate_case(trials, 2, 0.9);
    CHECK(m.n_valid == 3);
    CHECK(m.n_failed == 1);
    CHECK(m.p50[0] == 2.0);
    CHECK(m.mean_integrated[1] == doctest::Approx((1.5 + 2.5 + 4.5) / 3.0));
    for (auto& t : trials) t.failed = true;
    CHECK_THROWS_AS(aggregate_case(trials, 2, 0.9), std::invalid_argument);
}

TEST_CASE("config validation") {
    CampaignConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.n_trials = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.half_width = 0.3;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.n_ops = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
