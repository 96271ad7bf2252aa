// Copyright 2026 The RoboComm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "robocomm/swarm.hpp"

using namespace robocomm;
using namespace robocomm::swarm;

namespace {

SimConfig small_config() {
    SimConfig cfg;
    cfg.n_robots = 6;
    cfg.steps = 25;
    cfg.runs = 4;
    cfg.points_per_cluster = 20;
    return cfg;
}

} // namespace

TEST_CASE("config validation") {
    CHECK(SimConfig{}.validate().ok());

    SimConfig bad = small_config();
    bad.n_robots = 0;
    CHECK(bad.validate().code() == Err::InvalidConfig);

    bad = small_config();
    bad.grid_width = 0;
    CHECK(bad.validate().code() == Err::InvalidConfig);

    bad = small_config();
    bad.energy_min = 60;  // above energy_max
    CHECK(bad.validate().code() == Err::InvalidConfig);

    bad = small_config();
    bad.energy_per_step = 0;
    CHECK(bad.validate().code() == Err::InvalidConfig);

    bad = small_config();
    bad.clusters = 0;  // no goal pool but deliveries demanded
    CHECK(bad.validate().code() == Err::InvalidConfig);

    bad = small_config();
    bad.unit_price = 0;
    CHECK(bad.validate().code() == Err::InvalidConfig);

    bad = small_config();
    bad.target_energy = bad.transfer_trigger;  // must top up above the trigger
    CHECK(bad.validate().code() == Err::InvalidConfig);

    bad = small_config();
    bad.cluster_sigma = -0.5;
    CHECK(bad.validate().code() == Err::InvalidConfig);
}

TEST_CASE("world initialization is deterministic and in bounds") {
    SimConfig cfg = small_config();
    auto w1 = init_world(cfg);
    auto w2 = init_world(cfg);
    REQUIRE(w1.ok());
    REQUIRE(w2.ok());

    REQUIRE(w1.value().robots.size() == cfg.n_robots);
    CHECK(w1.value().goal_points.size() == cfg.clusters * cfg.points_per_cluster);

    for (std::size_t i = 0; i < cfg.n_robots; ++i) {
        const auto& a = w1.value().robots[i];
        const auto& b = w2.value().robots[i];
        CHECK(a.x == b.x);
        CHECK(a.y == b.y);
        CHECK(a.energy == b.energy);
        CHECK(a.goals == b.goals);
        CHECK(a.x >= 0);
        CHECK(a.x < static_cast<int>(cfg.grid_width));
        CHECK(a.y >= 0);
        CHECK(a.y < static_cast<int>(cfg.grid_height));
        CHECK(a.energy >= cfg.energy_min);
        CHECK(a.energy <= cfg.energy_max);
        CHECK(a.goals.size() == cfg.delivery_goal);
        for (auto [gx, gy] : a.goals) {
            CHECK(gx >= 0);
            CHECK(gx < static_cast<int>(cfg.grid_width));
            CHECK(gy >= 0);
            CHECK(gy < static_cast<int>(cfg.grid_height));
        }
    }

    SimConfig other = cfg;
    other.seed = cfg.seed + 1;
    auto w3 = init_world(other);
    REQUIRE(w3.ok());
    bool any_difference = false;
    for (std::size_t i = 0; i < cfg.n_robots; ++i) {
        const auto& a = w1.value().robots[i];
        const auto& c = w3.value().robots[i];
        if (a.x != c.x || a.y != c.y || a.energy != c.energy) any_difference = true;
    }
    CHECK(any_difference);
}

TEST_CASE("goal assignment spreads robots across the zones") {
    SimConfig cfg = small_config();
    cfg.n_robots = 10;
    auto w = init_world(cfg);
    REQUIRE(w.ok());

    // goals are drawn from the shared pool
    std::set<std::pair<int, int>> pool(w.value().goal_points.begin(),
                                       w.value().goal_points.end());
    for (const auto& r : w.value().robots)
        for (const auto& g : r.goals) CHECK(pool.count(g) == 1);
}

TEST_CASE("enabled mode registers every robot before the first step") {
    SimConfig cfg = small_config();
    cfg.mode = SimMode::Enabled;
    auto w = init_world(cfg);
    REQUIRE(w.ok());
    REQUIRE(w.value().chain != nullptr);
    REQUIRE(w.value().net != nullptr);

    for (const auto& r : w.value().robots) {
        auto resolved = w.value().chain->resolve_did(r.ctx.did);
        REQUIRE(resolved.ok());
        CHECK(resolved.value().status == ledger::DidRecordStatus::Active);
        CHECK(resolved.value().account.credit_score == cfg.initial_credit);
        // ledger energy mirrors a full battery; the physical battery is the
        // simulation's source of truth
        CHECK(resolved.value().account.energy_level == cfg.energy_max);
        CHECK_FALSE(r.ctx.credential.claims.empty());
    }

    SUBCASE("baseline mode skips the infrastructure") {
        SimConfig base = small_config();
        auto wb = init_world(base);
        REQUIRE(wb.ok());
        CHECK(wb.value().chain == nullptr);
        CHECK(wb.value().net == nullptr);
    }
}

TEST_CASE("stepping conserves energy in baseline mode") {
    SimConfig cfg = small_config();
    auto w = init_world(cfg);
    REQUIRE(w.ok());
    World world = std::move(w.take());

    std::uint64_t before = 0;
    for (const auto& r : world.robots) before += r.energy;

    for (int i = 0; i < 10; ++i) step(world);

    CHECK(world.step_index == 10);
    REQUIRE(world.metrics.rows.size() == 10);
    std::uint64_t after = 0;
    for (const auto& r : world.robots) after += r.energy;
    // movement only burns energy; nothing creates it
    CHECK(after <= before);
    CHECK(world.metrics.rows.back().swarm_energy == after);
    CHECK(world.metrics.trades_settled == 0);

    // per-row sanity
    for (const auto& row : world.metrics.rows) {
        CHECK(row.mode == SimMode::Baseline);
        CHECK(row.stalled <= cfg.n_robots);
        CHECK(row.total_deliveries <= std::uint64_t{cfg.n_robots} * cfg.delivery_goal);
    }
}

TEST_CASE("full runs produce one metrics row per step") {
    SimConfig cfg = small_config();
    auto m = run(cfg);
    REQUIRE(m.ok());
    CHECK(m.value().rows.size() == cfg.steps);
    CHECK(m.value().trades_settled == 0);

    SimConfig en = cfg;
    en.mode = SimMode::Enabled;
    auto me = run(en);
    REQUIRE(me.ok());
    CHECK(me.value().rows.size() == cfg.steps);
}

TEST_CASE("identical seeds reproduce identical metrics") {
    SimConfig cfg = small_config();
    cfg.mode = SimMode::Enabled;
    auto m1 = run(cfg);
    auto m2 = run(cfg);
    REQUIRE(m1.ok());
    REQUIRE(m2.ok());
    REQUIRE(m1.value().rows.size() == m2.value().rows.size());
    for (std::size_t i = 0; i < m1.value().rows.size(); ++i) {
        CHECK(m1.value().rows[i].total_deliveries == m2.value().rows[i].total_deliveries);
        CHECK(m1.value().rows[i].stalled == m2.value().rows[i].stalled);
        CHECK(m1.value().rows[i].swarm_energy == m2.value().rows[i].swarm_energy);
    }
    CHECK(m1.value().trades_settled == m2.value().trades_settled);
    CHECK(m1.value().units_traded == m2.value().units_traded);
}

TEST_CASE("trading dominates the baseline on paired runs") {
    SimConfig cfg = small_config();
    cfg.runs = 6;
    auto report = compare(cfg, cfg.runs);
    REQUIRE(report.ok());
    const CompareReport& r = report.value();

    REQUIRE(r.baseline_runs.size() == cfg.runs);
    REQUIRE(r.enabled_runs.size() == cfg.runs);

    // with shared world seeds, trading can only add deliveries and
    // only remove stalls, run by run
    for (std::size_t i = 0; i < cfg.runs; ++i) {
        const auto& base = r.baseline_runs[i].final_row();
        const auto& en = r.enabled_runs[i].final_row();
        CHECK(en.total_deliveries >= base.total_deliveries);
        CHECK(en.stalled <= base.stalled);
    }

    CHECK(r.mean_deliveries_enabled >= r.mean_deliveries_baseline);
    CHECK(r.mean_stalled_enabled <= r.mean_stalled_baseline);
    CHECK(r.deliveries_diff.lo <= r.deliveries_diff.hi);
    CHECK(r.deliveries_diff.mean ==
          doctest::Approx(r.mean_deliveries_enabled - r.mean_deliveries_baseline).epsilon(0.05));
    // domination makes the intervals one-sided automatically
    CHECK(r.deliveries_directional == (r.deliveries_diff.lo >= 0.0));
    CHECK(r.stalled_directional == (r.stalled_diff.hi <= 0.0));

    SUBCASE("compare validates its inputs") {
        CHECK(compare(cfg, 0).code() == Err::InvalidConfig);
        SimConfig zero_steps = cfg;
        zero_steps.steps = 0;
        CHECK(compare(zero_steps, 2).code() == Err::InvalidConfig);
    }
}

TEST_CASE("csv export carries the fixed header and one line per row") {
    SimConfig cfg = small_config();
    cfg.runs = 2;
    std::vector<Metrics> runs;
    for (std::uint32_t r = 0; r < cfg.runs; ++r) {
        SimConfig per = cfg;
        per.seed = derive_seed(cfg.seed, 1000 + r);
        auto m = run(per);
        REQUIRE(m.ok());
        runs.push_back(m.take());
    }
    std::string csv = metrics_csv(runs);
    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "run,step,mode,total_deliveries,stalled,swarm_energy,mean_energy");
    std::size_t data_lines = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++data_lines;
        CHECK(std::count(line.begin(), line.end(), ',') == 6);
    }
    CHECK(data_lines == std::size_t{cfg.runs} * cfg.steps);

    // byte determinism
    std::vector<Metrics> again;
    for (std::uint32_t r = 0; r < cfg.runs; ++r) {
        SimConfig per = cfg;
        per.seed = derive_seed(cfg.seed, 1000 + r);
        again.push_back(run(per).take());
    }
    CHECK(metrics_csv(again) == csv);
}

TEST_CASE("aggregate json summarizes the comparison") {
    SimConfig cfg = small_config();
    cfg.runs = 3;
    auto report = compare(cfg, cfg.runs);
    REQUIRE(report.ok());
    auto parsed = nlohmann::json::parse(aggregate_json(report.value()));

    CHECK(parsed.contains("config"));
    CHECK(parsed.contains("deliveries"));
    CHECK(parsed.contains("stalled"));
    CHECK(parsed.contains("trades"));
    CHECK(parsed["config"]["runs"] == 3);
    CHECK(parsed["deliveries"]["diff_ci95"].is_array());
    CHECK(parsed["deliveries"]["diff_ci95"].size() == 2);
    CHECK(parsed["deliveries"]["directional"].is_boolean());
    double lo = parsed["deliveries"]["diff_ci95"][0];
    double hi = parsed["deliveries"]["diff_ci95"][1];
    CHECK(lo <= hi);
}
