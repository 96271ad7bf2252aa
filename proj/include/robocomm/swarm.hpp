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

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "robocomm/bus.hpp"
#include "robocomm/ledger.hpp"
#include "robocomm/result.hpp"
#include "robocomm/rng.hpp"
#include "robocomm/trade.hpp"

namespace robocomm::swarm {

enum class SimMode : std::uint8_t {
    Baseline = 0,  // no energy trading; empty batteries stall for good
    Enabled = 1,   // low robots buy energy from idle donors over the protocol
};

const char* to_string(SimMode m);

struct SimConfig {
    std::uint32_t n_robots = 10;
    std::uint32_t grid_width = 20;
    std::uint32_t grid_height = 20;
    std::uint64_t energy_min = 10;
    std::uint64_t energy_max = 50;
    std::uint32_t delivery_goal = 5;
    std::uint64_t energy_per_step = 1;
    std::uint64_t transfer_trigger = 2;  // buy when energy drops to this or below
    std::uint32_t clusters = 5;
    std::uint32_t points_per_cluster = 50;
    double cluster_sigma = 1.5;
    std::uint32_t steps = 50;
    std::uint32_t runs = 100;
    SimMode mode = SimMode::Baseline;
    std::uint64_t seed = 42;

    // Protocol knobs, used in Enabled mode only.
    std::uint64_t unit_price = 2;
    std::uint64_t target_energy = 15;    // buyers top up to this level
    std::uint64_t donor_retention = 3;   // a donor never sells below this
    std::uint32_t discovery_radius = 5;  // Chebyshev distance in cells
    // High enough that no robot is ever credit-blocked in a 50-step run
    // (worst case spend: ~65 units at price 2).
    std::int64_t initial_credit = 200;

    Result<void> validate() const;
};

struct RobotAgent {
    std::uint32_t index = 0;
    trade::RobotContext ctx;  // populated in Enabled mode
    int x = 0;
    int y = 0;
    std::uint64_t energy = 0;
    std::uint32_t deliveries_done = 0;
    std::vector<std::pair<int, int>> goals;

    bool completed(const SimConfig& cfg) const { return deliveries_done >= cfg.delivery_goal; }
    bool stalled(const SimConfig& cfg) const { return energy == 0 && !completed(cfg); }
};

struct MetricsRow {
    std::uint32_t run = 0;
    std::uint32_t step = 0;
    SimMode mode = SimMode::Baseline;
    std::uint64_t total_deliveries = 0;
    std::uint32_t stalled = 0;
    std::uint64_t swarm_energy = 0;
    double mean_energy = 0.0;
};

struct Metrics {
    std::vector<MetricsRow> rows;  // one per elapsed step
    std::uint64_t trades_settled = 0;
    std::uint64_t units_traded = 0;

    const MetricsRow& final_row() const { return rows.back(); }
};

struct World {
    SimConfig config;
    std::vector<RobotAgent> robots;
    std::vector<std::pair<int, int>> goal_points;
    std::uint32_t step_index = 0;
    Metrics metrics;
    std::uint32_t run_id = 0;

    Rng world_rng;  // placement, energies, goals, scheduling
    Rng proto_rng;  // keys, nonces, exchange ids; untouched in Baseline mode

    // Enabled-mode infrastructure.
    std::unique_ptr<ledger::Ledger> chain;
    std::unique_ptr<bus::MessageBus> net;

    World() : world_rng(0), proto_rng(0) {}
};

Result<World> init_world(const SimConfig& config);

// One scheduler round: trades for low robots (Enabled), then movement and
// deliveries. Asserts energy bookkeeping; throws std::logic_error when the
// ledger and the batteries disagree.
void step(World& world);

Result<Metrics> run(const SimConfig& config);

struct BootstrapCi {
    double lo = 0.0;
    double hi = 0.0;
    double mean = 0.0;
};

struct CompareReport {
    SimConfig baseline_config;
    SimConfig enabled_config;
    std::vector<Metrics> baseline_runs;
    std::vector<Metrics> enabled_runs;

    double mean_deliveries_baseline = 0.0;
    double mean_deliveries_enabled = 0.0;
    double mean_stalled_baseline = 0.0;
    double mean_stalled_enabled = 0.0;
    BootstrapCi deliveries_diff;  // enabled minus baseline, final step
    BootstrapCi stalled_diff;
    bool deliveries_directional = false;  // diff CI entirely >= 0
    bool stalled_directional = false;     // diff CI entirely <= 0
};

// Paired seeds: run r of each mode shares one derived seed, so differences
// isolate the protocol's effect.
Result<CompareReport> compare(const SimConfig& base_config, std::uint32_t runs);

std::string metrics_csv(const std::vector<Metrics>& runs);
std::string aggregate_json(const CompareReport& report);

} // namespace robocomm::swarm
