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

#include "robocomm/swarm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace robocomm::swarm {

using identity::Address;
using identity::Did;
using identity::KeyPair;
using identity::Multiaddr;

const char* to_string(SimMode m) {
    return m == SimMode::Enabled ? "enabled" : "baseline";
}

Result<void> SimConfig::validate() const {
    if (n_robots == 0) return Error(Err::InvalidConfig, "n_robots must be positive");
    if (grid_width == 0 || grid_height == 0)
        return Error(Err::InvalidConfig, "grid dimensions must be positive");
    if (energy_min > energy_max)
        return Error(Err::InvalidConfig, "energy_min exceeds energy_max");
    if (energy_per_step == 0) return Error(Err::InvalidConfig, "energy_per_step must be positive");
    if (delivery_goal > 0 && (clusters == 0 || points_per_cluster == 0))
        return Error(Err::InvalidConfig, "goal pool is empty but delivery_goal is positive");
    if (unit_price == 0) return Error(Err::InvalidConfig, "unit_price must be positive");
    if (target_energy <= transfer_trigger)
        return Error(Err::InvalidConfig, "target_energy must exceed transfer_trigger");
    if (cluster_sigma < 0.0) return Error(Err::InvalidConfig, "cluster_sigma must be nonnegative");
    return {};
}

namespace {

int clamp_cell(double v, std::uint32_t extent) {
    long c = std::lround(v);
    if (c < 0) return 0;
    if (c >= static_cast<long>(extent)) return static_cast<int>(extent) - 1;
    return static_cast<int>(c);
}

KeyPair fresh_keypair(Rng& rng) {
    for (;;) {
        auto kp = identity::generate_keypair(rng.bytes<32>());
        if (kp.ok()) return kp.take();
    }
}

Multiaddr robot_multiaddr(std::uint32_t index) {
    Multiaddr m;
    m.segments = {{"ip4", "10.42.0." + std::to_string(index + 1)},
                  {"tcp", std::to_string(10333 + index)}};
    return m;
}

// Registers the DID on the chain and subscribes it to the bus. Throws on
// failure: world setup is not allowed to half-succeed.
void enroll(ledger::Ledger& chain, bus::MessageBus& net, const trade::RobotContext& ctx,
            const Multiaddr& maddr) {
    auto doc = identity::build_did_document(ctx.did, ctx.keypair, maddr, chain.height());
    if (!doc.ok()) throw std::logic_error("did document build failed: " + doc.error().detail);
    auto stx = ledger::sign_onchain_tx(ctx.keypair, ledger::TxKind::RegisterDid,
                                       ledger::register_did_payload(doc.value(), maddr));
    auto rc = chain.submit_tx(stx);
    if (!rc.ok()) throw std::logic_error("did registration rejected: " + rc.result.error().detail);
    net.subscribe(ctx.did);
}

std::uint64_t total_battery(const World& w) {
    std::uint64_t sum = 0;
    for (const auto& r : w.robots) sum += r.energy;
    return sum;
}

void append_metrics_row(World& w) {
    MetricsRow row;
    row.run = w.run_id;
    row.step = w.step_index;
    row.mode = w.config.mode;
    for (const auto& r : w.robots) {
        row.total_deliveries += r.deliveries_done;
        if (r.stalled(w.config)) ++row.stalled;
        row.swarm_energy += r.energy;
    }
    row.mean_energy = static_cast<double>(row.swarm_energy) / w.robots.size();
    w.metrics.rows.push_back(row);
}

int chebyshev(const RobotAgent& a, const RobotAgent& b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

// Energy purchase for one low robot. Returns true when a trade settled.
bool attempt_trade(World& w, RobotAgent& buyer) {
    const SimConfig& cfg = w.config;

    std::vector<RobotAgent*> donors;
    for (auto& other : w.robots) {
        if (other.index == buyer.index) continue;
        if (!other.completed(cfg)) continue; // only idle robots sell
        if (other.energy <= cfg.donor_retention) continue;
        if (chebyshev(buyer, other) > static_cast<int>(cfg.discovery_radius)) continue;
        donors.push_back(&other);
    }
    if (donors.empty()) return false;

    std::vector<trade::RobotContext*> responders;
    for (auto* d : donors) {
        d->ctx.offer_units = d->energy - cfg.donor_retention;
        responders.push_back(&d->ctx);
    }
    auto clear_offers = [&] {
        for (auto* d : donors) d->ctx.offer_units = 0;
    };

    auto candidates = trade::discover(buyer.ctx, responders, *w.net, *w.chain, w.proto_rng);
    auto chosen = trade::select_seller(candidates);
    if (!chosen.ok()) {
        clear_offers();
        return false;
    }

    RobotAgent* seller = nullptr;
    for (auto* d : donors)
        if (d->ctx.did == chosen.value().did) seller = d;
    if (seller == nullptr) {
        clear_offers();
        return false;
    }

    auto buyer_acct = w.chain->account(buyer.ctx.address());
    if (!buyer_acct) {
        clear_offers();
        return false;
    }
    std::uint64_t affordable =
        buyer_acct->credit_score <= 0
            ? 0
            : static_cast<std::uint64_t>(buyer_acct->credit_score) / cfg.unit_price;
    std::uint64_t units = cfg.target_energy - buyer.energy; // validate() guarantees > trigger
    units = std::min({units, chosen.value().offered_units, affordable});
    if (units == 0) {
        clear_offers();
        return false;
    }

    auto before_b = *w.chain->account(buyer.ctx.address());
    auto before_s = *w.chain->account(seller->ctx.address());

    auto result = trade::run_trade(buyer.ctx, seller->ctx, units, *w.chain, *w.net, w.proto_rng);
    clear_offers();

    if (result.buyer.closure != trade::Closure::Cooperative ||
        result.buyer.units_transferred != units) {
        throw std::logic_error("honest in-sim trade failed to settle cooperatively");
    }

    auto after_b = *w.chain->account(buyer.ctx.address());
    auto after_s = *w.chain->account(seller->ctx.address());
    const auto price = static_cast<std::int64_t>(cfg.unit_price);
    const auto bonus = w.chain->config().honesty_bonus;
    const auto n = static_cast<std::int64_t>(units);
    bool books_ok = after_b.energy_level == before_b.energy_level + units &&
                    after_s.energy_level == before_s.energy_level - units &&
                    after_b.credit_score == before_b.credit_score - n * price + bonus &&
                    after_s.credit_score == before_s.credit_score + n * price + bonus;
    if (!books_ok) throw std::logic_error("ledger settlement disagrees with trade parameters");

    // The physical handover mirrors the settled amounts.
    buyer.energy += units;
    seller->energy -= units;
    ++w.metrics.trades_settled;
    w.metrics.units_traded += units;
    return true;
}

void move_and_deliver(World& w, RobotAgent& r) {
    const SimConfig& cfg = w.config;
    if (r.completed(cfg)) return;

    auto [gx, gy] = r.goals[r.deliveries_done];
    if (r.x == gx && r.y == gy) {
        ++r.deliveries_done; // spawned on (or left standing at) a goal
        return;
    }
    if (r.energy < cfg.energy_per_step) return; // stalled

    if (r.x != gx)
        r.x += r.x < gx ? 1 : -1;
    else
        r.y += r.y < gy ? 1 : -1;
    r.energy -= cfg.energy_per_step;
    if (r.x == gx && r.y == gy) ++r.deliveries_done;
}

} // namespace

Result<World> init_world(const SimConfig& config) {
    if (auto v = config.validate(); !v.ok()) return v.error();

    World w;
    w.config = config;
    w.world_rng = Rng(derive_seed(config.seed, 1));
    w.proto_rng = Rng(derive_seed(config.seed, 2));

    w.robots.resize(config.n_robots);
    for (std::uint32_t i = 0; i < config.n_robots; ++i) {
        auto& r = w.robots[i];
        r.index = i;
        r.x = static_cast<int>(w.world_rng.uniform(0, config.grid_width - 1));
        r.y = static_cast<int>(w.world_rng.uniform(0, config.grid_height - 1));
        r.energy = w.world_rng.uniform(config.energy_min, config.energy_max);
    }

    for (std::uint32_t c = 0; c < config.clusters; ++c) {
        double cx = static_cast<double>(w.world_rng.uniform(0, config.grid_width - 1));
        double cy = static_cast<double>(w.world_rng.uniform(0, config.grid_height - 1));
        for (std::uint32_t p = 0; p < config.points_per_cluster; ++p) {
            int px = clamp_cell(cx + w.world_rng.gaussian(0.0, config.cluster_sigma),
                                config.grid_width);
            int py = clamp_cell(cy + w.world_rng.gaussian(0.0, config.cluster_sigma),
                                config.grid_height);
            w.goal_points.emplace_back(px, py);
        }
    }

    if (config.delivery_goal > 0) {
        // Robots are teamed onto delivery zones round-robin; each works one
        // cluster, so early finishers become stationary donors inside zones
        // that later arrivals are still heading toward.
        std::vector<std::vector<std::size_t>> zone(config.clusters);
        for (std::uint32_t c = 0; c < config.clusters; ++c) {
            zone[c].resize(config.points_per_cluster);
            std::iota(zone[c].begin(), zone[c].end(),
                      static_cast<std::size_t>(c) * config.points_per_cluster);
            w.world_rng.shuffle(zone[c]);
        }
        std::vector<std::size_t> cursor(config.clusters, 0);
        for (auto& r : w.robots) {
            std::uint32_t c = r.index % config.clusters;
            r.goals.reserve(config.delivery_goal);
            for (std::uint32_t g = 0; g < config.delivery_goal; ++g) {
                r.goals.push_back(w.goal_points[zone[c][cursor[c] % zone[c].size()]]);
                ++cursor[c];
            }
        }
    }

    if (config.mode == SimMode::Enabled) {
        KeyPair genesis = fresh_keypair(w.proto_rng);
        ledger::LedgerConfig lc;
        lc.initial_credit = config.initial_credit;
        lc.initial_energy = config.energy_max;
        lc.genesis_authority = genesis.public_key();
        w.chain = std::make_unique<ledger::Ledger>(lc);
        w.net = std::make_unique<bus::MessageBus>(derive_seed(config.seed, 3));

        // Fleet operator: registered DID, then promoted to credential issuer.
        KeyPair issuer_kp = fresh_keypair(w.proto_rng);
        Did issuer_did = identity::create_did(identity::derive_address(issuer_kp.public_key()));
        trade::RobotContext issuer_ctx;
        issuer_ctx.did = issuer_did;
        issuer_ctx.keypair = issuer_kp;
        Multiaddr issuer_addr;
        issuer_addr.segments = {{"ip4", "10.42.0.250"}, {"tcp", "10001"}};
        enroll(*w.chain, *w.net, issuer_ctx, issuer_addr);
        auto promote = w.chain->submit_tx(ledger::sign_onchain_tx(
            genesis, ledger::TxKind::AddIssuer, ledger::add_issuer_payload(issuer_did)));
        if (!promote.ok())
            throw std::logic_error("issuer promotion rejected: " + promote.result.error().detail);

        for (std::uint32_t i = 0; i < config.n_robots; ++i) {
            auto& r = w.robots[i];
            r.ctx.keypair = fresh_keypair(w.proto_rng);
            r.ctx.did =
                identity::create_did(identity::derive_address(r.ctx.keypair.public_key()));
            r.ctx.policy.unit_price = config.unit_price;
            r.ctx.policy.max_units = config.energy_max;
            enroll(*w.chain, *w.net, r.ctx, robot_multiaddr(i));

            std::vector<vc::Claim> claims = {
                {"device_class", "delivery_rover"},
                {"end_of_life", "2031-12-31"},
                {"operator", "fleet-7"},
            };
            auto cred = vc::issue_vc(issuer_kp, issuer_did, r.ctx.did, std::move(claims),
                                     w.chain->height());
            if (!cred.ok())
                throw std::logic_error("credential issuance failed: " + cred.error().detail);
            r.ctx.credential = cred.take();
        }
        auto adv = w.chain->advance_block(1);
        if (!adv.ok()) throw std::logic_error("genesis block advance failed");
    }

    return w;
}

void step(World& w) {
    const SimConfig& cfg = w.config;
    const std::uint64_t before = total_battery(w);
    std::uint64_t consumed = 0;

    std::vector<std::uint32_t> order(cfg.n_robots);
    std::iota(order.begin(), order.end(), 0u);
    w.world_rng.shuffle(order);

    for (auto idx : order) {
        auto& r = w.robots[idx];
        if (r.completed(cfg)) continue;

        if (cfg.mode == SimMode::Enabled && r.energy <= cfg.transfer_trigger)
            attempt_trade(w, r);

        std::uint64_t pre_move = r.energy;
        move_and_deliver(w, r);
        consumed += pre_move - r.energy;
    }

    ++w.step_index;
    append_metrics_row(w);

    // Trades move charge between batteries; only movement destroys it.
    if (total_battery(w) + consumed != before)
        throw std::logic_error("swarm energy bookkeeping out of balance");
}

Result<Metrics> run(const SimConfig& config) {
    auto world = init_world(config);
    if (!world.ok()) return world.error();
    World w = world.take();
    for (std::uint32_t s = 0; s < config.steps; ++s) step(w);
    return std::move(w.metrics);
}

namespace {

BootstrapCi bootstrap_ci(const std::vector<double>& diffs, Rng& rng) {
    constexpr std::size_t kResamples = 2000;
    BootstrapCi ci;
    if (diffs.empty()) return ci;
    for (double d : diffs) ci.mean += d;
    ci.mean /= static_cast<double>(diffs.size());

    std::vector<double> means;
    means.reserve(kResamples);
    for (std::size_t b = 0; b < kResamples; ++b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < diffs.size(); ++i)
            acc += diffs[rng.uniform(0, diffs.size() - 1)];
        means.push_back(acc / static_cast<double>(diffs.size()));
    }
    std::sort(means.begin(), means.end());
    auto rank = [&](double q) {
        auto idx = static_cast<std::size_t>(std::llround(q * (kResamples - 1)));
        return means[idx];
    };
    ci.lo = rank(0.025);
    ci.hi = rank(0.975);
    return ci;
}

} // namespace

Result<CompareReport> compare(const SimConfig& base_config, std::uint32_t runs) {
    if (runs == 0) return Error(Err::InvalidConfig, "compare needs at least one run");
    if (base_config.steps == 0) return Error(Err::InvalidConfig, "compare needs at least one step");

    CompareReport rep;
    rep.baseline_config = base_config;
    rep.baseline_config.mode = SimMode::Baseline;
    rep.baseline_config.runs = runs;
    rep.enabled_config = base_config;
    rep.enabled_config.mode = SimMode::Enabled;
    rep.enabled_config.runs = runs;

    std::vector<double> deliveries_diffs, stalled_diffs;
    for (std::uint32_t r = 0; r < runs; ++r) {
        std::uint64_t run_seed = derive_seed(base_config.seed, 1000 + r);

        SimConfig cb = rep.baseline_config;
        cb.seed = run_seed;
        auto mb = run(cb);
        if (!mb.ok()) return mb.error();

        SimConfig ce = rep.enabled_config;
        ce.seed = run_seed;
        auto me = run(ce);
        if (!me.ok()) return me.error();

        for (auto& row : mb.value().rows) row.run = r;
        for (auto& row : me.value().rows) row.run = r;

        const auto& fb = mb.value().final_row();
        const auto& fe = me.value().final_row();
        deliveries_diffs.push_back(static_cast<double>(fe.total_deliveries) -
                                   static_cast<double>(fb.total_deliveries));
        stalled_diffs.push_back(static_cast<double>(fe.stalled) -
                                static_cast<double>(fb.stalled));
        rep.mean_deliveries_baseline += static_cast<double>(fb.total_deliveries);
        rep.mean_deliveries_enabled += static_cast<double>(fe.total_deliveries);
        rep.mean_stalled_baseline += static_cast<double>(fb.stalled);
        rep.mean_stalled_enabled += static_cast<double>(fe.stalled);

        rep.baseline_runs.push_back(mb.take());
        rep.enabled_runs.push_back(me.take());
    }
    rep.mean_deliveries_baseline /= runs;
    rep.mean_deliveries_enabled /= runs;
    rep.mean_stalled_baseline /= runs;
    rep.mean_stalled_enabled /= runs;

    Rng boot(derive_seed(base_config.seed, 999));
    rep.deliveries_diff = bootstrap_ci(deliveries_diffs, boot);
    rep.stalled_diff = bootstrap_ci(stalled_diffs, boot);
    rep.deliveries_directional = rep.deliveries_diff.lo >= 0.0;
    rep.stalled_directional = rep.stalled_diff.hi <= 0.0;
    return rep;
}

std::string metrics_csv(const std::vector<Metrics>& runs) {
    std::string out = "run,step,mode,total_deliveries,stalled,swarm_energy,mean_energy\n";
    char line[160];
    for (const auto& m : runs) {
        for (const auto& row : m.rows) {
            std::snprintf(line, sizeof line, "%u,%u,%s,%llu,%u,%llu,%.4f\n", row.run, row.step,
                          to_string(row.mode),
                          static_cast<unsigned long long>(row.total_deliveries), row.stalled,
                          static_cast<unsigned long long>(row.swarm_energy), row.mean_energy);
            out += line;
        }
    }
    return out;
}

std::string aggregate_json(const CompareReport& rep) {
    nlohmann::ordered_json j;
    const auto& cfg = rep.baseline_config;
    j["config"] = {{"n_robots", cfg.n_robots},
                   {"grid", {cfg.grid_width, cfg.grid_height}},
                   {"energy_range", {cfg.energy_min, cfg.energy_max}},
                   {"delivery_goal", cfg.delivery_goal},
                   {"transfer_trigger", cfg.transfer_trigger},
                   {"steps", cfg.steps},
                   {"runs", cfg.runs},
                   {"seed", cfg.seed},
                   {"unit_price", cfg.unit_price},
                   {"target_energy", cfg.target_energy},
                   {"donor_retention", cfg.donor_retention},
                   {"discovery_radius", cfg.discovery_radius},
                   {"initial_credit", cfg.initial_credit}};
    j["deliveries"] = {{"baseline_mean", rep.mean_deliveries_baseline},
                       {"enabled_mean", rep.mean_deliveries_enabled},
                       {"diff_mean", rep.deliveries_diff.mean},
                       {"diff_ci95", {rep.deliveries_diff.lo, rep.deliveries_diff.hi}},
                       {"directional", rep.deliveries_directional}};
    j["stalled"] = {{"baseline_mean", rep.mean_stalled_baseline},
                    {"enabled_mean", rep.mean_stalled_enabled},
                    {"diff_mean", rep.stalled_diff.mean},
                    {"diff_ci95", {rep.stalled_diff.lo, rep.stalled_diff.hi}},
                    {"directional", rep.stalled_directional}};
    std::uint64_t trades = 0, units = 0;
    for (const auto& m : rep.enabled_runs) {
        trades += m.trades_settled;
        units += m.units_traded;
    }
    j["trades"] = {{"settled", trades}, {"units", units}};
    return j.dump(2);
}

} // namespace robocomm::swarm
