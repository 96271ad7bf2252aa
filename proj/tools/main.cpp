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

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "robocomm/bus.hpp"
#include "robocomm/channel.hpp"
#include "robocomm/credentials.hpp"
#include "robocomm/identity.hpp"
#include "robocomm/ledger.hpp"
#include "robocomm/result.hpp"
#include "robocomm/rng.hpp"
#include "robocomm/swarm.hpp"
#include "robocomm/trade.hpp"

namespace {

using namespace robocomm;
using identity::Did;
using identity::KeyPair;
using identity::Multiaddr;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int fail_usage(const std::string& msg) {
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return kExitUsage;
}

int fail_runtime(const std::string& msg) {
    std::fprintf(stderr, "error: %s\n", msg.c_str());
    return kExitRuntime;
}

std::optional<std::uint64_t> parse_u64(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
    return static_cast<std::uint64_t>(v);
}

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << content;
    return static_cast<bool>(out);
}

// ---------------------------------------------------------------- simulate

// Flat key=value settings mirroring the experiment parameter table.
Result<void> apply_config_file(swarm::SimConfig& cfg, const std::string& path,
                               bool& seed_from_file) {
    std::ifstream in(path);
    if (!in) return Error(Err::IoError, "cannot open config file: " + path);

    std::map<std::string, std::function<bool(const std::string&)>> setters;
    auto set_u64 = [](std::uint64_t& field) {
        return [&field](const std::string& v) {
            auto n = parse_u64(v);
            if (!n) return false;
            field = *n;
            return true;
        };
    };
    auto set_u32 = [](std::uint32_t& field) {
        return [&field](const std::string& v) {
            auto n = parse_u64(v);
            if (!n || *n > 0xffffffffULL) return false;
            field = static_cast<std::uint32_t>(*n);
            return true;
        };
    };
    setters["robots"] = set_u32(cfg.n_robots);
    setters["grid_width"] = set_u32(cfg.grid_width);
    setters["grid_height"] = set_u32(cfg.grid_height);
    setters["energy_min"] = set_u64(cfg.energy_min);
    setters["energy_max"] = set_u64(cfg.energy_max);
    setters["deliveries"] = set_u32(cfg.delivery_goal);
    setters["energy_per_step"] = set_u64(cfg.energy_per_step);
    setters["transfer_trigger"] = set_u64(cfg.transfer_trigger);
    setters["clusters"] = set_u32(cfg.clusters);
    setters["points_per_cluster"] = set_u32(cfg.points_per_cluster);
    setters["steps"] = set_u32(cfg.steps);
    setters["runs"] = set_u32(cfg.runs);
    setters["unit_price"] = set_u64(cfg.unit_price);
    setters["target_energy"] = set_u64(cfg.target_energy);
    setters["donor_retention"] = set_u64(cfg.donor_retention);
    setters["discovery_radius"] = set_u32(cfg.discovery_radius);
    setters["cluster_sigma"] = [&cfg](const std::string& v) {
        try {
            std::size_t used = 0;
            cfg.cluster_sigma = std::stod(v, &used);
            return used == v.size();
        } catch (const std::exception&) {
            return false;
        }
    };
    setters["initial_credit"] = [&cfg](const std::string& v) {
        try {
            std::size_t used = 0;
            cfg.initial_credit = std::stoll(v, &used);
            return used == v.size();
        } catch (const std::exception&) {
            return false;
        }
    };
    setters["seed"] = [&cfg, &seed_from_file](const std::string& v) {
        auto n = parse_u64(v);
        if (!n) return false;
        cfg.seed = *n;
        seed_from_file = true;
        return true;
    };

    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            return Error(Err::InvalidConfig,
                         path + ":" + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end())
            return Error(Err::InvalidConfig,
                         path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!it->second(value))
            return Error(Err::InvalidConfig, path + ":" + std::to_string(lineno) +
                                                 ": bad value for '" + key + "'");
    }
    return {};
}

struct SimulateArgs {
    std::string config_path;
    std::string mode = "both";
    std::string out_prefix = "robocomm";
    std::uint32_t runs = 0;
    std::uint32_t steps = 0;
    std::uint64_t seed = 0;
    bool runs_set = false;
    bool steps_set = false;
    bool seed_set = false;
};

int cmd_simulate(const SimulateArgs& args) {
    swarm::SimConfig cfg; // defaults are the experiment table
    bool seed_from_file = false;
    if (!args.config_path.empty()) {
        auto r = apply_config_file(cfg, args.config_path, seed_from_file);
        if (!r.ok()) return fail_usage(r.error().detail);
    }
    if (args.runs_set) cfg.runs = args.runs;
    if (args.steps_set) cfg.steps = args.steps;
    if (args.seed_set) {
        cfg.seed = args.seed;
    } else if (!seed_from_file) {
        if (const char* env = std::getenv("ROBOCOMM_SEED")) {
            auto n = parse_u64(env);
            if (!n) return fail_usage("ROBOCOMM_SEED is not a decimal integer");
            cfg.seed = *n;
        }
    }
    if (cfg.runs == 0) return fail_usage("--runs must be at least 1");
    if (cfg.steps == 0) return fail_usage("--steps must be at least 1");
    if (auto v = cfg.validate(); !v.ok()) return fail_usage(v.error().detail);

    char buf[256];
    try {
        if (args.mode == "both") {
            auto rep = swarm::compare(cfg, cfg.runs);
            if (!rep.ok()) return fail_usage(rep.error().detail);
            const auto& r = rep.value();

            std::string base_csv = args.out_prefix + "_baseline.csv";
            std::string enab_csv = args.out_prefix + "_enabled.csv";
            std::string summary = args.out_prefix + "_summary.json";
            if (!write_file(base_csv, swarm::metrics_csv(r.baseline_runs)) ||
                !write_file(enab_csv, swarm::metrics_csv(r.enabled_runs)) ||
                !write_file(summary, swarm::aggregate_json(r) + "\n"))
                return fail_runtime("cannot write output files");

            std::printf("runs %u  steps %u  seed %llu\n", cfg.runs, cfg.steps,
                        static_cast<unsigned long long>(cfg.seed));
            std::snprintf(buf, sizeof buf,
                          "deliveries  baseline %.2f  enabled %.2f  diff %+.2f  ci95 [%.2f, %.2f]  "
                          "directional %s\n",
                          r.mean_deliveries_baseline, r.mean_deliveries_enabled,
                          r.deliveries_diff.mean, r.deliveries_diff.lo, r.deliveries_diff.hi,
                          r.deliveries_directional ? "yes" : "no");
            std::fputs(buf, stdout);
            std::snprintf(buf, sizeof buf,
                          "stalled     baseline %.2f  enabled %.2f  diff %+.2f  ci95 [%.2f, %.2f]  "
                          "directional %s\n",
                          r.mean_stalled_baseline, r.mean_stalled_enabled, r.stalled_diff.mean,
                          r.stalled_diff.lo, r.stalled_diff.hi,
                          r.stalled_directional ? "yes" : "no");
            std::fputs(buf, stdout);
            std::printf("wrote %s %s %s\n", base_csv.c_str(), enab_csv.c_str(), summary.c_str());
            return kExitOk;
        }

        cfg.mode = args.mode == "enabled" ? swarm::SimMode::Enabled : swarm::SimMode::Baseline;
        std::vector<swarm::Metrics> all;
        double mean_deliveries = 0, mean_stalled = 0, mean_energy = 0;
        for (std::uint32_t r = 0; r < cfg.runs; ++r) {
            swarm::SimConfig c = cfg;
            c.seed = derive_seed(cfg.seed, 1000 + r); // same per-run seeds as mode=both
            auto m = swarm::run(c);
            if (!m.ok()) return fail_usage(m.error().detail);
            for (auto& row : m.value().rows) row.run = r;
            const auto& last = m.value().final_row();
            mean_deliveries += static_cast<double>(last.total_deliveries);
            mean_stalled += last.stalled;
            mean_energy += static_cast<double>(last.swarm_energy);
            all.push_back(m.take());
        }
        mean_deliveries /= cfg.runs;
        mean_stalled /= cfg.runs;
        mean_energy /= cfg.runs;

        std::string csv_path = args.out_prefix + "_" + args.mode + ".csv";
        std::string summary = args.out_prefix + "_summary.json";
        nlohmann::ordered_json j;
        j["mode"] = args.mode;
        j["runs"] = cfg.runs;
        j["steps"] = cfg.steps;
        j["seed"] = cfg.seed;
        j["final"] = {{"mean_deliveries", mean_deliveries},
                      {"mean_stalled", mean_stalled},
                      {"mean_swarm_energy", mean_energy}};
        if (!write_file(csv_path, swarm::metrics_csv(all)) ||
            !write_file(summary, j.dump(2) + "\n"))
            return fail_runtime("cannot write output files");

        std::printf("runs %u  steps %u  seed %llu  mode %s\n", cfg.runs, cfg.steps,
                    static_cast<unsigned long long>(cfg.seed), args.mode.c_str());
        std::snprintf(buf, sizeof buf, "deliveries %.2f  stalled %.2f  swarm_energy %.2f\n",
                      mean_deliveries, mean_stalled, mean_energy);
        std::fputs(buf, stdout);
        std::printf("wrote %s %s\n", csv_path.c_str(), summary.c_str());
        return kExitOk;
    } catch (const std::exception& e) {
        return fail_runtime(e.what());
    }
}

// ------------------------------------------------------------------- bench

struct Stats {
    double mean_ms = 0;
    double stddev_ms = 0;
};

Stats stats_of(const std::vector<double>& samples) {
    Stats s;
    for (double v : samples) s.mean_ms += v;
    s.mean_ms /= static_cast<double>(samples.size());
    if (samples.size() > 1) {
        double acc = 0;
        for (double v : samples) acc += (v - s.mean_ms) * (v - s.mean_ms);
        s.stddev_ms = std::sqrt(acc / static_cast<double>(samples.size() - 1));
    }
    return s;
}

template <typename F>
Stats time_loop(std::uint64_t iterations, F&& body) {
    std::vector<double> samples;
    samples.reserve(iterations);
    for (std::uint64_t i = 0; i < iterations; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        body(i);
        auto t1 = std::chrono::steady_clock::now();
        samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return stats_of(samples);
}

int cmd_bench(std::uint64_t iterations) {
    if (iterations == 0) return fail_usage("--iterations must be at least 1");

    Rng rng(1234);
    auto kp = identity::generate_keypair(rng.bytes<32>());
    auto peer = identity::generate_keypair(rng.bytes<32>());
    if (!kp.ok() || !peer.ok()) return fail_runtime("keypair setup failed");
    auto sender = identity::derive_address(kp.value().public_key());
    auto receiver = identity::derive_address(peer.value().public_key());
    auto xid = rng.bytes<16>();

    auto make_tx = [&](std::uint64_t i) {
        return channel::build_offchain_tx(xid, i + 1, sender, receiver, i + 1,
                                          channel::ValueKind::EnergyUnits);
    };

    volatile bool sink = false; // keeps the verify loop from being optimized out
    Stats sign_stats = time_loop(iterations, [&](std::uint64_t i) {
        auto tx = make_tx(i);
        auto stx = channel::sign_offchain_tx(kp.value(), tx.value());
        sink = sink ^ stx.ok();
    });

    std::vector<channel::SignedOffChainTx> signed_txs;
    signed_txs.reserve(iterations);
    for (std::uint64_t i = 0; i < iterations; ++i)
        signed_txs.push_back(channel::sign_offchain_tx(kp.value(), make_tx(i).value()).take());
    Stats verify_stats = time_loop(iterations, [&](std::uint64_t i) {
        auto ok = channel::check_offchain_tx(signed_txs[i], kp.value().public_key(), i + 1);
        sink = sink ^ ok.ok();
    });

    Multiaddr maddr;
    maddr.segments = {{"ip4", "127.0.0.1"}, {"tcp", "10333"}};
    std::size_t doc_size = 0;
    Stats doc_stats = time_loop(iterations, [&](std::uint64_t) {
        auto k = identity::generate_keypair(rng.bytes<32>());
        auto did = identity::create_did(identity::derive_address(k.value().public_key()));
        auto doc = identity::build_did_document(did, k.value(), maddr, 1);
        doc_size = doc.value().canonical_bytes().size();
        sink = sink ^ doc.ok();
    });

    auto sample_tx = channel::sign_offchain_tx(kp.value(), make_tx(0).value()).take();
    std::size_t tx_size = sample_tx.wire_bytes().size();

    std::printf("bench iterations: %llu\n", static_cast<unsigned long long>(iterations));
    std::printf("TxSign            mean %.4f ms   stddev %.4f ms\n", sign_stats.mean_ms,
                sign_stats.stddev_ms);
    std::printf("TxVerify          mean %.4f ms   stddev %.4f ms\n", verify_stats.mean_ms,
                verify_stats.stddev_ms);
    std::printf("DidDocGen         mean %.4f ms   stddev %.4f ms\n", doc_stats.mean_ms,
                doc_stats.stddev_ms);
    std::printf("DidDocument       size %zu bytes   (reference 563)\n", doc_size);
    std::printf("SignedOffChainTx  size %zu bytes   (reference 480)\n", tx_size);
    return kExitOk;
}

// -------------------------------------------------------------- demo-trade

struct DemoBalances {
    std::int64_t seller_credit = 0;
    std::uint64_t seller_energy = 0;
    std::int64_t buyer_credit = 0;
    std::uint64_t buyer_energy = 0;
    bool operator==(const DemoBalances&) const = default;
};

// Scenario fixture: both accounts start at credit 10, energy 10; price 2,
// honesty bonus 1, fraud penalty 5.
constexpr std::int64_t kDemoCredit = 10;
constexpr std::uint64_t kDemoEnergy = 10;
constexpr std::int64_t kDemoPrice = 2;

trade::RobotContext enroll_demo_robot(ledger::Ledger& chain, bus::MessageBus& net, Rng& rng,
                                      const KeyPair& issuer_kp, const Did& issuer_did,
                                      std::uint32_t index) {
    trade::RobotContext ctx;
    for (;;) {
        auto kp = identity::generate_keypair(rng.bytes<32>());
        if (kp.ok()) {
            ctx.keypair = kp.take();
            break;
        }
    }
    ctx.did = identity::create_did(identity::derive_address(ctx.keypair.public_key()));
    ctx.policy.unit_price = kDemoPrice;

    Multiaddr maddr;
    maddr.segments = {{"ip4", "127.0.0." + std::to_string(index + 1)},
                      {"tcp", std::to_string(10333 + index)}};
    auto doc = identity::build_did_document(ctx.did, ctx.keypair, maddr, chain.height());
    auto rc = chain.submit_tx(ledger::sign_onchain_tx(
        ctx.keypair, ledger::TxKind::RegisterDid,
        ledger::register_did_payload(doc.value(), maddr)));
    if (!rc.ok()) throw std::logic_error("demo registration failed: " + rc.result.error().detail);
    net.subscribe(ctx.did);

    auto cred = vc::issue_vc(issuer_kp, issuer_did, ctx.did,
                             {{"device_class", "delivery_rover"},
                              {"end_of_life", "2031-12-31"},
                              {"operator", "fleet-7"}},
                             chain.height());
    if (!cred.ok()) throw std::logic_error("demo credential issuance failed");
    ctx.credential = cred.take();
    return ctx;
}

// Same enrollment minus the credential, for the robot that issues them.
trade::RobotContext enroll_demo_issuer(ledger::Ledger& chain, bus::MessageBus& net, Rng& rng) {
    trade::RobotContext ctx;
    for (;;) {
        auto kp = identity::generate_keypair(rng.bytes<32>());
        if (kp.ok()) {
            ctx.keypair = kp.take();
            break;
        }
    }
    ctx.did = identity::create_did(identity::derive_address(ctx.keypair.public_key()));
    Multiaddr maddr;
    maddr.segments = {{"ip4", "127.0.0.250"}, {"tcp", "10001"}};
    auto doc = identity::build_did_document(ctx.did, ctx.keypair, maddr, chain.height());
    auto rc = chain.submit_tx(ledger::sign_onchain_tx(
        ctx.keypair, ledger::TxKind::RegisterDid,
        ledger::register_did_payload(doc.value(), maddr)));
    if (!rc.ok()) throw std::logic_error("issuer registration failed: " + rc.result.error().detail);
    net.subscribe(ctx.did);
    return ctx;
}

int cmd_demo_trade(const std::string& scenario, std::uint64_t units, std::uint64_t seed) {
    trade::AdversaryScript script;
    std::uint64_t trade_units = units;
    if (scenario == "honest") {
        // script stays empty
    } else if (scenario == "buyer-withholds") {
        script = trade::parse_scenario("buyer withhold 6").take();
        trade_units = 5;
    } else if (scenario == "seller-stale-close") {
        script = trade::parse_scenario("seller stale-close 2").take();
        trade_units = 5;
    } else if (scenario == "peer-offline") {
        script = trade::parse_scenario("buyer offline 6").take();
        trade_units = 5;
    } else {
        return fail_usage("unknown scenario '" + scenario +
                          "' (expected honest, buyer-withholds, seller-stale-close, peer-offline)");
    }
    if (scenario == "honest" && (trade_units < 1 || trade_units > 5))
        return fail_usage("--units must be in [1, 5] so the buyer can cover the bill");

    try {
        Rng rng(seed);
        KeyPair genesis;
        for (;;) {
            auto kp = identity::generate_keypair(rng.bytes<32>());
            if (kp.ok()) {
                genesis = kp.take();
                break;
            }
        }
        ledger::LedgerConfig lc;
        lc.initial_credit = kDemoCredit;
        lc.initial_energy = kDemoEnergy;
        lc.genesis_authority = genesis.public_key();
        ledger::Ledger chain(lc);
        bus::MessageBus net(derive_seed(seed, 1));

        trade::RobotContext issuer = enroll_demo_issuer(chain, net, rng);
        auto promote = chain.submit_tx(ledger::sign_onchain_tx(
            genesis, ledger::TxKind::AddIssuer, ledger::add_issuer_payload(issuer.did)));
        if (!promote.ok()) return fail_runtime("issuer promotion failed");

        trade::RobotContext buyer =
            enroll_demo_robot(chain, net, rng, issuer.keypair, issuer.did, 1);
        trade::RobotContext seller =
            enroll_demo_robot(chain, net, rng, issuer.keypair, issuer.did, 2);
        seller.offer_units = trade_units;
        chain.advance_block(1);

        std::printf("scenario: %s   units: %llu   seed: %llu\n", scenario.c_str(),
                    static_cast<unsigned long long>(trade_units),
                    static_cast<unsigned long long>(seed));
        std::printf("buyer  %s\n", buyer.did.render().c_str());
        std::printf("seller %s\n", seller.did.render().c_str());

        std::vector<trade::RobotContext*> responders = {&seller};
        auto candidates = trade::discover(buyer, responders, net, chain, rng);
        std::printf("discovery: %zu verified candidate(s)\n", candidates.size());
        auto chosen = trade::select_seller(candidates);
        if (!chosen.ok()) return fail_runtime("discovery produced no usable seller");
        std::printf("selected:  %s (credit %lld, offers %llu units)\n",
                    chosen.value().did.render().c_str(),
                    static_cast<long long>(chosen.value().credit_score),
                    static_cast<unsigned long long>(chosen.value().offered_units));

        auto result = trade::run_trade(buyer, seller, trade_units, chain, net, rng, script);
        for (const auto& line : result.transcript) std::printf("  %s\n", line.c_str());

        auto ba = chain.account(buyer.address());
        auto sa = chain.account(seller.address());
        if (!ba || !sa) return fail_runtime("accounts vanished");
        DemoBalances got{sa->credit_score, sa->energy_level, ba->credit_score, ba->energy_level};

        DemoBalances want;
        const std::int64_t u = static_cast<std::int64_t>(trade_units);
        if (scenario == "honest") {
            want = {kDemoCredit + u * kDemoPrice + 1, kDemoEnergy - trade_units,
                    kDemoCredit - u * kDemoPrice + 1, kDemoEnergy + trade_units};
        } else if (scenario == "buyer-withholds" || scenario == "peer-offline") {
            // Buyer vanishes at message 6: last complete iteration is 2.
            want = {kDemoCredit + 2 * kDemoPrice + 1, kDemoEnergy - 2,
                    kDemoCredit - 2 * kDemoPrice + 1, kDemoEnergy + 2};
        } else { // seller-stale-close: challenge wins, seller pays the penalty
            want = {kDemoCredit + u * kDemoPrice - 5, kDemoEnergy - trade_units,
                    kDemoCredit - u * kDemoPrice + 1, kDemoEnergy + trade_units};
        }

        std::printf("final balances   (credit, energy)\n");
        std::printf("  seller  (%lld, %llu)   expected (%lld, %llu)\n",
                    static_cast<long long>(got.seller_credit),
                    static_cast<unsigned long long>(got.seller_energy),
                    static_cast<long long>(want.seller_credit),
                    static_cast<unsigned long long>(want.seller_energy));
        std::printf("  buyer   (%lld, %llu)   expected (%lld, %llu)\n",
                    static_cast<long long>(got.buyer_credit),
                    static_cast<unsigned long long>(got.buyer_energy),
                    static_cast<long long>(want.buyer_credit),
                    static_cast<unsigned long long>(want.buyer_energy));
        if (got == want) {
            std::printf("balances match\n");
            return kExitOk;
        }
        std::printf("balance mismatch\n");
        return kExitRuntime;
    } catch (const std::exception& e) {
        return fail_runtime(e.what());
    }
}

// ------------------------------------------------------------------ keygen

int cmd_keygen(const std::string& out_dir, const std::string& name, std::uint64_t seed,
               bool seed_set, bool force) {
    identity::Seed key_seed{};
    if (seed_set) {
        key_seed = Rng(seed).bytes<32>();
    } else if (const char* env = std::getenv("ROBOCOMM_SEED")) {
        auto n = parse_u64(env);
        if (!n) return fail_usage("ROBOCOMM_SEED is not a decimal integer");
        key_seed = Rng(*n).bytes<32>();
    } else {
        std::random_device rd;
        for (std::size_t i = 0; i < key_seed.size(); i += 4) {
            unsigned int w = rd();
            for (std::size_t k = 0; k < 4 && i + k < key_seed.size(); ++k)
                key_seed[i + k] = static_cast<std::uint8_t>(w >> (8 * k));
        }
    }

    auto kp = identity::generate_keypair(key_seed);
    if (!kp.ok()) return fail_runtime("keypair generation failed: " + kp.error().detail);
    auto did = identity::create_did(identity::derive_address(kp.value().public_key()));
    Multiaddr maddr;
    maddr.segments = {{"ip4", "127.0.0.1"}, {"tcp", "10333"}};
    auto doc = identity::build_did_document(did, kp.value(), maddr, 0);
    if (!doc.ok()) return fail_runtime("document build failed: " + doc.error().detail);

    std::string key_path = out_dir + "/" + name + ".key";
    std::string did_path = out_dir + "/" + name + ".did";
    std::string doc_path = out_dir + "/" + name + ".did.json";
    if (!force) {
        for (const auto& p : {key_path, did_path, doc_path}) {
            struct stat st {};
            if (::stat(p.c_str(), &st) == 0)
                return fail_runtime(p + " exists; pass --force to overwrite");
        }
    }

    // The seed alone regenerates the keypair; it never touches world-readable
    // storage.
    int fd = ::open(key_path.c_str(), O_CREAT | O_WRONLY | O_TRUNC, 0600);
    if (fd < 0) return fail_runtime("cannot open " + key_path);
    std::string key_hex = to_hex(key_seed) + "\n";
    ssize_t wrote = ::write(fd, key_hex.data(), key_hex.size());
    ::fchmod(fd, 0600); // O_CREAT leaves prior modes alone when overwriting
    ::close(fd);
    if (wrote != static_cast<ssize_t>(key_hex.size()))
        return fail_runtime("short write to " + key_path);

    if (!write_file(did_path, did.render() + "\n") ||
        !write_file(doc_path, doc.value().to_json() + "\n"))
        return fail_runtime("cannot write DID files");

    std::printf("%s\n", did.render().c_str());
    std::printf("wrote %s %s %s\n", key_path.c_str(), did_path.c_str(), doc_path.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RoboComm: DID-authenticated pay-per-unit energy trading for robot swarms"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run the swarm delivery experiment");
    simulate->add_option("--config", sim.config_path, "key=value config file");
    simulate->add_option("--mode", sim.mode, "both, baseline, or enabled")
        ->check(CLI::IsMember({"both", "baseline", "enabled"}))
        ->capture_default_str();
    auto* runs_opt = simulate->add_option("--runs", sim.runs, "number of paired runs");
    auto* steps_opt = simulate->add_option("--steps", sim.steps, "steps per run");
    auto* seed_opt = simulate->add_option("--seed", sim.seed, "master seed");
    simulate->add_option("--out", sim.out_prefix, "output file prefix")->capture_default_str();

    std::uint64_t bench_iterations = 1000;
    auto* bench = app.add_subcommand("bench", "Micro-benchmarks: sign, verify, DID doc generation");
    bench->add_option("--iterations", bench_iterations, "samples per benchmark")
        ->capture_default_str();

    std::string scenario;
    std::uint64_t demo_units = 3;
    std::uint64_t demo_seed = 7;
    auto* demo = app.add_subcommand("demo-trade", "Scripted two-robot trade with transcript");
    demo->add_option("scenario", scenario,
                     "honest, buyer-withholds, seller-stale-close, or peer-offline")
        ->required();
    demo->add_option("--units", demo_units, "energy units (honest scenario only, 1..5)")
        ->capture_default_str();
    demo->add_option("--seed", demo_seed, "scenario seed")->capture_default_str();

    std::string keygen_dir = ".";
    std::string keygen_name = "robot";
    std::uint64_t keygen_seed = 0;
    bool keygen_force = false;
    auto* keygen = app.add_subcommand("keygen", "Generate a keypair, DID, and DID document");
    keygen->add_option("--out", keygen_dir, "output directory")->capture_default_str();
    keygen->add_option("--name", keygen_name, "file name stem")->capture_default_str();
    auto* kg_seed_opt = keygen->add_option("--seed", keygen_seed, "deterministic seed");
    keygen->add_flag("--force", keygen_force, "overwrite existing files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (app.got_subcommand(simulate)) {
        sim.runs_set = runs_opt->count() > 0;
        sim.steps_set = steps_opt->count() > 0;
        sim.seed_set = seed_opt->count() > 0;
        return cmd_simulate(sim);
    }
    if (app.got_subcommand(bench)) return cmd_bench(bench_iterations);
    if (app.got_subcommand(demo)) return cmd_demo_trade(scenario, demo_units, demo_seed);
    if (app.got_subcommand(keygen))
        return cmd_keygen(keygen_dir, keygen_name, keygen_seed, kg_seed_opt->count() > 0,
                          keygen_force);
    return kExitUsage;
}
