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

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "robocomm/bus.hpp"
#include "robocomm/channel.hpp"
#include "robocomm/credentials.hpp"
#include "robocomm/identity.hpp"
#include "robocomm/ledger.hpp"
#include "robocomm/rng.hpp"
#include "robocomm/trade.hpp"

namespace robocomm::testkit {

using identity::Did;
using identity::KeyPair;
using identity::Multiaddr;

inline KeyPair make_keypair(Rng& rng) {
    for (;;) {
        auto kp = identity::generate_keypair(rng.bytes<32>());
        if (kp.ok()) return kp.take();
    }
}

inline Multiaddr make_multiaddr(std::uint32_t index) {
    Multiaddr m;
    m.segments = {{"ip4", "10.42.0." + std::to_string(index + 1)},
                  {"tcp", std::to_string(10333 + index)}};
    return m;
}

inline trade::RobotContext make_context(Rng& rng) {
    trade::RobotContext ctx;
    ctx.keypair = make_keypair(rng);
    ctx.did = identity::create_did(identity::derive_address(ctx.keypair.public_key()));
    return ctx;
}

inline void register_context(ledger::Ledger& chain, const trade::RobotContext& ctx,
                             std::uint32_t index) {
    auto maddr = make_multiaddr(index);
    auto doc = identity::build_did_document(ctx.did, ctx.keypair, maddr, chain.height());
    if (!doc.ok()) throw std::runtime_error("fixture: document build failed");
    auto rc = chain.submit_tx(ledger::sign_onchain_tx(
        ctx.keypair, ledger::TxKind::RegisterDid,
        ledger::register_did_payload(doc.value(), maddr)));
    if (!rc.ok()) throw std::runtime_error("fixture: registration failed: " +
                                           std::string(to_string(rc.result.error().code)));
}

// A chain with a genesis authority, one trusted issuer, and n credentialed,
// registered robots wired onto one message bus.
struct Fixture {
    Rng rng;
    KeyPair genesis;
    std::unique_ptr<ledger::Ledger> chain;
    std::unique_ptr<bus::MessageBus> net;
    trade::RobotContext issuer;
    std::vector<trade::RobotContext> robots;

    explicit Fixture(std::size_t n_robots, ledger::LedgerConfig cfg = {},
                     std::uint64_t seed = 7)
        : rng(seed), genesis(make_keypair(rng)) {
        cfg.genesis_authority = genesis.public_key();
        chain = std::make_unique<ledger::Ledger>(cfg);
        net = std::make_unique<bus::MessageBus>(derive_seed(seed, 17));

        issuer = make_context(rng);
        register_context(*chain, issuer, 250);
        net->subscribe(issuer.did);
        auto promote = chain->submit_tx(ledger::sign_onchain_tx(
            genesis, ledger::TxKind::AddIssuer, ledger::add_issuer_payload(issuer.did)));
        if (!promote.ok()) throw std::runtime_error("fixture: issuer promotion failed");

        for (std::size_t i = 0; i < n_robots; ++i) {
            auto ctx = make_context(rng);
            register_context(*chain, ctx, static_cast<std::uint32_t>(i));
            net->subscribe(ctx.did);
            auto cred = vc::issue_vc(issuer.keypair, issuer.did, ctx.did,
                                     {{"device_class", "delivery_rover"},
                                      {"end_of_life", "2031-12-31"},
                                      {"operator", "fleet-7"}},
                                     chain->height());
            if (!cred.ok()) throw std::runtime_error("fixture: credential issuance failed");
            ctx.credential = cred.take();
            robots.push_back(std::move(ctx));
        }
        if (!chain->advance_block(1).ok())
            throw std::runtime_error("fixture: block advance failed");
    }
};

// Fully signed pay-per-unit iteration: energy half from the seller, credit
// half from the buyer, cumulative values k and k*price.
inline channel::OffChainTxPair make_iteration_pair(const channel::ExchangeId& xid,
                                                   const trade::RobotContext& seller,
                                                   const trade::RobotContext& buyer,
                                                   std::uint64_t k, std::uint64_t price) {
    auto energy = channel::build_offchain_tx(xid, k, seller.address(), buyer.address(), k,
                                             channel::ValueKind::EnergyUnits);
    auto credit = channel::build_offchain_tx(xid, k, buyer.address(), seller.address(), k * price,
                                             channel::ValueKind::CreditScore);
    if (!energy.ok() || !credit.ok()) throw std::runtime_error("fixture: pair build failed");
    auto se = channel::sign_offchain_tx(seller.keypair, energy.value());
    auto sc = channel::sign_offchain_tx(buyer.keypair, credit.value());
    if (!se.ok() || !sc.ok()) throw std::runtime_error("fixture: pair sign failed");
    return channel::OffChainTxPair{se.take(), sc.take()};
}

// Confirms a channel from both sides. The exchange id doubles as channel id.
inline void open_channel(ledger::Ledger& chain, const channel::ExchangeId& xid,
                         const trade::RobotContext& a, const trade::RobotContext& b) {
    auto payload = ledger::confirm_channel_payload(xid, a.address(), b.address());
    auto r1 = chain.submit_tx(
        ledger::sign_onchain_tx(a.keypair, ledger::TxKind::ConfirmChannel, payload));
    auto r2 = chain.submit_tx(
        ledger::sign_onchain_tx(b.keypair, ledger::TxKind::ConfirmChannel, payload));
    if (!r1.ok() || !r2.ok()) throw std::runtime_error("fixture: channel open failed");
}

} // namespace robocomm::testkit
