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

#include "helpers.hpp"
#include "oracle.hpp"

using namespace robocomm;
using namespace robocomm::trade;
using namespace robocomm::testkit;

namespace {

struct Balances {
    std::int64_t seller_credit;
    std::uint64_t seller_energy;
    std::int64_t buyer_credit;
    std::uint64_t buyer_energy;
};

Balances read_balances(const Fixture& fx, const RobotContext& seller,
                       const RobotContext& buyer) {
    auto s = fx.chain->account(seller.address()).value();
    auto b = fx.chain->account(buyer.address()).value();
    return {s.credit_score, s.energy_level, b.credit_score, b.energy_level};
}

} // namespace

TEST_CASE("scenario parsing") {
    CHECK(parse_scenario("honest").value().kind == AdversaryScript::Kind::None);

    auto w = parse_scenario("buyer withhold 6");
    REQUIRE(w.ok());
    CHECK(w.value().kind == AdversaryScript::Kind::WithholdAtMessage);
    CHECK(w.value().party == channel::Role::Buyer);
    CHECK(w.value().at_message == 6);

    auto s = parse_scenario("seller stale-close 2");
    REQUIRE(s.ok());
    CHECK(s.value().kind == AdversaryScript::Kind::StaleClose);
    CHECK(s.value().party == channel::Role::Seller);
    CHECK(s.value().stale_iteration == 2);

    CHECK(parse_scenario("seller offline 3").value().kind ==
          AdversaryScript::Kind::OfflineAtMessage);
    CHECK(parse_scenario("buyer replay 4").value().kind ==
          AdversaryScript::Kind::ReplayAtMessage);
    CHECK(parse_scenario("buyer forge 2").value().kind == AdversaryScript::Kind::ForgeAtMessage);

    CHECK(parse_scenario("").code() == Err::BadScenario);
    CHECK(parse_scenario("buyer juggle 3").code() == Err::BadScenario);
    CHECK(parse_scenario("nobody withhold 3").code() == Err::BadScenario);
    CHECK(parse_scenario("buyer withhold").code() == Err::BadScenario);
    CHECK(parse_scenario("buyer withhold x").code() == Err::BadScenario);
}

TEST_CASE("discovery returns verified sellers with their ledger standing") {
    Fixture fx(3);
    auto& buyer = fx.robots[0];
    fx.robots[1].offer_units = 5;
    fx.robots[2].offer_units = 8;

    std::vector<RobotContext*> responders = {&fx.robots[0], &fx.robots[1], &fx.robots[2]};
    auto found = discover(buyer, responders, *fx.net, *fx.chain, fx.rng);
    REQUIRE(found.size() == 2);
    for (const auto& c : found) {
        CHECK(c.credit_score == 10);
        CHECK((c.did == fx.robots[1].did || c.did == fx.robots[2].did));
        CHECK(c.offered_units == (c.did == fx.robots[1].did ? 5 : 8));
        CHECK_FALSE(c.multiaddr.render().empty());
    }
}

TEST_CASE("discovery filters out empty offers, revoked peers, and blacklists") {
    Fixture fx(4);
    auto& buyer = fx.robots[0];
    fx.robots[1].offer_units = 5;
    fx.robots[2].offer_units = 5;
    fx.robots[3].offer_units = 0;  // nothing to sell

    // robot 2 is revoked after credential issuance
    REQUIRE(fx.chain
                ->submit_tx(ledger::sign_onchain_tx(
                    fx.robots[2].keypair, ledger::TxKind::RevokeDid,
                    ledger::revoke_did_payload(fx.robots[2].did)))
                .ok());

    std::vector<RobotContext*> responders = {&fx.robots[1], &fx.robots[2], &fx.robots[3]};
    auto found = discover(buyer, responders, *fx.net, *fx.chain, fx.rng);
    REQUIRE(found.size() == 1);
    CHECK(found[0].did == fx.robots[1].did);

    SUBCASE("buyer-side blacklist") {
        buyer.policy.blacklist.insert(fx.robots[1].address());
        auto none = discover(buyer, responders, *fx.net, *fx.chain, fx.rng);
        CHECK(none.empty());
    }
    SUBCASE("seller-side blacklist") {
        fx.robots[1].policy.blacklist.insert(buyer.address());
        auto none = discover(buyer, responders, *fx.net, *fx.chain, fx.rng);
        CHECK(none.empty());
    }
}

TEST_CASE("seller selection maximizes credit and breaks ties by address") {
    identity::Address lo{}, hi{};
    lo.bytes[19] = 1;
    hi.bytes[19] = 2;
    SellerCandidate a{identity::create_did(lo), 10, {}, 5};
    SellerCandidate b{identity::create_did(hi), 10, {}, 9};
    SellerCandidate c{identity::create_did(hi), 12, {}, 1};

    CHECK(select_seller({}).code() == Err::EmptyCandidates);
    CHECK(select_seller({b}).value().did == b.did);
    // tie: lower address wins regardless of order
    CHECK(select_seller({a, b}).value().did == a.did);
    CHECK(select_seller({b, a}).value().did == a.did);
    // higher credit beats lower address
    CHECK(select_seller({a, b, c}).value().did == c.did);
    CHECK(select_seller({c, a, b}).value().did == c.did);
}

TEST_CASE("honest trades settle cooperatively at every unit count") {
    for (std::uint64_t u : {1ull, 3ull, 5ull}) {
        CAPTURE(u);
        Fixture fx(2);
        auto& seller = fx.robots[0];
        auto& buyer = fx.robots[1];
        auto res = run_trade(buyer, seller, u, *fx.chain, *fx.net, fx.rng);

        CHECK(res.buyer.closure == Closure::Cooperative);
        CHECK(res.seller.closure == Closure::Cooperative);
        CHECK_FALSE(res.buyer.peer_at_fault);
        CHECK_FALSE(res.seller.peer_at_fault);
        CHECK(res.buyer.units_transferred == u);
        CHECK(res.buyer.credits_transferred == u * 2);
        CHECK(res.buyer.units_delivered == u);
        // liveness: every half delivered, exactly three chain txs
        CHECK(res.offchain_messages == 2 * u);
        CHECK(res.onchain_txs == 3);
        CHECK(res.buyer.counterparty == seller.did);
        CHECK(res.seller.counterparty == buyer.did);

        auto bal = read_balances(fx, seller, buyer);
        CHECK(bal.seller_credit == 10 + static_cast<std::int64_t>(2 * u) + 1);
        CHECK(bal.seller_energy == 50 - u);
        CHECK(bal.buyer_credit == 10 - static_cast<std::int64_t>(2 * u) + 1);
        CHECK(bal.buyer_energy == 50 + u);
    }
}

TEST_CASE("a zero-unit trade closes clean with only the bonus") {
    Fixture fx(2);
    auto& seller = fx.robots[0];
    auto& buyer = fx.robots[1];
    auto res = run_trade(buyer, seller, 0, *fx.chain, *fx.net, fx.rng);

    CHECK(res.buyer.closure == Closure::Cooperative);
    CHECK(res.offchain_messages == 0);
    CHECK(res.onchain_txs == 3);
    CHECK(res.buyer.units_transferred == 0);
    auto bal = read_balances(fx, seller, buyer);
    CHECK(bal.seller_credit == 11);
    CHECK(bal.buyer_credit == 11);
    CHECK(bal.seller_energy == 50);
    CHECK(bal.buyer_energy == 50);
}

TEST_CASE("requested units are clamped to both policies") {
    Fixture fx(2);
    auto& seller = fx.robots[0];
    auto& buyer = fx.robots[1];
    seller.policy.max_units = 2;
    auto res = run_trade(buyer, seller, 40, *fx.chain, *fx.net, fx.rng);
    CHECK(res.buyer.closure == Closure::Cooperative);
    CHECK(res.buyer.units_transferred == 2);
}

TEST_CASE("a buyer that stops paying costs the seller at most one unit") {
    Fixture fx(2);
    auto& seller = fx.robots[0];
    auto& buyer = fx.robots[1];
    // buyer goes silent instead of paying for the third unit
    auto res = run_trade(buyer, seller, 5, *fx.chain, *fx.net, fx.rng,
                         parse_scenario("buyer withhold 6").value());

    CHECK(res.buyer.closure == Closure::UnilateralTimeout);
    CHECK(res.seller.closure == Closure::UnilateralTimeout);
    CHECK(res.seller.peer_at_fault);
    CHECK_FALSE(res.buyer.peer_at_fault);
    CHECK(res.buyer.units_transferred == 2);   // last fully paid iteration
    CHECK(res.buyer.credits_transferred == 4);
    CHECK(res.buyer.units_delivered == 3);     // one unit went out unpaid
    CHECK(res.buyer.units_delivered - res.buyer.units_transferred <= 1);
    CHECK(res.offchain_messages == 5);
    // two confirms, the unilateral close, the finalize
    CHECK(res.onchain_txs == 4);

    auto bal = read_balances(fx, seller, buyer);
    CHECK(bal.seller_credit == 15);
    CHECK(bal.seller_energy == 48);
    CHECK(bal.buyer_credit == 7);
    CHECK(bal.buyer_energy == 52);
}

TEST_CASE("a peer that drops off the network is closed out the same way") {
    Fixture fx(2);
    auto& seller = fx.robots[0];
    auto& buyer = fx.robots[1];
    auto res = run_trade(buyer, seller, 5, *fx.chain, *fx.net, fx.rng,
                         parse_scenario("buyer offline 6").value());

    CHECK(res.buyer.closure == Closure::UnilateralTimeout);
    CHECK(res.seller.peer_at_fault);
    CHECK(res.buyer.units_transferred == 2);
    CHECK(res.buyer.units_delivered == 3);
    auto bal = read_balances(fx, seller, buyer);
    CHECK(bal.seller_credit == 15);
    CHECK(bal.seller_energy == 48);
    CHECK(bal.buyer_credit == 7);
    CHECK(bal.buyer_energy == 52);

    // the bus is usable again afterwards
    auto again = run_trade(buyer, seller, 1, *fx.chain, *fx.net, fx.rng);
    CHECK(again.buyer.closure == Closure::Cooperative);
}

TEST_CASE("a replayed stale tx is rejected and the victim closes") {
    Fixture fx(2);
    auto& seller = fx.robots[0];
    auto& buyer = fx.robots[1];
    // seller re-sends its iteration-1 energy tx instead of iteration 2
    auto res = run_trade(buyer, seller, 4, *fx.chain, *fx.net, fx.rng,
                         parse_scenario("seller replay 3").value());

    CHECK(res.buyer.closure == Closure::UnilateralTimeout);
    CHECK(res.buyer.peer_at_fault);
    CHECK_FALSE(res.seller.peer_at_fault);
    CHECK(res.buyer.units_transferred == 1);
    CHECK(res.buyer.credits_transferred == 2);
    CHECK(res.buyer.units_delivered == 1);

    auto bal = read_balances(fx, seller, buyer);
    CHECK(bal.seller_credit == 13);
    CHECK(bal.seller_energy == 49);
    CHECK(bal.buyer_credit == 9);
    CHECK(bal.buyer_energy == 51);
}

TEST_CASE("a forged signature on the first message aborts with no transfer") {
    Fixture fx(2);
    auto& seller = fx.robots[0];
    auto& buyer = fx.robots[1];
    auto res = run_trade(buyer, seller, 3, *fx.chain, *fx.net, fx.rng,
                         parse_scenario("seller forge 1").value());

    CHECK(res.buyer.closure == Closure::UnilateralTimeout);
    CHECK(res.buyer.peer_at_fault);
    CHECK(res.buyer.units_transferred == 0);
    CHECK(res.buyer.units_delivered == 0);
    auto bal = read_balances(fx, seller, buyer);
    CHECK(bal.seller_credit == 11);
    CHECK(bal.buyer_credit == 11);
    CHECK(bal.seller_energy == 50);
    CHECK(bal.buyer_energy == 50);
}

TEST_CASE("replay with no history degrades to a forgery") {
    Fixture fx(2);
    auto& seller = fx.robots[0];
    auto& buyer = fx.robots[1];
    auto res = run_trade(buyer, seller, 3, *fx.chain, *fx.net, fx.rng,
                         parse_scenario("seller replay 1").value());
    CHECK(res.buyer.closure == Closure::UnilateralTimeout);
    CHECK(res.buyer.units_transferred == 0);
}

TEST_CASE("a stale close by the seller is disputed and punished") {
    Fixture fx(2);
    auto& seller = fx.robots[0];
    auto& buyer = fx.robots[1];
    auto res = run_trade(buyer, seller, 5, *fx.chain, *fx.net, fx.rng,
                         parse_scenario("seller stale-close 2").value());

    CHECK(res.buyer.closure == Closure::DisputedWon);
    CHECK(res.seller.closure == Closure::DisputedLost);
    CHECK(res.buyer.peer_at_fault);
    CHECK_FALSE(res.seller.peer_at_fault);
    // the dispute recovers the full trade
    CHECK(res.buyer.units_transferred == 5);
    CHECK(res.buyer.credits_transferred == 10);
    CHECK(res.buyer.units_delivered == 5);
    CHECK(res.offchain_messages == 10);
    // confirms, stale close, challenge, finalize
    CHECK(res.onchain_txs == 5);

    auto bal = read_balances(fx, seller, buyer);
    // seller earns the trade but forfeits bonus and pays the fraud penalty
    CHECK(bal.seller_credit == 10 + 10 - 5);
    CHECK(bal.seller_energy == 45);
    CHECK(bal.buyer_credit == 10 - 10 + 1);
    CHECK(bal.buyer_energy == 55);
}

TEST_CASE("a stale close by the buyer hits the credit floor") {
    Fixture fx(2);
    auto& seller = fx.robots[0];
    auto& buyer = fx.robots[1];
    // buyer tries to close with no pair at all after a full 3-unit trade
    auto res = run_trade(buyer, seller, 3, *fx.chain, *fx.net, fx.rng,
                         parse_scenario("buyer stale-close 0").value());

    CHECK(res.buyer.closure == Closure::DisputedLost);
    CHECK(res.seller.closure == Closure::DisputedWon);
    CHECK(res.seller.peer_at_fault);
    CHECK(res.buyer.units_transferred == 3);

    auto bal = read_balances(fx, seller, buyer);
    CHECK(bal.seller_credit == 10 + 6 + 1);
    CHECK(bal.seller_energy == 47);
    // 10 - 6 - 5 clamps at the floor
    CHECK(bal.buyer_credit == 0);
    CHECK(bal.buyer_energy == 53);
}

TEST_CASE("an unpayable cooperative close falls back to seller self-protection") {
    Fixture fx(2);
    auto& seller = fx.robots[0];
    auto& buyer = fx.robots[1];
    // 6 units at price 2 exceeds the buyer's 10 starting credits
    auto res = run_trade(buyer, seller, 6, *fx.chain, *fx.net, fx.rng);

    CHECK(res.buyer.closure == Closure::UnilateralTimeout);
    CHECK(res.seller.closure == Closure::UnilateralTimeout);
    CHECK(res.seller.peer_at_fault);
    CHECK(res.buyer.units_transferred == 6);
    CHECK(res.buyer.credits_transferred == 12);

    auto bal = read_balances(fx, seller, buyer);
    // payment clamps at the buyer's headroom; both still earn the bonus
    CHECK(bal.seller_credit == 10 + 10 + 1);
    CHECK(bal.seller_energy == 44);
    CHECK(bal.buyer_credit == 10 - 10 + 1);
    CHECK(bal.buyer_energy == 56);
}

TEST_CASE("settlements match the reference model across every script") {
    const std::uint64_t price = 2;
    struct Case {
        const char* scenario;
        std::uint64_t units;
        std::uint64_t settled_units;
        bool seller_flagged;
        bool buyer_flagged;
    };
    // on-chain flags only arise from lost disputes; silent failures settle
    // the last signed pair without blame
    const Case cases[] = {
        {"honest", 4, 4, false, false},
        {"buyer withhold 6", 5, 2, false, false},
        {"buyer offline 4", 5, 1, false, false},
        {"seller withhold 5", 5, 2, false, false},
        {"seller forge 3", 4, 1, false, false},
        {"seller stale-close 1", 4, 4, true, false},
        {"buyer stale-close 2", 4, 4, false, true},
    };
    for (const auto& c : cases) {
        CAPTURE(c.scenario);
        Fixture fx(2);
        auto& seller = fx.robots[0];
        auto& buyer = fx.robots[1];
        auto before = read_balances(fx, seller, buyer);
        auto res = run_trade(buyer, seller, c.units, *fx.chain, *fx.net, fx.rng,
                             parse_scenario(c.scenario).value());
        CHECK(res.buyer.units_transferred == c.settled_units);

        auto expect = settle_oracle({before.seller_credit, before.seller_energy},
                                    {before.buyer_credit, before.buyer_energy},
                                    c.settled_units, c.settled_units * price,
                                    c.seller_flagged, c.buyer_flagged);
        auto after = read_balances(fx, seller, buyer);
        CHECK(after.seller_credit == expect.seller.credit);
        CHECK(after.seller_energy == expect.seller.energy);
        CHECK(after.buyer_credit == expect.buyer.credit);
        CHECK(after.buyer_energy == expect.buyer.energy);
    }
}

TEST_CASE("outcome recording blacklists proven and suspected cheaters") {
    Fixture fx(2);
    auto& seller = fx.robots[0];
    auto& buyer = fx.robots[1];

    SUBCASE("cooperative outcomes leave the blacklist alone") {
        auto res = run_trade(buyer, seller, 2, *fx.chain, *fx.net, fx.rng);
        record_outcome(buyer.policy, res.buyer);
        record_outcome(seller.policy, res.seller);
        CHECK(buyer.policy.blacklist.empty());
        CHECK(seller.policy.blacklist.empty());
    }
    SUBCASE("won disputes blacklist the loser") {
        auto res = run_trade(buyer, seller, 3, *fx.chain, *fx.net, fx.rng,
                             parse_scenario("seller stale-close 1").value());
        record_outcome(buyer.policy, res.buyer);
        record_outcome(seller.policy, res.seller);
        CHECK(buyer.policy.blacklist.count(seller.address()) == 1);
        // the cheater does not get to blacklist its victim
        CHECK(seller.policy.blacklist.empty());
    }
    SUBCASE("timeouts blame the silent side") {
        auto res = run_trade(buyer, seller, 3, *fx.chain, *fx.net, fx.rng,
                             parse_scenario("buyer withhold 2").value());
        record_outcome(buyer.policy, res.buyer);
        record_outcome(seller.policy, res.seller);
        CHECK(seller.policy.blacklist.count(buyer.address()) == 1);
        CHECK(buyer.policy.blacklist.empty());
    }
}
