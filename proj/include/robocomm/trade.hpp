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
#include <set>
#include <string>
#include <vector>

#include "robocomm/bus.hpp"
#include "robocomm/channel.hpp"
#include "robocomm/credentials.hpp"
#include "robocomm/identity.hpp"
#include "robocomm/ledger.hpp"
#include "robocomm/result.hpp"
#include "robocomm/rng.hpp"

namespace robocomm::trade {

using channel::ExchangeId;
using identity::Did;

struct TradePolicy {
    std::uint64_t unit_price = 2;
    std::uint64_t max_units = 50;
    std::uint64_t delta_timeout = 5;  // blocks of peer silence before unilateral close
    std::set<identity::Address> blacklist;
    // Claims each side must disclose during the discovery handshake.
    std::vector<std::string> required_claims = {"end_of_life", "device_class"};
};

struct RobotContext {
    Did did;
    identity::KeyPair keypair;
    vc::VerifiableCredential credential;
    TradePolicy policy;
    std::uint64_t offer_units = 0;  // energy this robot is willing to sell right now

    const identity::Address& address() const { return did.address; }
};

struct SellerCandidate {
    Did did;
    std::int64_t credit_score = 0;
    identity::Multiaddr multiaddr;
    std::uint64_t offered_units = 0;
};

enum class Closure : std::uint8_t {
    Cooperative = 0,
    UnilateralTimeout = 1,
    DisputedWon = 2,
    DisputedLost = 3,
    Aborted = 4,
};

const char* to_string(Closure c);

struct TradeOutcome {
    ExchangeId exchange_id{};
    std::uint64_t units_transferred = 0;    // settled on the ledger
    std::uint64_t credits_transferred = 0;  // settled on the ledger
    std::uint64_t units_delivered = 0;      // physically handed over pre-settlement
    Closure closure = Closure::Aborted;
    Did counterparty;
    bool peer_at_fault = false;
};

// Injected misbehavior for dispute and loss-bound tests. Message points are
// 1-based over the off-chain sequence: odd = energy half, even = credit half.
struct AdversaryScript {
    enum class Kind : std::uint8_t {
        None = 0,
        WithholdAtMessage = 1,  // skip the scheduled message, stay silent after
        OfflineAtMessage = 2,   // vanish from that point on
        ReplayAtMessage = 3,    // resend a stale tx instead, then go silent
        ForgeAtMessage = 4,     // send a badly signed tx instead, then go silent
        StaleClose = 5,         // finish the trade, then close with an old pair
    };
    Kind kind = Kind::None;
    channel::Role party = channel::Role::Buyer;
    std::uint64_t at_message = 0;
    std::uint64_t stale_iteration = 0;

    bool active() const { return kind != Kind::None; }
};

// Text form: "honest" or "<buyer|seller> <withhold|offline|replay|forge> <msg>"
// or "<buyer|seller> stale-close <iteration>".
Result<AdversaryScript> parse_scenario(std::string_view text);

struct TradeResult {
    TradeOutcome buyer;
    TradeOutcome seller;
    std::vector<std::string> transcript;
    std::uint64_t offchain_messages = 0;  // energy/credit txs actually delivered
    std::uint64_t onchain_txs = 0;        // accepted by the ledger during the trade
};

std::vector<SellerCandidate> discover(RobotContext& buyer,
                                      const std::vector<RobotContext*>& responders,
                                      bus::MessageBus& bus, const ledger::Ledger& ledger,
                                      Rng& rng);

Result<SellerCandidate> select_seller(const std::vector<SellerCandidate>& candidates);

TradeResult run_trade(RobotContext& buyer, RobotContext& seller, std::uint64_t units,
                      ledger::Ledger& ledger, bus::MessageBus& bus, Rng& rng,
                      const AdversaryScript& script = {});

void record_outcome(TradePolicy& policy, const TradeOutcome& outcome);

} // namespace robocomm::trade
