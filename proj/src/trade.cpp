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

#include "robocomm/trade.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>

namespace robocomm::trade {

using channel::LocalChannelState;
using channel::OffChainTxPair;
using channel::Role;
using channel::SignedOffChainTx;
using channel::ValueKind;
using identity::PublicKey;
using ledger::TxKind;

namespace {

std::string short_did(const Did& did) {
    std::string s = did.render();
    return s.substr(0, 15) + "..";
}

Bytes ping_payload(const vc::Nonce& nonce, std::uint64_t units,
                   const std::vector<std::string>& claim_keys) {
    ByteWriter w;
    w.raw(nonce);
    w.u64be(units);
    w.u32be(static_cast<std::uint32_t>(claim_keys.size()));
    for (const auto& k : claim_keys) w.lp(k);
    return w.take();
}

struct PingMsg {
    vc::Nonce nonce{};
    std::uint64_t units = 0;
    std::vector<std::string> claim_keys;
};

Result<PingMsg> parse_ping(ByteSpan bytes) {
    ByteReader r(bytes);
    PingMsg m;
    m.nonce = r.fixed<16>();
    m.units = r.u64be();
    std::uint32_t n = r.u32be();
    for (std::uint32_t i = 0; i < n && !r.failed(); ++i) m.claim_keys.push_back(r.lp_str());
    if (!r.done()) return Error(Err::InvalidField, "bad ping");
    return m;
}

Bytes offer_payload(const vc::Presentation& p, const vc::Nonce& nonce, std::uint64_t units,
                    const std::vector<std::string>& claim_keys) {
    ByteWriter w;
    w.lp(p.canonical_bytes());
    w.raw(nonce);
    w.u64be(units);
    w.u32be(static_cast<std::uint32_t>(claim_keys.size()));
    for (const auto& k : claim_keys) w.lp(k);
    return w.take();
}

struct OfferMsg {
    vc::Presentation presentation;
    vc::Nonce nonce{};
    std::uint64_t units = 0;
    std::vector<std::string> claim_keys;
};

Result<OfferMsg> parse_offer(ByteSpan bytes) {
    ByteReader r(bytes);
    OfferMsg m;
    auto p = vc::decode_presentation(r.lp());
    if (!p.ok()) return p.error();
    m.presentation = p.take();
    m.nonce = r.fixed<16>();
    m.units = r.u64be();
    std::uint32_t n = r.u32be();
    for (std::uint32_t i = 0; i < n && !r.failed(); ++i) m.claim_keys.push_back(r.lp_str());
    if (!r.done()) return Error(Err::InvalidField, "bad offer");
    return m;
}

// Drain until a message of `kind` arrives or the party has sat through
// `patience` silent ticks. Other kinds are discarded as stale chatter.
std::optional<bus::Envelope> drain_wait(bus::MessageBus& bus, const Did& who, std::uint8_t kind,
                                        std::uint64_t patience,
                                        const std::function<void()>& on_wait) {
    std::uint64_t waited = 0;
    for (;;) {
        for (auto& env : bus.drain(who)) {
            if (env.kind == kind) return std::move(env);
        }
        if (waited >= patience) return std::nullopt;
        if (on_wait) on_wait();
        bus.tick();
        ++waited;
    }
}

// Fan-in variant for discovery: several peers may answer in the same window,
// so keep collecting until a full patience window passes with no arrivals.
std::vector<bus::Envelope> drain_wait_all(bus::MessageBus& bus, const Did& who, std::uint8_t kind,
                                          std::uint64_t patience) {
    std::vector<bus::Envelope> out;
    std::uint64_t silent = 0;
    for (;;) {
        bool got = false;
        for (auto& env : bus.drain(who)) {
            if (env.kind != kind) continue;
            out.push_back(std::move(env));
            got = true;
        }
        if (got) {
            silent = 0;
            continue;
        }
        if (silent >= patience) return out;
        bus.tick();
        ++silent;
    }
}

} // namespace

const char* to_string(Closure c) {
    switch (c) {
        case Closure::Cooperative: return "cooperative";
        case Closure::UnilateralTimeout: return "unilateral-timeout";
        case Closure::DisputedWon: return "disputed-won";
        case Closure::DisputedLost: return "disputed-lost";
        case Closure::Aborted: return "aborted";
    }
    return "?";
}

Result<AdversaryScript> parse_scenario(std::string_view text) {
    std::vector<std::string> tok;
    std::string cur;
    for (char c : text) {
        if (c == ' ' || c == '\t') {
            if (!cur.empty()) tok.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tok.push_back(std::move(cur));

    AdversaryScript s;
    if (tok.empty()) return Error(Err::BadScenario, "empty scenario");
    if (tok[0] == "honest") {
        if (tok.size() != 1) return Error(Err::BadScenario, "honest takes no arguments");
        return s;
    }
    if (tok.size() != 3) return Error(Err::BadScenario, "expected: <party> <action> <n>");
    if (tok[0] == "buyer")
        s.party = Role::Buyer;
    else if (tok[0] == "seller")
        s.party = Role::Seller;
    else
        return Error(Err::BadScenario, "party must be buyer or seller");

    std::uint64_t n = 0;
    for (char c : tok[2]) {
        if (c < '0' || c > '9') return Error(Err::BadScenario, "bad number: " + tok[2]);
        n = n * 10 + static_cast<std::uint64_t>(c - '0');
    }

    if (tok[1] == "withhold")
        s.kind = AdversaryScript::Kind::WithholdAtMessage, s.at_message = n;
    else if (tok[1] == "offline")
        s.kind = AdversaryScript::Kind::OfflineAtMessage, s.at_message = n;
    else if (tok[1] == "replay")
        s.kind = AdversaryScript::Kind::ReplayAtMessage, s.at_message = n;
    else if (tok[1] == "forge")
        s.kind = AdversaryScript::Kind::ForgeAtMessage, s.at_message = n;
    else if (tok[1] == "stale-close")
        s.kind = AdversaryScript::Kind::StaleClose, s.stale_iteration = n;
    else
        return Error(Err::BadScenario, "unknown action: " + tok[1]);
    if (s.kind != AdversaryScript::Kind::StaleClose && n == 0)
        return Error(Err::BadScenario, "message index is 1-based");
    return s;
}

std::vector<SellerCandidate> discover(RobotContext& buyer,
                                      const std::vector<RobotContext*>& responders,
                                      bus::MessageBus& bus, const ledger::Ledger& ledger,
                                      Rng& rng) {
    std::vector<SellerCandidate> out;
    const std::uint64_t patience = buyer.policy.delta_timeout;
    vc::Nonce nonce_b = rng.bytes<16>();
    bus.send({buyer.did, std::nullopt, static_cast<std::uint8_t>(bus::MsgKind::BeaconPing),
              ping_payload(nonce_b, buyer.policy.max_units, buyer.policy.required_claims)});

    // Responder side: answer pings with an offer carrying our presentation.
    std::map<identity::Address, vc::Nonce> session_nonce;
    for (RobotContext* r : responders) {
        if (r->address() == buyer.address()) continue;
        auto env = drain_wait(bus, r->did, static_cast<std::uint8_t>(bus::MsgKind::BeaconPing),
                              patience, nullptr);
        if (!env) continue;
        auto ping = parse_ping(env->payload);
        if (!ping.ok()) continue;
        if (r->offer_units == 0) continue;
        if (r->policy.blacklist.count(env->from.address)) continue;
        auto pres = vc::present(r->credential, r->keypair, ping.value().claim_keys,
                                ping.value().nonce);
        if (!pres.ok()) continue;
        vc::Nonce nonce_s = rng.bytes<16>();
        session_nonce[r->address()] = nonce_s;
        bus.send({r->did, env->from, static_cast<std::uint8_t>(bus::MsgKind::BeaconOffer),
                  offer_payload(pres.value(), nonce_s, r->offer_units,
                                r->policy.required_claims)});
    }

    // Buyer side: verify each offer, then prove ourselves back.
    struct PendingCandidate {
        SellerCandidate candidate;
        bool requested = false;
    };
    std::map<identity::Address, PendingCandidate> pending;
    for (auto& env : drain_wait_all(bus, buyer.did,
                                    static_cast<std::uint8_t>(bus::MsgKind::BeaconOffer),
                                    patience)) {
        if (buyer.policy.blacklist.count(env.from.address)) continue;
        auto offer = parse_offer(env.payload);
        if (!offer.ok()) continue;
        const vc::Presentation& p = offer.value().presentation;
        if (!(p.metadata.subject_did == env.from)) continue;
        if (!vc::verify_presentation(p, ledger.issuer_view(), ledger.did_status_view(), nonce_b)
                 .ok())
            continue;
        auto resolved = ledger.resolve_did(env.from);
        if (!resolved.ok() || resolved.value().status != ledger::DidRecordStatus::Active) continue;
        auto bp = vc::present(buyer.credential, buyer.keypair, offer.value().claim_keys,
                              offer.value().nonce);
        if (!bp.ok()) continue;
        ByteWriter w;
        w.lp(bp.value().canonical_bytes());
        bus.send({buyer.did, env.from, static_cast<std::uint8_t>(bus::MsgKind::BeaconRequest),
                  w.take()});
        pending[env.from.address] =
            PendingCandidate{SellerCandidate{env.from, resolved.value().account.credit_score,
                                             resolved.value().multiaddr, offer.value().units},
                             true};
    }

    // Responder side again: mutual verification, then accept.
    for (RobotContext* r : responders) {
        auto nit = session_nonce.find(r->address());
        if (nit == session_nonce.end()) continue;
        auto env = drain_wait(bus, r->did, static_cast<std::uint8_t>(bus::MsgKind::BeaconRequest),
                              patience, nullptr);
        if (!env) continue;
        ByteReader rd(env->payload);
        auto bp = vc::decode_presentation(rd.lp());
        if (!rd.done() || !bp.ok()) continue;
        if (!(bp.value().metadata.subject_did == env->from)) continue;
        if (!vc::verify_presentation(bp.value(), ledger.issuer_view(), ledger.did_status_view(),
                                     nit->second)
                 .ok())
            continue;
        bus.send({r->did, env->from, static_cast<std::uint8_t>(bus::MsgKind::BeaconAccept),
                  Bytes{1}});
    }

    // Buyer: a candidate is final once its accept arrives.
    for (auto& env : drain_wait_all(bus, buyer.did,
                                    static_cast<std::uint8_t>(bus::MsgKind::BeaconAccept),
                                    patience)) {
        auto it = pending.find(env.from.address);
        if (it == pending.end() || !it->second.requested) continue;
        out.push_back(it->second.candidate);
        it->second.requested = false;  // one accept each
    }
    return out;
}

Result<SellerCandidate> select_seller(const std::vector<SellerCandidate>& candidates) {
    if (candidates.empty()) return Error(Err::EmptyCandidates);
    const SellerCandidate* best = &candidates[0];
    for (const auto& c : candidates) {
        if (c.credit_score > best->credit_score ||
            (c.credit_score == best->credit_score && c.did.address < best->did.address))
            best = &c;
    }
    return *best;
}

void record_outcome(TradePolicy& policy, const TradeOutcome& outcome) {
    bool misbehaved = outcome.closure == Closure::DisputedWon ||
                      (outcome.closure == Closure::UnilateralTimeout && outcome.peer_at_fault);
    if (misbehaved) policy.blacklist.insert(outcome.counterparty.address);
}

TradeResult run_trade(RobotContext& buyer, RobotContext& seller, std::uint64_t units,
                      ledger::Ledger& ledger, bus::MessageBus& bus, Rng& rng,
                      const AdversaryScript& script) {
    TradeResult res;
    auto note = [&](std::string s) { res.transcript.push_back(std::move(s)); };
    auto fmt = [](const char* f, auto... a) {
        char buf[256];
        std::snprintf(buf, sizeof buf, f, a...);
        return std::string(buf);
    };

    const std::uint64_t price = seller.policy.unit_price;
    units = std::min({units, buyer.policy.max_units, seller.policy.max_units});

    ExchangeId xid = rng.bytes<16>();
    res.buyer.exchange_id = res.seller.exchange_id = xid;
    res.buyer.counterparty = seller.did;
    res.seller.counterparty = buyer.did;

    auto rb = ledger.resolve_did(buyer.did);
    auto rs = ledger.resolve_did(seller.did);
    if (!rb.ok() || !rs.ok()) {
        note("abort: a party is not registered on the ledger");
        return res;
    }
    const PublicKey buyer_key = rb.value().document.verification_key;
    const PublicKey seller_key = rs.value().document.verification_key;

    LocalChannelState bst = channel::make_channel_state(xid, Role::Buyer, buyer.address(),
                                                        seller.address(), price);
    LocalChannelState sst = channel::make_channel_state(xid, Role::Seller, seller.address(),
                                                        buyer.address(), price);

    auto submit = [&](const identity::KeyPair& kp, TxKind kind, Bytes payload,
                      const char* what) -> Result<void> {
        auto rc = ledger.submit_tx(ledger::sign_onchain_tx(kp, kind, std::move(payload)));
        if (rc.ok()) {
            ++res.onchain_txs;
            note(fmt("chain: %s accepted at height %llu", what,
                     static_cast<unsigned long long>(rc.height)));
        } else {
            note(fmt("chain: %s rejected (%s)", what, to_string(rc.result.code())));
        }
        return rc.result;
    };

    Bytes confirm = ledger::confirm_channel_payload(xid, buyer.address(), seller.address());
    note(fmt("trade: %s buys %llu units from %s at price %llu", short_did(buyer.did).c_str(),
             static_cast<unsigned long long>(units), short_did(seller.did).c_str(),
             static_cast<unsigned long long>(price)));
    if (!submit(buyer.keypair, TxKind::ConfirmChannel, confirm, "buyer channel confirmation").ok() ||
        !submit(seller.keypair, TxKind::ConfirmChannel, confirm, "seller channel confirmation").ok()) {
        note("abort: channel never opened");
        return res;
    }

    struct Stall {
        Role honest;
        bool faulted;
        bool needs_wait;  // true when the honest side has not yet sat out its patience
    };
    std::optional<Stall> stall;
    std::vector<OffChainTxPair> archive;
    std::uint64_t delivered = 0;

    auto advance = [&]() { (void)ledger.advance_block(1); };

    for (std::uint64_t m = 1; m <= 2 * units && !stall; ++m) {
        const bool energy_half = (m % 2 == 1);
        const std::uint64_t k = energy_half ? (m + 1) / 2 : m / 2;
        const Role actor_role = energy_half ? Role::Seller : Role::Buyer;
        RobotContext& actor = energy_half ? seller : buyer;
        RobotContext& other = energy_half ? buyer : seller;
        LocalChannelState& actor_st = energy_half ? sst : bst;
        LocalChannelState& other_st = energy_half ? bst : sst;
        const PublicKey& actor_key = energy_half ? seller_key : buyer_key;
        const Role other_role = energy_half ? Role::Buyer : Role::Seller;
        const char* actor_name = energy_half ? "seller" : "buyer";
        const char* other_name = energy_half ? "buyer" : "seller";
        const ValueKind kind = energy_half ? ValueKind::EnergyUnits : ValueKind::CreditScore;
        const std::uint64_t value = energy_half ? k : k * price;
        const std::uint8_t msg_kind = static_cast<std::uint8_t>(
            energy_half ? bus::MsgKind::EnergyTx : bus::MsgKind::CreditTx);

        const bool defect_here = script.active() &&
                                 script.kind != AdversaryScript::Kind::StaleClose &&
                                 script.party == actor_role && script.at_message == m;

        if (defect_here && (script.kind == AdversaryScript::Kind::WithholdAtMessage ||
                            script.kind == AdversaryScript::Kind::OfflineAtMessage)) {
            if (script.kind == AdversaryScript::Kind::OfflineAtMessage) {
                bus.set_offline(actor.did, true);
                note(fmt("%s goes offline before message %llu", actor_name,
                         static_cast<unsigned long long>(m)));
            } else {
                note(fmt("%s withholds message %llu", actor_name,
                         static_cast<unsigned long long>(m)));
            }
            // The honest side still burns its patience waiting for nothing.
            auto none = drain_wait(bus, other.did, msg_kind, other.policy.delta_timeout, advance);
            (void)none;
            note(fmt("%s heard nothing for %llu blocks", other_name,
                     static_cast<unsigned long long>(other.policy.delta_timeout)));
            stall = Stall{other_role, true, false};
            break;
        }

        SignedOffChainTx stx;
        bool malicious = false;
        if (defect_here && script.kind == AdversaryScript::Kind::ReplayAtMessage &&
            !archive.empty()) {
            stx = energy_half ? archive.back().energy_tx : archive.back().credit_tx;
            malicious = true;
            note(fmt("%s replays its iteration-%llu tx at message %llu", actor_name,
                     static_cast<unsigned long long>(stx.tx.iteration),
                     static_cast<unsigned long long>(m)));
        } else if (defect_here) {  // forge, or a replay with nothing old to replay
            auto tx = channel::build_offchain_tx(xid, k, actor.address(), other.address(), value,
                                                 kind);
            auto signed_tx = channel::sign_offchain_tx(actor.keypair, tx.take());
            stx = signed_tx.take();
            stx.signature.bytes[0] ^= 0x01;
            malicious = true;
            note(fmt("%s sends a forged tx at message %llu", actor_name,
                     static_cast<unsigned long long>(m)));
        } else {
            auto tx = channel::build_offchain_tx(xid, k, actor.address(), other.address(), value,
                                                 kind);
            auto signed_tx = channel::sign_offchain_tx(actor.keypair, tx.take());
            stx = signed_tx.take();
            auto rec = channel::record_outgoing(actor_st, stx);
            if (!rec.ok()) {
                note(fmt("internal: record_outgoing failed (%s)", to_string(rec.code())));
                return res;
            }
            note(fmt("%s -> %s %s tx, iteration %llu, total %llu", actor_name, other_name,
                     energy_half ? "energy" : "credit", static_cast<unsigned long long>(k),
                     static_cast<unsigned long long>(value)));
        }

        bus.send({actor.did, other.did, msg_kind, stx.wire_bytes()});
        auto env = drain_wait(bus, other.did, msg_kind, other.policy.delta_timeout, advance);
        if (!env) {
            note(fmt("%s heard nothing for %llu blocks", other_name,
                     static_cast<unsigned long long>(other.policy.delta_timeout)));
            stall = Stall{other_role, script.active(), false};
            break;
        }
        ++res.offchain_messages;
        auto dec = channel::decode_offchain_tx(env->payload);
        Result<void> applied = dec.ok() ? channel::apply_incoming(other_st, dec.value(), actor_key)
                                        : Result<void>(dec.error());
        if (!applied.ok()) {
            note(fmt("%s rejects incoming tx (%s)", other_name, to_string(applied.code())));
            stall = Stall{other_role, true, true};
            break;
        }
        if (malicious) {  // a replayed old tx somehow accepted; should be unreachable
            note("internal: malicious tx accepted");
            return res;
        }
        if (energy_half) {
            ++delivered;  // the physical unit moves with the energy half
        } else {
            archive.push_back(*other_st.last_pair);
        }
    }

    auto settle_outcomes = [&](std::uint64_t settled_units, std::uint64_t settled_credits,
                               Closure buyer_closure, Closure seller_closure, bool buyer_fault,
                               bool seller_fault) {
        res.buyer.units_transferred = res.seller.units_transferred = settled_units;
        res.buyer.credits_transferred = res.seller.credits_transferred = settled_credits;
        res.buyer.units_delivered = res.seller.units_delivered = delivered;
        res.buyer.closure = buyer_closure;
        res.seller.closure = seller_closure;
        // Each outcome's flag says whether the *counterparty* misbehaved.
        res.buyer.peer_at_fault = seller_fault;
        res.seller.peer_at_fault = buyer_fault;
        auto ab = ledger.account(buyer.address());
        auto as = ledger.account(seller.address());
        if (ab && as)
            note(fmt("final: seller credit %lld energy %llu | buyer credit %lld energy %llu",
                     static_cast<long long>(as->credit_score),
                     static_cast<unsigned long long>(as->energy_level),
                     static_cast<long long>(ab->credit_score),
                     static_cast<unsigned long long>(ab->energy_level)));
    };

    if (stall) {
        RobotContext& honest = stall->honest == Role::Buyer ? buyer : seller;
        LocalChannelState& hst = stall->honest == Role::Buyer ? bst : sst;
        const char* honest_name = stall->honest == Role::Buyer ? "buyer" : "seller";
        if (stall->needs_wait) {
            for (std::uint64_t i = 0; i < honest.policy.delta_timeout; ++i) advance();
            note(fmt("%s waits out %llu more blocks of silence", honest_name,
                     static_cast<unsigned long long>(honest.policy.delta_timeout)));
        }
        if (channel::on_timeout(hst, honest.policy.delta_timeout, honest.policy.delta_timeout) !=
            channel::TimeoutAction::UnilateralClose) {
            note("internal: timeout policy refused to close");
            return res;
        }
        channel::rollback_pending(hst);
        (void)submit(honest.keypair, TxKind::UnilateralClose,
                     ledger::close_payload(xid, hst.last_pair), "unilateral close");
        (void)ledger.advance_block(ledger.config().challenge_period);
        note(fmt("challenge period of %llu blocks passes unanswered",
                 static_cast<unsigned long long>(ledger.config().challenge_period)));
        (void)submit(honest.keypair, TxKind::FinalizeClose, ledger::finalize_payload(xid),
                     "finalize");
        std::uint64_t su = hst.last_pair ? hst.last_pair->energy_tx.tx.value : 0;
        std::uint64_t sc = hst.last_pair ? hst.last_pair->credit_tx.tx.value : 0;
        bool buyer_fault = stall->faulted && stall->honest == Role::Seller;
        bool seller_fault = stall->faulted && stall->honest == Role::Buyer;
        settle_outcomes(su, sc, Closure::UnilateralTimeout, Closure::UnilateralTimeout,
                        buyer_fault, seller_fault);
        bus.set_offline(buyer.did, false);
        bus.set_offline(seller.did, false);
        return res;
    }

    if (script.kind == AdversaryScript::Kind::StaleClose && units > 0) {
        RobotContext& cheater = script.party == Role::Buyer ? buyer : seller;
        RobotContext& honest = script.party == Role::Buyer ? seller : buyer;
        const char* cheater_name = script.party == Role::Buyer ? "buyer" : "seller";
        std::uint64_t s = std::min(script.stale_iteration, units >= 1 ? units - 1 : 0);
        std::optional<OffChainTxPair> stale;
        if (s >= 1) stale = archive[s - 1];
        note(fmt("%s unilaterally closes with stale iteration %llu (latest is %llu)",
                 cheater_name, static_cast<unsigned long long>(s),
                 static_cast<unsigned long long>(units)));
        (void)submit(cheater.keypair, TxKind::UnilateralClose, ledger::close_payload(xid, stale),
                     "stale unilateral close");
        (void)submit(honest.keypair, TxKind::Challenge,
                     ledger::challenge_payload(xid, archive.back()), "challenge with latest pair");
        (void)ledger.advance_block(ledger.config().challenge_period);
        (void)submit(honest.keypair, TxKind::FinalizeClose, ledger::finalize_payload(xid),
                     "finalize");
        bool buyer_cheated = script.party == Role::Buyer;
        settle_outcomes(units, units * price,
                        buyer_cheated ? Closure::DisputedLost : Closure::DisputedWon,
                        buyer_cheated ? Closure::DisputedWon : Closure::DisputedLost,
                        buyer_cheated, !buyer_cheated);
        return res;
    }

    // Cooperative closure: buyer proposes, seller accepts and lands it on-chain.
    auto prop = channel::propose_close(bst);
    if (!prop.ok()) {
        note(fmt("internal: propose_close failed (%s)", to_string(prop.code())));
        return res;
    }
    bus.send({buyer.did, seller.did, static_cast<std::uint8_t>(bus::MsgKind::CloseProposal),
              prop.value().canonical_bytes()});
    note("buyer proposes cooperative close");

    bool seller_closed = false;
    auto penv = drain_wait(bus, seller.did, static_cast<std::uint8_t>(bus::MsgKind::CloseProposal),
                           seller.policy.delta_timeout, advance);
    if (penv) {
        channel::CloseProposal received;
        ByteReader r(penv->payload);
        received.channel_id = r.fixed<16>();
        std::uint8_t has_pair = r.u8();
        if (has_pair == 1) {
            auto p = channel::decode_offchain_pair(r.raw(r.remaining()));
            if (p.ok()) received.final_pair = p.take();
        }
        auto accepted = r.failed() ? Result<channel::CloseProposal>(Err::InvalidField)
                                   : channel::accept_close(sst, received);
        if (accepted.ok()) {
            bus.send({seller.did, buyer.did, static_cast<std::uint8_t>(bus::MsgKind::CloseAccept),
                      Bytes{1}});
            auto rc = submit(seller.keypair, TxKind::CooperativeClose,
                             ledger::close_payload(xid, accepted.value().final_pair),
                             "cooperative close");
            seller_closed = rc.ok();
            if (!rc.ok())
                note(fmt("cooperative close failed (%s); falling back to unilateral",
                         to_string(rc.code())));
        } else {
            note(fmt("seller rejects close proposal (%s)", to_string(accepted.code())));
        }
    }

    if (seller_closed) {
        auto aenv = drain_wait(bus, buyer.did, static_cast<std::uint8_t>(bus::MsgKind::CloseAccept),
                               buyer.policy.delta_timeout, advance);
        (void)aenv;
        settle_outcomes(units, units * price, Closure::Cooperative, Closure::Cooperative, false,
                        false);
        return res;
    }

    // Cooperative path unavailable: the seller protects itself unilaterally.
    channel::rollback_pending(sst);
    (void)submit(seller.keypair, TxKind::UnilateralClose, ledger::close_payload(xid, sst.last_pair),
                 "unilateral close");
    (void)ledger.advance_block(ledger.config().challenge_period);
    (void)submit(seller.keypair, TxKind::FinalizeClose, ledger::finalize_payload(xid), "finalize");
    std::uint64_t su = sst.last_pair ? sst.last_pair->energy_tx.tx.value : 0;
    std::uint64_t sc = sst.last_pair ? sst.last_pair->credit_tx.tx.value : 0;
    settle_outcomes(su, sc, Closure::UnilateralTimeout, Closure::UnilateralTimeout, true, false);
    return res;
}

} // namespace robocomm::trade
