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

#include "robocomm/ledger.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace robocomm::ledger {

namespace {

constexpr std::string_view kOnChainDomain = "robocomm.onchain.v1";
constexpr std::string_view kStateDomain = "robocomm.state.v1";
constexpr std::array<std::uint8_t, 8> kSnapshotMagic = {'R', 'C', 'S', 'N', 'A', 'P', '0', '1'};

// Guard against signed overflow when pair values feed credit arithmetic.
constexpr std::uint64_t kMaxPairValue = std::uint64_t{1} << 62;

std::uint64_t candidate_iteration(const OnChainChannelRecord& rec) {
    return rec.candidate ? rec.candidate->energy_tx.tx.iteration : 0;
}

Result<LedgerConfig> decode_config(ByteSpan bytes) {
    ByteReader r(bytes);
    LedgerConfig cfg;
    cfg.challenge_period = r.u64be();
    cfg.fraud_penalty = r.i64be();
    cfg.honesty_bonus = r.i64be();
    cfg.initial_credit = r.i64be();
    cfg.credit_floor = r.i64be();
    cfg.initial_energy = r.u64be();
    cfg.genesis_authority.bytes = r.fixed<32>();
    if (!r.done()) return Error(Err::BadSnapshot, "bad config block");
    return cfg;
}

Result<LedgerEvent> decode_event(ByteSpan bytes) {
    ByteReader r(bytes);
    LedgerEvent ev;
    std::uint8_t kind = r.u8();
    if (kind == static_cast<std::uint8_t>(LedgerEvent::Kind::AdvanceBlock)) {
        ev.kind = LedgerEvent::Kind::AdvanceBlock;
        ev.blocks = r.u64be();
    } else if (kind == static_cast<std::uint8_t>(LedgerEvent::Kind::ApplyTx)) {
        ev.kind = LedgerEvent::Kind::ApplyTx;
        auto tx = decode_onchain_tx(r.lp());
        if (!tx.ok()) return tx.error();
        ev.tx = tx.take();
    } else {
        return Error(Err::BadSnapshot, "unknown event kind");
    }
    if (!r.done()) return Error(Err::BadSnapshot, "trailing event bytes");
    return ev;
}

} // namespace

Bytes LedgerConfig::canonical_bytes() const {
    ByteWriter w;
    w.u64be(challenge_period);
    w.i64be(fraud_penalty);
    w.i64be(honesty_bonus);
    w.i64be(initial_credit);
    w.i64be(credit_floor);
    w.u64be(initial_energy);
    w.raw(genesis_authority.bytes);
    return w.take();
}

Bytes OnChainTx::signing_preimage() const {
    ByteWriter w;
    w.domain(kOnChainDomain);
    w.u8(kind);
    w.lp(payload);
    w.lp(sender.bytes);
    return w.take();
}

Bytes SignedOnChainTx::wire_bytes() const {
    ByteWriter w;
    w.u8(tx.kind);
    w.lp(tx.payload);
    w.lp(tx.sender.bytes);
    w.lp(signature.bytes);
    return w.take();
}

Result<SignedOnChainTx> decode_onchain_tx(ByteSpan bytes) {
    ByteReader r(bytes);
    SignedOnChainTx out;
    out.tx.kind = r.u8();
    out.tx.payload = r.lp();
    out.tx.sender.bytes = r.lp_fixed<20>();
    out.signature.bytes = r.lp_fixed<64>();
    if (!r.done()) return Error(Err::InvalidField, "undecodable on-chain tx");
    return out;
}

SignedOnChainTx sign_onchain_tx(const KeyPair& keypair, TxKind kind, Bytes payload) {
    SignedOnChainTx stx;
    stx.tx.kind = static_cast<std::uint8_t>(kind);
    stx.tx.payload = std::move(payload);
    stx.tx.sender = identity::derive_address(keypair.public_key());
    stx.signature = identity::sign(keypair, stx.tx.signing_preimage());
    return stx;
}

Bytes register_did_payload(const DidDocument& document, const Multiaddr& multiaddr) {
    ByteWriter w;
    w.lp(document.canonical_bytes());
    w.lp(multiaddr.render());
    return w.take();
}

Bytes revoke_did_payload(const Did& did) {
    ByteWriter w;
    w.lp(did.render());
    return w.take();
}

Bytes add_issuer_payload(const Did& issuer_did) {
    ByteWriter w;
    w.lp(issuer_did.render());
    return w.take();
}

Bytes confirm_channel_payload(const ChannelId& channel_id, const Address& a, const Address& b) {
    ByteWriter w;
    w.raw(channel_id);
    w.lp(a.bytes);
    w.lp(b.bytes);
    return w.take();
}

Bytes close_payload(const ChannelId& channel_id, const std::optional<OffChainTxPair>& final_pair) {
    ByteWriter w;
    w.raw(channel_id);
    w.u8(final_pair ? 1 : 0);
    if (final_pair) w.raw(final_pair->canonical_bytes());
    return w.take();
}

Bytes challenge_payload(const ChannelId& channel_id, const OffChainTxPair& newer_pair) {
    ByteWriter w;
    w.raw(channel_id);
    w.raw(newer_pair.canonical_bytes());
    return w.take();
}

Bytes finalize_payload(const ChannelId& channel_id) {
    ByteWriter w;
    w.raw(channel_id);
    return w.take();
}

Bytes LedgerEvent::encode() const {
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(kind));
    if (kind == Kind::AdvanceBlock)
        w.u64be(blocks);
    else
        w.lp(tx.wire_bytes());
    return w.take();
}

Ledger::Ledger(LedgerConfig config)
    : config_(config), genesis_address_(identity::derive_address(config.genesis_authority)) {}

Receipt Ledger::submit_tx(const SignedOnChainTx& stx) {
    Result<void> r = dispatch(stx);
    if (r.ok()) {
        LedgerEvent ev;
        ev.kind = LedgerEvent::Kind::ApplyTx;
        ev.tx = stx;
        events_.push_back(std::move(ev));
    }
    return Receipt{height_, std::move(r)};
}

Result<BlockHeight> Ledger::advance_block(std::uint64_t n) {
    if (n == 0) return Error(Err::BadBlockCount, "must advance by at least one block");
    height_ += n;
    LedgerEvent ev;
    ev.kind = LedgerEvent::Kind::AdvanceBlock;
    ev.blocks = n;
    events_.push_back(std::move(ev));
    return height_;
}

Result<PublicKey> Ledger::signer_key(const SignedOnChainTx& stx) const {
    if (stx.tx.kind == static_cast<std::uint8_t>(TxKind::RegisterDid)) {
        // Registration is self-signed: the key is inside the document.
        ByteReader r(stx.tx.payload);
        auto doc = identity::decode_did_document(r.lp());
        if (!doc.ok()) return Error(Err::InvalidField, "undecodable did document");
        return doc.value().verification_key;
    }
    if (stx.tx.kind == static_cast<std::uint8_t>(TxKind::AddIssuer) &&
        stx.tx.sender == genesis_address_) {
        return config_.genesis_authority;
    }
    auto it = registry_.find(stx.tx.sender);
    if (it == registry_.end())
        return Error(Err::BadSignature, "sender not registered");
    return it->second.document.verification_key;
}

Result<void> Ledger::dispatch(const SignedOnChainTx& stx) {
    auto key = signer_key(stx);
    if (!key.ok()) return key.error();
    if (!identity::verify(key.value(), stx.tx.signing_preimage(), stx.signature))
        return Error(Err::BadSignature);

    switch (static_cast<TxKind>(stx.tx.kind)) {
        case TxKind::RegisterDid: return apply_register_did(stx.tx);
        case TxKind::RevokeDid: return apply_revoke_did(stx.tx);
        case TxKind::AddIssuer: return apply_add_issuer(stx.tx);
        case TxKind::ConfirmChannel: return apply_confirm_channel(stx.tx);
        case TxKind::CooperativeClose: return apply_cooperative_close(stx.tx);
        case TxKind::UnilateralClose: return apply_unilateral_close(stx.tx);
        case TxKind::Challenge: return apply_challenge(stx.tx);
        case TxKind::FinalizeClose: return apply_finalize_close(stx.tx);
    }
    return Error(Err::UnknownTxKind);
}

Result<void> Ledger::apply_register_did(const OnChainTx& tx) {
    ByteReader r(tx.payload);
    auto doc = identity::decode_did_document(r.lp());
    std::string ma_str = r.lp_str();
    if (!r.done() || !doc.ok())
        return Error(Err::InvalidField, "undecodable register payload");
    auto ma = identity::parse_multiaddr(ma_str);
    if (!ma.ok()) return ma.error();

    const DidDocument& document = doc.value();
    if (registry_.count(document.id.address))
        return Error(Err::DuplicateDid, document.id.render());
    if (document.id.address != tx.sender)
        return Error(Err::DocMismatch, "document subject is not the tx sender");
    if (identity::derive_address(document.verification_key) != document.id.address)
        return Error(Err::DocMismatch, "verification key does not derive the did");

    RegistryEntry entry;
    entry.did = document.id;
    entry.multiaddr = ma.take();
    entry.document = document;
    entry.created_at = height_;
    entry.status = DidRecordStatus::Active;
    registry_.emplace(document.id.address, std::move(entry));
    accounts_[document.id.address] = AccountState{config_.initial_credit, config_.initial_energy};
    return {};
}

Result<void> Ledger::apply_revoke_did(const OnChainTx& tx) {
    ByteReader r(tx.payload);
    auto did = identity::parse_did(r.lp_str());
    if (!r.done() || !did.ok())
        return Error(Err::InvalidField, "undecodable revoke payload");
    auto it = registry_.find(did.value().address);
    if (it == registry_.end()) return Error(Err::UnknownDid, did.value().render());
    if (it->second.status == DidRecordStatus::Revoked)
        return Error(Err::AlreadyRevoked, did.value().render());
    if (it->second.document.controller.address != tx.sender)
        return Error(Err::NotController);
    it->second.status = DidRecordStatus::Revoked;
    return {};
}

Result<void> Ledger::apply_add_issuer(const OnChainTx& tx) {
    if (tx.sender != genesis_address_)
        return Error(Err::NotAuthorized, "only the genesis authority adds issuers");
    ByteReader r(tx.payload);
    auto did = identity::parse_did(r.lp_str());
    if (!r.done() || !did.ok())
        return Error(Err::InvalidField, "undecodable issuer payload");
    if (!registry_.count(did.value().address))
        return Error(Err::UnknownDid, did.value().render());
    if (issuers_.count(did.value().address))
        return Error(Err::DuplicateIssuer, did.value().render());
    issuers_.insert(did.value().address);
    return {};
}

Result<void> Ledger::apply_confirm_channel(const OnChainTx& tx) {
    ByteReader r(tx.payload);
    ChannelId id = r.fixed<16>();
    Address a, b;
    a.bytes = r.lp_fixed<20>();
    b.bytes = r.lp_fixed<20>();
    if (!r.done()) return Error(Err::InvalidField, "undecodable confirm payload");
    if (a == b) return Error(Err::InvalidField, "participants must differ");
    if (tx.sender != a && tx.sender != b) return Error(Err::NotParticipant);

    for (const Address& p : {a, b}) {
        auto it = registry_.find(p);
        if (it == registry_.end()) return Error(Err::UnknownDid, p.render());
        if (it->second.status == DidRecordStatus::Revoked)
            return Error(Err::RevokedParticipant, p.render());
    }

    auto it = channels_.find(id);
    if (it == channels_.end()) {
        OnChainChannelRecord rec;
        rec.channel_id = id;
        rec.participant_a = a;
        rec.participant_b = b;
        (tx.sender == a ? rec.confirmed_a : rec.confirmed_b) = true;
        channels_.emplace(id, std::move(rec));
        return {};
    }
    OnChainChannelRecord& rec = it->second;
    if (rec.phase != ChannelPhase::Pending)
        return Error(Err::DuplicateChannel, "channel id already in use");
    if (rec.participant_a != a || rec.participant_b != b)
        return Error(Err::InvalidField, "confirmation names different participants");
    bool& slot = (tx.sender == a) ? rec.confirmed_a : rec.confirmed_b;
    if (slot) return Error(Err::DoubleConfirm);
    slot = true;
    if (rec.confirmed_a && rec.confirmed_b) {
        rec.phase = ChannelPhase::Open;
        rec.opened_at = height_;
    }
    return {};
}

Result<OffChainTxPair> Ledger::check_pair(const OnChainChannelRecord& rec,
                                          const OffChainTxPair& pair) const {
    if (auto r = channel::validate_pair_shape(pair); !r.ok()) return r.error();
    const auto& e = pair.energy_tx.tx;
    const auto& c = pair.credit_tx.tx;
    if (e.exchange_id != rec.channel_id)
        return Error(Err::BadPair, "pair is not bound to this channel");
    bool roles_ok = (e.sender == rec.participant_a && e.receiver == rec.participant_b) ||
                    (e.sender == rec.participant_b && e.receiver == rec.participant_a);
    if (!roles_ok) return Error(Err::BadPair, "pair parties are not the channel participants");
    if (e.value >= kMaxPairValue || c.value >= kMaxPairValue)
        return Error(Err::BadPair, "value out of range");
    if (!verify_offchain_tx(pair.energy_tx, e.iteration - 1))
        return Error(Err::BadPair, "energy half fails verification");
    if (!verify_offchain_tx(pair.credit_tx, c.iteration - 1))
        return Error(Err::BadPair, "credit half fails verification");
    return pair;
}

void Ledger::settle(OnChainChannelRecord& rec, const std::optional<OffChainTxPair>& pair,
                    bool /*forced*/) {
    if (pair) {
        const Address seller = pair->energy_tx.tx.sender;
        const Address buyer = pair->credit_tx.tx.sender;
        AccountState& s = accounts_[seller];
        AccountState& b = accounts_[buyer];
        // Transfers are clamped so a forced settlement can never push anyone
        // past a floor; clamped amounts stay put, keeping totals conserved.
        std::int64_t credits = static_cast<std::int64_t>(pair->credit_tx.tx.value);
        std::int64_t paid = std::min(credits, b.credit_score - config_.credit_floor);
        if (paid < 0) paid = 0;
        std::uint64_t delivered = std::min(pair->energy_tx.tx.value, s.energy_level);
        b.credit_score -= paid;
        s.credit_score += paid;
        s.energy_level -= delivered;
        b.energy_level += delivered;
    }
    for (const Address& p : {rec.participant_a, rec.participant_b}) {
        if (rec.cheater_flagged && p == rec.cheater) continue;
        accounts_[p].credit_score += config_.honesty_bonus;
    }
    if (rec.cheater_flagged) {
        AccountState& c = accounts_[rec.cheater];
        c.credit_score = std::max(config_.credit_floor, c.credit_score - config_.fraud_penalty);
    }
    rec.phase = ChannelPhase::Closed;
    rec.closed_at = height_;
}

Result<void> Ledger::apply_cooperative_close(const OnChainTx& tx) {
    ByteReader r(tx.payload);
    ChannelId id = r.fixed<16>();
    std::uint8_t has_pair = r.u8();
    std::optional<OffChainTxPair> pair;
    if (has_pair == 1) {
        auto p = channel::decode_offchain_pair(r.raw(r.remaining()));
        if (!p.ok()) return Error(Err::BadPair, "undecodable pair");
        pair = p.take();
    } else if (has_pair != 0 || !r.done()) {
        return Error(Err::InvalidField, "undecodable close payload");
    }
    if (r.failed()) return Error(Err::InvalidField, "undecodable close payload");

    auto it = channels_.find(id);
    if (it == channels_.end() || it->second.phase != ChannelPhase::Open)
        return Error(Err::NotOpen);
    OnChainChannelRecord& rec = it->second;

    if (pair) {
        auto checked = check_pair(rec, *pair);
        if (!checked.ok()) return checked.error();
        const Address buyer = pair->credit_tx.tx.sender;
        std::int64_t credits = static_cast<std::int64_t>(pair->credit_tx.tx.value);
        if (accounts_.at(buyer).credit_score - credits < config_.credit_floor)
            return Error(Err::InsufficientCredit);
    }
    settle(rec, pair, false);
    return {};
}

Result<void> Ledger::apply_unilateral_close(const OnChainTx& tx) {
    ByteReader r(tx.payload);
    ChannelId id = r.fixed<16>();
    std::uint8_t has_pair = r.u8();
    std::optional<OffChainTxPair> pair;
    if (has_pair == 1) {
        auto p = channel::decode_offchain_pair(r.raw(r.remaining()));
        if (!p.ok()) return Error(Err::BadPair, "undecodable pair");
        pair = p.take();
    } else if (has_pair != 0 || !r.done()) {
        return Error(Err::InvalidField, "undecodable close payload");
    }
    if (r.failed()) return Error(Err::InvalidField, "undecodable close payload");

    auto it = channels_.find(id);
    if (it == channels_.end() || it->second.phase != ChannelPhase::Open)
        return Error(Err::NotOpen);
    OnChainChannelRecord& rec = it->second;
    if (tx.sender != rec.participant_a && tx.sender != rec.participant_b)
        return Error(Err::NotParticipant);
    if (pair) {
        auto checked = check_pair(rec, *pair);
        if (!checked.ok()) return checked.error();
    }
    rec.phase = ChannelPhase::Challenged;
    rec.deadline = height_ + config_.challenge_period;
    rec.candidate = pair;
    rec.candidate_submitter = tx.sender;
    rec.cheater_flagged = false;
    return {};
}

Result<void> Ledger::apply_challenge(const OnChainTx& tx) {
    ByteReader r(tx.payload);
    ChannelId id = r.fixed<16>();
    auto pair = channel::decode_offchain_pair(r.raw(r.remaining()));
    if (r.failed() || !pair.ok()) return Error(Err::BadPair, "undecodable pair");

    auto it = channels_.find(id);
    if (it == channels_.end() || it->second.phase != ChannelPhase::Challenged)
        return Error(Err::NotChallenged);
    OnChainChannelRecord& rec = it->second;
    if (height_ >= rec.deadline) return Error(Err::ChallengeExpired);
    if (tx.sender != rec.participant_a && tx.sender != rec.participant_b)
        return Error(Err::NotParticipant);
    auto checked = check_pair(rec, pair.value());
    if (!checked.ok()) return checked.error();
    if (pair.value().energy_tx.tx.iteration <= candidate_iteration(rec))
        return Error(Err::NotNewer);

    // A strictly newer both-signed pair is the fraud proof: whoever put up the
    // displaced candidate withheld it.
    rec.cheater = rec.candidate_submitter;
    rec.cheater_flagged = true;
    rec.candidate = pair.take();
    rec.candidate_submitter = tx.sender;
    return {};
}

Result<void> Ledger::apply_finalize_close(const OnChainTx& tx) {
    ByteReader r(tx.payload);
    ChannelId id = r.fixed<16>();
    if (!r.done()) return Error(Err::InvalidField, "undecodable finalize payload");

    auto it = channels_.find(id);
    if (it == channels_.end() || it->second.phase != ChannelPhase::Challenged)
        return Error(Err::NotChallenged);
    OnChainChannelRecord& rec = it->second;
    if (height_ < rec.deadline) return Error(Err::DeadlineNotReached);
    settle(rec, rec.candidate, true);
    return {};
}

Result<ResolvedDid> Ledger::resolve_did(const Did& did) const {
    auto it = registry_.find(did.address);
    if (it == registry_.end()) return Error(Err::UnknownDid, did.render());
    ResolvedDid out;
    out.did = it->second.did;
    out.document = it->second.document;
    out.multiaddr = it->second.multiaddr;
    out.status = it->second.status;
    out.created_at = it->second.created_at;
    auto acct = accounts_.find(did.address);
    if (acct != accounts_.end()) out.account = acct->second;
    return out;
}

bool Ledger::is_trusted_issuer(const Did& did) const {
    return issuers_.count(did.address) > 0;
}

std::optional<AccountState> Ledger::account(const Address& address) const {
    auto it = accounts_.find(address);
    if (it == accounts_.end()) return std::nullopt;
    return it->second;
}

std::optional<OnChainChannelRecord> Ledger::channel(const ChannelId& channel_id) const {
    auto it = channels_.find(channel_id);
    if (it == channels_.end()) return std::nullopt;
    return it->second;
}

std::vector<Did> Ledger::active_dids() const {
    std::vector<Did> out;
    for (const auto& [addr, entry] : registry_)
        if (entry.status == DidRecordStatus::Active) out.push_back(entry.did);
    return out;
}

bool Ledger::verify_offchain_tx(const SignedOffChainTx& stx,
                                std::uint64_t expected_prev_iteration) const {
    auto it = registry_.find(stx.tx.sender);
    if (it == registry_.end()) return false;
    return channel::check_offchain_tx(stx, it->second.document.verification_key,
                                      expected_prev_iteration + 1)
        .ok();
}

Hash256 Ledger::state_hash() const {
    ByteWriter w;
    w.domain(kStateDomain);
    w.raw(config_.canonical_bytes());
    w.u64be(height_);

    w.u32be(static_cast<std::uint32_t>(registry_.size()));
    for (const auto& [addr, entry] : registry_) {
        w.lp(entry.did.render());
        w.lp(entry.multiaddr.render());
        w.lp(entry.document.canonical_bytes());
        w.u64be(entry.created_at);
        w.u8(static_cast<std::uint8_t>(entry.status));
    }
    w.u32be(static_cast<std::uint32_t>(issuers_.size()));
    for (const auto& addr : issuers_) w.lp(addr.bytes);
    w.u32be(static_cast<std::uint32_t>(accounts_.size()));
    for (const auto& [addr, acct] : accounts_) {
        w.lp(addr.bytes);
        w.i64be(acct.credit_score);
        w.u64be(acct.energy_level);
    }
    w.u32be(static_cast<std::uint32_t>(channels_.size()));
    for (const auto& [id, rec] : channels_) {
        w.lp(id);
        w.lp(rec.participant_a.bytes);
        w.lp(rec.participant_b.bytes);
        w.u8(rec.confirmed_a ? 1 : 0);
        w.u8(rec.confirmed_b ? 1 : 0);
        w.u8(static_cast<std::uint8_t>(rec.phase));
        w.u64be(rec.opened_at);
        w.u64be(rec.closed_at);
        w.u64be(rec.deadline);
        w.u8(rec.candidate ? 1 : 0);
        if (rec.candidate) w.lp(rec.candidate->canonical_bytes());
        w.lp(rec.candidate_submitter.bytes);
        w.u8(rec.cheater_flagged ? 1 : 0);
        w.lp(rec.cheater.bytes);
    }
    return identity::sha256(w.bytes());
}

std::string Ledger::state_json() const {
    nlohmann::ordered_json j;
    j["height"] = height_;
    j["stateHash"] = to_hex(state_hash());
    auto& reg = j["registry"] = nlohmann::ordered_json::array();
    for (const auto& [addr, entry] : registry_) {
        reg.push_back({{"did", entry.did.render()},
                       {"multiaddr", entry.multiaddr.render()},
                       {"status", entry.status == DidRecordStatus::Active ? "active" : "revoked"},
                       {"createdAt", entry.created_at}});
    }
    auto& iss = j["issuers"] = nlohmann::ordered_json::array();
    for (const auto& addr : issuers_) iss.push_back(Did{addr}.render());
    auto& acc = j["accounts"] = nlohmann::ordered_json::array();
    for (const auto& [addr, acct] : accounts_) {
        acc.push_back({{"address", addr.render()},
                       {"creditScore", acct.credit_score},
                       {"energyLevel", acct.energy_level}});
    }
    auto& ch = j["channels"] = nlohmann::ordered_json::array();
    static const char* kPhaseNames[] = {"pending", "open", "challenged", "closed"};
    for (const auto& [id, rec] : channels_) {
        ch.push_back({{"channelId", to_hex(id)},
                      {"participants", {rec.participant_a.render(), rec.participant_b.render()}},
                      {"phase", kPhaseNames[static_cast<int>(rec.phase)]},
                      {"openedAt", rec.opened_at},
                      {"closedAt", rec.closed_at},
                      {"deadline", rec.deadline},
                      {"candidateIteration", rec.candidate ? rec.candidate->energy_tx.tx.iteration : 0},
                      {"cheaterFlagged", rec.cheater_flagged}});
    }
    return j.dump(2);
}

Bytes Ledger::export_snapshot() const {
    ByteWriter w;
    w.raw(kSnapshotMagic);
    w.lp(config_.canonical_bytes());
    w.raw(state_hash());
    w.u32be(static_cast<std::uint32_t>(events_.size()));
    for (const auto& ev : events_) w.lp(ev.encode());
    return w.take();
}

Result<Ledger> Ledger::import_snapshot(ByteSpan bytes) {
    ByteReader r(bytes);
    auto magic = r.fixed<8>();
    if (r.failed() || magic != kSnapshotMagic)
        return Error(Err::BadSnapshot, "bad magic");
    auto cfg = decode_config(r.lp());
    if (!cfg.ok()) return cfg.error();
    Hash256 expected = r.fixed<32>();
    std::uint32_t n = r.u32be();
    std::vector<LedgerEvent> events;
    events.reserve(n);
    for (std::uint32_t i = 0; i < n && !r.failed(); ++i) {
        auto ev = decode_event(r.lp());
        if (!ev.ok()) return ev.error();
        events.push_back(ev.take());
    }
    if (!r.done()) return Error(Err::BadSnapshot, "trailing bytes");

    auto replayed = replay(cfg.value(), events);
    if (!replayed.ok()) return replayed.error();
    if (replayed.value().state_hash() != expected)
        return Error(Err::BadSnapshot, "state hash mismatch after replay");
    return replayed;
}

Result<Ledger> Ledger::replay(const LedgerConfig& config, const std::vector<LedgerEvent>& events) {
    Ledger ledger(config);
    for (const auto& ev : events) {
        if (ev.kind == LedgerEvent::Kind::AdvanceBlock) {
            auto r = ledger.advance_block(ev.blocks);
            if (!r.ok()) return Error(Err::BadSnapshot, "replay diverged on block advance");
        } else {
            Receipt rc = ledger.submit_tx(ev.tx);
            if (!rc.ok())
                return Error(Err::BadSnapshot,
                             std::string("replay diverged: ") + to_string(rc.result.code()));
        }
    }
    return ledger;
}

vc::IssuerView Ledger::issuer_view() const {
    return [this](const Did& did) { return is_trusted_issuer(did); };
}

vc::DidStatusView Ledger::did_status_view() const {
    return [this](const Did& did) -> vc::DidView {
        auto it = registry_.find(did.address);
        if (it == registry_.end()) return {vc::DidStatus::Unknown, PublicKey{}};
        auto status = it->second.status == DidRecordStatus::Active ? vc::DidStatus::Active
                                                                   : vc::DidStatus::Revoked;
        return {status, it->second.document.verification_key};
    };
}

} // namespace robocomm::ledger
