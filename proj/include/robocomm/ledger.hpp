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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "robocomm/bytes.hpp"
#include "robocomm/channel.hpp"
#include "robocomm/credentials.hpp"
#include "robocomm/identity.hpp"
#include "robocomm/result.hpp"

namespace robocomm::ledger {

using identity::Address;
using identity::BlockHeight;
using identity::Did;
using identity::DidDocument;
using identity::Hash256;
using identity::KeyPair;
using identity::Multiaddr;
using identity::PublicKey;
using identity::Signature;
using channel::ChannelId;
using channel::OffChainTxPair;
using channel::SignedOffChainTx;

struct LedgerConfig {
    std::uint64_t challenge_period = 10;  // blocks a unilateral close stays contestable
    std::int64_t fraud_penalty = 5;
    std::int64_t honesty_bonus = 1;
    std::int64_t initial_credit = 10;
    std::int64_t credit_floor = 0;
    std::uint64_t initial_energy = 50;  // settled-energy starting point for new accounts
    PublicKey genesis_authority;        // may add issuers

    Bytes canonical_bytes() const;
    bool operator==(const LedgerConfig&) const = default;
};

struct AccountState {
    std::int64_t credit_score = 0;
    std::uint64_t energy_level = 0;
    bool operator==(const AccountState&) const = default;
};

enum class DidRecordStatus : std::uint8_t {
    Active = 0,
    Revoked = 1,
};

struct RegistryEntry {
    Did did;
    Multiaddr multiaddr;
    DidDocument document;
    BlockHeight created_at = 0;
    DidRecordStatus status = DidRecordStatus::Active;
};

enum class ChannelPhase : std::uint8_t {
    Pending = 0,
    Open = 1,
    Challenged = 2,
    Closed = 3,
};

struct OnChainChannelRecord {
    ChannelId channel_id{};
    Address participant_a;
    Address participant_b;
    bool confirmed_a = false;
    bool confirmed_b = false;
    ChannelPhase phase = ChannelPhase::Pending;
    BlockHeight opened_at = 0;
    BlockHeight closed_at = 0;
    // Challenge bookkeeping. An absent candidate means an empty-trade close.
    BlockHeight deadline = 0;
    std::optional<OffChainTxPair> candidate;
    Address candidate_submitter;
    bool cheater_flagged = false;
    Address cheater;
};

enum class TxKind : std::uint8_t {
    RegisterDid = 1,
    RevokeDid = 2,
    AddIssuer = 3,
    ConfirmChannel = 4,
    CooperativeClose = 5,
    UnilateralClose = 6,
    Challenge = 7,
    FinalizeClose = 8,
};

struct OnChainTx {
    std::uint8_t kind = 0;
    Bytes payload;
    Address sender;

    Bytes signing_preimage() const;
    bool operator==(const OnChainTx&) const = default;
};

struct SignedOnChainTx {
    OnChainTx tx;
    Signature signature;

    Bytes wire_bytes() const;
    bool operator==(const SignedOnChainTx&) const = default;
};

Result<SignedOnChainTx> decode_onchain_tx(ByteSpan bytes);

SignedOnChainTx sign_onchain_tx(const KeyPair& keypair, TxKind kind, Bytes payload);

// Payload builders for each tx kind.
Bytes register_did_payload(const DidDocument& document, const Multiaddr& multiaddr);
Bytes revoke_did_payload(const Did& did);
Bytes add_issuer_payload(const Did& issuer_did);
Bytes confirm_channel_payload(const ChannelId& channel_id, const Address& a, const Address& b);
Bytes close_payload(const ChannelId& channel_id, const std::optional<OffChainTxPair>& final_pair);
Bytes challenge_payload(const ChannelId& channel_id, const OffChainTxPair& newer_pair);
Bytes finalize_payload(const ChannelId& channel_id);

struct Receipt {
    BlockHeight height = 0;
    Result<void> result;
    bool ok() const { return result.ok(); }
};

struct LedgerEvent {
    enum class Kind : std::uint8_t { AdvanceBlock = 1, ApplyTx = 2 };
    Kind kind = Kind::AdvanceBlock;
    std::uint64_t blocks = 0;  // AdvanceBlock only
    SignedOnChainTx tx;        // ApplyTx only

    Bytes encode() const;
};

struct ResolvedDid {
    Did did;
    DidDocument document;
    Multiaddr multiaddr;
    DidRecordStatus status = DidRecordStatus::Active;
    BlockHeight created_at = 0;
    AccountState account;
};

class Ledger {
  public:
    explicit Ledger(LedgerConfig config);

    // All mutation funnels through these two.
    Receipt submit_tx(const SignedOnChainTx& stx);
    Result<BlockHeight> advance_block(std::uint64_t n);

    BlockHeight height() const { return height_; }
    const LedgerConfig& config() const { return config_; }

    Result<ResolvedDid> resolve_did(const Did& did) const;
    bool is_trusted_issuer(const Did& did) const;
    std::optional<AccountState> account(const Address& address) const;
    std::optional<OnChainChannelRecord> channel(const ChannelId& channel_id) const;
    std::vector<Did> active_dids() const;

    // On-chain verifier analog: signature against the registered key plus
    // strict ordering against the caller's last seen iteration.
    bool verify_offchain_tx(const SignedOffChainTx& stx,
                            std::uint64_t expected_prev_iteration) const;

    Hash256 state_hash() const;
    std::string state_json() const;

    const std::vector<LedgerEvent>& events() const { return events_; }

    Bytes export_snapshot() const;
    static Result<Ledger> import_snapshot(ByteSpan bytes);
    static Result<Ledger> replay(const LedgerConfig& config, const std::vector<LedgerEvent>& events);

    // Adapters for presentation verification.
    vc::IssuerView issuer_view() const;
    vc::DidStatusView did_status_view() const;

  private:
    Result<void> dispatch(const SignedOnChainTx& stx);
    Result<void> apply_register_did(const OnChainTx& tx);
    Result<void> apply_revoke_did(const OnChainTx& tx);
    Result<void> apply_add_issuer(const OnChainTx& tx);
    Result<void> apply_confirm_channel(const OnChainTx& tx);
    Result<void> apply_cooperative_close(const OnChainTx& tx);
    Result<void> apply_unilateral_close(const OnChainTx& tx);
    Result<void> apply_challenge(const OnChainTx& tx);
    Result<void> apply_finalize_close(const OnChainTx& tx);

    Result<PublicKey> signer_key(const SignedOnChainTx& stx) const;
    Result<OffChainTxPair> check_pair(const OnChainChannelRecord& rec,
                                      const OffChainTxPair& pair) const;
    void settle(OnChainChannelRecord& rec, const std::optional<OffChainTxPair>& pair,
                bool forced);

    LedgerConfig config_;
    Address genesis_address_;
    BlockHeight height_ = 0;
    std::map<Address, RegistryEntry> registry_;
    std::set<Address> issuers_;
    std::map<Address, AccountState> accounts_;
    std::map<ChannelId, OnChainChannelRecord> channels_;
    std::vector<LedgerEvent> events_;
};

} // namespace robocomm::ledger
