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

#include <array>
#include <cstdint>
#include <optional>

#include "robocomm/bytes.hpp"
#include "robocomm/identity.hpp"
#include "robocomm/result.hpp"

namespace robocomm::channel {

using identity::Address;
using identity::KeyPair;
using identity::PublicKey;
using identity::Signature;

using ExchangeId = std::array<std::uint8_t, 16>;
using ChannelId = std::array<std::uint8_t, 16>;

enum class ValueKind : std::uint8_t {
    EnergyUnits = 0,
    CreditScore = 1,
};

// Values are cumulative totals for the exchange, not per-iteration deltas:
// the energy stream carries total units delivered so far, the credit stream
// total credits owed so far. The latest pair alone settles the channel.
struct OffChainTx {
    ExchangeId exchange_id{};
    std::uint64_t iteration = 0;
    Address sender;
    Address receiver;
    std::uint64_t value = 0;
    ValueKind value_kind = ValueKind::EnergyUnits;

    Bytes canonical_bytes() const;
    bool operator==(const OffChainTx&) const = default;
};

struct SignedOffChainTx {
    OffChainTx tx;
    Signature signature;

    Bytes wire_bytes() const;
    bool operator==(const SignedOffChainTx&) const = default;
};

Result<SignedOffChainTx> decode_offchain_tx(ByteSpan bytes);

// Matched halves of one iteration: energy seller→buyer, credit buyer→seller.
struct OffChainTxPair {
    SignedOffChainTx energy_tx;
    SignedOffChainTx credit_tx;

    Bytes canonical_bytes() const;
    bool operator==(const OffChainTxPair&) const = default;
};

Result<OffChainTxPair> decode_offchain_pair(ByteSpan bytes);

// Shape only: ids, iteration lockstep, kinds, crossed sender/receiver roles.
// Signature checks live with whoever can resolve the keys.
Result<void> validate_pair_shape(const OffChainTxPair& pair);

Result<OffChainTx> build_offchain_tx(const ExchangeId& exchange_id, std::uint64_t iteration,
                                     const Address& sender, const Address& receiver,
                                     std::uint64_t value, ValueKind kind);

Result<SignedOffChainTx> sign_offchain_tx(const KeyPair& keypair, const OffChainTx& tx);

// Accepts iff fields are valid, iteration matches, the key matches the sender
// address and the signature verifies.
Result<void> check_offchain_tx(const SignedOffChainTx& stx, const PublicKey& sender_key,
                               std::uint64_t expected_iteration);

enum class Role : std::uint8_t {
    Buyer = 0,
    Seller = 1,
};

// One party's replica of the channel. `pending` always holds the energy half
// of the in-flight iteration; a credit half either completes it or is
// rejected.
struct LocalChannelState {
    ChannelId channel_id{};
    ExchangeId exchange_id{};
    Role role = Role::Buyer;
    Address self;
    Address peer;
    std::uint64_t unit_price = 2;
    std::uint64_t last_complete_iteration = 0;
    std::uint64_t cumulative_energy = 0;
    std::uint64_t cumulative_credit = 0;
    std::optional<SignedOffChainTx> pending;
    std::optional<OffChainTxPair> last_pair;
    std::uint64_t deadline_clock = 0;
};

LocalChannelState make_channel_state(const ChannelId& channel_id, Role role, const Address& self,
                                     const Address& peer, std::uint64_t unit_price);

// Registers a tx we created and signed ourselves.
Result<void> record_outgoing(LocalChannelState& state, const SignedOffChainTx& stx);

// Verifies and registers the peer's tx.
Result<void> apply_incoming(LocalChannelState& state, const SignedOffChainTx& stx,
                            const PublicKey& peer_key);

// Drops the in-flight half-iteration, reverting to the last complete pair.
void rollback_pending(LocalChannelState& state);

struct CloseProposal {
    ChannelId channel_id{};
    std::optional<OffChainTxPair> final_pair;  // empty: close with no completed trade

    Bytes canonical_bytes() const;
    bool operator==(const CloseProposal&) const = default;
};

Result<CloseProposal> propose_close(const LocalChannelState& state);

// Peer-side acceptance: the proposal must match our own view exactly.
Result<CloseProposal> accept_close(const LocalChannelState& state, const CloseProposal& proposal);

enum class TimeoutAction : std::uint8_t {
    Wait = 0,
    UnilateralClose = 1,
};

TimeoutAction on_timeout(const LocalChannelState& state, std::uint64_t blocks_waited,
                         std::uint64_t delta_timeout);

} // namespace robocomm::channel
