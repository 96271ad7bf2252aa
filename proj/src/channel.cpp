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

#include "robocomm/channel.hpp"

namespace robocomm::channel {

namespace {

constexpr std::string_view kOffChainDomain = "robocomm.offchain.v1";

Bytes signing_preimage(const OffChainTx& tx) {
    ByteWriter w;
    w.domain(kOffChainDomain);
    w.raw(tx.canonical_bytes());
    return w.take();
}

Result<void> validate_fields(const OffChainTx& tx) {
    if (tx.iteration == 0) return Error(Err::InvalidField, "iteration must be >= 1");
    if (tx.value == 0) return Error(Err::InvalidField, "value must be >= 1");
    if (tx.sender == tx.receiver) return Error(Err::InvalidField, "sender == receiver");
    if (tx.value_kind != ValueKind::EnergyUnits && tx.value_kind != ValueKind::CreditScore)
        return Error(Err::InvalidField, "unknown value kind");
    return {};
}

ValueKind outgoing_kind(Role role) {
    return role == Role::Seller ? ValueKind::EnergyUnits : ValueKind::CreditScore;
}

// The cumulative value each stream must carry at `iteration`.
std::uint64_t scheduled_value(const LocalChannelState& st, ValueKind kind, std::uint64_t iteration) {
    return kind == ValueKind::EnergyUnits ? iteration : iteration * st.unit_price;
}

void complete_iteration(LocalChannelState& st, const SignedOffChainTx& credit_half) {
    OffChainTxPair pair{*st.pending, credit_half};
    st.last_complete_iteration = credit_half.tx.iteration;
    st.cumulative_energy = pair.energy_tx.tx.value;
    st.cumulative_credit = pair.credit_tx.tx.value;
    st.last_pair = std::move(pair);
    st.pending.reset();
    st.deadline_clock = 0;
}

// Shared path for both directions once signature concerns are settled.
Result<void> note_tx(LocalChannelState& st, const SignedOffChainTx& stx) {
    const OffChainTx& tx = stx.tx;
    if (tx.exchange_id != st.exchange_id)
        return Error(Err::InvalidField, "wrong exchange id");
    if (auto r = validate_fields(tx); !r.ok()) return r;

    if (tx.iteration <= st.last_complete_iteration)
        return Error(Err::DuplicateHalf, "iteration already settled");
    if (tx.iteration != st.last_complete_iteration + 1)
        return Error(Err::OutOfOrder, "iteration gap");
    if (tx.value != scheduled_value(st, tx.value_kind, tx.iteration))
        return Error(Err::InvalidField, "value off the pay-per-unit schedule");

    if (tx.value_kind == ValueKind::EnergyUnits) {
        if (st.pending) return Error(Err::DuplicateHalf, "energy half already pending");
        st.pending = stx;
        return {};
    }
    // Credit half: only valid against a pending energy half of the same iteration.
    if (!st.pending) return Error(Err::OutOfOrder, "credit half before energy half");
    if (st.pending->tx.iteration != tx.iteration)
        return Error(Err::OutOfOrder, "credit half for a different iteration");
    complete_iteration(st, stx);
    return {};
}

} // namespace

Bytes OffChainTx::canonical_bytes() const {
    ByteWriter w;
    w.lp(exchange_id);
    w.u64be(iteration);
    w.lp(sender.bytes);
    w.lp(receiver.bytes);
    w.u64be(value);
    w.u8(static_cast<std::uint8_t>(value_kind));
    return w.take();
}

Bytes SignedOffChainTx::wire_bytes() const {
    ByteWriter w;
    w.raw(tx.canonical_bytes());
    w.lp(signature.bytes);
    return w.take();
}

Result<SignedOffChainTx> decode_offchain_tx(ByteSpan bytes) {
    ByteReader r(bytes);
    SignedOffChainTx out;
    out.tx.exchange_id = r.lp_fixed<16>();
    out.tx.iteration = r.u64be();
    out.tx.sender.bytes = r.lp_fixed<20>();
    out.tx.receiver.bytes = r.lp_fixed<20>();
    out.tx.value = r.u64be();
    std::uint8_t kind = r.u8();
    out.signature.bytes = r.lp_fixed<64>();
    if (!r.done() || kind > 1)
        return Error(Err::InvalidField, "undecodable off-chain tx");
    out.tx.value_kind = static_cast<ValueKind>(kind);
    return out;
}

Bytes OffChainTxPair::canonical_bytes() const {
    ByteWriter w;
    w.lp(energy_tx.wire_bytes());
    w.lp(credit_tx.wire_bytes());
    return w.take();
}

Result<OffChainTxPair> decode_offchain_pair(ByteSpan bytes) {
    ByteReader r(bytes);
    Bytes eb = r.lp();
    Bytes cb = r.lp();
    if (!r.done()) return Error(Err::InvalidField, "undecodable pair");
    auto e = decode_offchain_tx(eb);
    if (!e.ok()) return e.error();
    auto c = decode_offchain_tx(cb);
    if (!c.ok()) return c.error();
    return OffChainTxPair{e.take(), c.take()};
}

Result<void> validate_pair_shape(const OffChainTxPair& pair) {
    const OffChainTx& e = pair.energy_tx.tx;
    const OffChainTx& c = pair.credit_tx.tx;
    if (auto r = validate_fields(e); !r.ok()) return Error(Err::BadPair, r.error().detail);
    if (auto r = validate_fields(c); !r.ok()) return Error(Err::BadPair, r.error().detail);
    if (e.value_kind != ValueKind::EnergyUnits || c.value_kind != ValueKind::CreditScore)
        return Error(Err::BadPair, "halves have wrong kinds");
    if (e.exchange_id != c.exchange_id) return Error(Err::BadPair, "exchange id mismatch");
    if (e.iteration != c.iteration) return Error(Err::BadPair, "iteration mismatch");
    if (e.sender != c.receiver || e.receiver != c.sender)
        return Error(Err::BadPair, "sender/receiver roles not crossed");
    return {};
}

Result<OffChainTx> build_offchain_tx(const ExchangeId& exchange_id, std::uint64_t iteration,
                                     const Address& sender, const Address& receiver,
                                     std::uint64_t value, ValueKind kind) {
    OffChainTx tx{exchange_id, iteration, sender, receiver, value, kind};
    if (auto r = validate_fields(tx); !r.ok()) return r.error();
    return tx;
}

Result<SignedOffChainTx> sign_offchain_tx(const KeyPair& keypair, const OffChainTx& tx) {
    if (identity::derive_address(keypair.public_key()) != tx.sender)
        return Error(Err::DidKeyMismatch, "keypair does not match tx sender");
    return SignedOffChainTx{tx, identity::sign(keypair, signing_preimage(tx))};
}

Result<void> check_offchain_tx(const SignedOffChainTx& stx, const PublicKey& sender_key,
                               std::uint64_t expected_iteration) {
    if (auto r = validate_fields(stx.tx); !r.ok()) return r;
    if (stx.tx.iteration != expected_iteration)
        return Error(Err::WrongIteration);
    if (identity::derive_address(sender_key) != stx.tx.sender)
        return Error(Err::BadSig, "key does not match sender address");
    if (!identity::verify(sender_key, signing_preimage(stx.tx), stx.signature))
        return Error(Err::BadSig);
    return {};
}

LocalChannelState make_channel_state(const ChannelId& channel_id, Role role, const Address& self,
                                     const Address& peer, std::uint64_t unit_price) {
    LocalChannelState st;
    st.channel_id = channel_id;
    st.exchange_id = channel_id;  // one exchange per channel in this stack
    st.role = role;
    st.self = self;
    st.peer = peer;
    st.unit_price = unit_price;
    return st;
}

Result<void> record_outgoing(LocalChannelState& state, const SignedOffChainTx& stx) {
    if (stx.tx.sender != state.self || stx.tx.receiver != state.peer)
        return Error(Err::InvalidField, "outgoing tx endpoints do not match channel");
    if (stx.tx.value_kind != outgoing_kind(state.role))
        return Error(Err::InvalidField, "outgoing tx has the peer's kind");
    return note_tx(state, stx);
}

Result<void> apply_incoming(LocalChannelState& state, const SignedOffChainTx& stx,
                            const PublicKey& peer_key) {
    if (stx.tx.sender != state.peer || stx.tx.receiver != state.self)
        return Error(Err::InvalidField, "incoming tx endpoints do not match channel");
    if (stx.tx.value_kind == outgoing_kind(state.role))
        return Error(Err::InvalidField, "incoming tx has our kind");
    if (identity::derive_address(peer_key) != state.peer)
        return Error(Err::BadSig, "peer key does not match peer address");
    if (!identity::verify(peer_key, signing_preimage(stx.tx), stx.signature))
        return Error(Err::BadSig);
    return note_tx(state, stx);
}

void rollback_pending(LocalChannelState& state) {
    state.pending.reset();
}

Bytes CloseProposal::canonical_bytes() const {
    ByteWriter w;
    w.raw(channel_id);
    w.u8(final_pair ? 1 : 0);
    if (final_pair) w.raw(final_pair->canonical_bytes());
    return w.take();
}

Result<CloseProposal> propose_close(const LocalChannelState& state) {
    if (state.pending)
        return Error(Err::PendingIncomplete, "half-finished iteration; roll back or close unilaterally");
    return CloseProposal{state.channel_id, state.last_pair};
}

Result<CloseProposal> accept_close(const LocalChannelState& state, const CloseProposal& proposal) {
    if (state.pending)
        return Error(Err::PendingIncomplete);
    if (proposal.channel_id != state.channel_id)
        return Error(Err::BadPair, "proposal for a different channel");
    if (proposal.final_pair.has_value() != state.last_pair.has_value())
        return Error(Err::BadPair, "trade history disagrees");
    if (proposal.final_pair && !(*proposal.final_pair == *state.last_pair))
        return Error(Err::BadPair, "final pair disagrees");
    return proposal;
}

TimeoutAction on_timeout(const LocalChannelState&, std::uint64_t blocks_waited,
                         std::uint64_t delta_timeout) {
    return blocks_waited >= delta_timeout ? TimeoutAction::UnilateralClose : TimeoutAction::Wait;
}

} // namespace robocomm::channel
