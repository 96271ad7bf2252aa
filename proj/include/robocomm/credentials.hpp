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

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "robocomm/bytes.hpp"
#include "robocomm/identity.hpp"
#include "robocomm/result.hpp"

namespace robocomm::vc {

using identity::BlockHeight;
using identity::Did;
using identity::KeyPair;
using identity::PublicKey;
using identity::Signature;

using CredentialId = std::array<std::uint8_t, 16>;
using Nonce = std::array<std::uint8_t, 16>;
using ClaimDigest = identity::Hash256;

// Opaque key/value statement about the subject. No schema is imposed.
struct Claim {
    std::string key;
    std::string value;

    Bytes canonical_bytes() const;
    bool operator==(const Claim&) const = default;
};

ClaimDigest claim_digest(const Claim& c);

// Issuer signature covering exactly one claim, bound to the credential id
// and subject so a proof cannot be transplanted into another credential.
struct ClaimProof {
    ClaimDigest digest{};
    Signature signature;

    bool operator==(const ClaimProof&) const = default;
};

struct CredentialMetadata {
    Did issuer_did;
    Did subject_did;
    BlockHeight issued_at = 0;

    bool operator==(const CredentialMetadata&) const = default;
};

struct VerifiableCredential {
    CredentialId credential_id{};
    CredentialMetadata metadata;
    std::vector<Claim> claims;
    std::vector<ClaimProof> proofs; // one per claim, same order
    Signature envelope_signature;   // over (id, metadata, ordered claim digests)

    Bytes canonical_bytes() const;
    std::string to_json() const;
};

// Challenge-bound disclosure of a claim subset. Deliberately omits the
// envelope signature and all undisclosed digests: per-claim proofs carry
// the verification, and the aggregate digest list would leak claim count.
struct Presentation {
    CredentialId credential_id{};
    CredentialMetadata metadata;
    std::vector<std::pair<Claim, ClaimProof>> disclosed;
    Signature holder_signature; // over (id, disclosed digests, challenge)
    Nonce challenge{};

    Bytes canonical_bytes() const;
    std::string to_json() const;
};

Result<Presentation> decode_presentation(ByteSpan bytes);

Result<VerifiableCredential> issue_vc(const KeyPair& issuer_keypair, const Did& issuer_did,
                                      const Did& subject_did, std::vector<Claim> claims,
                                      BlockHeight issued_at);

Result<Presentation> present(const VerifiableCredential& vc, const KeyPair& subject_keypair,
                             const std::vector<std::string>& disclose_keys, const Nonce& challenge);

enum class DidStatus { Unknown, Active, Revoked };

struct DidView {
    DidStatus status = DidStatus::Unknown;
    PublicKey verification_key;
};

// Read-only registry snapshots; this module never touches ledger state.
using IssuerView = std::function<bool(const Did&)>;
using DidStatusView = std::function<DidView(const Did&)>;

// Accepts iff the issuer is trusted, every disclosed proof verifies, the
// holder signature binds the verifier's challenge, and the subject DID is
// active. Rejections carry the first failing reason.
Result<void> verify_presentation(const Presentation& p, const IssuerView& trusted_issuer_view,
                                 const DidStatusView& did_status_view, const Nonce& expected_challenge);

bool verify_claim_proof(const PublicKey& issuer_key, const CredentialId& credential_id,
                        const Did& subject_did, const Claim& claim, const ClaimProof& proof);

bool verify_envelope(const PublicKey& issuer_key, const VerifiableCredential& vc);

} // namespace robocomm::vc
