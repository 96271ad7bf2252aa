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

#include "robocomm/credentials.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace robocomm::vc {

namespace {

constexpr std::string_view kClaimDomain = "robocomm.claim.v1";
constexpr std::string_view kEnvelopeDomain = "robocomm.vc.v1";
constexpr std::string_view kHolderDomain = "robocomm.presentation.v1";
constexpr std::string_view kIdDomain = "robocomm.vcid.v1";

Bytes claim_proof_preimage(const CredentialId& credential_id, const Did& subject_did, const Claim& claim) {
    ByteWriter w;
    w.domain(kClaimDomain);
    w.raw(credential_id);
    w.lp(subject_did.render());
    w.lp(claim.canonical_bytes());
    return w.take();
}

Bytes envelope_preimage(const CredentialId& credential_id, const CredentialMetadata& md,
                        const std::vector<ClaimDigest>& digests) {
    ByteWriter w;
    w.domain(kEnvelopeDomain);
    w.raw(credential_id);
    w.lp(md.issuer_did.render());
    w.lp(md.subject_did.render());
    w.u64be(md.issued_at);
    w.u32be(static_cast<std::uint32_t>(digests.size()));
    for (const auto& d : digests) w.raw(d);
    return w.take();
}

Bytes holder_preimage(const CredentialId& credential_id, const std::vector<ClaimDigest>& disclosed_digests,
                      const Nonce& challenge) {
    ByteWriter w;
    w.domain(kHolderDomain);
    w.raw(credential_id);
    w.raw(challenge);
    w.u32be(static_cast<std::uint32_t>(disclosed_digests.size()));
    for (const auto& d : disclosed_digests) w.raw(d);
    return w.take();
}

} // namespace

Bytes Claim::canonical_bytes() const {
    ByteWriter w;
    w.lp(key);
    w.lp(value);
    return w.take();
}

ClaimDigest claim_digest(const Claim& c) {
    return identity::sha256(c.canonical_bytes());
}

Bytes VerifiableCredential::canonical_bytes() const {
    ByteWriter w;
    w.raw(credential_id);
    w.lp(metadata.issuer_did.render());
    w.lp(metadata.subject_did.render());
    w.u64be(metadata.issued_at);
    w.u32be(static_cast<std::uint32_t>(claims.size()));
    for (const auto& c : claims) w.lp(c.canonical_bytes());
    w.u32be(static_cast<std::uint32_t>(proofs.size()));
    for (const auto& p : proofs) {
        w.raw(p.digest);
        w.raw(p.signature.bytes);
    }
    w.raw(envelope_signature.bytes);
    return w.take();
}

std::string VerifiableCredential::to_json() const {
    nlohmann::ordered_json j;
    j["credentialId"] = to_hex(credential_id);
    j["metadata"] = {{"issuer", metadata.issuer_did.render()},
                     {"subject", metadata.subject_did.render()},
                     {"issuedAt", metadata.issued_at}};
    auto& cl = j["claims"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < claims.size(); ++i) {
        cl.push_back({{"key", claims[i].key},
                      {"value", claims[i].value},
                      {"digest", to_hex(proofs[i].digest)},
                      {"signature", to_hex(proofs[i].signature.bytes)}});
    }
    j["envelopeSignature"] = to_hex(envelope_signature.bytes);
    return j.dump(2);
}

Bytes Presentation::canonical_bytes() const {
    ByteWriter w;
    w.raw(credential_id);
    w.lp(metadata.issuer_did.render());
    w.lp(metadata.subject_did.render());
    w.u64be(metadata.issued_at);
    w.raw(challenge);
    w.u32be(static_cast<std::uint32_t>(disclosed.size()));
    for (const auto& [claim, proof] : disclosed) {
        w.lp(claim.canonical_bytes());
        w.raw(proof.digest);
        w.raw(proof.signature.bytes);
    }
    w.raw(holder_signature.bytes);
    return w.take();
}

Result<Presentation> decode_presentation(ByteSpan bytes) {
    ByteReader r(bytes);
    Presentation p;
    p.credential_id = r.fixed<16>();
    auto issuer = identity::parse_did(r.lp_str());
    auto subject = identity::parse_did(r.lp_str());
    p.metadata.issued_at = r.u64be();
    p.challenge = r.fixed<16>();
    std::uint32_t n = r.u32be();
    for (std::uint32_t i = 0; i < n && !r.failed(); ++i) {
        Bytes cb = r.lp();
        ByteReader cr(cb);
        Claim c{cr.lp_str(), cr.lp_str()};
        if (!cr.done()) return Error(Err::InvalidField, "bad claim encoding");
        ClaimProof proof;
        proof.digest = r.fixed<32>();
        proof.signature.bytes = r.fixed<64>();
        p.disclosed.emplace_back(std::move(c), proof);
    }
    p.holder_signature.bytes = r.fixed<64>();
    if (!r.done() || !issuer.ok() || !subject.ok())
        return Error(Err::InvalidField, "undecodable presentation");
    p.metadata.issuer_did = issuer.value();
    p.metadata.subject_did = subject.value();
    return p;
}

std::string Presentation::to_json() const {
    nlohmann::ordered_json j;
    j["credentialId"] = to_hex(credential_id);
    j["metadata"] = {{"issuer", metadata.issuer_did.render()},
                     {"subject", metadata.subject_did.render()},
                     {"issuedAt", metadata.issued_at}};
    j["challenge"] = to_hex(challenge);
    auto& cl = j["disclosed"] = nlohmann::ordered_json::array();
    for (const auto& [claim, proof] : disclosed) {
        cl.push_back({{"key", claim.key},
                      {"value", claim.value},
                      {"digest", to_hex(proof.digest)},
                      {"signature", to_hex(proof.signature.bytes)}});
    }
    j["holderSignature"] = to_hex(holder_signature.bytes);
    return j.dump(2);
}

Result<VerifiableCredential> issue_vc(const KeyPair& issuer_keypair, const Did& issuer_did,
                                      const Did& subject_did, std::vector<Claim> claims,
                                      BlockHeight issued_at) {
    if (claims.empty())
        return Error(Err::EmptyClaims);
    if (issuer_did.address != identity::derive_address(issuer_keypair.public_key()))
        return Error(Err::DidKeyMismatch, "issuer did does not match keypair");
    for (const auto& c : claims) {
        if (c.key.empty())
            return Error(Err::InvalidField, "empty claim key");
    }

    VerifiableCredential out;
    out.metadata = {issuer_did, subject_did, issued_at};
    out.claims = std::move(claims);

    // Credential id is derived from the full content, so issuance is
    // reproducible and ids are unique per issuer for distinct content.
    {
        ByteWriter w;
        w.domain(kIdDomain);
        w.lp(issuer_did.render());
        w.lp(subject_did.render());
        w.u64be(issued_at);
        for (const auto& c : out.claims) w.lp(c.canonical_bytes());
        auto h = identity::sha256(w.bytes());
        std::copy(h.begin(), h.begin() + out.credential_id.size(), out.credential_id.begin());
    }

    std::vector<ClaimDigest> digests;
    digests.reserve(out.claims.size());
    for (const auto& c : out.claims) {
        ClaimProof proof;
        proof.digest = claim_digest(c);
        proof.signature = identity::sign(issuer_keypair, claim_proof_preimage(out.credential_id, subject_did, c));
        digests.push_back(proof.digest);
        out.proofs.push_back(proof);
    }
    out.envelope_signature =
        identity::sign(issuer_keypair, envelope_preimage(out.credential_id, out.metadata, digests));
    return out;
}

Result<Presentation> present(const VerifiableCredential& vc, const KeyPair& subject_keypair,
                             const std::vector<std::string>& disclose_keys, const Nonce& challenge) {
    if (vc.metadata.subject_did.address != identity::derive_address(subject_keypair.public_key()))
        return Error(Err::DidKeyMismatch, "subject did does not match keypair");
    for (const auto& k : disclose_keys) {
        bool known = std::any_of(vc.claims.begin(), vc.claims.end(),
                                 [&](const Claim& c) { return c.key == k; });
        if (!known)
            return Error(Err::UnknownClaimKey, k);
    }

    Presentation p;
    p.credential_id = vc.credential_id;
    p.metadata = vc.metadata;
    p.challenge = challenge;

    std::vector<ClaimDigest> digests;
    for (std::size_t i = 0; i < vc.claims.size(); ++i) {
        bool requested = std::find(disclose_keys.begin(), disclose_keys.end(), vc.claims[i].key) !=
                         disclose_keys.end();
        if (!requested) continue;
        p.disclosed.emplace_back(vc.claims[i], vc.proofs[i]);
        digests.push_back(vc.proofs[i].digest);
    }
    p.holder_signature = identity::sign(subject_keypair, holder_preimage(p.credential_id, digests, challenge));
    return p;
}

bool verify_claim_proof(const PublicKey& issuer_key, const CredentialId& credential_id,
                        const Did& subject_did, const Claim& claim, const ClaimProof& proof) {
    if (proof.digest != claim_digest(claim)) return false;
    return identity::verify(issuer_key, claim_proof_preimage(credential_id, subject_did, claim),
                            proof.signature);
}

bool verify_envelope(const PublicKey& issuer_key, const VerifiableCredential& vcred) {
    std::vector<ClaimDigest> digests;
    digests.reserve(vcred.proofs.size());
    for (const auto& p : vcred.proofs) digests.push_back(p.digest);
    return identity::verify(issuer_key, envelope_preimage(vcred.credential_id, vcred.metadata, digests),
                            vcred.envelope_signature);
}

Result<void> verify_presentation(const Presentation& p, const IssuerView& trusted_issuer_view,
                                 const DidStatusView& did_status_view, const Nonce& expected_challenge) {
    if (!trusted_issuer_view(p.metadata.issuer_did))
        return Error(Err::UntrustedIssuer, p.metadata.issuer_did.render());

    DidView issuer = did_status_view(p.metadata.issuer_did);
    if (issuer.status == DidStatus::Unknown)
        return Error(Err::UnknownDid, "issuer: " + p.metadata.issuer_did.render());

    DidView subject = did_status_view(p.metadata.subject_did);
    if (subject.status == DidStatus::Unknown)
        return Error(Err::UnknownDid, "subject: " + p.metadata.subject_did.render());
    if (subject.status == DidStatus::Revoked)
        return Error(Err::RevokedDid, p.metadata.subject_did.render());

    std::vector<ClaimDigest> digests;
    for (const auto& [claim, proof] : p.disclosed) {
        if (!verify_claim_proof(issuer.verification_key, p.credential_id, p.metadata.subject_did, claim,
                                proof))
            return Error(Err::BadClaimProof, claim.key);
        digests.push_back(proof.digest);
    }

    if (p.challenge != expected_challenge)
        return Error(Err::ReplayedChallenge);
    if (!identity::verify(subject.verification_key, holder_preimage(p.credential_id, digests, p.challenge),
                          p.holder_signature))
        return Error(Err::BadHolderSig);
    return {};
}

} // namespace robocomm::vc
