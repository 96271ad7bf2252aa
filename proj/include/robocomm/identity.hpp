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

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "robocomm/bytes.hpp"
#include "robocomm/crypto.hpp"
#include "robocomm/result.hpp"

namespace robocomm::identity {

using BlockHeight = std::uint64_t;

// 20-byte account identifier, rendered 0x + 40 lowercase hex chars.
struct Address {
    std::array<std::uint8_t, 20> bytes{};

    std::string render() const { return "0x" + to_hex(bytes); }
    auto operator<=>(const Address&) const = default;
};

// Trailing 20 bytes of SHA-256 over the public key encoding.
Address derive_address(const PublicKey& pk);

// did:robo:0x<40 hex>. The hex portion is normalized to lowercase on both
// parse and render, so equality on the struct is canonical equality.
struct Did {
    Address address;

    std::string render() const { return "did:robo:" + address.render(); }
    auto operator<=>(const Did&) const = default;
};

Did create_did(const Address& address);
Result<Did> parse_did(std::string_view s);

// Slash-delimited protocol/value path, e.g. /ip4/127.0.0.1/tcp/10333/p2p/<id>.
struct Multiaddr {
    std::vector<std::pair<std::string, std::string>> segments;

    std::string render() const;
    auto operator<=>(const Multiaddr&) const = default;
};

Result<Multiaddr> parse_multiaddr(std::string_view s);

struct DidDocument {
    Did id;
    PublicKey verification_key;
    std::string authentication_method; // verification scheme label
    Did controller;
    std::string service_endpoint; // rendered multiaddr
    BlockHeight created_at = 0;

    // Canonical bytes: length-prefixed fields in fixed order
    // (id, verification_key, authentication_method, controller,
    //  service_endpoint, created_at), big-endian integers. These are the
    // bytes that get signed and size-measured.
    Bytes canonical_bytes() const;
    std::string to_json() const;

    bool operator==(const DidDocument&) const = default;
};

Result<DidDocument> decode_did_document(ByteSpan bytes);

inline constexpr std::string_view kAuthenticationMethod = "Ed25519VerificationKey2020";

Result<DidDocument> build_did_document(const Did& did, const KeyPair& kp, const Multiaddr& endpoint,
                                       BlockHeight now);

} // namespace robocomm::identity
