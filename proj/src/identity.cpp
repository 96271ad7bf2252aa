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

#include "robocomm/identity.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

namespace robocomm::identity {

Address derive_address(const PublicKey& pk) {
    Hash256 h = sha256(pk.bytes);
    Address a;
    std::copy(h.begin() + (h.size() - a.bytes.size()), h.end(), a.bytes.begin());
    return a;
}

Did create_did(const Address& address) {
    return Did{address};
}

Result<Did> parse_did(std::string_view s) {
    constexpr std::string_view scheme = "did:";
    constexpr std::string_view method = "robo:";
    if (s.substr(0, scheme.size()) != scheme)
        return Error(Err::MalformedDidScheme, std::string(s));
    s.remove_prefix(scheme.size());
    if (s.substr(0, method.size()) != method)
        return Error(Err::MalformedDidMethod, std::string(s));
    s.remove_prefix(method.size());
    if (s.substr(0, 2) != "0x")
        return Error(Err::MalformedDidHex, "missing 0x prefix");
    s.remove_prefix(2);
    if (s.size() != 40)
        return Error(Err::MalformedDidLength, "expected 40 hex chars, got " + std::to_string(s.size()));
    auto raw = from_hex(s);
    if (!raw)
        return Error(Err::MalformedDidHex, std::string(s));
    Did d;
    std::copy(raw->begin(), raw->end(), d.address.bytes.begin());
    return d;
}

std::string Multiaddr::render() const {
    std::string out;
    for (const auto& [proto, value] : segments) {
        out += "/" + proto + "/" + value;
    }
    return out;
}

namespace {

bool known_protocol(std::string_view p) {
    static constexpr std::string_view kKnown[] = {"ip4", "ip6", "dns4", "dns6", "tcp",
                                                  "udp", "ws",  "quic", "p2p"};
    return std::find(std::begin(kKnown), std::end(kKnown), p) != std::end(kKnown);
}

} // namespace

Result<Multiaddr> parse_multiaddr(std::string_view s) {
    if (s.empty() || s[0] != '/')
        return Error(Err::MalformedMultiaddr, "must start with /");
    Multiaddr ma;
    std::size_t pos = 1;
    while (pos < s.size()) {
        std::size_t sep = s.find('/', pos);
        if (sep == std::string_view::npos)
            return Error(Err::MalformedMultiaddr, "protocol without value");
        std::string proto(s.substr(pos, sep - pos));
        pos = sep + 1;
        sep = s.find('/', pos);
        std::string value(s.substr(pos, sep == std::string_view::npos ? std::string_view::npos : sep - pos));
        pos = sep == std::string_view::npos ? s.size() : sep + 1;
        if (!known_protocol(proto))
            return Error(Err::MalformedMultiaddr, "unknown protocol tag: " + proto);
        if (value.empty())
            return Error(Err::MalformedMultiaddr, "empty value for " + proto);
        ma.segments.emplace_back(std::move(proto), std::move(value));
    }
    if (ma.segments.empty())
        return Error(Err::MalformedMultiaddr, "no segments");
    return ma;
}

Bytes DidDocument::canonical_bytes() const {
    ByteWriter w;
    w.lp(id.render());
    w.lp(verification_key.bytes);
    w.lp(authentication_method);
    w.lp(controller.render());
    w.lp(service_endpoint);
    w.u64be(created_at);
    return w.take();
}

Result<DidDocument> decode_did_document(ByteSpan bytes) {
    ByteReader r(bytes);
    DidDocument doc;
    auto id = parse_did(r.lp_str());
    doc.verification_key.bytes = r.lp_fixed<kPublicKeySize>();
    doc.authentication_method = r.lp_str();
    auto controller = parse_did(r.lp_str());
    doc.service_endpoint = r.lp_str();
    doc.created_at = r.u64be();
    if (!r.done() || !id.ok() || !controller.ok())
        return Error(Err::DocMismatch, "undecodable document bytes");
    doc.id = id.value();
    doc.controller = controller.value();
    return doc;
}

std::string DidDocument::to_json() const {
    nlohmann::ordered_json j;
    j["id"] = id.render();
    j["verificationKey"] = to_hex(verification_key.bytes);
    j["authenticationMethod"] = authentication_method;
    j["controller"] = controller.render();
    j["serviceEndpoint"] = service_endpoint;
    j["createdAt"] = created_at;
    return j.dump(2);
}

Result<DidDocument> build_did_document(const Did& did, const KeyPair& kp, const Multiaddr& endpoint,
                                       BlockHeight now) {
    if (did.address != derive_address(kp.public_key()))
        return Error(Err::DidKeyMismatch, "did does not match keypair");
    DidDocument doc;
    doc.id = did;
    doc.verification_key = kp.public_key();
    doc.authentication_method = std::string(kAuthenticationMethod);
    doc.controller = did; // self-controlled
    doc.service_endpoint = endpoint.render();
    doc.created_at = now;
    return doc;
}

} // namespace robocomm::identity
