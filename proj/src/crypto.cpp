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

#include "robocomm/crypto.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>

#include <sodium.h>

namespace robocomm::identity {

namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
    });
}

} // namespace

Result<KeyPair> generate_keypair(const Seed& seed) {
    ensure_sodium();
    if (std::all_of(seed.begin(), seed.end(), [](std::uint8_t b) { return b == 0; }))
        return Error(Err::InvalidSeed, "all-zero seed");

    KeyPair kp;
    kp.seed_ = seed;
    crypto_sign_ed25519_seed_keypair(kp.public_key_.bytes.data(), kp.secret_key_.data(), seed.data());
    return kp;
}

Signature sign(const KeyPair& kp, ByteSpan message) {
    ensure_sodium();
    Signature sig;
    crypto_sign_ed25519_detached(sig.bytes.data(), nullptr, message.data(), message.size(),
                                 kp.secret_key_.data());
    return sig;
}

bool verify(const PublicKey& pk, ByteSpan message, const Signature& sig) {
    ensure_sodium();
    return crypto_sign_ed25519_verify_detached(sig.bytes.data(), message.data(), message.size(),
                                               pk.bytes.data()) == 0;
}

Hash256 sha256(ByteSpan data) {
    ensure_sodium();
    Hash256 out;
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

} // namespace robocomm::identity
