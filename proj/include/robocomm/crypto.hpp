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

#include "robocomm/bytes.hpp"
#include "robocomm/result.hpp"

namespace robocomm::identity {

constexpr std::size_t kSeedSize = 32;
constexpr std::size_t kPublicKeySize = 32;
constexpr std::size_t kSignatureSize = 64;
constexpr std::size_t kHashSize = 32;

using Seed = std::array<std::uint8_t, kSeedSize>;
using Hash256 = std::array<std::uint8_t, kHashSize>;

struct PublicKey {
    std::array<std::uint8_t, kPublicKeySize> bytes{};

    auto operator<=>(const PublicKey&) const = default;
};

struct Signature {
    std::array<std::uint8_t, kSignatureSize> bytes{};

    auto operator<=>(const Signature&) const = default;
};

// Secret half never leaves this struct through any serializer; the only
// byte-producing accessor is seed(), used by the keygen tool's secret file.
class KeyPair {
  public:
    const PublicKey& public_key() const { return public_key_; }
    const Seed& seed() const { return seed_; }

    friend Result<KeyPair> generate_keypair(const Seed& seed);
    friend Signature sign(const KeyPair& kp, ByteSpan message);

  private:
    Seed seed_{};
    std::array<std::uint8_t, 64> secret_key_{}; // expanded form, sign-time only
    PublicKey public_key_;
};

// Deterministic: a fixed seed always yields the same keypair. The all-zero
// seed is rejected as a degenerate scalar.
Result<KeyPair> generate_keypair(const Seed& seed);

// Deterministic signature for a fixed (key, message).
Signature sign(const KeyPair& kp, ByteSpan message);

// Total: malformed input returns false, never throws.
bool verify(const PublicKey& pk, ByteSpan message, const Signature& sig);

Hash256 sha256(ByteSpan data);

} // namespace robocomm::identity
