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

#include "robocomm/bytes.hpp"
#include "robocomm/result.hpp"

namespace robocomm {

std::string to_hex(ByteSpan data) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

namespace {
int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
} // namespace

std::optional<Bytes> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_val(hex[i]);
        int lo = hex_val(hex[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

const char* to_string(Err e) {
    switch (e) {
        case Err::InvalidSeed: return "InvalidSeed";
        case Err::MalformedDidScheme: return "MalformedDidScheme";
        case Err::MalformedDidMethod: return "MalformedDidMethod";
        case Err::MalformedDidHex: return "MalformedDidHex";
        case Err::MalformedDidLength: return "MalformedDidLength";
        case Err::MalformedMultiaddr: return "MalformedMultiaddr";
        case Err::DidKeyMismatch: return "DidKeyMismatch";
        case Err::EmptyClaims: return "EmptyClaims";
        case Err::UnknownClaimKey: return "UnknownClaimKey";
        case Err::UntrustedIssuer: return "UntrustedIssuer";
        case Err::BadClaimProof: return "BadClaimProof";
        case Err::BadHolderSig: return "BadHolderSig";
        case Err::ReplayedChallenge: return "ReplayedChallenge";
        case Err::RevokedDid: return "RevokedDid";
        case Err::UnknownDid: return "UnknownDid";
        case Err::BadSignature: return "BadSignature";
        case Err::UnknownTxKind: return "UnknownTxKind";
        case Err::DuplicateDid: return "DuplicateDid";
        case Err::DocMismatch: return "DocMismatch";
        case Err::NotController: return "NotController";
        case Err::AlreadyRevoked: return "AlreadyRevoked";
        case Err::NotAuthorized: return "NotAuthorized";
        case Err::DuplicateIssuer: return "DuplicateIssuer";
        case Err::DuplicateChannel: return "DuplicateChannel";
        case Err::RevokedParticipant: return "RevokedParticipant";
        case Err::DoubleConfirm: return "DoubleConfirm";
        case Err::NotOpen: return "NotOpen";
        case Err::BadPair: return "BadPair";
        case Err::InsufficientCredit: return "InsufficientCredit";
        case Err::NotParticipant: return "NotParticipant";
        case Err::ChallengeExpired: return "ChallengeExpired";
        case Err::NotNewer: return "NotNewer";
        case Err::NotChallenged: return "NotChallenged";
        case Err::DeadlineNotReached: return "DeadlineNotReached";
        case Err::BadBlockCount: return "BadBlockCount";
        case Err::BadSnapshot: return "BadSnapshot";
        case Err::InvalidField: return "InvalidField";
        case Err::WrongIteration: return "WrongIteration";
        case Err::BadSig: return "BadSig";
        case Err::OutOfOrder: return "OutOfOrder";
        case Err::DuplicateHalf: return "DuplicateHalf";
        case Err::PendingIncomplete: return "PendingIncomplete";
        case Err::EmptyCandidates: return "EmptyCandidates";
        case Err::NoCandidates: return "NoCandidates";
        case Err::BadScenario: return "BadScenario";
        case Err::InvalidConfig: return "InvalidConfig";
        case Err::IoError: return "IoError";
    }
    return "UnknownError";
}

} // namespace robocomm
