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

#include <cassert>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace robocomm {

// Every rejection reason in the protocol stack. One flat enum so receipts
// and bus replies can carry any inner failure without translation layers.
enum class Err {
    // identity
    InvalidSeed,
    MalformedDidScheme,
    MalformedDidMethod,
    MalformedDidHex,
    MalformedDidLength,
    MalformedMultiaddr,
    DidKeyMismatch,
    // credentials
    EmptyClaims,
    UnknownClaimKey,
    UntrustedIssuer,
    BadClaimProof,
    BadHolderSig,
    ReplayedChallenge,
    RevokedDid,
    UnknownDid,
    // ledger
    BadSignature,
    UnknownTxKind,
    DuplicateDid,
    DocMismatch,
    NotController,
    AlreadyRevoked,
    NotAuthorized,
    DuplicateIssuer,
    DuplicateChannel,
    RevokedParticipant,
    DoubleConfirm,
    NotOpen,
    BadPair,
    InsufficientCredit,
    NotParticipant,
    ChallengeExpired,
    NotNewer,
    NotChallenged,
    DeadlineNotReached,
    BadBlockCount,
    BadSnapshot,
    // channel
    InvalidField,
    WrongIteration,
    BadSig,
    OutOfOrder,
    DuplicateHalf,
    PendingIncomplete,
    // trade
    EmptyCandidates,
    NoCandidates,
    BadScenario,
    // sim / cli
    InvalidConfig,
    IoError,
};

const char* to_string(Err e);

struct Error {
    Err code;
    std::string detail;

    Error(Err c, std::string d = {}) : code(c), detail(std::move(d)) {}
};

// Minimal expected-style result. value() / error() assert on wrong access.
template <typename T>
class Result {
  public:
    Result(T value) : v_(std::move(value)) {}
    Result(Error err) : v_(std::move(err)) {}
    Result(Err code, std::string detail = {}) : v_(Error(code, std::move(detail))) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    const T& value() const& {
        assert(ok());
        return std::get<T>(v_);
    }
    T& value() & {
        assert(ok());
        return std::get<T>(v_);
    }
    T take() {
        assert(ok());
        return std::get<T>(std::move(v_));
    }

    const Error& error() const {
        assert(!ok());
        return std::get<Error>(v_);
    }
    Err code() const { return error().code; }

  private:
    std::variant<T, Error> v_;
};

template <>
class Result<void> {
  public:
    Result() = default;
    Result(Error err) : err_(std::move(err)) {}
    Result(Err code, std::string detail = {}) : err_(Error(code, std::move(detail))) {}

    bool ok() const { return !err_.has_value(); }
    explicit operator bool() const { return ok(); }

    const Error& error() const {
        assert(!ok());
        return *err_;
    }
    Err code() const { return error().code; }

    static Result success() { return Result(); }

  private:
    std::optional<Error> err_;
};

} // namespace robocomm
