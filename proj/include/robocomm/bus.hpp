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

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "robocomm/bytes.hpp"
#include "robocomm/identity.hpp"
#include "robocomm/rng.hpp"

namespace robocomm::bus {

enum class MsgKind : std::uint8_t {
    BeaconPing = 1,
    BeaconOffer = 2,
    BeaconRequest = 3,
    BeaconAccept = 4,
    EnergyTx = 5,
    CreditTx = 6,
    CloseProposal = 7,
    CloseAccept = 8,
};

struct Envelope {
    identity::Did from;
    std::optional<identity::Did> to;  // nullopt broadcasts to every other subscriber
    std::uint8_t kind = 0;
    Bytes payload;
};

// In-process transport with a per-link delivery delay measured in ticks and
// an independent drop roll per queued copy. One tick models one block of
// latency; callers advance it alongside their own clock.
class MessageBus {
  public:
    explicit MessageBus(std::uint64_t seed, double drop_probability = 0.0,
                        std::uint64_t delay_ticks = 0);

    void subscribe(const identity::Did& did);
    bool subscribed(const identity::Did& did) const;
    void set_offline(const identity::Did& did, bool offline);
    bool offline(const identity::Did& did) const;

    void send(Envelope env);
    void tick() { ++clock_; }
    std::uint64_t now() const { return clock_; }

    // Due messages for this recipient, oldest first. Delivered at most once.
    std::vector<Envelope> drain(const identity::Did& did);

    std::size_t pending() const;

  private:
    struct Queued {
        std::uint64_t due;
        Envelope env;
    };

    void enqueue(const identity::Address& to, const Envelope& env);

    std::map<identity::Address, std::deque<Queued>> inboxes_;
    std::set<identity::Address> offline_;
    Rng rng_;
    double drop_probability_;
    std::uint64_t delay_ticks_;
    std::uint64_t clock_ = 0;
};

} // namespace robocomm::bus
