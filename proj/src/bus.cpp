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

#include "robocomm/bus.hpp"

namespace robocomm::bus {

MessageBus::MessageBus(std::uint64_t seed, double drop_probability, std::uint64_t delay_ticks)
    : rng_(seed), drop_probability_(drop_probability), delay_ticks_(delay_ticks) {}

void MessageBus::subscribe(const identity::Did& did) {
    inboxes_.try_emplace(did.address);
}

bool MessageBus::subscribed(const identity::Did& did) const {
    return inboxes_.count(did.address) > 0;
}

void MessageBus::set_offline(const identity::Did& did, bool offline) {
    if (offline)
        offline_.insert(did.address);
    else
        offline_.erase(did.address);
}

bool MessageBus::offline(const identity::Did& did) const {
    return offline_.count(did.address) > 0;
}

void MessageBus::enqueue(const identity::Address& to, const Envelope& env) {
    auto it = inboxes_.find(to);
    if (it == inboxes_.end()) return;          // nobody listening on that address
    if (offline_.count(to)) return;            // radio off, message lost
    if (drop_probability_ > 0.0 && rng_.uniform01() < drop_probability_) return;
    it->second.push_back(Queued{clock_ + delay_ticks_, env});
}

void MessageBus::send(Envelope env) {
    if (offline_.count(env.from.address)) return;  // an offline sender transmits nothing
    if (env.to) {
        enqueue(env.to->address, env);
        return;
    }
    for (const auto& [addr, inbox] : inboxes_) {
        (void)inbox;
        if (addr == env.from.address) continue;
        enqueue(addr, env);
    }
}

std::vector<Envelope> MessageBus::drain(const identity::Did& did) {
    std::vector<Envelope> out;
    auto it = inboxes_.find(did.address);
    if (it == inboxes_.end()) return out;
    auto& q = it->second;
    while (!q.empty() && q.front().due <= clock_) {
        out.push_back(std::move(q.front().env));
        q.pop_front();
    }
    return out;
}

std::size_t MessageBus::pending() const {
    std::size_t n = 0;
    for (const auto& [addr, q] : inboxes_) n += q.size();
    return n;
}

} // namespace robocomm::bus
