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
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace robocomm {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

std::string to_hex(ByteSpan data);
std::optional<Bytes> from_hex(std::string_view hex);

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

// Canonical encoder: big-endian integers, u32 length prefixes.
// Every signing preimage and every wire form in the stack goes through this.
class ByteWriter {
  public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32be(std::uint32_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v >> 24));
        buf_.push_back(static_cast<std::uint8_t>(v >> 16));
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
        buf_.push_back(static_cast<std::uint8_t>(v));
    }
    void u64be(std::uint64_t v) {
        u32be(static_cast<std::uint32_t>(v >> 32));
        u32be(static_cast<std::uint32_t>(v));
    }
    void i64be(std::int64_t v) { u64be(static_cast<std::uint64_t>(v)); }

    void raw(ByteSpan data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

    void lp(ByteSpan data) {
        u32be(static_cast<std::uint32_t>(data.size()));
        raw(data);
    }
    void lp(std::string_view s) {
        u32be(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    // Domain tag separating preimages of different message families.
    void domain(std::string_view tag) { lp(tag); }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

  private:
    Bytes buf_;
};

// Matching decoder. Reads fail soft: failed() latches and accessors return
// zeros, so callers check once at the end.
class ByteReader {
  public:
    explicit ByteReader(ByteSpan data) : data_(data) {}

    std::uint8_t u8() {
        if (!need(1)) return 0;
        return data_[pos_++];
    }
    std::uint32_t u32be() {
        if (!need(4)) return 0;
        std::uint32_t v = (std::uint32_t(data_[pos_]) << 24) | (std::uint32_t(data_[pos_ + 1]) << 16) |
                          (std::uint32_t(data_[pos_ + 2]) << 8) | std::uint32_t(data_[pos_ + 3]);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64be() {
        std::uint64_t hi = u32be();
        std::uint64_t lo = u32be();
        return (hi << 32) | lo;
    }
    std::int64_t i64be() { return static_cast<std::int64_t>(u64be()); }

    Bytes raw(std::size_t n) {
        if (!need(n)) return {};
        Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }
    Bytes lp() {
        std::uint32_t n = u32be();
        return raw(n);
    }
    std::string lp_str() {
        Bytes b = lp();
        return std::string(b.begin(), b.end());
    }

    template <std::size_t N>
    std::array<std::uint8_t, N> fixed() {
        std::array<std::uint8_t, N> out{};
        if (!need(N)) return out;
        std::memcpy(out.data(), data_.data() + pos_, N);
        pos_ += N;
        return out;
    }
    template <std::size_t N>
    std::array<std::uint8_t, N> lp_fixed() {
        std::array<std::uint8_t, N> out{};
        std::uint32_t n = u32be();
        if (n != N) {
            failed_ = true;
            return out;
        }
        return fixed<N>();
    }

    bool failed() const { return failed_; }
    bool at_end() const { return pos_ == data_.size(); }
    bool done() const { return !failed_ && at_end(); }
    std::size_t remaining() const { return data_.size() - pos_; }

  private:
    bool need(std::size_t n) {
        if (failed_ || data_.size() - pos_ < n) {
            failed_ = true;
            return false;
        }
        return true;
    }

    ByteSpan data_;
    std::size_t pos_ = 0;
    bool failed_ = false;
};

} // namespace robocomm
