/*
 * Copyright (c) 2026-present the spc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SPC_WASM_CURSOR_H
#define SPC_WASM_CURSOR_H

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "spc/wasm/errors.h"

namespace spc::wasm {

// Per-byte read counters used to assert that a pass touches each byte once.
class ReadTracker {
 public:
  ReadTracker(size_t begin, size_t end) : begin_(begin), counts_(end - begin, 0) {}

  void note(size_t pos, size_t n) {
    for (size_t i = 0; i < n; i++) {
      size_t p = pos + i;
      if (p >= begin_ && p - begin_ < counts_.size()) counts_[p - begin_]++;
    }
  }

  bool each_read_once() const {
    for (uint32_t c : counts_)
      if (c != 1) return false;
    return true;
  }

  uint32_t max_reads() const {
    uint32_t m = 0;
    for (uint32_t c : counts_) m = c > m ? c : m;
    return m;
  }

  const std::vector<uint32_t>& counts() const { return counts_; }

 private:
  size_t begin_;
  std::vector<uint32_t> counts_;
};

// Forward-only reader over a byte buffer. Positions are absolute offsets.
class Cursor {
 public:
  Cursor(std::span<const uint8_t> data, size_t pos, size_t end, ReadTracker* tracker = nullptr)
      : data_(data), pos_(pos), end_(end), tracker_(tracker) {}
  explicit Cursor(std::span<const uint8_t> data) : Cursor(data, 0, data.size()) {}

  size_t pos() const { return pos_; }
  size_t end() const { return end_; }
  bool at_end() const { return pos_ >= end_; }
  size_t remaining() const { return end_ - pos_; }
  void set_tracker(ReadTracker* t) { tracker_ = t; }

  uint8_t u8() {
    if (pos_ >= end_) fail("unexpected end");
    note(1);
    return data_[pos_++];
  }

  uint32_t u32_leb() { return static_cast<uint32_t>(uleb(32)); }
  uint64_t u64_leb() { return uleb(64); }
  int32_t i32_leb() { return static_cast<int32_t>(sleb(32)); }
  int64_t i64_leb() { return sleb(64); }

  uint32_t fixed32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; i++) v |= static_cast<uint32_t>(u8()) << (8 * i);
    return v;
  }

  uint64_t fixed64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; i++) v |= static_cast<uint64_t>(u8()) << (8 * i);
    return v;
  }

  std::span<const uint8_t> bytes(size_t n) {
    if (n > remaining()) fail("unexpected end");
    note(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::string name() {
    uint32_t n = u32_leb();
    auto s = bytes(n);
    return std::string(s.begin(), s.end());
  }

  // Moves past n bytes without reading them.
  void skip(size_t n) {
    if (n > remaining()) fail("unexpected end");
    pos_ += n;
  }

  [[noreturn]] void fail(const std::string& reason) const { throw MalformedModule(pos_, reason); }

 private:
  void note(size_t n) {
    if (tracker_) tracker_->note(pos_, n);
  }

  uint64_t uleb(unsigned bits) {
    uint64_t result = 0;
    unsigned shift = 0;
    size_t start = pos_;
    while (true) {
      uint8_t b = u8();
      if (shift >= bits) {
        pos_ = start;
        fail("integer representation too long");
      }
      uint64_t chunk = b & 0x7f;
      if (shift + 7 > bits && (chunk >> (bits - shift)) != 0) {
        pos_ = start;
        fail("integer too large");
      }
      result |= chunk << shift;
      shift += 7;
      if ((b & 0x80) == 0) break;
    }
    return result;
  }

  int64_t sleb(unsigned bits) {
    uint64_t result = 0;
    unsigned shift = 0;
    size_t start = pos_;
    uint8_t b;
    while (true) {
      b = u8();
      if (shift >= bits) {
        pos_ = start;
        fail("integer representation too long");
      }
      result |= static_cast<uint64_t>(b & 0x7f) << shift;
      shift += 7;
      if ((b & 0x80) == 0) break;
    }
    if (shift < 64 && (b & 0x40)) result |= ~uint64_t{0} << shift;
    if (bits < 64) {
      int64_t v = static_cast<int64_t>(result);
      int64_t lo = -(int64_t{1} << (bits - 1));
      int64_t hi = (int64_t{1} << (bits - 1)) - 1;
      if (v < lo || v > hi) {
        pos_ = start;
        fail("integer too large");
      }
    }
    return static_cast<int64_t>(result);
  }

  std::span<const uint8_t> data_;
  size_t pos_;
  size_t end_;
  ReadTracker* tracker_;
};

// Appends Wasm binary encodings to a byte vector.
class ByteWriter {
 public:
  std::vector<uint8_t>& out() { return out_; }
  const std::vector<uint8_t>& out() const { return out_; }
  size_t size() const { return out_.size(); }

  void u8(uint8_t b) { out_.push_back(b); }
  void u32_leb(uint32_t v) {
    do {
      uint8_t b = v & 0x7f;
      v >>= 7;
      if (v) b |= 0x80;
      out_.push_back(b);
    } while (v);
  }
  void i32_leb(int32_t v) { i64_leb(v); }
  void i64_leb(int64_t v) {
    while (true) {
      uint8_t b = v & 0x7f;
      v >>= 7;
      bool done = (v == 0 && !(b & 0x40)) || (v == -1 && (b & 0x40));
      if (!done) b |= 0x80;
      out_.push_back(b);
      if (done) break;
    }
  }
  void fixed32(uint32_t v) {
    for (int i = 0; i < 4; i++) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void fixed64(uint64_t v) {
    for (int i = 0; i < 8; i++) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void bytes(std::span<const uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void name(std::string_view s) {
    u32_leb(static_cast<uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }

 private:
  std::vector<uint8_t> out_;
};

}  // namespace spc::wasm

#endif  // SPC_WASM_CURSOR_H
