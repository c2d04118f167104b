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

#ifndef SPC_RUNTIME_VALUE_STACK_H
#define SPC_RUNTIME_VALUE_STACK_H

#include <cstddef>
#include <cstdint>
#include <vector>

#include "spc/wasm/module.h"

namespace spc::runtime {

// Frame layout, shared by interpreter and compiled frames:
//   [fp+0] function index
//   [fp+1] interpreter: next bytecode pc; compiled: resume vISA index
//   [fp+2] interpreter: sidetable position; compiled: 0
//   [fp+3] flags: bit 0 kind, bits 8..23 hotness
//   [fp+4 ...] locals, then operand slots (vfp = fp + 4)
constexpr uint32_t kFrameHeaderWords = 4;
constexpr uint32_t kMetaFunc = 0;
constexpr uint32_t kMetaIp = 1;
constexpr uint32_t kMetaStp = 2;
constexpr uint32_t kMetaFlags = 3;
constexpr uint32_t kMaxFrames = 10000;

enum class FrameKind : uint8_t { Interp = 0, Jit = 1 };

constexpr unsigned kHotShift = 8;
constexpr uint64_t kHotMax = 0xffff;

constexpr uint64_t make_flags(FrameKind k, uint64_t hotness) {
  return static_cast<uint64_t>(k) | ((hotness > kHotMax ? kHotMax : hotness) << kHotShift);
}
constexpr FrameKind flags_kind(uint64_t f) { return static_cast<FrameKind>(f & 1); }
constexpr uint64_t flags_hotness(uint64_t f) { return (f >> kHotShift) & kHotMax; }
constexpr uint64_t with_kind(uint64_t f, FrameKind k) { return (f & ~uint64_t{1}) | static_cast<uint64_t>(k); }
// Increments the hotness field, saturating at its maximum.
constexpr uint64_t tick_hotness(uint64_t f) {
  uint64_t h = flags_hotness(f);
  if (h == kHotMax) return f;
  return (f & ~(kHotMax << kHotShift)) | ((h + 1) << kHotShift);
}

// Words occupied by a frame of f, whichever tier executes it.
inline uint32_t frame_words(const wasm::WasmFunction& f) { return kFrameHeaderWords + f.frame_slots(); }

// 8-byte little-endian value slots with one tag byte per slot.
class ValueStack {
 public:
  size_t size() const { return words_.size(); }
  void ensure(size_t n) {
    if (n <= words_.size()) return;
    size_t cap = words_.size() ? words_.size() : 1024;
    while (cap < n) cap *= 2;
    words_.resize(cap, 0);
    tags_.resize(cap, 0);
  }

  uint64_t& word(size_t i) { return words_[i]; }
  uint64_t word(size_t i) const { return words_[i]; }
  uint8_t& tag(size_t i) { return tags_[i]; }
  uint8_t tag(size_t i) const { return tags_[i]; }
  uint64_t* words() { return words_.data(); }
  uint8_t* tags() { return tags_.data(); }

 private:
  std::vector<uint64_t> words_;
  std::vector<uint8_t> tags_;
};

}  // namespace spc::runtime

#endif  // SPC_RUNTIME_VALUE_STACK_H
