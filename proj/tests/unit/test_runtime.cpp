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

#include <doctest.h>

#include <sstream>

#include "helpers.h"
#include "spc/harness/kernels.h"

using namespace spc;
using namespace spc::test;
using compiler::CompilerConfig;
using compiler::Tagging;
using runtime::FrameKind;
using runtime::Mode;
using runtime::Outcome;
using runtime::SafepointInfo;
using runtime::SafepointKind;

namespace {

// main() -> i32 with locals (i32, ref): stores a fresh ref, then scans.
std::vector<uint8_t> ref_local_module() {
  return single({}, I32, {I32, REF}, [](CodeBuilder& c) {
    c.i32_const(5).call(kMakeRef).local_set(1);
    c.i32_const(9).local_set(0);
    c.call(kGcScan);
    c.local_get(1).call(kRefId).local_get(0).op(Opcode::I32Add);
  }, true);
}

// main(n) -> i32: sums 0..n-1 with a counted loop.
std::vector<uint8_t> sum_module() {
  return single({I32}, I32, {I32, I32}, [](CodeBuilder& c) {
    c.block().local_get(0).op(Opcode::I32Eqz).br_if(0);
    c.loop();
    c.local_get(2).local_get(1).op(Opcode::I32Add).local_set(2);
    c.local_get(1).i32_const(1).op(Opcode::I32Add).local_tee(1);
    c.local_get(0).op(Opcode::I32LtU).br_if(0);
    c.end().end();
    c.local_get(2);
  });
}

// main() -> i32: five iterations, printing the counter in each one.
// The loop body starts at code_offset + 2.
std::vector<uint8_t> print_loop_module() {
  return single({}, I32, {I32}, [](CodeBuilder& c) {
    c.loop();
    c.local_get(0).op(Opcode::I64ExtendI32U).call(kPrint);
    c.local_get(0).i32_const(1).op(Opcode::I32Add).local_tee(0);
    c.i32_const(5).op(Opcode::I32LtS).br_if(0);
    c.end();
    c.local_get(0);
  }, true);
}

uint32_t code_offset_of_main(const std::vector<uint8_t>& bytes) {
  auto m = load(bytes);
  return m.defined(m.num_functions() - 1).code_offset;
}

runtime::HostEvent first_scan(const std::vector<runtime::HostEvent>& events) {
  for (const auto& e : events)
    if (e.name == "gc_scan") return e;
  return {};
}

}  // namespace

TEST_CASE("frame flags keep hotness inside its field") {
  using namespace runtime;
  static_assert(flags_hotness(tick_hotness(make_flags(FrameKind::Jit, 0))) == 1);
  static_assert(flags_kind(tick_hotness(make_flags(FrameKind::Jit, 5))) == FrameKind::Jit);
  static_assert(tick_hotness(make_flags(FrameKind::Interp, kHotMax)) == make_flags(FrameKind::Interp, kHotMax));
  static_assert((tick_hotness(make_flags(FrameKind::Jit, kHotMax)) >> (kHotShift + 16)) == 0);
  static_assert(flags_hotness(make_flags(FrameKind::Interp, kHotMax + 100)) == kHotMax);
  uint64_t f = make_flags(FrameKind::Jit, 0);
  for (int k = 0; k < 100000; k++) f = tick_hotness(f);
  CHECK(flags_hotness(f) == kHotMax);
  CHECK(flags_kind(f) == FrameKind::Jit);
  CHECK((f & 0xfe) == 0);
}

TEST_CASE("scan finds the ref local of a single frame") {
  auto bytes = ref_local_module();
  for (Mode mode : {Mode::Interp, Mode::Jit}) {
    Instance inst(bytes, opts_for(mode));
    auto o = inst.run();
    CHECK(*o.value == TypedValue::i32(14));
    auto ev = first_scan(inst->events());
    REQUIRE(ev.scanned);
    REQUIRE(ev.roots.size() == 1);
    CHECK(ev.roots[0] == runtime::Root{0, 1, 6});
  }
}

TEST_CASE("scan with no frames is empty") {
  Instance inst(ref_local_module(), opts_for(Mode::Interp));
  CHECK(inst->scan_roots().empty());
  CHECK(inst->frame_count() == 0);
}

TEST_CASE("lazy tagging gives the same roots without storing tags") {
  auto bytes = ref_local_module();
  Instance ref(bytes, opts_for(Mode::Interp));
  ref.run();
  for (Tagging t : {Tagging::Eager, Tagging::EagerOps, Tagging::EagerLocals, Tagging::OnDemand, Tagging::Lazy}) {
    Instance inst(bytes, opts_for(Mode::Jit, with_tagging({}, t)));
    inst.run();
    CHECK(first_scan(inst->events()).roots == first_scan(ref->events()).roots);
    if (t == Tagging::Lazy) CHECK(inst->counters().tag_stores == 0);
  }
}

TEST_CASE("scan under no tagging is an error in strict mode") {
  auto bytes = ref_local_module();
  Instance strict(bytes, opts_for(Mode::Jit, with_tagging({}, Tagging::None)));
  auto o = strict.run();
  CHECK(o.status == Outcome::Status::Trap);
  CHECK(o.trap == wasm::TrapKind::ScanError);
  auto opts = opts_for(Mode::Jit, with_tagging({}, Tagging::None));
  opts.strict_scan = false;
  Instance lax(bytes, opts);
  CHECK(*lax.run().value == TypedValue::i32(14));
  CHECK_FALSE(first_scan(lax->events()).scanned);
}

TEST_CASE("tier-up at a loop header preserves the result") {
  auto bytes = sum_module();
  auto expect = run(bytes, Mode::Interp, {}, {TypedValue::i32(100)});
  CHECK(*expect.value == TypedValue::i32(4950));
  for (int after : {1, 3, 50}) {
    auto opts = opts_for(Mode::Tiered);
    Instance inst(bytes, opts);
    int seen = 0;
    inst->set_tier_policy([&](const SafepointInfo& s) {
      if (s.kind == SafepointKind::LoopHeader && s.tier == FrameKind::Interp) return ++seen >= after;
      return false;
    });
    CHECK(inst.run({TypedValue::i32(100)}) == expect);
    CHECK(inst->counters().tier_ups == 1);
    CHECK(inst->counters().instrs_retired > 0);
  }
}

TEST_CASE("tier-up at entry preserves the result") {
  auto bytes = sum_module();
  auto expect = run(bytes, Mode::Interp, {}, {TypedValue::i32(30)});
  Instance inst(bytes, opts_for(Mode::Tiered));
  inst->set_tier_policy([](const SafepointInfo& s) { return s.kind == SafepointKind::Entry; });
  CHECK(inst.run({TypedValue::i32(30)}) == expect);
  CHECK(inst->counters().bytecodes == 0);
}

TEST_CASE("tier transitions of a paused frame") {
  auto bytes = ref_local_module();
  SUBCASE("tier-up of a compiled frame has no safepoint") {
    Instance inst(bytes, opts_for(Mode::Jit));
    bool threw = false;
    inst->set_host_hook([&](runtime::Machine& m, const runtime::HostEvent& e) {
      if (e.name != "gc_scan") return;
      CHECK(m.frame(0).kind() == FrameKind::Jit);
      CHECK_THROWS_AS(m.tier_up(0), runtime::NoSafepoint);
      threw = true;
    });
    inst.run();
    CHECK(threw);
  }
  SUBCASE("tier-down of an interpreted frame has no safepoint") {
    Instance inst(bytes, opts_for(Mode::Interp));
    inst->set_host_hook([&](runtime::Machine& m, const runtime::HostEvent& e) {
      if (e.name == "gc_scan") CHECK_THROWS_AS(m.tier_down(0), runtime::NoSafepoint);
    });
    inst.run();
  }
  SUBCASE("tier_down right after tier_up restores the frame exactly") {
    auto opts = opts_for(Mode::Tiered);
    opts.hot_threshold = UINT32_MAX;
    Instance inst(bytes, opts);
    bool checked = false;
    inst->set_host_hook([&](runtime::Machine& m, const runtime::HostEvent& e) {
      if (e.name != "gc_scan") return;
      const auto& st = m.stack();
      size_t words = 4 + m.frame(0).height();
      std::vector<uint64_t> w0(words);
      std::vector<uint8_t> t0(words);
      for (size_t k = 0; k < words; k++) w0[k] = st.word(k), t0[k] = st.tag(k);
      m.tier_up(0);
      CHECK(m.frame(0).kind() == FrameKind::Jit);
      m.tier_down(0);
      CHECK(m.frame(0).kind() == FrameKind::Interp);
      for (size_t k = 0; k < words; k++) {
        CHECK(st.word(k) == w0[k]);
        CHECK(st.tag(k) == t0[k]);
      }
      checked = true;
    });
    CHECK(*inst.run().value == TypedValue::i32(14));
    CHECK(checked);
  }
  SUBCASE("tier-up at a call return continues in compiled code") {
    auto opts = opts_for(Mode::Tiered);
    opts.hot_threshold = UINT32_MAX;
    Instance inst(bytes, opts);
    inst->set_host_hook([&](runtime::Machine& m, const runtime::HostEvent& e) {
      if (e.name == "gc_scan") m.tier_up(0);
    });
    CHECK(*inst.run().value == TypedValue::i32(14));
    CHECK(inst->counters().instrs_retired > 0);
  }
}

TEST_CASE("trap pc is the same in every tier") {
  auto bytes = single({I32, I32}, I32, {}, [](CodeBuilder& c) {
    c.local_get(0).i32_const(3).op(Opcode::I32Add).local_get(1).op(Opcode::I32DivS);
  });
  std::vector<TypedValue> args{TypedValue::i32(4), TypedValue::i32(0)};
  auto a = run(bytes, Mode::Interp, {}, args);
  CHECK(a.trap == wasm::TrapKind::DivByZero);
  for (auto t : {Tagging::None, Tagging::Eager, Tagging::OnDemand, Tagging::Lazy})
    for (auto cfg : {CompilerConfig::allopt(), CompilerConfig::nok()}) CHECK(run(bytes, Mode::Jit, with_tagging(cfg, t), args) == a);

  // Trap inside a loop after tier-down at the header.
  auto loop = single({I32}, I32, {I32}, [](CodeBuilder& c) {
    c.loop().local_get(1).i32_const(1).op(Opcode::I32Add).local_tee(1);
    c.i32_const(10).local_get(1).op(Opcode::I32Sub).op(Opcode::I32DivU).drop();
    c.br(0).end().unreachable();
  });
  auto ref = run(loop, Mode::Interp, {}, {TypedValue::i32(0)});
  CHECK(ref.trap == wasm::TrapKind::DivByZero);
  Instance inst(loop, opts_for(Mode::Tiered));
  int n = 0;
  inst->set_tier_policy([&](const SafepointInfo& s) { return s.kind == SafepointKind::LoopHeader && ++n % 3 == 0; });
  CHECK(inst.run({TypedValue::i32(0)}) == ref);
  CHECK(inst->counters().tier_downs > 0);
}

TEST_CASE("hotness tiers a function up on its tenth call") {
  FuncSpec leaf{{}, std::nullopt, {}, [](CodeBuilder& c) { c.i64_const(1).call(kPrint); }};
  FuncSpec main{{}, std::nullopt, {I32}, [](CodeBuilder& c) {
                  c.loop().call(4).local_get(0).i32_const(1).op(Opcode::I32Add).local_tee(0);
                  c.i32_const(15).op(Opcode::I32LtU).br_if(0).end();
                }};
  auto bytes = module_of({leaf, main}, true);
  for (uint32_t threshold : {10u, UINT32_MAX}) {
    auto opts = opts_for(Mode::Tiered);
    opts.hot_threshold = threshold;
    Instance inst(bytes, opts);
    std::vector<FrameKind> kinds;
    inst->set_host_hook([&](runtime::Machine& m, const runtime::HostEvent&) {
      kinds.push_back(m.frame(m.frame_count() - 1).kind());
    });
    CHECK(inst.run().ok());
    REQUIRE(kinds.size() == 15);
    for (size_t k = 0; k < kinds.size(); k++)
      CHECK(kinds[k] == (threshold == 10 && k >= 9 ? FrameKind::Jit : FrameKind::Interp));
    if (threshold == UINT32_MAX) CHECK(inst->counters().tier_ups == 0);
  }
}

TEST_CASE("deep recursion traps with stack overflow") {
  auto bytes = single({I32}, I32, {}, [](CodeBuilder& c) {
    c.local_get(0).i32_const(1).op(Opcode::I32Add).call(0);
  });
  for (Mode mode : {Mode::Interp, Mode::Jit, Mode::Tiered}) {
    auto o = run(bytes, mode, {}, {TypedValue::i32(0)});
    CHECK(o.status == Outcome::Status::Trap);
    CHECK(o.trap == wasm::TrapKind::StackOverflow);
  }
}

TEST_CASE("host imports") {
  auto bytes = single({}, I32, {}, [](CodeBuilder& c) {
    c.i64_const(-42).call(kPrint);
    c.i32_const(7).call(kMakeRef).call(kRefId);
    c.ref_null().call(kRefId).op(Opcode::I32Add);
  }, true);
  std::ostringstream out;
  auto opts = opts_for(Mode::Jit);
  opts.print = &out;
  Instance inst(bytes, opts);
  CHECK(*inst.run().value == TypedValue::i32(6));
  CHECK(out.str() == "-42\n");
  REQUIRE(inst->events().size() == 4);
  CHECK(inst->events()[1].result == std::optional<uint64_t>(8));
}

TEST_CASE("unknown imports fail to link") {
  wasm::ModuleBuilder mb;
  mb.import_func("host", "launch", mb.add_type({}, std::nullopt));
  auto& f = mb.add_function(mb.add_type({}, std::nullopt));
  f.code().call(0).end();
  mb.export_func("main", f.index());
  Instance inst(mb.build(), opts_for(Mode::Interp));
  CHECK_THROWS_AS(inst.run(), runtime::LinkError);
}

TEST_CASE("probes") {
  auto bytes = print_loop_module();
  uint32_t body = code_offset_of_main(bytes) + 2;
  uint32_t main = load(bytes).num_functions() - 1;

  SUBCASE("only at instruction boundaries") {
    Instance inst(bytes, opts_for(Mode::Interp));
    CHECK_THROWS_AS(inst->insert_probe(main, body + 1, [](const runtime::FrameView&) {}), runtime::InvalidLocation);
    CHECK_THROWS_AS(inst->insert_probe(0, body, [](const runtime::FrameView&) {}), runtime::InvalidLocation);
    CHECK_NOTHROW(inst->insert_probe(main, body, [](const runtime::FrameView&) {}));
  }
  SUBCASE("fire once per iteration in insertion order") {
    Instance inst(bytes, opts_for(Mode::Jit));
    std::vector<std::pair<int, uint64_t>> hits;
    inst->insert_probe(main, body, [&](const runtime::FrameView& f) { hits.push_back({1, f.value(0)}); });
    inst->insert_probe(main, body, [&](const runtime::FrameView& f) { hits.push_back({2, f.value(0)}); });
    CHECK(*inst.run().value == TypedValue::i32(5));
    REQUIRE(hits.size() == 10);
    for (size_t k = 0; k < 10; k++) {
      CHECK(hits[k].first == static_cast<int>(k % 2) + 1);
      CHECK(hits[k].second == k / 2);
    }
  }
  SUBCASE("inserted mid-run into compiled code matches the interpreter's trace suffix") {
    std::vector<uint64_t> full;
    {
      Instance inst(bytes, opts_for(Mode::Interp));
      inst->insert_probe(main, body, [&](const runtime::FrameView& f) { full.push_back(f.value(0)); });
      inst.run();
    }
    REQUIRE(full.size() == 5);
    auto opts = opts_for(Mode::Tiered);
    opts.hot_threshold = 1;
    Instance inst(bytes, opts);
    std::vector<uint64_t> late;
    int prints = 0;
    inst->set_host_hook([&](runtime::Machine& m, const runtime::HostEvent& e) {
      if (e.name != "print" || ++prints != 2) return;
      CHECK(m.frame(0).kind() == FrameKind::Jit);
      m.insert_probe(main, body, [&](const runtime::FrameView& f) { late.push_back(f.value(0)); });
    });
    CHECK(*inst.run().value == TypedValue::i32(5));
    CHECK(inst->counters().tier_downs == 1);
    REQUIRE(late.size() == 3);
    CHECK(std::equal(late.begin(), late.end(), full.end() - 3));
  }
}
