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

#include <algorithm>
#include <bit>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>

#include "spc/harness/fuzz.h"
#include "spc/wasm/builder.h"

namespace spc::harness {

using wasm::Opcode;
using wasm::ValType;
using Kind = Node::Kind;

namespace {

constexpr ValType kNumeric[] = {ValType::I32, ValType::I64, ValType::F32, ValType::F64};

Node konst(ValType t, uint64_t bits) {
  Node n;
  if (t == ValType::Ref) {
    n.kind = Kind::Op;
    n.op = Opcode::RefNull;
  } else {
    n.kind = Kind::Const;
    n.bits = wasm::normalize(t, bits);
  }
  n.value = true;
  n.type = t;
  return n;
}

Node mk(Opcode o, std::vector<Node> kids, std::optional<ValType> result = std::nullopt, uint32_t imm = 0) {
  Node n;
  n.kind = Kind::Op;
  n.op = o;
  n.kids = std::move(kids);
  n.value = result.has_value();
  if (result) n.type = *result;
  n.imm = imm;
  return n;
}

Opcode opc(unsigned b) { return static_cast<Opcode>(b); }

class Generator {
 public:
  Generator(uint64_t seed, const GenOptions& o) : rng_(seed), o_(o) {}

  FuzzModule run() {
    uint32_t nf = 1 + below(std::max<uint32_t>(1, o_.max_functions));
    uint32_t ng = below(4);
    for (uint32_t g = 0; g < ng; g++) {
      ValType t = kNumeric[below(4)];
      m_.globals.push_back({t, constant(t)});
    }
    uint32_t nd = below(33);
    for (uint32_t i = 0; i < nd; i++) m_.data.push_back(static_cast<uint8_t>(below(256)));
    m_.functions.resize(nf);
    for (uint32_t k = 0; k < nf; k++) {
      FuzzFunction& f = m_.functions[k];
      if (k + 1 < nf) {
        uint32_t np = below(4);
        for (uint32_t i = 0; i < np; i++) f.params.push_back(any_type());
        if (chance(0.75)) f.result = any_type();
      } else if (chance(0.8)) {
        f.result = any_type();
      }
    }
    for (uint32_t k = 0; k < nf; k++) function(k);
    return std::move(m_);
  }

 private:
  struct Label {
    uint32_t id;
    bool loop;
    std::optional<ValType> type;
  };

  std::mt19937_64 rng_;
  GenOptions o_;
  FuzzModule m_;
  uint32_t fi_ = 0;
  FuzzFunction* fn_ = nullptr;
  std::vector<bool> counter_;
  std::vector<Label> labels_;
  uint32_t next_label_ = 0;
  int budget_ = 0;
  uint32_t loop_depth_ = 0;

  uint32_t below(uint64_t n) { return n == 0 ? 0 : static_cast<uint32_t>(std::uniform_int_distribution<uint64_t>(0, n - 1)(rng_)); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  uint64_t bits64() { return rng_(); }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

  ValType any_type() {
    uint32_t r = below(100);
    if (r < 40) return ValType::I32;
    if (r < 60) return ValType::I64;
    if (r < 70) return ValType::F32;
    if (r < 85) return ValType::F64;
    return ValType::Ref;
  }

  uint64_t constant(ValType t) {
    uint32_t r = below(10);
    switch (t) {
      case ValType::I32: {
        static const int32_t special[] = {0, 1, -1, 2, 7, INT32_MIN, INT32_MAX, 31, 32, 255};
        if (r < 4) return static_cast<uint32_t>(special[below(10)]);
        if (r < 8) return static_cast<uint32_t>(static_cast<int32_t>(below(201)) - 100);
        return static_cast<uint32_t>(bits64());
      }
      case ValType::I64: {
        static const int64_t special[] = {0, 1, -1, 2, 63, 64, INT64_MIN, INT64_MAX, 0xffffffffll, 1ll << 32};
        if (r < 4) return static_cast<uint64_t>(special[below(10)]);
        if (r < 8) return static_cast<uint64_t>(static_cast<int64_t>(below(201)) - 100);
        return bits64();
      }
      case ValType::F32: {
        static const float special[] = {0.0f, -0.0f, 1.0f, -1.5f, 1e10f, 3.25f, -7.0f, 0.1f};
        if (r < 5) return std::bit_cast<uint32_t>(special[below(8)]);
        if (r < 6) return wasm::kCanonicalNaN32;
        if (r < 7) return 0x7f800000u;
        return std::bit_cast<uint32_t>(static_cast<float>(static_cast<int32_t>(below(2001)) - 1000) / 8.0f);
      }
      case ValType::F64: {
        static const double special[] = {0.0, -0.0, 1.0, -1.5, 2147483647.5, -2147483648.0, -2147483649.0, 1e300, 0.5, 42.0};
        if (r < 5) return std::bit_cast<uint64_t>(special[below(10)]);
        if (r < 6) return wasm::kCanonicalNaN64;
        if (r < 7) return 0xfff0000000000000ull;
        return std::bit_cast<uint64_t>(static_cast<double>(static_cast<int32_t>(below(20001)) - 10000) / 16.0);
      }
      case ValType::Ref: return 0;
    }
    return 0;
  }

  uint32_t num_locals() const { return static_cast<uint32_t>(fn_->params.size() + fn_->locals.size()); }
  ValType local_type(uint32_t i) const {
    return i < fn_->params.size() ? fn_->params[i] : fn_->locals[i - fn_->params.size()];
  }
  std::vector<uint32_t> locals_of(ValType t, bool writable) const {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < num_locals(); i++)
      if (local_type(i) == t && !(writable && counter_[i])) out.push_back(i);
    return out;
  }
  std::vector<uint32_t> globals_of(ValType t) const {
    std::vector<uint32_t> out;
    for (uint32_t i = 0; i < m_.globals.size(); i++)
      if (m_.globals[i].type == t) out.push_back(i);
    return out;
  }
  std::vector<uint32_t> callees(std::optional<std::optional<ValType>> result) const {
    std::vector<uint32_t> out;
    for (uint32_t j = 0; j < fi_; j++)
      if (!result || m_.functions[j].result == *result) out.push_back(j);
    return out;
  }

  void function(uint32_t k) {
    fi_ = k;
    fn_ = &m_.functions[k];
    uint32_t nl = 1 + below(6);
    for (uint32_t i = 0; i < nl; i++) fn_->locals.push_back(any_type());
    if (chance(0.6)) fn_->locals.push_back(ValType::Ref);
    counter_.assign(num_locals(), false);
    labels_ = {{0, false, fn_->result}};
    next_label_ = 1;
    budget_ = static_cast<int>(o_.max_nodes / 2 + below(o_.max_nodes / 2 + 1));
    loop_depth_ = 0;
    fn_->body = stmts(o_.max_depth);
    if (fn_->result) fn_->body.push_back(expr(*fn_->result, o_.max_depth));
  }

  std::vector<Node> stmts(int d) {
    std::vector<Node> out;
    uint32_t n = 1 + below(4);
    for (uint32_t i = 0; i < n && budget_ > 0; i++) out.push_back(stmt(d));
    return out;
  }

  // Contents of a block of type t: statements, then the value.
  std::vector<Node> arm(std::optional<ValType> t, int d) {
    std::vector<Node> out = chance(0.6) ? stmts(d) : std::vector<Node>{};
    if (t) out.push_back(expr(*t, d));
    return out;
  }

  Node leaf(ValType t) {
    std::vector<std::function<Node()>> c;
    c.push_back([&] { return konst(t, constant(t)); });
    auto ls = locals_of(t, false);
    if (!ls.empty()) {
      c.push_back([&, ls] { return mk(Opcode::LocalGet, {}, t, pick(ls)); });
      c.push_back([&, ls] { return mk(Opcode::LocalGet, {}, t, pick(ls)); });
    }
    auto gs = globals_of(t);
    if (!gs.empty()) c.push_back([&, gs] { return mk(Opcode::GlobalGet, {}, t, pick(gs)); });
    return pick(c)();
  }

  Node address(uint32_t width) {
    uint32_t r = below(100);
    if (r < 60) return konst(ValType::I32, below(1024 / width) * width);
    if (r < 90) return mk(Opcode::I32And, {expr(ValType::I32, 1), konst(ValType::I32, 0x3ff)}, ValType::I32);
    if (r < 96) return konst(ValType::I32, 65536 - width + below(4) - 1);
    return expr(ValType::I32, 1);
  }

  uint32_t mem_offset() {
    uint32_t r = below(100);
    if (r < 70) return 0;
    if (r < 97) return below(33);
    return 65536;
  }

  Node block_node(Kind k, std::optional<ValType> t, int d) {
    Node n;
    n.kind = k;
    n.value = t.has_value();
    if (t) n.type = *t;
    n.label = next_label_++;
    if (k == Kind::If) n.kids.push_back(expr(ValType::I32, d - 1));
    labels_.push_back({n.label, k == Kind::Loop, t});
    if (k == Kind::Loop) {
      loop_depth_++;
      n.body = stmts(d - 1);
      loop_depth_--;
    } else {
      n.body = arm(t, d - 1);
      if (k == Kind::If && (t || chance(0.5))) n.alt = arm(t, d - 1);
    }
    labels_.pop_back();
    return n;
  }

  Node call_node(uint32_t callee_pos) {
    const FuzzFunction& g = m_.functions[callee_pos];
    std::vector<Node> args;
    for (ValType p : g.params) args.push_back(expr(p, 1));
    return mk(Opcode::Call, std::move(args), g.result, kNumHostImports + callee_pos);
  }

  Node expr(ValType t, int d) {
    budget_--;
    if (d <= 0 || budget_ <= 0 || chance(0.3)) return leaf(t);
    std::vector<std::function<Node()>> c;
    auto bin = [&](unsigned lo, unsigned hi, ValType ty) {
      c.push_back([&, lo, hi, ty] {
        return mk(opc(lo + below(hi - lo + 1)), {expr(ty, d - 1), expr(ty, d - 1)}, ty);
      });
    };
    auto sel = [&] {
      c.push_back([&] {
        std::vector<Node> k{expr(t, d - 1), expr(t, d - 1), expr(ValType::I32, d - 1)};
        Node n = mk(t == ValType::Ref ? Opcode::SelectT : Opcode::Select, std::move(k), t);
        return n;
      });
    };
    auto blocks = [&] {
      c.push_back([&] { return block_node(Kind::If, t, d); });
      c.push_back([&] { return block_node(Kind::Block, t, d); });
    };
    auto tee = [&] {
      auto ls = locals_of(t, true);
      if (!ls.empty()) c.push_back([&, ls] { return mk(Opcode::LocalTee, {expr(t, d - 1)}, t, pick(ls)); });
    };
    auto calls = [&] {
      auto cs = callees(std::optional<ValType>(t));
      if (!cs.empty()) c.push_back([&, cs] { return call_node(pick(cs)); });
    };
    auto load = [&](Opcode o, uint32_t w) {
      c.push_back([&, o, w] { return mk(o, {address(w)}, t, mem_offset()); });
    };
    switch (t) {
      case ValType::I32:
        bin(0x6a, 0x76, ValType::I32);
        bin(0x6a, 0x76, ValType::I32);
        c.push_back([&] {
          ValType ot = kNumeric[below(4)];
          static const unsigned lo[] = {0x46, 0x51, 0x5b, 0x61}, hi[] = {0x4f, 0x5a, 0x60, 0x66};
          unsigned i = ot == ValType::I32 ? 0 : ot == ValType::I64 ? 1 : ot == ValType::F32 ? 2 : 3;
          return mk(opc(lo[i] + below(hi[i] - lo[i] + 1)), {expr(ot, d - 1), expr(ot, d - 1)}, ValType::I32);
        });
        c.push_back([&] { return mk(Opcode::I32Eqz, {expr(ValType::I32, d - 1)}, ValType::I32); });
        c.push_back([&] { return mk(Opcode::I64Eqz, {expr(ValType::I64, d - 1)}, ValType::I32); });
        c.push_back([&] { return mk(Opcode::I32WrapI64, {expr(ValType::I64, d - 1)}, ValType::I32); });
        c.push_back([&] { return mk(Opcode::I32TruncF64S, {expr(ValType::F64, d - 1)}, ValType::I32); });
        load(Opcode::I32Load, 4);
        load(Opcode::I32Load8U, 1);
        c.push_back([&] { return mk(Opcode::MemorySize, {}, ValType::I32); });
        c.push_back([&] {
          Node delta = chance(0.7) ? konst(ValType::I32, below(3))
                                   : mk(Opcode::I32And, {expr(ValType::I32, 1), konst(ValType::I32, 3)}, ValType::I32);
          return mk(Opcode::MemoryGrow, {std::move(delta)}, ValType::I32);
        });
        c.push_back([&] { return mk(Opcode::RefIsNull, {expr(ValType::Ref, d - 1)}, ValType::I32); });
        c.push_back([&] { return mk(Opcode::Call, {expr(ValType::Ref, d - 1)}, ValType::I32, kImportRefId); });
        break;
      case ValType::I64:
        bin(0x7c, 0x88, ValType::I64);
        bin(0x7c, 0x88, ValType::I64);
        c.push_back([&] { return mk(Opcode::I64ExtendI32S, {expr(ValType::I32, d - 1)}, ValType::I64); });
        c.push_back([&] { return mk(Opcode::I64ExtendI32U, {expr(ValType::I32, d - 1)}, ValType::I64); });
        load(Opcode::I64Load, 8);
        break;
      case ValType::F32:
        bin(0x92, 0x95, ValType::F32);
        c.push_back([&] {
          static const unsigned ops[] = {0x8b, 0x8c, 0x91};
          return mk(opc(ops[below(3)]), {expr(ValType::F32, d - 1)}, ValType::F32);
        });
        load(Opcode::F32Load, 4);
        break;
      case ValType::F64:
        bin(0xa0, 0xa3, ValType::F64);
        c.push_back([&] {
          static const unsigned ops[] = {0x99, 0x9a, 0x9f};
          return mk(opc(ops[below(3)]), {expr(ValType::F64, d - 1)}, ValType::F64);
        });
        c.push_back([&] { return mk(Opcode::F64ConvertI32S, {expr(ValType::I32, d - 1)}, ValType::F64); });
        load(Opcode::F64Load, 8);
        break;
      case ValType::Ref:
        c.push_back([&] { return mk(Opcode::Call, {expr(ValType::I32, d - 1)}, ValType::Ref, kImportMakeRef); });
        c.push_back([&] { return mk(Opcode::Call, {expr(ValType::I32, d - 1)}, ValType::Ref, kImportMakeRef); });
        break;
    }
    sel();
    blocks();
    tee();
    calls();
    return pick(c)();
  }

  std::vector<const Label*> targets(std::optional<std::optional<ValType>> type) const {
    std::vector<const Label*> out;
    for (const Label& l : labels_)
      if (!l.loop && (!type || l.type == *type)) out.push_back(&l);
    return out;
  }

  uint32_t depth_of(uint32_t id) const {
    for (size_t i = labels_.size(); i-- > 0;)
      if (labels_[i].id == id) return static_cast<uint32_t>(labels_.size() - 1 - i);
    return 0;
  }

  Node branch(Kind k) {
    auto ts = targets(std::nullopt);
    const Label l = *pick(ts);
    Node n;
    n.kind = k;
    n.label = l.id;
    n.imm = l.type ? 1 : 0;
    if (l.type) n.kids.push_back(expr(*l.type, 2));
    if (k == Kind::BrIf) n.kids.push_back(expr(ValType::I32, 2));
    if (k == Kind::BrTable) {
      auto same = targets(std::optional<ValType>(l.type));
      uint32_t nt = below(4);
      for (uint32_t i = 0; i < nt; i++) n.targets.push_back(pick(same)->id);
      n.kids.push_back(chance(0.7) ? konst(ValType::I32, below(nt + 2)) : expr(ValType::I32, 1));
    }
    return n;
  }

  Node stmt(int d) {
    budget_--;
    std::vector<std::pair<int, std::function<Node()>>> c;
    auto ws = [&](uint32_t i) { return !counter_[i]; };
    std::vector<uint32_t> writable;
    for (uint32_t i = 0; i < num_locals(); i++)
      if (ws(i)) writable.push_back(i);
    if (!writable.empty())
      c.push_back({12, [&] {
                     uint32_t l = pick(writable);
                     return mk(Opcode::LocalSet, {expr(local_type(l), d - 1)}, std::nullopt, l);
                   }});
    if (!m_.globals.empty())
      c.push_back({3, [&] {
                     uint32_t g = below(m_.globals.size());
                     return mk(Opcode::GlobalSet, {expr(m_.globals[g].type, d - 1)}, std::nullopt, g);
                   }});
    c.push_back({5, [&] {
                   static const std::pair<Opcode, ValType> st[] = {{Opcode::I32Store, ValType::I32},
                                                                   {Opcode::I64Store, ValType::I64},
                                                                   {Opcode::F32Store, ValType::F32},
                                                                   {Opcode::F64Store, ValType::F64},
                                                                   {Opcode::I32Store8, ValType::I32}};
                   auto [o, t] = st[below(5)];
                   uint32_t w = wasm::mem_access_info(o)->width;
                   Node a = address(w);
                   return mk(o, {std::move(a), expr(t, d - 1)}, std::nullopt, mem_offset());
                 }});
    c.push_back({3, [&] { return mk(Opcode::Drop, {expr(any_type(), d - 1)}); }});
    if (d > 0) {
      c.push_back({4, [&] { return block_node(Kind::If, std::nullopt, d); }});
      c.push_back({3, [&] { return block_node(Kind::Block, std::nullopt, d); }});
      if (loop_depth_ < 2)
        c.push_back({3, [&] {
                       uint32_t counter = num_locals();
                       fn_->locals.push_back(ValType::I32);
                       counter_.push_back(true);
                       Node n = block_node(Kind::Loop, std::nullopt, d);
                       n.imm = 1 + below(3);
                       n.imm2 = counter;
                       return n;
                     }});
    }
    c.push_back({1, [&] { return mk(Opcode::Call, {expr(ValType::I64, d - 1)}, std::nullopt, kImportPrint); }});
    c.push_back({4, [&] { return mk(Opcode::Call, {}, std::nullopt, kImportGcScan); }});
    auto refs = locals_of(ValType::Ref, true);
    if (!refs.empty())
      c.push_back({4, [&, refs] {
                     Node r = mk(Opcode::Call, {expr(ValType::I32, d - 1)}, ValType::Ref, kImportMakeRef);
                     return mk(Opcode::LocalSet, {std::move(r)}, std::nullopt, pick(refs));
                   }});
    if (!callees(std::nullopt).empty())
      c.push_back({3, [&] {
                     Node call = call_node(pick(callees(std::nullopt)));
                     return call.value ? mk(Opcode::Drop, {std::move(call)}) : call;
                   }});
    c.push_back({4, [&] { return branch(Kind::BrIf); }});
    c.push_back({1, [&] { return branch(Kind::Br); }});
    c.push_back({1, [&] { return branch(Kind::BrTable); }});
    c.push_back({1, [&] {
                   Node n;
                   n.kind = Kind::Return;
                   if (fn_->result) n.kids.push_back(expr(*fn_->result, 2));
                   return n;
                 }});
    if (chance(0.3)) c.push_back({1, [&] { return mk(Opcode::Unreachable, {}); }});
    c.push_back({1, [&] { return mk(Opcode::Nop, {}); }});
    int total = 0;
    for (auto& [w, f] : c) total += w;
    int r = static_cast<int>(below(total));
    for (auto& [w, f] : c) {
      if (r < w) return f();
      r -= w;
    }
    return mk(Opcode::Nop, {});
  }
};

// ---- encoding ----

class Encoder {
 public:
  explicit Encoder(wasm::CodeBuilder& c) : c_(c) {}

  void list(const std::vector<Node>& ns) {
    for (const Node& n : ns) node(n);
  }

  void function(const FuzzFunction& f) {
    labels_ = {0};
    list(f.body);
    c_.end();
  }

 private:
  wasm::CodeBuilder& c_;
  std::vector<uint32_t> labels_;

  uint32_t depth(uint32_t id) const {
    for (size_t i = labels_.size(); i-- > 0;)
      if (labels_[i] == id) return static_cast<uint32_t>(labels_.size() - 1 - i);
    throw std::logic_error("fuzz encoder: unknown label");
  }

  std::optional<ValType> bt(const Node& n) const {
    return n.value ? std::optional<ValType>(n.type) : std::nullopt;
  }

  void node(const Node& n) {
    switch (n.kind) {
      case Kind::Const: c_.const_of(wasm::TypedValue{n.type, n.bits}); return;
      case Kind::Op: {
        list(n.kids);
        Opcode o = n.op;
        switch (o) {
          case Opcode::LocalGet:
          case Opcode::LocalSet:
          case Opcode::LocalTee:
          case Opcode::GlobalGet:
          case Opcode::GlobalSet:
          case Opcode::Call: c_.op(o).u32(n.imm); return;
          case Opcode::MemorySize: c_.memory_size(); return;
          case Opcode::MemoryGrow: c_.memory_grow(); return;
          case Opcode::SelectT: c_.select_t(n.type); return;
          case Opcode::RefNull: c_.ref_null(); return;
          default:
            if (wasm::mem_access_info(o))
              c_.mem(o, n.imm);
            else
              c_.op(o);
            return;
        }
      }
      case Kind::Block:
        c_.block(bt(n));
        labels_.push_back(n.label);
        list(n.body);
        labels_.pop_back();
        c_.end();
        return;
      case Kind::Loop:
        c_.i32_const(static_cast<int32_t>(n.imm)).local_set(n.imm2);
        c_.loop();
        labels_.push_back(n.label);
        list(n.body);
        c_.local_get(n.imm2).i32_const(1).op(Opcode::I32Sub).local_tee(n.imm2).br_if(0);
        labels_.pop_back();
        c_.end();
        return;
      case Kind::If:
        list(n.kids);
        c_.if_(bt(n));
        labels_.push_back(n.label);
        list(n.body);
        if (n.value || !n.alt.empty()) {
          c_.else_();
          list(n.alt);
        }
        labels_.pop_back();
        c_.end();
        return;
      case Kind::Br:
        list(n.kids);
        c_.br(depth(n.label));
        return;
      case Kind::BrIf:
        list(n.kids);
        c_.br_if(depth(n.label));
        if (n.imm) c_.drop();
        return;
      case Kind::BrTable: {
        list(n.kids);
        std::vector<uint32_t> ds;
        for (uint32_t t : n.targets) ds.push_back(depth(t));
        c_.br_table(ds, depth(n.label));
        return;
      }
      case Kind::Return:
        list(n.kids);
        c_.return_();
        return;
    }
  }
};

void text(std::ostringstream& s, const Node& n, int indent);

void text_list(std::ostringstream& s, const std::vector<Node>& ns, int indent) {
  for (const Node& n : ns) {
    s << "\n" << std::string(indent * 2, ' ');
    text(s, n, indent);
  }
}

void text(std::ostringstream& s, const Node& n, int indent) {
  auto kids = [&] {
    for (const Node& k : n.kids) {
      s << " ";
      text(s, k, indent + 1);
    }
  };
  switch (n.kind) {
    case Kind::Const: s << "(" << wasm::to_string(wasm::TypedValue{n.type, n.bits}) << ")"; return;
    case Kind::Op:
      s << "(" << wasm::opcode_name(n.op);
      if (n.op == Opcode::LocalGet || n.op == Opcode::LocalSet || n.op == Opcode::LocalTee ||
          n.op == Opcode::GlobalGet || n.op == Opcode::GlobalSet || n.op == Opcode::Call)
        s << " " << n.imm;
      else if (wasm::mem_access_info(n.op))
        s << " offset=" << n.imm;
      kids();
      s << ")";
      return;
    case Kind::Block:
    case Kind::Loop:
    case Kind::If:
      s << "(" << (n.kind == Kind::Block ? "block" : n.kind == Kind::Loop ? "loop" : "if") << " $L" << n.label;
      if (n.value) s << " (result " << wasm::valtype_name(n.type) << ")";
      if (n.kind == Kind::Loop) s << " count=" << n.imm << " counter=" << n.imm2;
      kids();
      text_list(s, n.body, indent + 1);
      if (!n.alt.empty()) {
        s << "\n" << std::string(indent * 2, ' ') << " else";
        text_list(s, n.alt, indent + 1);
      }
      s << ")";
      return;
    case Kind::Br:
    case Kind::BrIf:
    case Kind::BrTable:
      s << "(" << (n.kind == Kind::Br ? "br" : n.kind == Kind::BrIf ? "br_if" : "br_table");
      for (uint32_t t : n.targets) s << " $L" << t;
      s << " $L" << n.label;
      kids();
      s << ")";
      return;
    case Kind::Return:
      s << "(return";
      kids();
      s << ")";
      return;
  }
}

// ---- shrinking ----

struct Places {
  std::vector<std::vector<Node>*> lists;
  std::vector<Node*> values;
  std::vector<Node*> loops;
};

void collect_node(Node& n, Places& p);

void collect_list(std::vector<Node>& l, Places& p) {
  p.lists.push_back(&l);
  for (Node& n : l) collect_node(n, p);
}

void collect_node(Node& n, Places& p) {
  bool zero = (n.kind == Kind::Const && n.bits == 0) || (n.kind == Kind::Op && n.op == Opcode::RefNull);
  if (n.value && !zero) p.values.push_back(&n);
  if (n.kind == Kind::Loop && n.imm > 1) p.loops.push_back(&n);
  for (Node& k : n.kids) collect_node(k, p);
  if (n.kind == Kind::Block || n.kind == Kind::Loop || n.kind == Kind::If) {
    collect_list(n.body, p);
    collect_list(n.alt, p);
  }
}

Places places(FuzzModule& m) {
  Places p;
  for (FuzzFunction& f : m.functions) collect_list(f.body, p);
  return p;
}

}  // namespace

FuzzModule generate(uint64_t seed, const GenOptions& opts) { return Generator(seed, opts).run(); }

uint64_t case_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<uint8_t> encode(const FuzzModule& m) {
  wasm::ModuleBuilder mb;
  mb.import_func("host", "gc_scan", mb.add_type({}, std::nullopt));
  mb.import_func("host", "make_ref", mb.add_type({ValType::I32}, ValType::Ref));
  mb.import_func("host", "ref_id", mb.add_type({ValType::Ref}, ValType::I32));
  mb.import_func("host", "print", mb.add_type({ValType::I64}, std::nullopt));
  for (const auto& g : m.globals) mb.add_global(g.type, true, g);
  mb.set_memory(1, 2);
  if (!m.data.empty()) mb.add_data(16, m.data);
  for (const FuzzFunction& f : m.functions) {
    auto& fb = mb.add_function(mb.add_type(f.params, f.result));
    for (ValType t : f.locals) fb.add_locals(1, t);
    Encoder(fb.code()).function(f);
  }
  mb.export_func("main", kNumHostImports + static_cast<uint32_t>(m.functions.size()) - 1);
  return mb.build();
}

std::string to_text(const FuzzModule& m) {
  std::ostringstream s;
  s << "(module";
  for (size_t g = 0; g < m.globals.size(); g++) s << "\n  (global " << g << " " << wasm::to_string(m.globals[g]) << ")";
  if (!m.data.empty()) s << "\n  (data offset=16 bytes=" << m.data.size() << ")";
  for (size_t k = 0; k < m.functions.size(); k++) {
    const FuzzFunction& f = m.functions[k];
    s << "\n  (func " << kNumHostImports + k;
    for (ValType p : f.params) s << " (param " << wasm::valtype_name(p) << ")";
    if (f.result) s << " (result " << wasm::valtype_name(*f.result) << ")";
    for (ValType l : f.locals) s << " (local " << wasm::valtype_name(l) << ")";
    text_list(s, f.body, 2);
    s << ")";
  }
  s << ")\n";
  return s.str();
}

FuzzModule shrink(const FuzzModule& m, const std::function<bool(const FuzzModule&)>& still_fails,
                  uint32_t max_attempts) {
  FuzzModule cur = m;
  uint32_t attempts = 0;
  bool progress = true;
  while (progress && attempts < max_attempts) {
    progress = false;
    Places p = places(cur);
    // Statement deletions, then loop trip counts, then constant operands.
    for (size_t li = 0; li < p.lists.size() && !progress && attempts < max_attempts; li++) {
      for (size_t i = p.lists[li]->size(); i-- > 0 && !progress && attempts < max_attempts;) {
        if ((*p.lists[li])[i].value) continue;
        FuzzModule t = cur;
        auto& l = *places(t).lists[li];
        l.erase(l.begin() + static_cast<std::ptrdiff_t>(i));
        attempts++;
        if (still_fails(t)) {
          cur = std::move(t);
          progress = true;
        }
      }
    }
    for (size_t k = 0; k < p.loops.size() && !progress && attempts < max_attempts; k++) {
      FuzzModule t = cur;
      places(t).loops[k]->imm = 1;
      attempts++;
      if (still_fails(t)) {
        cur = std::move(t);
        progress = true;
      }
    }
    for (size_t k = 0; k < p.values.size() && !progress && attempts < max_attempts; k++) {
      FuzzModule t = cur;
      Node* n = places(t).values[k];
      *n = konst(n->type, 0);
      attempts++;
      if (still_fails(t)) {
        cur = std::move(t);
        progress = true;
      }
    }
  }
  return cur;
}

}  // namespace spc::harness
