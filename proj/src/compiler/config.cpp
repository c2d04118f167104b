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

#include "spc/compiler/config.h"

namespace spc::compiler {

std::string_view tagging_name(Tagging t) {
  switch (t) {
    case Tagging::None: return "notags";
    case Tagging::Eager: return "eagertags";
    case Tagging::EagerOps: return "eagertags-o";
    case Tagging::EagerLocals: return "eagertags-l";
    case Tagging::OnDemand: return "on-demand";
    case Tagging::Lazy: return "lazytags";
  }
  return "?";
}

std::string_view tagging_flag(Tagging t) {
  switch (t) {
    case Tagging::None: return "none";
    case Tagging::Eager: return "eager";
    case Tagging::EagerOps: return "eager-ops";
    case Tagging::EagerLocals: return "eager-locals";
    case Tagging::OnDemand: return "on-demand";
    case Tagging::Lazy: return "lazy";
  }
  return "?";
}

std::optional<Tagging> tagging_from_flag(std::string_view s) {
  for (Tagging t : {Tagging::None, Tagging::Eager, Tagging::EagerOps, Tagging::EagerLocals, Tagging::OnDemand,
                    Tagging::Lazy})
    if (s == tagging_flag(t) || s == tagging_name(t)) return t;
  return std::nullopt;
}

bool walker_reads_local_tags(Tagging t) {
  return t == Tagging::Eager || t == Tagging::OnDemand || t == Tagging::EagerLocals;
}

bool walker_reads_operand_tags(Tagging t) {
  return t == Tagging::Eager || t == Tagging::OnDemand || t == Tagging::EagerOps || t == Tagging::Lazy;
}

bool eager_local_tags(Tagging t) { return t == Tagging::Eager || t == Tagging::EagerLocals; }
bool eager_operand_tags(Tagging t) { return t == Tagging::Eager || t == Tagging::EagerOps; }

std::string CompilerConfig::ablation_name() const {
  std::string s;
  auto add = [&](const char* n) {
    if (!s.empty()) s += "-";
    s += n;
  };
  if (!track_consts) {
    add("nok");
  } else if (!fold_consts) {
    add("nokfold");
  }
  if (track_consts && !isel_imm) add("noisel");
  if (!multi_reg) add("nomr");
  return s.empty() ? "allopt" : s;
}

std::string CompilerConfig::name() const {
  std::string s = ablation_name();
  if (tagging != Tagging::OnDemand) {
    s += "+";
    s += tagging_name(tagging);
  }
  return s;
}

std::optional<CompilerConfig> ablation_from_name(std::string_view name) {
  CompilerConfig c;
  if (name == "allopt") return c;
  size_t start = 0;
  while (start <= name.size()) {
    size_t dash = name.find('-', start);
    std::string_view part = name.substr(start, dash == std::string_view::npos ? std::string_view::npos : dash - start);
    if (part == "nok") {
      c.track_consts = c.fold_consts = c.isel_imm = false;
    } else if (part == "nokfold") {
      c.fold_consts = false;
    } else if (part == "noisel") {
      c.isel_imm = false;
    } else if (part == "nomr") {
      c.multi_reg = false;
    } else {
      return std::nullopt;
    }
    if (dash == std::string_view::npos) break;
    start = dash + 1;
  }
  return c;
}

}  // namespace spc::compiler
