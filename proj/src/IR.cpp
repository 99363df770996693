//===- IR.cpp - Toy word-valued SSA IR ------------------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/IR.h"

#include <algorithm>
#include <array>

namespace mergelink {

namespace {
constexpr std::array<std::string_view, 11> Mnemonics = {
    "add",  "sub",   "mul", "const", "call", "invoke",
    "load", "store", "br",  "brcond", "ret"};
} // namespace

std::string_view mnemonic(Opcode Op) {
  return Mnemonics[static_cast<std::size_t>(Op)];
}

std::optional<Opcode> opcodeFromMnemonic(std::string_view Text) {
  for (std::size_t I = 0; I < Mnemonics.size(); ++I)
    if (Mnemonics[I] == Text)
      return static_cast<Opcode>(I);
  return std::nullopt;
}

bool isTerminator(Opcode Op) {
  return Op == Opcode::Br || Op == Opcode::BrCond || Op == Opcode::Ret;
}

std::string_view linkageName(Linkage L) {
  return L == Linkage::Public ? "public" : "private";
}

std::string_view originName(Origin O) {
  switch (O) {
  case Origin::Original:
    return "original";
  case Origin::MergedTgm:
    return "merged_tgm";
  case Origin::Thunk:
    return "thunk";
  case Origin::Outlined:
    return "outlined";
  }
  return "original";
}

std::optional<Origin> originFromName(std::string_view Text) {
  for (Origin O : {Origin::Original, Origin::MergedTgm, Origin::Thunk,
                   Origin::Outlined})
    if (originName(O) == Text)
      return O;
  return std::nullopt;
}

Operand Operand::literal(Word V) {
  Operand O;
  O.K = Kind::Literal;
  O.Lit = V;
  return O;
}

Operand Operand::global(std::string Name) {
  Operand O;
  O.K = Kind::Global;
  O.Name = std::move(Name);
  return O;
}

Operand Operand::value(std::string Name) {
  Operand O;
  O.K = Kind::Value;
  O.Name = std::move(Name);
  return O;
}

Operand Operand::label(std::string Name) {
  Operand O;
  O.K = Kind::Label;
  O.Name = std::move(Name);
  return O;
}

Operand Operand::param(unsigned Index) {
  Operand O;
  O.K = Kind::Param;
  O.Index = Index;
  return O;
}

std::vector<BranchEdge> branchEdges(const Instruction &I) {
  std::vector<BranchEdge> Edges;
  switch (I.Op) {
  case Opcode::Br:
  case Opcode::BrCond: {
    // Each label operand starts an edge whose arguments run to the next label.
    for (std::size_t J = 0; J < I.Ops.size(); ++J) {
      if (!I.Ops[J].isLabel())
        continue;
      if (!Edges.empty())
        Edges.back().ArgEnd = J;
      Edges.push_back({I.Ops[J].Name, J + 1, I.Ops.size()});
    }
    break;
  }
  case Opcode::Invoke:
    for (std::size_t J = 0; J < I.Ops.size(); ++J)
      if (I.Ops[J].isLabel())
        Edges.push_back({I.Ops[J].Name, J + 1, J + 1});
    break;
  default:
    break;
  }
  return Edges;
}

std::size_t Function::instCount() const {
  std::size_t N = 0;
  for (const Block &B : Blocks)
    N += B.Insts.size();
  return N;
}

std::optional<std::size_t> Function::blockIndex(std::string_view Label) const {
  for (std::size_t I = 0; I < Blocks.size(); ++I)
    if (Blocks[I].Label == Label)
      return I;
  return std::nullopt;
}

bool Function::returnsValue() const {
  for (const Block &B : Blocks)
    for (const Instruction &I : B.Insts)
      if (I.Op == Opcode::Ret && !I.Ops.empty())
        return true;
  return false;
}

const Function *Module::findFunction(std::string_view N) const {
  for (const Function &F : Functions)
    if (F.Name == N)
      return &F;
  return nullptr;
}

Function *Module::findFunction(std::string_view N) {
  for (Function &F : Functions)
    if (F.Name == N)
      return &F;
  return nullptr;
}

const GlobalDef *Module::findGlobal(std::string_view N) const {
  for (const GlobalDef &G : Globals)
    if (G.Name == N)
      return &G;
  return nullptr;
}

const Module *Program::findModule(std::string_view N) const {
  for (const Module &M : Modules)
    if (M.Name == N)
      return &M;
  return nullptr;
}

void Program::sortModules() {
  std::stable_sort(Modules.begin(), Modules.end(),
                   [](const Module &A, const Module &B) {
                     return A.Name < B.Name;
                   });
}

const Instruction *instructionAt(const Function &F, std::uint32_t Index) {
  for (const Block &B : F.Blocks) {
    if (Index < B.Insts.size())
      return &B.Insts[Index];
    Index -= static_cast<std::uint32_t>(B.Insts.size());
  }
  return nullptr;
}

Instruction *instructionAt(Function &F, std::uint32_t Index) {
  return const_cast<Instruction *>(
      instructionAt(static_cast<const Function &>(F), Index));
}

} // namespace mergelink
