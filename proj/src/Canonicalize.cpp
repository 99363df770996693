//===- Canonicalize.cpp - Value renumbering -------------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/Canonicalize.h"

namespace mergelink {

std::map<std::string, unsigned> valueNumbering(const Function &F) {
  std::map<std::string, unsigned> Numbers;
  unsigned Next = 0;
  for (const std::string &P : F.Params)
    Numbers.emplace(P, Next++);
  for (const Block &B : F.Blocks) {
    for (const std::string &P : B.Params)
      Numbers.emplace(P, Next++);
    for (const Instruction &I : B.Insts)
      if (I.Result)
        Numbers.emplace(*I.Result, Next++);
  }
  return Numbers;
}

Function canonicalizeValues(const Function &F) {
  std::map<std::string, unsigned> Numbers = valueNumbering(F);
  auto Rename = [&](const std::string &Name) {
    auto It = Numbers.find(Name);
    return It == Numbers.end() ? Name : std::to_string(It->second);
  };

  Function Out = F;
  for (std::string &P : Out.Params)
    P = Rename(P);
  for (Block &B : Out.Blocks) {
    for (std::string &P : B.Params)
      P = Rename(P);
    for (Instruction &I : B.Insts) {
      if (I.Result)
        I.Result = Rename(*I.Result);
      for (Operand &O : I.Ops)
        if (O.K == Operand::Kind::Value)
          O.Name = Rename(O.Name);
    }
  }
  return Out;
}

Function canonicalizeLabels(const Function &F) {
  std::map<std::string, std::string> Labels;
  for (std::size_t I = 0; I < F.Blocks.size(); ++I)
    Labels.emplace(F.Blocks[I].Label, "bb" + std::to_string(I));

  Function Out = F;
  for (Block &B : Out.Blocks) {
    B.Label = Labels.at(B.Label);
    for (Instruction &I : B.Insts)
      for (Operand &O : I.Ops)
        if (O.isLabel()) {
          auto It = Labels.find(O.Name);
          if (It != Labels.end())
            O.Name = It->second;
        }
  }
  return Out;
}

} // namespace mergelink
