//===- MergeTransform.cpp - Per-module optimistic merging -----------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/MergeTransform.h"

#include "mergelink/Canonicalize.h"
#include "mergelink/Error.h"

#include <algorithm>
#include <set>

namespace mergelink {

bool isCompatible(const StableFunctionSummary &Stored,
                  const StableFunctionSummary &Fresh) {
  if (Stored.Hash != Fresh.Hash || Stored.InstCount != Fresh.InstCount ||
      Stored.LocToHash.size() != Fresh.LocToHash.size())
    return false;
  return std::equal(Stored.LocToHash.begin(), Stored.LocToHash.end(),
                    Fresh.LocToHash.begin(),
                    [](const auto &A, const auto &B) {
                      return A.first == B.first;
                    });
}

static std::vector<MergeCandidate> matchWith(const MergeGroup &G,
                                             const Module &M,
                                             const StableHasher &Hasher,
                                             MergeReport *Report) {
  std::vector<MergeCandidate> Cands;
  bool Local = true;
  for (const StableFunctionSummary &SF : G.Summaries) {
    if (SF.ModName != M.Name) {
      Local = false;
      continue;
    }
    const Function *F = M.findFunction(SF.FnName);
    bool Ok = F && F->Orig == Origin::Original;
    if (Ok) {
      StableFunctionSummary Fresh = Hasher.computeStableFn(*F);
      Ok = isValidSummary(Fresh, *F) && isCompatible(SF, Fresh);
    }
    if (!Ok) {
      if (Report)
        ++Report->SkippedStale;
      continue;
    }
    Cands.push_back({SF, F});
  }
  if (Local && Cands.size() < 2) {
    if (Report)
      Report->SkippedSingleLocal += Cands.size();
    Cands.clear();
  }
  return Cands;
}

std::vector<MergeCandidate> match(const MergeGroup &G, const Module &M,
                                  MergeReport *Report, MixFn Mix) {
  return matchWith(G, M, StableHasher(M, Mix), Report);
}

static const Operand &operandAt(const Function &F, const Loc &L) {
  const Instruction *I = instructionAt(F, L.Inst);
  if (!I || L.Opnd >= I->Ops.size())
    throw Error("location " + formatLoc(L) + " out of range in @" + F.Name);
  const Operand &O = I->Ops[L.Opnd];
  if (!canParam(I->Op, L.Opnd, O))
    throw Error("location " + formatLoc(L) + " in @" + F.Name +
                " is not a parameterizable constant");
  return O;
}

std::vector<Operand> getArgs(const Function &F, const ParamVecs &Params) {
  std::vector<Operand> Args;
  for (const ParamEntry &P : Params) {
    if (P.Locs.empty())
      throw Error("parameter without locations");
    const Operand &First = operandAt(F, P.Locs.front());
    for (std::size_t I = 1; I < P.Locs.size(); ++I)
      if (operandAt(F, P.Locs[I]) != First)
        throw Error("operands of one parameter disagree in @" + F.Name);
    Args.push_back(First);
  }
  return Args;
}

Function createMergedFunction(const Function &F, const ParamVecs &Params) {
  Function Merged = F;
  std::set<std::string> Taken(F.Params.begin(), F.Params.end());
  for (const Block &B : F.Blocks) {
    Taken.insert(B.Params.begin(), B.Params.end());
    for (const Instruction &I : B.Insts)
      if (I.Result)
        Taken.insert(*I.Result);
  }
  unsigned OrigCount = static_cast<unsigned>(F.Params.size());
  for (std::size_t K = 0; K < Params.size(); ++K) {
    std::string Name = "p" + std::to_string(K);
    while (Taken.count(Name))
      Name = "_" + Name;
    Taken.insert(Name);
    Merged.Params.push_back(Name);
    for (const Loc &L : Params[K].Locs) {
      operandAt(F, L);
      instructionAt(Merged, L.Inst)->Ops[L.Opnd] =
          Operand::param(OrigCount + static_cast<unsigned>(K));
    }
  }
  Merged = canonicalizeLabels(canonicalizeValues(Merged));
  Merged.Name = F.Name + std::string(MergedSuffix);
  Merged.Link = Linkage::Private;
  Merged.Orig = Origin::MergedTgm;
  return Merged;
}

Function createThunk(const Function &Original, const std::string &MergedName,
                     const std::vector<Operand> &Args) {
  Function Thunk;
  Thunk.Name = Original.Name;
  Thunk.Params = Original.Params;
  Thunk.Link = Original.Link;
  Thunk.Orig = Origin::Thunk;

  Instruction Call;
  Call.Op = Opcode::Call;
  Call.Ops.push_back(Operand::global(MergedName));
  for (unsigned I = 0; I < Original.Params.size(); ++I)
    Call.Ops.push_back(Operand::param(I));
  Call.Ops.insert(Call.Ops.end(), Args.begin(), Args.end());

  Instruction Ret;
  Ret.Op = Opcode::Ret;
  if (Original.returnsValue()) {
    std::string Result = "r";
    while (std::find(Thunk.Params.begin(), Thunk.Params.end(), Result) !=
           Thunk.Params.end())
      Result = "_" + Result;
    Call.Result = Result;
    Ret.Ops.push_back(Operand::value(Result));
  }
  Thunk.Blocks.push_back({"entry", {}, {std::move(Call), std::move(Ret)}});
  return Thunk;
}

std::pair<Module, MergeReport> mergeModule(const Module &M,
                                           const GlobalMergeInfo &GMI,
                                           MixFn Mix) {
  Module Out = M;
  MergeReport Report;
  Report.ModName = M.Name;
  // Fresh summaries are always taken from the untouched input so that
  // rewriting one candidate cannot perturb another's hash.
  StableHasher Hasher(M, Mix);
  std::set<std::string> Done;
  std::vector<Function> NewFunctions;

  for (const auto &[H, G] : GMI.Groups) {
    for (const MergeCandidate &C : matchWith(G, M, Hasher, &Report)) {
      const Function &F = *C.F;
      std::string MergedName = F.Name + std::string(MergedSuffix);
      if (Done.count(F.Name) || M.findFunction(MergedName) ||
          M.findGlobal(MergedName)) {
        ++Report.SkippedError;
        continue;
      }
      try {
        std::vector<Operand> Args = getArgs(F, G.Params);
        Function Merged = createMergedFunction(F, G.Params);
        Function Thunk = createThunk(F, MergedName, Args);
        *Out.findFunction(F.Name) = std::move(Thunk);
        NewFunctions.push_back(std::move(Merged));
        Report.Entries.push_back({F.Name, MergedName, Args, F.Blocks.size()});
        ++Report.Matched;
        Done.insert(F.Name);
      } catch (const Error &) {
        ++Report.SkippedError;
      }
    }
  }
  for (Function &F : NewFunctions)
    Out.Functions.push_back(std::move(F));
  std::sort(Report.Entries.begin(), Report.Entries.end(),
            [](const MergeEntry &A, const MergeEntry &B) {
              return A.Original < B.Original;
            });
  return {std::move(Out), std::move(Report)};
}

} // namespace mergelink
