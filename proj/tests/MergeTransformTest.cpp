//===- MergeTransformTest.cpp - Thunks and parameterized bodies -----------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TestSupport.h"

#include "mergelink/Error.h"
#include "mergelink/IRText.h"
#include "mergelink/MergeTransform.h"
#include "mergelink/Verifier.h"

#include <gtest/gtest.h>

using namespace mergelink;
using namespace mergelink::test;

namespace {

struct Twins {
  Program P;
  GlobalMergeInfo GMI;
  const MergeGroup &group() const { return GMI.Groups.begin()->second; }
};

Twins paddedTwins() {
  Twins T;
  T.P = parseProgram({twinModule(1, 6), twinModule(2, 6)});
  std::vector<StableFunctionSummary> All;
  for (const Module &M : T.P.Modules) {
    auto S = analyzeModule(M);
    All.insert(All.end(), S.begin(), S.end());
  }
  T.GMI = combine(All);
  return T;
}

GlobalMergeInfo fourLoadInfo(const Module &M) {
  return combine(analyzeModule(M));
}

TEST(IsCompatible, UnchangedConstantOnlyAndStructuralEdits) {
  Module M = parseModule(twinModule(1, 6));
  StableFunctionSummary Stored = computeStableFn(getFunction(M, "f1"), M);
  EXPECT_TRUE(isCompatible(Stored, Stored));

  std::string Text = twinModule(1, 6);
  Text.replace(Text.find("call @g1"), 8, "call @f1");
  Module Constant = parseModule(Text);
  EXPECT_TRUE(isCompatible(
      Stored, computeStableFn(getFunction(Constant, "f1"), Constant)));

  Text = twinModule(1, 6);
  Text.replace(Text.find("sub %a"), 6, "add %a");
  Module Structural = parseModule(Text);
  EXPECT_FALSE(isCompatible(
      Stored, computeStableFn(getFunction(Structural, "f1"), Structural)));

  StableFunctionSummary Fewer = Stored;
  Fewer.InstCount += 1;
  EXPECT_FALSE(isCompatible(Stored, Fewer));
}

TEST(Match, CrossModuleGroupProceedsWithOneLocalCandidate) {
  Twins T = paddedTwins();
  MergeReport R;
  auto C = match(T.group(), T.P.Modules[0], &R);
  ASSERT_EQ(C.size(), 1u);
  EXPECT_EQ(C[0].F->Name, "f1");
  EXPECT_EQ(R.SkippedSingleLocal, 0u);
}

TEST(Match, LocalGroupNeedsTwoSurvivors) {
  Module M = parseModule(fourLoadModule());
  GlobalMergeInfo GMI = fourLoadInfo(M);
  ASSERT_EQ(GMI.Groups.size(), 1u);
  const MergeGroup &G = GMI.Groups.begin()->second;
  EXPECT_EQ(match(G, M).size(), 3u);

  // Break two of the three members: the lone survivor is dropped.
  std::string Text = fourLoadModule();
  for (int I = 0; I < 2; ++I)
    Text.replace(Text.find("%7 = mul"), 8, "%7 = sub");
  Module Edited = parseModule(Text);
  MergeReport R;
  EXPECT_TRUE(match(G, Edited, &R).empty());
  EXPECT_EQ(R.SkippedStale, 2u);
  EXPECT_EQ(R.SkippedSingleLocal, 1u);
}

TEST(Match, StaleMemberIsFiltered) {
  Module M = parseModule(fourLoadModule());
  const MergeGroup G = fourLoadInfo(M).Groups.begin()->second;
  std::string Text = fourLoadModule();
  Text.replace(Text.find("%7 = mul"), 8, "%7 = sub");
  MergeReport R;
  auto C = match(G, parseModule(Text), &R);
  ASSERT_EQ(C.size(), 2u);
  EXPECT_EQ(C[0].F->Name, "f2");
  EXPECT_EQ(C[1].F->Name, "f3");
  EXPECT_EQ(R.SkippedStale, 1u);
}

TEST(GetArgs, Examples) {
  Twins T = paddedTwins();
  EXPECT_EQ(getArgs(getFunction(T.P.Modules[0], "f1"), T.group().Params),
            std::vector<Operand>{Operand::global("g1")});

  Module M = parseModule(fourLoadModule());
  GlobalMergeInfo GMI = fourLoadInfo(M);
  const ParamVecs &P = GMI.Groups.begin()->second.Params;
  EXPECT_EQ(getArgs(getFunction(M, "f2"), P),
            (std::vector<Operand>{Operand::global("B"), Operand::global("A")}));
  EXPECT_TRUE(getArgs(getFunction(M, "f2"), {}).empty());
}

TEST(GetArgs, Errors) {
  Module M = parseModule(fourLoadModule());
  const Function &F = getFunction(M, "f2");
  EXPECT_THROW(getArgs(F, {{{1, 2}, {{40, 0}}}}), Error);
  EXPECT_THROW(getArgs(F, {{{1, 2}, {{4, 0}}}}), Error);
  // (1,0) holds @B and (2,0) holds @A in f2.
  EXPECT_THROW(getArgs(F, {{{1, 2}, {{1, 0}, {2, 0}}}}), Error);
}

TEST(CreateMergedFunction, TwinBecomesParameterized) {
  Twins T = paddedTwins();
  const Function &F1 = getFunction(T.P.Modules[0], "f1");
  Function Tgm = createMergedFunction(F1, T.group().Params);
  EXPECT_EQ(Tgm.Name, "f1.Tgm");
  EXPECT_EQ(Tgm.Link, Linkage::Private);
  EXPECT_EQ(Tgm.Orig, Origin::MergedTgm);
  ASSERT_EQ(Tgm.Params.size(), 2u);
  EXPECT_EQ(Tgm.Blocks[0].Insts[1].Ops[0], Operand::param(1));
  EXPECT_EQ(Tgm.instCount(), F1.instCount());
}

TEST(CreateMergedFunction, ZeroParamsKeepsBody) {
  Module M = parseModule(twinModule(1, 0));
  const Function &F = getFunction(M, "f1");
  Function Tgm = createMergedFunction(F, {});
  EXPECT_EQ(Tgm.Name, "f1.Tgm");
  EXPECT_EQ(canonicalBody(Tgm), canonicalBody(F));
}

TEST(CreateMergedFunction, FourLoadLocations) {
  Module M = parseModule(fourLoadModule());
  GlobalMergeInfo GMI = fourLoadInfo(M);
  const ParamVecs &P = GMI.Groups.begin()->second.Params;
  Function Tgm = createMergedFunction(getFunction(M, "f1"), P);
  ASSERT_EQ(Tgm.Params.size(), 3u);
  const auto &I = Tgm.Blocks[0].Insts;
  EXPECT_EQ(I[0].Ops[0], Operand::global("A"));
  EXPECT_EQ(I[1].Ops[0], Operand::param(1));
  EXPECT_EQ(I[2].Ops[0], Operand::param(2));
  EXPECT_EQ(I[3].Ops[0], Operand::param(1));
}

TEST(CreateThunk, ForwardsParamsThenConstants) {
  Module M = parseModule(twinModule(1, 6));
  Function Thunk = createThunk(getFunction(M, "f1"), "f1.Tgm",
                               {Operand::global("g1")});
  EXPECT_EQ(Thunk.Orig, Origin::Thunk);
  EXPECT_EQ(Thunk.Link, Linkage::Public);
  EXPECT_EQ(printFunction(Thunk),
            "func @f1(%a) public origin=thunk {\nentry:\n"
            "  %r = call @f1.Tgm(%a, @g1)\n  ret %r\n}\n");
}

TEST(CreateThunk, VoidOriginal) {
  Module M = parseModule("module m\nglobal @c = 0 public\n"
                         "func @v(%a) {\nentry:\n  store %a, @c\n  ret\n}\n");
  Function Thunk = createThunk(getFunction(M, "v"), "v.Tgm", {});
  ASSERT_EQ(Thunk.instCount(), 2u);
  EXPECT_FALSE(Thunk.Blocks[0].Insts[0].Result);
  EXPECT_TRUE(Thunk.Blocks[0].Insts[1].Ops.empty());
}

TEST(MergeModule, TwinModuleGainsThunkAndMergedBody) {
  Twins T = paddedTwins();
  auto [Out, R] = mergeModule(T.P.Modules[0], T.GMI);
  EXPECT_EQ(getFunction(Out, "f1").Orig, Origin::Thunk);
  EXPECT_EQ(getFunction(Out, "f1.Tgm").Orig, Origin::MergedTgm);
  EXPECT_EQ(Out.Functions.size(), T.P.Modules[0].Functions.size() + 1);
  ASSERT_EQ(R.Entries.size(), 1u);
  EXPECT_EQ(R.Entries[0].Args, std::vector<Operand>{Operand::global("g1")});
  EXPECT_EQ(R.Matched, 1u);
  EXPECT_TRUE(validate(Out).empty());
}

TEST(MergeModule, MergedTwinsAreByteIdentical) {
  Twins T = paddedTwins();
  Module A = mergeModule(T.P.Modules[0], T.GMI).first;
  Module B = mergeModule(T.P.Modules[1], T.GMI).first;
  EXPECT_EQ(canonicalBody(getFunction(A, "f1.Tgm")),
            canonicalBody(getFunction(B, "f2.Tgm")));
}

TEST(MergeModule, UntouchedModuleUnchanged) {
  Twins T = paddedTwins();
  Module Other = parseModule("module z\nfunc @q(%a) {\nentry:\n"
                             "  %x = add %a, 3\n  ret %x\n}\n");
  auto [Out, R] = mergeModule(Other, T.GMI);
  EXPECT_EQ(Out, Other);
  EXPECT_EQ(R.Matched + R.SkippedStale + R.SkippedSingleLocal + R.SkippedError,
            0u);
}

TEST(MergeModule, SecondApplicationChangesNothing) {
  Twins T = paddedTwins();
  Module Once = mergeModule(T.P.Modules[0], T.GMI).first;
  auto [Twice, R] = mergeModule(Once, T.GMI);
  EXPECT_EQ(Twice, Once);
  EXPECT_TRUE(R.Entries.empty());
}

TEST(MergeModule, LocalFamilyOfThree) {
  Module M = parseModule(fourLoadModule());
  auto [Out, R] = mergeModule(M, fourLoadInfo(M));
  EXPECT_EQ(R.Entries.size(), 3u);
  std::size_t Thunks = 0, Merged = 0;
  for (const Function &F : Out.Functions) {
    Thunks += F.Orig == Origin::Thunk;
    Merged += F.Orig == Origin::MergedTgm;
  }
  EXPECT_EQ(Thunks, 3u);
  EXPECT_EQ(Merged, 3u);
  EXPECT_EQ(R.Entries[2].Args,
            (std::vector<Operand>{Operand::global("A"), Operand::global("A")}));
}

TEST(MergeModule, ExistingMergedNameIsCountedNotFatal) {
  Twins T = paddedTwins();
  Module M = T.P.Modules[0];
  M.Globals.push_back({"f1.Tgm", Linkage::Public, false, Word(1)});
  auto [Out, R] = mergeModule(M, T.GMI);
  EXPECT_EQ(R.SkippedError, 1u);
  EXPECT_EQ(Out, M);
}

TEST(MergeModule, PreservesBehaviorOnCorpora) {
  for (std::uint64_t Seed = 1; Seed <= 40; ++Seed) {
    Corpus C = generateCorpus(smallCorpus(Seed));
    std::vector<StableFunctionSummary> All;
    for (const Module &M : C.Prog.Modules) {
      auto S = analyzeModule(M);
      All.insert(All.end(), S.begin(), S.end());
    }
    GlobalMergeInfo GMI = combine(All);
    Program Merged;
    for (const Module &M : C.Prog.Modules)
      Merged.Modules.push_back(mergeModule(M, GMI).first);
    EXPECT_TRUE(validate(Merged).empty());
    std::optional<std::string> Diff =
        compareTraces(C.Prog, link(Merged), {}, Seed, 20);
    EXPECT_FALSE(Diff) << "seed " << Seed << "\n" << *Diff;
  }
}

TEST(MergeModule, NoCallSiteEdits) {
  Corpus C = generateCorpus(smallCorpus(4));
  std::vector<StableFunctionSummary> All;
  for (const Module &M : C.Prog.Modules) {
    auto S = analyzeModule(M);
    All.insert(All.end(), S.begin(), S.end());
  }
  GlobalMergeInfo GMI = combine(All);
  for (const Module &M : C.Prog.Modules) {
    Module Out = mergeModule(M, GMI).first;
    for (const Function &F : M.Functions) {
      const Function &G = getFunction(Out, F.Name);
      if (G.Orig != Origin::Thunk)
        EXPECT_EQ(G, F);
    }
    for (const Function &G : Out.Functions)
      if (!M.findFunction(G.Name))
        EXPECT_TRUE(G.Name.ends_with(".Tgm"));
  }
}

} // namespace
