//===- OutlinerTest.cpp - Closed ranges, prefix tree and outlining --------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TestSupport.h"

#include "mergelink/Error.h"
#include "mergelink/IRText.h"
#include "mergelink/Outliner.h"
#include "mergelink/Verifier.h"

#include <gtest/gtest.h>

using namespace mergelink;
using namespace mergelink::test;

namespace {

InstHashSeq hashesOf(const Module &M, std::string_view Fn, std::size_t Blk = 0) {
  const Function &F = getFunction(M, Fn);
  return instHashSeq(F.Blocks[Blk], F, StableHasher(M));
}

/// Two functions ending in the same closed three-instruction run, plus a
/// third function \p Extra.
std::string sharedTailModule(const std::string &Name, const std::string &Extra) {
  return "module " + Name +
         "\nglobal @G = 0 public\n"
         "func @a(%x) public {\nentry:\n  %p = add %x, 1\n"
         "  %t = const 7\n  %u = mul %t, 128\n  store %u, @G\n  ret %p\n}\n"
         "func @b(%y) public {\nentry:\n  %q = sub %y, 2\n"
         "  %s = const 7\n  %v = mul %s, 128\n  store %v, @G\n  ret %q\n}\n" +
         Extra;
}

TEST(InstHashSeq, IgnoresValueNames) {
  Module M = parseModule(sharedTailModule("m", ""));
  InstHashSeq A = hashesOf(M, "a"), B = hashesOf(M, "b");
  ASSERT_EQ(A.size(), 4u);
  ASSERT_EQ(B.size(), 4u);
  EXPECT_NE(A[0], B[0]);
  EXPECT_EQ(std::vector<Word>(A.begin() + 1, A.end()),
            std::vector<Word>(B.begin() + 1, B.end()));
}

TEST(InstHashSeq, EqualAcrossModules) {
  Module M1 = parseModule(sharedTailModule("m1", ""));
  Module M2 = parseModule(sharedTailModule("m2", ""));
  EXPECT_EQ(hashesOf(M1, "a"), hashesOf(M2, "a"));
}

TEST(InstHashSeq, RetOnlyBlockIsEmpty) {
  Module M = parseModule("module m\nfunc @f() {\nentry:\n  ret\n}\n");
  EXPECT_TRUE(hashesOf(M, "f").empty());
}

TEST(LegalRanges, ClosedRuns) {
  Module M = parseModule(
      "module m\nglobal @g = 0 public\nfunc @f(%a) {\nentry:\n"
      "  %t = const 5\n  store %t, @g\n"     // closed
      "  %u = add %a, 1\n  store %u, @g\n"   // uses a parameter
      "  %v = const 1\n  %w = add %v, 2\n"   // %w escapes
      "  ret %w\n}\n");
  const Block &B = getFunction(M, "f").Blocks[0];
  EXPECT_TRUE(isClosedRange(B, 0, 2));
  EXPECT_FALSE(isClosedRange(B, 2, 2));
  EXPECT_FALSE(isClosedRange(B, 4, 2));
  EXPECT_FALSE(isClosedRange(B, 5, 2));
  EXPECT_EQ(legalRanges(B), (std::vector<OutlineRange>{{0, 2}}));
}

TEST(LegalRanges, MaximalAndDisjoint) {
  Module M = parseModule(
      "module m\nglobal @g = 0 public\nfunc @f() {\nentry:\n"
      "  %a = const 1\n  store %a, @g\n  %b = const 2\n  store %b, @g\n"
      "  ret\n}\n");
  const Block &B = getFunction(M, "f").Blocks[0];
  EXPECT_EQ(legalRanges(B), (std::vector<OutlineRange>{{0, 4}}));
  EXPECT_TRUE(isClosedRange(B, 2, 2));
  EXPECT_FALSE(isClosedRange(B, 3, 2));
  EXPECT_FALSE(isClosedRange(B, 0, 5));
}

TEST(LegalRanges, InvokeIsNotOutlinable) {
  Module M = parseModule(
      "module m\nextern global @e\nfunc @f() {\nentry:\n"
      "  %a = const 1\n  %b = invoke @e(%a) to n unwind n\n  ret\nn:\n  ret\n}\n");
  EXPECT_TRUE(legalRanges(getFunction(M, "f").Blocks[0]).empty());
}

TEST(PrefixTree, Construction) {
  GlobalPrefixTree Empty = buildPrefixTree({});
  EXPECT_TRUE(Empty.empty());
  EXPECT_EQ(Empty.nodeCount(), 1u);

  GlobalPrefixTree YL = buildPrefixTree({{0xa, 0xb}});
  EXPECT_EQ(YL.nodeCount(), 3u);
  EXPECT_TRUE(YL.contains({0xa, 0xb}));
  EXPECT_FALSE(YL.contains({0xa}));

  GlobalPrefixTree T = buildPrefixTree({{1, 2, 3}, {1, 2}});
  EXPECT_EQ(T.nodeCount(), 4u);
  EXPECT_EQ(T.terminalMatches({9, 1, 2, 3, 4}, 1),
            (std::vector<std::size_t>{2, 3}));
  EXPECT_TRUE(T.terminalMatches({9, 1, 2, 3, 4}, 0).empty());
  EXPECT_EQ(T.sequences(), (std::vector<InstHashSeq>{{1, 2}, {1, 2, 3}}));
}

TEST(PrefixTree, TextRoundTrip) {
  GlobalPrefixTree T = buildPrefixTree({{3, 4}, {1, 2, 5}, {1, 2}});
  std::string Text = writePrefixTree(T);
  EXPECT_EQ(Text, "SEQ v1 0000000000000001,0000000000000002\n"
                  "SEQ v1 0000000000000001,0000000000000002,0000000000000005\n"
                  "SEQ v1 0000000000000003,0000000000000004\n");
  EXPECT_EQ(readPrefixTree(Text), T);
  EXPECT_TRUE(readPrefixTree("").empty());
  EXPECT_THROW(readPrefixTree("SEQ v2 0000000000000001\n"), ParseError);
  EXPECT_THROW(readPrefixTree("SEQ v1 00zz\n"), ParseError);
}

TEST(OutlineLocal, SharedTailIsOutlinedOnce) {
  Module M = parseModule(sharedTailModule("m1", ""));
  auto [Out, Seqs] = outlineLocal(M);
  const Function &O = getFunction(Out, "outlined.m1.0");
  EXPECT_EQ(O.Orig, Origin::Outlined);
  EXPECT_EQ(O.Link, Linkage::Private);
  EXPECT_EQ(O.instCount(), 4u);
  EXPECT_EQ(getFunction(Out, "a").instCount(), 3u);
  EXPECT_EQ(getFunction(Out, "b").instCount(), 3u);
  EXPECT_EQ(getFunction(Out, "a").Blocks[0].Insts[1].Ops[0],
            Operand::global("outlined.m1.0"));
  ASSERT_EQ(Seqs.size(), 1u);
  InstHashSeq Tail = hashesOf(M, "a");
  EXPECT_EQ(Seqs[0], InstHashSeq(Tail.begin() + 1, Tail.end()));
  EXPECT_TRUE(validate(Out).empty());
}

TEST(OutlineLocal, NoRepeatsNoChange) {
  Module M = parseModule(twinModule(1, 6));
  auto [Out, Seqs] = outlineLocal(M);
  EXPECT_EQ(Out, M);
  EXPECT_TRUE(Seqs.empty());
}

TEST(OutlineLocal, BreakEvenIsRejected) {
  // Two occurrences of a two-instruction run: 2*2 - (2*1 + 2) = 0.
  Module M = parseModule(
      "module m\nglobal @g = 0 public\n"
      "func @a() {\nentry:\n  %t = const 5\n  store %t, @g\n  ret\n}\n"
      "func @b() {\nentry:\n  %t = const 5\n  store %t, @g\n  ret\n}\n");
  EXPECT_EQ(outlineLocal(M).first, M);
  OutlineConfig Cheap;
  Cheap.CallOverhead = 0;
  EXPECT_NE(outlineLocal(M, Cheap).first, M);
}

TEST(OutlineLocal, SkipsMergedBodiesUnlessHooked) {
  std::string Tgm = "func @a.Tgm(%x) private origin=merged_tgm {\nentry:\n"
                    "  %t = const 7\n  %u = mul %t, 128\n  store %u, @G\n"
                    "  ret %x\n}\n";
  Module M = parseModule(sharedTailModule("m", Tgm));
  Module Out = outlineLocal(M).first;
  EXPECT_EQ(getFunction(Out, "a.Tgm"), getFunction(M, "a.Tgm"));
  OutlineConfig Hook;
  Hook.TgmLocalOutlining = true;
  EXPECT_NE(getFunction(outlineLocal(M, Hook).first, "a.Tgm"),
            getFunction(M, "a.Tgm"));
}

TEST(OutlineLocal, FreshNamesAvoidExistingSymbols) {
  Module M = parseModule(sharedTailModule(
      "m", "func @outlined.m.0() private {\nentry:\n  ret\n}\n"));
  Module Out = outlineLocal(M).first;
  EXPECT_EQ(getFunction(Out, "a").Blocks[0].Insts[1].Ops[0],
            Operand::global("outlined.m.1"));
}

TEST(OutlineWithTree, SingleOccurrenceHitIsOutlined) {
  Module M1 = parseModule(sharedTailModule("m1", ""));
  GlobalPrefixTree Tree = buildPrefixTree(outlineLocal(M1).second);
  Module M2 = parseModule(
      "module m2\nextern global @G\nfunc @c(%z) public {\nentry:\n"
      "  %r = mul %z, %z\n  %k = const 7\n  %w = mul %k, 128\n"
      "  store %w, @G\n  ret %r\n}\n");
  Module Out = outlineWithTree(M2, Tree);
  const Function &O = getFunction(Out, "outlined.m2.g0");
  EXPECT_EQ(O.instCount(), 4u);
  EXPECT_EQ(getFunction(Out, "c").instCount(), 3u);
  EXPECT_EQ(canonicalBody(O),
            canonicalBody(getFunction(outlineLocal(M1).first, "outlined.m1.0")));
}

TEST(OutlineWithTree, MissLeavesModuleAlone) {
  Module M = parseModule(twinModule(1, 6));
  GlobalPrefixTree Tree = buildPrefixTree({{1, 2}, {3, 4, 5}});
  EXPECT_EQ(outlineWithTree(M, Tree), M);
}

TEST(OutlineWithTree, MergedBodiesUseTreeOnly) {
  std::string Tgm = "func @c.Tgm(%x) private origin=merged_tgm {\nentry:\n"
                    "  %t = const 7\n  %u = mul %t, 128\n  store %u, @G\n"
                    "  ret %x\n}\n";
  Module M = parseModule(sharedTailModule("m", Tgm));
  // An empty tree: the local repeat in a/b is outlined, the .Tgm copy is not.
  Module NoTree = outlineWithTree(M, GlobalPrefixTree());
  EXPECT_EQ(getFunction(NoTree, "c.Tgm"), getFunction(M, "c.Tgm"));
  EXPECT_LT(getFunction(NoTree, "a").instCount(),
            getFunction(M, "a").instCount());
  // With the run published the .Tgm copy is outlined too.
  InstHashSeq Tail = hashesOf(M, "a");
  GlobalPrefixTree Tree = buildPrefixTree({InstHashSeq(Tail.begin() + 1, Tail.end())});
  Module WithTree = outlineWithTree(M, Tree);
  EXPECT_EQ(getFunction(WithTree, "c.Tgm").instCount(), 2u);
}

TEST(OutlineWithTree, LongestClosedMatchWins) {
  Module M = parseModule(
      "module m\nglobal @g = 0 public\nfunc @f() {\nentry:\n"
      "  %a = const 1\n  store %a, @g\n  %b = const 2\n  store %b, @g\n"
      "  ret\n}\n");
  InstHashSeq H = hashesOf(M, "f");
  GlobalPrefixTree Tree = buildPrefixTree({{H[0], H[1]}, H});
  Module Out = outlineWithTree(M, Tree);
  EXPECT_EQ(getFunction(Out, "outlined.m.g0").instCount(), 5u);
  EXPECT_FALSE(Out.findFunction("outlined.m.g1"));
}

TEST(Outliner, PreservesBehaviorOnCorpora) {
  for (std::uint64_t Seed = 1; Seed <= 40; ++Seed) {
    Corpus C = generateCorpus(smallCorpus(Seed));
    std::vector<InstHashSeq> All;
    for (const Module &M : C.Prog.Modules) {
      auto S = outlineLocal(M).second;
      All.insert(All.end(), S.begin(), S.end());
    }
    GlobalPrefixTree Tree = buildPrefixTree(All);
    Program Out;
    for (const Module &M : C.Prog.Modules)
      Out.Modules.push_back(outlineWithTree(M, Tree));
    EXPECT_TRUE(validate(Out).empty());
    std::optional<std::string> Diff =
        compareTraces(C.Prog, link(Out), {}, Seed, 20);
    EXPECT_FALSE(Diff) << "seed " << Seed << "\n" << *Diff;
  }
}

TEST(Outliner, Deterministic) {
  Corpus C = generateCorpus(smallCorpus(9));
  for (const Module &M : C.Prog.Modules) {
    auto A = outlineLocal(M);
    auto B = outlineLocal(M);
    EXPECT_EQ(printModule(A.first), printModule(B.first));
    EXPECT_EQ(A.second, B.second);
  }
}

} // namespace
