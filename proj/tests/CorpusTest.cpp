//===- CorpusTest.cpp - Synthetic program generator -----------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TestSupport.h"

#include "mergelink/Corpus.h"
#include "mergelink/Error.h"
#include "mergelink/IRText.h"
#include "mergelink/Verifier.h"

#include <gtest/gtest.h>

#include <set>

using namespace mergelink;
using namespace mergelink::test;

namespace {

std::string printProgram(const Program &P) {
  std::string Out;
  for (const Module &M : P.Modules)
    Out += printModule(M);
  return Out;
}

TEST(Corpus, DeterministicInSeed) {
  CorpusConfig Cfg = smallCorpus(11);
  Corpus A = generateCorpus(Cfg), B = generateCorpus(Cfg);
  EXPECT_EQ(printProgram(A.Prog), printProgram(B.Prog));
  EXPECT_EQ(A.Manifest, B.Manifest);
  Cfg.Seed = 12;
  EXPECT_NE(printProgram(generateCorpus(Cfg).Prog), printProgram(A.Prog));
}

TEST(Corpus, ManifestHoldsAcrossSeeds) {
  for (std::uint64_t Seed = 1; Seed <= 200; ++Seed) {
    Corpus C = generateCorpus(smallCorpus(Seed));
    EXPECT_TRUE(validate(C.Prog).empty()) << "seed " << Seed;
    std::vector<std::string> Issues = verifyManifest(C.Prog, C.Manifest);
    EXPECT_TRUE(Issues.empty()) << "seed " << Seed << ": " << Issues.front();
  }
}

TEST(Corpus, ShapeFollowsConfig) {
  for (FamilySpread Spread :
       {FamilySpread::Local, FamilySpread::CrossModule, FamilySpread::Mixed}) {
    CorpusConfig Cfg;
    Cfg.Modules = 4;
    Cfg.FunctionsPerModule = 10;
    Cfg.Families = 4;
    Cfg.FamilySizeMin = 2;
    Cfg.FamilySizeMax = 4;
    Cfg.DivergentLocs = 2;
    Cfg.BlocksMax = 4;
    Cfg.Motifs = 2;
    Cfg.MotifLen = 4;
    Cfg.MotifRemoteSites = 2;
    Cfg.Spread = Spread;
    Cfg.Seed = 5;
    Corpus C = generateCorpus(Cfg);
    ASSERT_EQ(C.Prog.Modules.size(), 4u);
    EXPECT_TRUE(verifyManifest(C.Prog, C.Manifest).empty());
    ASSERT_EQ(C.Manifest.Families.size(), 4u);
    for (const FamilyInfo &F : C.Manifest.Families) {
      EXPECT_GE(F.Members.size(), 2u);
      EXPECT_LE(F.Members.size(), 4u);
      EXPECT_EQ(F.Params, 2u);
      EXPECT_EQ(F.Locs.size(), 2u);
      EXPECT_GE(F.Blocks, 1u);
      EXPECT_LE(F.Blocks, 4u);
      std::set<std::string> Mods;
      for (const auto &[Mod, Fn] : F.Members)
        Mods.insert(Mod);
      if (Spread == FamilySpread::Local)
        EXPECT_EQ(Mods.size(), 1u);
      if (Spread == FamilySpread::CrossModule)
        EXPECT_EQ(Mods.size(), F.Members.size());
    }
    ASSERT_EQ(C.Manifest.Motifs.size(), 2u);
    for (const MotifInfo &Mo : C.Manifest.Motifs) {
      EXPECT_EQ(Mo.Len, 4u);
      EXPECT_EQ(Mo.Sites.size(), 4u);
    }
    for (const Module &M : C.Prog.Modules)
      EXPECT_GE(M.Functions.size(), 10u);
  }
}

TEST(Corpus, VerifyCatchesDamage) {
  Corpus C = generateCorpus(smallCorpus(21));
  ASSERT_FALSE(C.Manifest.Families.empty());
  const auto &[Mod, Fn] = C.Manifest.Families[0].Members[0];
  Program Broken = C.Prog;
  for (Module &M : Broken.Modules)
    for (Function &F : M.Functions)
      if (M.Name == Mod && F.Name == Fn)
        F.Blocks[0].Insts[0].Op = Opcode::Mul;
  EXPECT_FALSE(verifyManifest(Broken, C.Manifest).empty());

  CorpusManifest Wrong = C.Manifest;
  ++Wrong.Families[0].Params;
  EXPECT_FALSE(verifyManifest(C.Prog, Wrong).empty());

  Wrong = C.Manifest;
  Wrong.Families[0].Members.push_back({"nowhere", "nothing"});
  EXPECT_FALSE(verifyManifest(C.Prog, Wrong).empty());

  if (!C.Manifest.Motifs.empty()) {
    Wrong = C.Manifest;
    Wrong.Motifs[0].Sites[0].Start += 100;
    EXPECT_FALSE(verifyManifest(C.Prog, Wrong).empty());
  }
}

TEST(Corpus, ManifestTextRoundTrip) {
  for (std::uint64_t Seed = 1; Seed <= 20; ++Seed) {
    Corpus C = generateCorpus(smallCorpus(Seed));
    std::string Text = writeManifest(C.Manifest);
    EXPECT_EQ(readManifest(Text), C.Manifest);
    EXPECT_EQ(writeManifest(readManifest(Text)), Text);
  }
  EXPECT_TRUE(readManifest("").Families.empty());
  EXPECT_THROW(readManifest("FAM 0 params=x insts=1 blocks=1 locs= members=\n"),
               ParseError);
  EXPECT_THROW(readManifest("BOGUS 1\n"), ParseError);
  EXPECT_THROW(readManifest("MOTIF 0 len=3 sites=a:b\n"), ParseError);
}

TEST(Corpus, InfeasibleConfigsThrow) {
  CorpusConfig Cfg;
  Cfg.Modules = 0;
  EXPECT_THROW(generateCorpus(Cfg), Error);
  Cfg = {};
  Cfg.FamilySizeMin = 1;
  EXPECT_THROW(generateCorpus(Cfg), Error);
  Cfg = {};
  Cfg.Spread = FamilySpread::CrossModule;
  Cfg.Modules = 2;
  Cfg.FamilySizeMax = 3;
  EXPECT_THROW(generateCorpus(Cfg), Error);
  Cfg = {};
  Cfg.Families = 20;
  EXPECT_THROW(generateCorpus(Cfg), Error);
  Cfg = {};
  Cfg.BlocksMin = 0;
  EXPECT_THROW(generateCorpus(Cfg), Error);
}

TEST(Corpus, SpreadNames) {
  for (FamilySpread S :
       {FamilySpread::Local, FamilySpread::CrossModule, FamilySpread::Mixed})
    EXPECT_EQ(spreadFromName(spreadName(S)), S);
  EXPECT_EQ(spreadName(FamilySpread::CrossModule), "cross_module");
  EXPECT_FALSE(spreadFromName("global"));
}

} // namespace
