//===- DriverTest.cpp - Pipelines and artifact bundles --------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TestSupport.h"

#include "mergelink/Driver.h"
#include "mergelink/Error.h"
#include "mergelink/IRText.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

using namespace mergelink;
using namespace mergelink::test;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
  TempDir() {
    const auto *Info = ::testing::UnitTest::GetInstance()->current_test_info();
    Path = fs::temp_directory_path() /
           (std::string("mergelink-") + Info->test_suite_name() + "-" +
            Info->name());
    fs::remove_all(Path);
  }
  ~TempDir() { fs::remove_all(Path); }
  std::string str() const { return Path.string(); }
  fs::path operator/(std::string_view Name) const { return Path / Name; }

private:
  fs::path Path;
};

void overwrite(const fs::path &P, const std::string &Text) {
  std::ofstream(P, std::ios::trunc) << Text;
}

Program twins() { return parseProgram({twinModule(1, 6), twinModule(2, 6)}); }

TEST(Bundle, RoundTrip) {
  TempDir D;
  PipelineConfig Cfg;
  Corpus C = generateCorpus(smallCorpus(4));
  ArtifactBundle B = analyzeProgram(C.Prog, Cfg);
  writeBundle(B, D.str());
  BundleLoad L = readBundle(D.str());
  ASSERT_TRUE(L.Bundle);
  EXPECT_TRUE(L.Warnings.empty());
  EXPECT_EQ(L.Bundle->Snapshot, B.Snapshot);
  EXPECT_EQ(L.Bundle->MergeInfo, B.MergeInfo);
  EXPECT_EQ(L.Bundle->Tree, B.Tree);
}

TEST(Bundle, MissingDirectory) {
  TempDir D;
  BundleLoad L = readBundle(D.str());
  EXPECT_FALSE(L.Bundle);
  ASSERT_EQ(L.Warnings.size(), 1u);
}

TEST(Bundle, RejectsBadHeader) {
  TempDir D;
  writeBundle(analyzeProgram(twins(), {}), D.str());
  overwrite(D / BundleHeaderFile, "BUNDLE v2 snapshot=0\n");
  BundleLoad L = readBundle(D.str());
  EXPECT_FALSE(L.Bundle);
  EXPECT_FALSE(L.Warnings.empty());
}

TEST(Bundle, RejectsCorruptParts) {
  TempDir D;
  writeBundle(analyzeProgram(twins(), {}), D.str());
  overwrite(D / MergeInfoFile, "GMI v1 overhead=2\nG zz 1 1\n");
  EXPECT_FALSE(readBundle(D.str()).Bundle);

  writeBundle(analyzeProgram(twins(), {}), D.str());
  overwrite(D / PrefixTreeFile, "SEQ v1 nothex\n");
  EXPECT_FALSE(readBundle(D.str()).Bundle);
}

TEST(Bundle, MissingPartIsEmpty) {
  TempDir D;
  ArtifactBundle B = analyzeProgram(twins(), {});
  ASSERT_FALSE(B.MergeInfo.Groups.empty());
  writeBundle(B, D.str());
  fs::remove(D / MergeInfoFile);
  BundleLoad L = readBundle(D.str());
  ASSERT_TRUE(L.Bundle);
  EXPECT_TRUE(L.Bundle->MergeInfo.Groups.empty());
  EXPECT_EQ(L.Warnings.size(), 1u);
}

TEST(Pipeline, TwinsMergeAndFold) {
  PipelineResult R = runTwoRound(twins(), {});
  EXPECT_EQ(R.Stats.MergedCount, 2u);
  EXPECT_EQ(R.Stats.MismatchedCount, 0u);
  EXPECT_EQ(R.Map.Groups.size(), 1u);
  EXPECT_EQ(R.Image.Functions.count("m1$f1.Tgm") +
                R.Image.Functions.count("m2$f2.Tgm"),
            1u);
  EXPECT_LT(R.Stats.SizeAfter, R.Stats.SizeBefore);
  EXPECT_FALSE(compareTraces(twins(), R.Image, R.Map.aliases(), 1, 50));
}

TEST(Pipeline, DisabledPassesLeaveModules) {
  PipelineConfig Cfg;
  Cfg.EnableMerge = false;
  Cfg.EnableOutline = false;
  Program P = twins();
  PipelineResult R = runTwoRound(P, Cfg);
  EXPECT_EQ(R.Modules, P.Modules);
  EXPECT_EQ(R.Stats.SizeAfter, R.Stats.SizeBefore);
}

TEST(Pipeline, ArtifactModesMatchTwoRound) {
  TempDir D;
  for (std::uint64_t Seed = 1; Seed <= 10; ++Seed) {
    Corpus C = generateCorpus(smallCorpus(Seed));
    PipelineConfig Cfg;
    Cfg.ArtifactDir = D.str();
    PipelineResult Two = runTwoRound(C.Prog, Cfg);
    runWriteArtifacts(C.Prog, Cfg);
    PipelineResult Read = runReadArtifacts(C.Prog, Cfg);
    EXPECT_TRUE(Read.Warnings.empty());
    EXPECT_EQ(printImage(Two.Image), printImage(Read.Image)) << "seed " << Seed;
    EXPECT_EQ(writeStats(Two.Stats), writeStats(Read.Stats));
  }
}

TEST(Pipeline, ReadWithoutBundleStillBuilds) {
  TempDir D;
  PipelineConfig Cfg;
  Cfg.ArtifactDir = D.str();
  Corpus C = generateCorpus(smallCorpus(2));
  PipelineResult R = runReadArtifacts(C.Prog, Cfg);
  EXPECT_FALSE(R.Warnings.empty());
  EXPECT_EQ(R.Stats.MergedCount, 0u);
  EXPECT_FALSE(compareTraces(C.Prog, R.Image, R.Map.aliases(), 2, 30));

  Cfg.ArtifactDir.clear();
  EXPECT_FALSE(runReadArtifacts(C.Prog, Cfg).Warnings.empty());
}

TEST(Pipeline, OutputIndependentOfOrderAndThreads) {
  Corpus C = generateCorpus(smallCorpus(17));
  PipelineConfig Cfg;
  std::string Ref = printImage(runTwoRound(C.Prog, Cfg).Image);
  Program Rev = C.Prog;
  std::reverse(Rev.Modules.begin(), Rev.Modules.end());
  EXPECT_EQ(printImage(runTwoRound(Rev, Cfg).Image), Ref);
  Cfg.Parallel = false;
  EXPECT_EQ(printImage(runTwoRound(C.Prog, Cfg).Image), Ref);
}

TEST(Pipeline, EmptyProgram) {
  PipelineResult R = runTwoRound(Program(), {});
  EXPECT_TRUE(R.Image.Functions.empty());
  EXPECT_EQ(R.Stats.TotalFunctions, 0u);
  EXPECT_EQ(R.Stats.mergedPct(), 0.0);
}

TEST(Pipeline, InvalidProgramThrows) {
  Program P;
  P.Modules.push_back(parseModuleUnchecked(
      "module m\nfunc @f() public {\nentry:\n  %x = add %y, 1\n  ret %x\n}\n"));
  EXPECT_THROW(runTwoRound(P, {}), Error);
  EXPECT_THROW(analyzeProgram(P, {}), Error);
}

TEST(Pipeline, DuplicateModulesThrow) {
  Program P = parseProgram({twinModule(1, 6)});
  P.Modules.push_back(P.Modules[0]);
  EXPECT_THROW(runTwoRound(P, {}), Error);
}

TEST(Snapshot, IgnoresModuleOrder) {
  Program P = twins();
  std::string A = snapshotLabel(P);
  std::reverse(P.Modules.begin(), P.Modules.end());
  EXPECT_EQ(snapshotLabel(P), A);
  EXPECT_EQ(A.size(), 16u);
  EXPECT_NE(snapshotLabel(parseProgram({twinModule(1, 6)})), A);
}

TEST(PipelineMode, Names) {
  for (PipelineMode M : {PipelineMode::TwoRound, PipelineMode::WriteArtifacts,
                         PipelineMode::ReadArtifacts})
    EXPECT_EQ(pipelineModeFromName(pipelineModeName(M)), M);
  EXPECT_FALSE(pipelineModeFromName("three-round"));
}

} // namespace
