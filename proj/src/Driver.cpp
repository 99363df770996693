//===- Driver.cpp - Pipeline orchestration --------------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/Driver.h"

#include "mergelink/Error.h"
#include "mergelink/IRText.h"
#include "mergelink/Verifier.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace mergelink {

std::string_view pipelineModeName(PipelineMode M) {
  switch (M) {
  case PipelineMode::TwoRound:
    return "two-round";
  case PipelineMode::WriteArtifacts:
    return "write-artifacts";
  case PipelineMode::ReadArtifacts:
    return "read-artifacts";
  }
  return "";
}

std::optional<PipelineMode> pipelineModeFromName(std::string_view Text) {
  for (PipelineMode M : {PipelineMode::TwoRound, PipelineMode::WriteArtifacts,
                         PipelineMode::ReadArtifacts})
    if (pipelineModeName(M) == Text)
      return M;
  return std::nullopt;
}

bool useParallel(bool Requested) {
  const char *Env = std::getenv("MERGELINK_DETERMINISTIC");
  if (Env && std::string_view(Env) == "1")
    return false;
  return Requested;
}

/// Calls Fn(I) for every I in [0, N). Results must be written by index so
/// scheduling cannot affect output; the lowest-index exception is rethrown.
template <typename FnT>
static void forEachIndex(std::size_t N, bool Parallel, FnT Fn) {
  std::vector<std::exception_ptr> Errors(N);
  auto Body = [&](std::size_t I) {
    try {
      Fn(I);
    } catch (...) {
      Errors[I] = std::current_exception();
    }
  };
  unsigned Workers =
      std::min<std::size_t>(N, std::max(1u, std::thread::hardware_concurrency()));
  if (!Parallel || N < 2) {
    for (std::size_t I = 0; I < N; ++I)
      Body(I);
  } else {
    // Always spread over at least two threads so the parallel path gets
    // exercised even on single-core hosts.
    Workers = std::max(2u, Workers);
    std::atomic<std::size_t> Next{0};
    std::vector<std::thread> Pool;
    for (unsigned W = 0; W < Workers; ++W)
      Pool.emplace_back([&] {
        for (std::size_t I; (I = Next.fetch_add(1)) < N;)
          Body(I);
      });
    for (std::thread &T : Pool)
      T.join();
  }
  for (std::exception_ptr &E : Errors)
    if (E)
      std::rethrow_exception(E);
}

static Program sortedProgram(const Program &P) {
  Program Sorted = P;
  Sorted.sortModules();
  return Sorted;
}

static void checkProgram(const Program &P) {
  std::vector<Diagnostic> Diags = validate(P);
  if (Diags.empty())
    return;
  std::string Msg = "invalid program:";
  for (const Diagnostic &D : Diags)
    Msg += "\n  " + D.str();
  throw Error(Msg);
}

static OutlineConfig outlineConfig(const PipelineConfig &Cfg) {
  OutlineConfig OC = Cfg.Outline;
  OC.Mix = Cfg.Mix;
  return OC;
}

std::string snapshotLabel(const Program &P) {
  Program Sorted = sortedProgram(P);
  Word H = 0;
  for (const Module &M : Sorted.Modules)
    H = stableMix(H, fnv1a(printModule(M)));
  return hex16(H);
}

static void writeFile(const fs::path &Path, const std::string &Text) {
  std::ofstream OS(Path, std::ios::binary | std::ios::trunc);
  OS << Text;
  OS.close();
  if (!OS)
    throw Error("cannot write " + Path.string());
}

void writeBundle(const ArtifactBundle &B, const std::string &Dir) {
  std::error_code EC;
  fs::create_directories(Dir, EC);
  if (EC)
    throw Error("cannot create " + Dir + ": " + EC.message());
  fs::path Root(Dir);
  writeFile(Root / BundleHeaderFile, "BUNDLE v" +
                                         std::to_string(ArtifactBundle::Version) +
                                         " snapshot=" + B.Snapshot + "\n");
  writeFile(Root / MergeInfoFile, writeMergeInfo(B.MergeInfo));
  writeFile(Root / PrefixTreeFile, writePrefixTree(B.Tree));
}

static std::optional<std::string> readFile(const fs::path &Path) {
  std::ifstream IS(Path, std::ios::binary);
  if (!IS)
    return std::nullopt;
  std::ostringstream SS;
  SS << IS.rdbuf();
  return SS.str();
}

BundleLoad readBundle(const std::string &Dir) {
  BundleLoad Load;
  fs::path Root(Dir);
  std::optional<std::string> Header = readFile(Root / BundleHeaderFile);
  if (!Header) {
    Load.Warnings.push_back("no artifact bundle in " + Dir);
    return Load;
  }

  ArtifactBundle B;
  std::istringstream HS(*Header);
  std::string Tag, Version, Snapshot, Extra;
  HS >> Tag >> Version >> Snapshot;
  std::string Expected = "v" + std::to_string(ArtifactBundle::Version);
  if (Tag != "BUNDLE" || Version != Expected ||
      Snapshot.rfind("snapshot=", 0) != 0 || (HS >> Extra)) {
    Load.Warnings.push_back("rejected artifact bundle in " + Dir +
                            ": unrecognized header");
    return Load;
  }
  B.Snapshot = Snapshot.substr(9);

  try {
    if (std::optional<std::string> Text = readFile(Root / MergeInfoFile))
      B.MergeInfo = readMergeInfo(*Text);
    else
      Load.Warnings.push_back("artifact bundle has no merge info");
  } catch (const Error &E) {
    Load.Warnings.push_back("rejected artifact bundle in " + Dir + ": " +
                            std::string(MergeInfoFile) + ":" + E.what());
    return Load;
  }
  try {
    if (std::optional<std::string> Text = readFile(Root / PrefixTreeFile))
      B.Tree = readPrefixTree(*Text);
    else
      Load.Warnings.push_back("artifact bundle has no prefix tree");
  } catch (const Error &E) {
    Load.Warnings.push_back("rejected artifact bundle in " + Dir + ": " +
                            std::string(PrefixTreeFile) + ":" + E.what());
    return Load;
  }
  Load.Bundle = std::move(B);
  return Load;
}

ArtifactBundle analyzeProgram(const Program &Input, const PipelineConfig &Cfg) {
  Program P = sortedProgram(Input);
  checkProgram(P);
  std::size_t N = P.Modules.size();
  std::vector<std::vector<StableFunctionSummary>> Sums(N);
  std::vector<std::vector<InstHashSeq>> Seqs(N);
  OutlineConfig OC = outlineConfig(Cfg);
  forEachIndex(N, useParallel(Cfg.Parallel), [&](std::size_t I) {
    const Module &M = P.Modules[I];
    if (Cfg.EnableOutline)
      Seqs[I] = outlineLocal(M, OC).second;
    if (Cfg.EnableMerge)
      Sums[I] = analyzeModule(M, Cfg.Mix);
  });

  ArtifactBundle B;
  B.Snapshot = snapshotLabel(P);
  std::vector<StableFunctionSummary> AllSums;
  std::vector<InstHashSeq> AllSeqs;
  for (std::size_t I = 0; I < N; ++I) {
    AllSums.insert(AllSums.end(), Sums[I].begin(), Sums[I].end());
    AllSeqs.insert(AllSeqs.end(), Seqs[I].begin(), Seqs[I].end());
  }
  B.MergeInfo = combine(std::move(AllSums), Cfg.Cost);
  B.Tree = buildPrefixTree(std::move(AllSeqs));
  return B;
}

std::pair<Module, MergeReport> codegenModule(const Module &M,
                                             const ArtifactBundle &B,
                                             const PipelineConfig &Cfg) {
  Module Out = M;
  MergeReport Report;
  Report.ModName = M.Name;
  if (Cfg.EnableMerge)
    std::tie(Out, Report) = mergeModule(M, B.MergeInfo, Cfg.Mix);
  if (Cfg.EnableOutline)
    Out = outlineWithTree(Out, B.Tree, outlineConfig(Cfg));
  return {std::move(Out), std::move(Report)};
}

std::pair<LinkedImage, LinkerMap> buildBaseline(const Program &P,
                                                IcfMode Mode) {
  return icf(link(sortedProgram(P)), Mode);
}

PipelineResult codegenProgram(const Program &Input, const ArtifactBundle &B,
                              const PipelineConfig &Cfg) {
  Program P = sortedProgram(Input);
  checkProgram(P);
  std::size_t N = P.Modules.size();
  PipelineResult R;
  R.Modules.resize(N);
  std::vector<MergeReport> Reports(N);
  forEachIndex(N, useParallel(Cfg.Parallel), [&](std::size_t I) {
    std::tie(R.Modules[I], Reports[I]) = codegenModule(P.Modules[I], B, Cfg);
  });

  R.PreIcf = link(R.Modules);
  std::tie(R.Image, R.Map) = icf(R.PreIcf, Cfg.Icf);
  LinkedImage Baseline = buildBaseline(P, Cfg.Icf).first;
  R.Stats = computeStats(Baseline, R.PreIcf, R.Image, R.Map, Reports);
  return R;
}

PipelineResult runTwoRound(const Program &P, const PipelineConfig &Cfg) {
  return codegenProgram(P, analyzeProgram(P, Cfg), Cfg);
}

ArtifactBundle runWriteArtifacts(const Program &P, const PipelineConfig &Cfg) {
  ArtifactBundle B = analyzeProgram(P, Cfg);
  if (!Cfg.ArtifactDir.empty())
    writeBundle(B, Cfg.ArtifactDir);
  return B;
}

PipelineResult runReadArtifacts(const Program &P, const PipelineConfig &Cfg) {
  BundleLoad Load;
  if (Cfg.ArtifactDir.empty())
    Load.Warnings.push_back("no artifact directory given");
  else
    Load = readBundle(Cfg.ArtifactDir);
  ArtifactBundle B = Load.Bundle ? std::move(*Load.Bundle) : ArtifactBundle();
  PipelineResult R = codegenProgram(P, B, Cfg);
  R.Warnings = std::move(Load.Warnings);
  return R;
}

} // namespace mergelink
