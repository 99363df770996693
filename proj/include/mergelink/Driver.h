//===- Driver.h - Pipeline orchestration ------------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
///
/// \file
/// Runs the whole-program pipelines. Round one outlines each module locally
/// and summarizes its functions; the sequential barrier combines summaries
/// into GlobalMergeInfo and published sequences into a GlobalPrefixTree.
/// Round two merges and then outlines every module against those artifacts,
/// and the results are linked and folded.
///
/// The artifact modes split this in two: one build persists the round-one
/// artifacts as a bundle, later builds consume a possibly stale bundle in a
/// single per-module pass.
///
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_DRIVER_H
#define MERGELINK_DRIVER_H

#include "mergelink/Linker.h"
#include "mergelink/MergeCombine.h"
#include "mergelink/MergeTransform.h"
#include "mergelink/Outliner.h"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mergelink {

enum class PipelineMode { TwoRound, WriteArtifacts, ReadArtifacts };

std::string_view pipelineModeName(PipelineMode M);
std::optional<PipelineMode> pipelineModeFromName(std::string_view Text);

struct PipelineConfig {
  PipelineMode Mode = PipelineMode::TwoRound;
  bool EnableMerge = true;
  bool EnableOutline = true;
  CostConfig Cost;
  /// Its Mix is ignored in favor of PipelineConfig::Mix.
  OutlineConfig Outline;
  std::string ArtifactDir;
  IcfMode Icf = IcfMode::All;
  /// Per-module phases run on worker threads unless this is cleared or
  /// MERGELINK_DETERMINISTIC=1 is set.
  bool Parallel = true;
  MixFn Mix = stableMix;
};

struct ArtifactBundle {
  static constexpr unsigned Version = 1;

  /// Hash of the program the artifacts were computed from.
  std::string Snapshot;
  GlobalMergeInfo MergeInfo;
  GlobalPrefixTree Tree;
};

inline constexpr std::string_view BundleHeaderFile = "bundle.txt";
inline constexpr std::string_view MergeInfoFile = "merge_info.txt";
inline constexpr std::string_view PrefixTreeFile = "prefix_tree.txt";

/// Hex label of the printed, module-sorted program.
std::string snapshotLabel(const Program &P);

/// Writes the three bundle files into \p Dir, creating it if needed.
/// Throws on I/O failure.
void writeBundle(const ArtifactBundle &B, const std::string &Dir);

struct BundleLoad {
  /// Absent when the header is missing or any present file is rejected.
  std::optional<ArtifactBundle> Bundle;
  std::vector<std::string> Warnings;
};

/// A missing merge-info or prefix-tree file leaves that part empty. A bad
/// header version or any parse failure rejects the whole bundle.
BundleLoad readBundle(const std::string &Dir);

struct PipelineResult {
  LinkedImage Image;
  LinkerMap Map;
  MergeStats Stats;
  /// Transformed modules, sorted by name.
  std::vector<Module> Modules;
  LinkedImage PreIcf;
  std::vector<std::string> Warnings;
};

/// Round one plus the sequential combine and tree build.
ArtifactBundle analyzeProgram(const Program &P, const PipelineConfig &Cfg);

/// Round two for a single module: merge_module then outline_with_tree, each
/// gated by its enable flag.
std::pair<Module, MergeReport> codegenModule(const Module &M,
                                             const ArtifactBundle &B,
                                             const PipelineConfig &Cfg);

/// Round two over every module, then link, fold and stats. The baseline for
/// the stats is the folded untransformed program.
PipelineResult codegenProgram(const Program &P, const ArtifactBundle &B,
                              const PipelineConfig &Cfg);

PipelineResult runTwoRound(const Program &P, const PipelineConfig &Cfg);

/// Persists the bundle to Cfg.ArtifactDir when it is set.
ArtifactBundle runWriteArtifacts(const Program &P, const PipelineConfig &Cfg);

/// Reads Cfg.ArtifactDir; without a usable bundle the build proceeds with
/// empty artifacts and records a warning.
PipelineResult runReadArtifacts(const Program &P, const PipelineConfig &Cfg);

/// The baseline: the untransformed program linked and folded.
std::pair<LinkedImage, LinkerMap> buildBaseline(const Program &P,
                                                IcfMode Mode = IcfMode::All);

/// True unless MERGELINK_DETERMINISTIC=1 or \p Requested is false.
bool useParallel(bool Requested);

} // namespace mergelink

#endif // MERGELINK_DRIVER_H
