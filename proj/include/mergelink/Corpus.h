//===- Corpus.h - Seeded synthetic programs ---------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
///
/// \file
/// Generates multi-module programs with planted families of functions that
/// differ only at chosen parameterizable locations, structurally unique
/// filler functions, and closed instruction motifs for the outliner. The
/// manifest records what was planted so tests know the expected outcome.
///
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_CORPUS_H
#define MERGELINK_CORPUS_H

#include "mergelink/IR.h"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mergelink {

enum class FamilySpread { Local, CrossModule, Mixed };

std::string_view spreadName(FamilySpread S);
std::optional<FamilySpread> spreadFromName(std::string_view Text);

struct CorpusConfig {
  unsigned Modules = 3;
  /// Target function count per module; family members count against it and
  /// the rest is filler. Leaf helpers come on top.
  unsigned FunctionsPerModule = 8;
  unsigned Families = 2;
  unsigned FamilySizeMin = 2;
  unsigned FamilySizeMax = 3;
  FamilySpread Spread = FamilySpread::Mixed;
  unsigned DivergentLocs = 1;
  unsigned BodyLenMin = 10;
  unsigned BodyLenMax = 16;
  unsigned BlocksMin = 1;
  unsigned BlocksMax = 3;
  unsigned Motifs = 1;
  unsigned MotifLen = 3;
  /// Single motif sites planted in modules other than the home module.
  unsigned MotifRemoteSites = 1;
  unsigned LeavesPerModule = 2;
  unsigned Externs = 2;
  /// Family template bodies are padded until the default thunk cost model
  /// admits the family.
  bool PadFamiliesForCostModel = true;
  std::uint64_t Seed = 1;
};

struct FamilyInfo {
  unsigned Index = 0;
  unsigned Params = 0;
  unsigned InstCount = 0;
  unsigned Blocks = 0;
  /// Locations where members differ.
  std::vector<Loc> Locs;
  /// (module, function), sorted.
  std::vector<std::pair<std::string, std::string>> Members;

  friend bool operator==(const FamilyInfo &, const FamilyInfo &) = default;
};

struct MotifSite {
  std::string Mod;
  std::string Fn;
  std::size_t Block = 0;
  std::size_t Start = 0;

  friend bool operator==(const MotifSite &, const MotifSite &) = default;
};

struct MotifInfo {
  unsigned Index = 0;
  unsigned Len = 0;
  std::vector<MotifSite> Sites;

  friend bool operator==(const MotifInfo &, const MotifInfo &) = default;
};

struct CorpusManifest {
  std::vector<FamilyInfo> Families;
  std::vector<MotifInfo> Motifs;

  friend bool operator==(const CorpusManifest &,
                         const CorpusManifest &) = default;
};

struct Corpus {
  Program Prog;
  CorpusManifest Manifest;
};

/// Deterministic in the config. Throws on infeasible configurations.
Corpus generateCorpus(const CorpusConfig &Cfg);

/// Empty when every family still groups under one hash with the expected
/// parameters and every motif site still holds a closed run.
std::vector<std::string> verifyManifest(const Program &P,
                                        const CorpusManifest &Manifest);

/// `FAM <k> params=<p> insts=<n> blocks=<b> locs=... members=...` and
/// `MOTIF <k> len=<l> sites=<mod>:<fn>:<block>:<start>,...` lines.
std::string writeManifest(const CorpusManifest &Manifest);
CorpusManifest readManifest(std::string_view Text);

} // namespace mergelink

#endif // MERGELINK_CORPUS_H
