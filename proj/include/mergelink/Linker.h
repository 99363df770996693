//===- Linker.h - Simulated static linker -----------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
///
/// \file
/// Symbol resolution over a set of modules, identical code folding by
/// partition refinement, size accounting, and merge-quality statistics.
///
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_LINKER_H
#define MERGELINK_LINKER_H

#include "mergelink/MergeTransform.h"

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mergelink {

enum class IcfMode { Off, Safe, All };

std::string_view icfModeName(IcfMode M);
std::optional<IcfMode> icfModeFromName(std::string_view Text);

/// Every name is a linked name: privates are `<module>$<name>`.
struct LinkedImage {
  std::map<std::string, Function> Functions;
  std::map<std::string, GlobalDef> Globals;
  /// Symbols declared extern somewhere and defined nowhere.
  std::set<std::string> Externals;
  /// Folded name to representative; never chained.
  std::map<std::string, std::string> Aliases;

  /// Follows an alias if there is one.
  std::string resolve(const std::string &Name) const;

  friend bool operator==(const LinkedImage &, const LinkedImage &) = default;
};

struct FoldGroup {
  std::string Rep;
  /// Sorted, excluding the representative.
  std::vector<std::string> Members;

  friend bool operator==(const FoldGroup &, const FoldGroup &) = default;
};

struct LinkerMap {
  /// Sorted by representative.
  std::vector<FoldGroup> Groups;

  std::map<std::string, std::string> aliases() const;

  friend bool operator==(const LinkerMap &, const LinkerMap &) = default;
};

std::string linkedName(const Module &M, const std::string &Name);

/// Throws on duplicate public definitions or unresolved references.
LinkedImage link(const std::vector<Module> &Modules);
LinkedImage link(const Program &P);

std::pair<LinkedImage, LinkerMap> icf(const LinkedImage &Image,
                                      IcfMode Mode = IcfMode::All);

std::size_t functionSize(const Function &F);
std::size_t imageSize(const LinkedImage &Image);

/// `FOLD <rep> <- <member>` lines, sorted.
std::string writeLinkerMap(const LinkerMap &Map);

/// The image as a module named "image" followed by `alias @x = @y` lines.
std::string printImage(const LinkedImage &Image);
LinkedImage parseImage(std::string_view Text);

struct MergeStats {
  std::size_t TotalFunctions = 0;
  std::size_t MergedCount = 0;
  std::size_t MismatchedCount = 0;
  std::size_t SizeBefore = 0;
  std::size_t SizeAfter = 0;
  std::map<std::size_t, std::size_t> ParamHist;
  std::map<std::size_t, std::size_t> BlockHist;
  std::vector<MergeReport> Reports;

  double mergedPct() const;
  double mismatchedPct() const;
  double mismatchedOverMergedPct() const;
};

/// \p Baseline is the folded image of the untransformed program; \p PostPre
/// and \p PostMap are the transformed image before folding and its map.
MergeStats computeStats(const LinkedImage &Baseline,
                        const LinkedImage &PostPre, const LinkedImage &Post,
                        const LinkerMap &PostMap,
                        const std::vector<MergeReport> &Reports);

/// key=value, HIST and MERGE lines, sorted.
std::string writeStats(const MergeStats &S);

} // namespace mergelink

#endif // MERGELINK_LINKER_H
