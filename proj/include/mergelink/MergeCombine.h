//===- MergeCombine.h - Build global merge info -----------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
///
/// \file
/// Sequential combine step: summaries from every module are grouped by stable
/// hash, filtered for structural agreement, assigned parameters, and gated by
/// the thunk cost model before being published as GlobalMergeInfo.
///
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_MERGECOMBINE_H
#define MERGELINK_MERGECOMBINE_H

#include "mergelink/StableHash.h"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mergelink {

struct CostConfig {
  /// Metadata cost of a thunk, in instruction units.
  unsigned ThunkFixedOverhead = 2;
  unsigned MinGroupSize = 2;

  friend bool operator==(const CostConfig &, const CostConfig &) = default;
};

/// One parameter: the per-member constant hash sequence it supplies and the
/// locations it replaces.
struct ParamEntry {
  std::vector<Word> HashSeq;
  std::vector<Loc> Locs;

  friend bool operator==(const ParamEntry &, const ParamEntry &) = default;
};

/// Ordered by first location, which is also the appended parameter order.
using ParamVecs = std::vector<ParamEntry>;

struct MergeGroup {
  Word Hash = 0;
  /// Sorted by (module, function).
  std::vector<StableFunctionSummary> Summaries;
  ParamVecs Params;

  std::uint32_t instCount() const {
    return Summaries.empty() ? 0 : Summaries.front().InstCount;
  }

  friend bool operator==(const MergeGroup &, const MergeGroup &) = default;
};

struct GlobalMergeInfo {
  static constexpr unsigned Version = 1;

  std::map<Word, MergeGroup> Groups;
  CostConfig Cost;

  bool empty() const { return Groups.empty(); }

  friend bool operator==(const GlobalMergeInfo &,
                         const GlobalMergeInfo &) = default;
};

/// Exact partition by hash with members sorted by (module, function).
/// Singleton groups are dropped. Throws on duplicate (module, function).
std::map<Word, std::vector<StableFunctionSummary>>
groupByHash(std::vector<StableFunctionSummary> Summaries);

/// Members agree on instruction count and on the key set of LocToHash.
bool canMerge(const std::vector<StableFunctionSummary> &Group);

/// Distinct non-constant constant-hash sequences, each becoming one
/// parameter. The first member is the reference.
ParamVecs computeParams(const std::vector<StableFunctionSummary> &Group);

unsigned thunkSize(std::size_t NumParams, const CostConfig &Cfg);

/// Cost = SizeThunk * N, Benefit = SizeFunc * (N - 1); profitable iff
/// Cost < Benefit.
bool isProfitable(std::size_t N, std::size_t SizeFunc, std::size_t SizeThunk);

bool shouldMerge(const std::vector<StableFunctionSummary> &Group,
                 const ParamVecs &Params, const CostConfig &Cfg);

GlobalMergeInfo combine(std::vector<StableFunctionSummary> Summaries,
                        const CostConfig &Cfg = {});

std::string writeMergeInfo(const GlobalMergeInfo &GMI);
/// Rejects the whole file on any malformed or inconsistent entry.
GlobalMergeInfo readMergeInfo(std::string_view Text);

} // namespace mergelink

#endif // MERGELINK_MERGECOMBINE_H
