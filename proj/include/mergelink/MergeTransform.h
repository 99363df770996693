//===- MergeTransform.h - Per-module optimistic merging ---------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
///
/// \file
/// Applies GlobalMergeInfo to one module. Every admitted candidate gets its
/// own parameterized clone (name suffixed ".Tgm") and its original body is
/// replaced by a thunk that forwards the original constants. Call sites are
/// never touched; identical clones from different modules are left for the
/// linker to fold.
///
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_MERGETRANSFORM_H
#define MERGELINK_MERGETRANSFORM_H

#include "mergelink/MergeCombine.h"

#include <string>
#include <utility>
#include <vector>

namespace mergelink {

struct MergeCandidate {
  StableFunctionSummary Summary;
  const Function *F = nullptr;
};

struct MergeEntry {
  std::string Original;
  std::string Merged;
  std::vector<Operand> Args;
  /// Block count of the original body.
  std::size_t Blocks = 0;
};

struct MergeReport {
  std::string ModName;
  std::vector<MergeEntry> Entries;
  unsigned Matched = 0;
  unsigned SkippedStale = 0;
  unsigned SkippedSingleLocal = 0;
  /// Candidates that passed matching but failed during rewriting.
  unsigned SkippedError = 0;
};

/// Stored and fresh summaries agree on H, instruction count and Loc keys.
bool isCompatible(const StableFunctionSummary &Stored,
                  const StableFunctionSummary &Fresh);

/// Members of \p G living in \p M whose fresh summary is compatible. Empty if
/// the whole group is local to \p M and fewer than two members survive.
/// Stale and single-local drops are tallied in \p Report when given.
std::vector<MergeCandidate> match(const MergeGroup &G, const Module &M,
                                  MergeReport *Report = nullptr,
                                  MixFn Mix = stableMix);

/// Constant operands at the first Loc of every parameter. Throws if a Loc is
/// out of range, not constant, or disagrees with its parameter's other Locs.
std::vector<Operand> getArgs(const Function &F, const ParamVecs &Params);

/// Canonicalized clone with one appended parameter per ParamVecs entry.
Function createMergedFunction(const Function &F, const ParamVecs &Params);

/// Body replaced by a forwarding call; name, parameters and linkage kept.
Function createThunk(const Function &Original, const std::string &MergedName,
                     const std::vector<Operand> &Args);

std::pair<Module, MergeReport> mergeModule(const Module &M,
                                           const GlobalMergeInfo &GMI,
                                           MixFn Mix = stableMix);

} // namespace mergelink

#endif // MERGELINK_MERGETRANSFORM_H
