//===- Outliner.h - Hash-sequence function outliner -------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
///
/// \file
/// A straight-line outliner. Only closed ranges are outlined: runs of
/// non-terminator instructions that neither consume values defined outside
/// the run nor define values used after it. Such a run can be moved into a
/// zero-argument function and replaced by a call.
///
/// Round one outlines repeats within a module and publishes the hash
/// sequences of what it outlined. Round two additionally outlines any closed
/// run whose hash sequence is a complete entry of the prefix tree built from
/// every module's publications. Merged (.Tgm) functions only ever see the
/// tree, so twins in different modules receive identical treatment.
///
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_OUTLINER_H
#define MERGELINK_OUTLINER_H

#include "mergelink/StableHash.h"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mergelink {

using InstHashSeq = std::vector<Word>;

struct OutlineConfig {
  unsigned MinOutlineLen = 2;
  unsigned CallOverhead = 1;
  unsigned MinLocalOccurrences = 2;
  /// Test-only: let local outlining touch .Tgm bodies.
  bool TgmLocalOutlining = false;
  MixFn Mix = stableMix;
};

struct OutlineRange {
  std::size_t Start = 0;
  std::size_t Len = 0;

  friend bool operator==(const OutlineRange &, const OutlineRange &) = default;
};

/// Full hash of every non-terminator instruction in \p B. Value operands are
/// encoded by their distance back to the defining instruction, so equal runs
/// hash equally wherever they sit.
InstHashSeq instHashSeq(const Block &B, const Function &F,
                        const StableHasher &Hasher);

/// True if [Start, Start + Len) of \p B is closed and outlinable.
bool isClosedRange(const Block &B, std::size_t Start, std::size_t Len);

/// Inclusion-maximal closed ranges of at least \p MinLen instructions.
std::vector<OutlineRange> legalRanges(const Block &B, unsigned MinLen = 2);

class GlobalPrefixTree {
public:
  GlobalPrefixTree();

  void insert(const InstHashSeq &Seq);

  /// Lengths of every terminal match of \p Hashes starting at \p Start, in
  /// increasing order.
  std::vector<std::size_t> terminalMatches(const InstHashSeq &Hashes,
                                           std::size_t Start) const;

  bool contains(const InstHashSeq &Seq) const;
  /// All complete sequences in lexicographic order.
  std::vector<InstHashSeq> sequences() const;
  std::size_t nodeCount() const { return Nodes.size(); }
  bool empty() const { return Nodes.size() == 1; }

  friend bool operator==(const GlobalPrefixTree &A,
                         const GlobalPrefixTree &B) {
    return A.sequences() == B.sequences();
  }

private:
  struct Node {
    std::map<Word, std::size_t> Children;
    bool Terminal = false;
  };
  std::vector<Node> Nodes;
};

GlobalPrefixTree buildPrefixTree(std::vector<InstHashSeq> Seqs);

/// `SEQ v1 <hex16>,...` per sequence, sorted.
std::string writePrefixTree(const GlobalPrefixTree &T);
GlobalPrefixTree readPrefixTree(std::string_view Text);

/// Outlines repeats within \p M. Returns the rewritten module and the hash
/// sequences of every outlined body, sorted and deduplicated.
std::pair<Module, std::vector<InstHashSeq>>
outlineLocal(const Module &M, const OutlineConfig &Cfg = {});

/// Round-two outlining: local repeats first, then tree hits, for ordinary
/// functions; tree hits only for .Tgm functions.
Module outlineWithTree(const Module &M, const GlobalPrefixTree &Tree,
                       const OutlineConfig &Cfg = {});

} // namespace mergelink

#endif // MERGELINK_OUTLINER_H
