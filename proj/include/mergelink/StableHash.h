//===- StableHash.h - Stable function summaries -----------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
///
/// \file
/// Stable hashing of operands, instructions and functions. A function's
/// stable hash folds in every opcode and every operand except constants that
/// sit in a parameterizable position; those are recorded per Loc instead so
/// that functions differing only in such constants share a hash.
///
/// All hashes are FNV-1a-64 based and byte-exact across platforms, because
/// summaries are persisted and compared between separate builds.
///
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_STABLEHASH_H
#define MERGELINK_STABLEHASH_H

#include "mergelink/IR.h"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mergelink {

inline constexpr Word FnvBasis = 0xcbf29ce484222325ULL;
inline constexpr Word FnvPrime = 0x00000100000001b3ULL;

/// Folds the eight little-endian bytes of \p X into \p H, FNV-1a style.
Word stableMix(Word H, Word X);

/// FNV-1a-64 over \p Bytes starting from the standard basis.
Word fnv1a(std::string_view Bytes);

/// The combine step used everywhere a stable hash is built. Tests substitute
/// a degenerate function to force universal collisions.
using MixFn = Word (*)(Word, Word);

/// Operand hash tags.
enum class HashTag : Word {
  Literal = 1,
  PublicSymbol = 2,
  PrivateContent = 3,
  Value = 4,
  Label = 5,
  Param = 6,
  BlockParam = 7,
};

struct StableFunctionSummary {
  Word Hash = 0;
  std::string ModName;
  std::string FnName;
  std::uint32_t InstCount = 0;
  std::map<Loc, Word> LocToHash;

  friend bool operator==(const StableFunctionSummary &,
                         const StableFunctionSummary &) = default;
};

/// Hashing context for one module. Caches content hashes of private
/// functions, so reuse one instance across the functions of a module.
class StableHasher {
public:
  explicit StableHasher(const Module &M, MixFn Mix = stableMix);

  Word mix(Word H, Word X) const { return Mix(H, X); }
  Word tagged(HashTag Tag, Word Payload) const;

  Word opcodeHash(Opcode Op) const;
  Word literalHash(Word V) const;
  /// Public or extern symbols hash by name; private data by payload bytes;
  /// private functions by canonical body text. Throws on unresolved names.
  Word globalHash(const std::string &Name) const;

  /// Operand hash with value references numbered by \p Numbering and labels
  /// by block ordinal within \p F.
  Word hashOperand(const Operand &O, const Function &F,
                   const std::map<std::string, unsigned> &Numbering) const;

  StableFunctionSummary computeStableFn(const Function &F) const;

  const Module &module() const { return M; }
  MixFn mixFunction() const { return Mix; }

private:
  const Module &M;
  MixFn Mix;
  mutable std::map<std::string, Word> PrivateFnCache;
};

Word hashOperand(const Operand &O, const Function &F, const Module &M);

/// Call/invoke/load/store constant operands are parameterizable.
bool canParam(Opcode Op, std::size_t OpndIndex, const Operand &O);

StableFunctionSummary computeStableFn(const Function &F, const Module &M,
                                      MixFn Mix = stableMix);

/// Eligibility filter applied by analyzeModule.
bool isValidSummary(const StableFunctionSummary &SF, const Function &F);

/// One summary per eligible function, ordered by function name.
std::vector<StableFunctionSummary> analyzeModule(const Module &M,
                                                 MixFn Mix = stableMix);

std::string hex16(Word V);
Word parseHex16(std::string_view Text);

std::string formatLoc(const Loc &L);

/// `SF v1 <H> <mod> <fn> <count> [(i,j):<hash>,...]`, one line per summary,
/// sorted by (module, function).
std::string writeSummaries(std::vector<StableFunctionSummary> Summaries);
std::vector<StableFunctionSummary> readSummaries(std::string_view Text);

/// Parses the bracketed `[(i,j):<hex16>,...]` list shared by artifact files.
std::map<Loc, Word> parseLocHashList(std::string_view Text);
std::string formatLocHashList(const std::map<Loc, Word> &Map);

} // namespace mergelink

#endif // MERGELINK_STABLEHASH_H
