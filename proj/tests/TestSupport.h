//===- TestSupport.h - Shared test helpers ----------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_TESTS_TESTSUPPORT_H
#define MERGELINK_TESTS_TESTSUPPORT_H

#include "mergelink/Corpus.h"
#include "mergelink/Driver.h"
#include "mergelink/Interp.h"
#include "mergelink/IR.h"
#include "mergelink/Linker.h"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace mergelink::test {

Program parseProgram(const std::vector<std::string_view> &Texts);

const Function &getFunction(const Module &M, std::string_view Name);
const Function &getFunction(const LinkedImage &I, std::string_view Name);

/// Module m<Index> holding f<Index>(%a) = a - g<Index>(a + 1) and the
/// callee g<Index>(%x) = x + 10. \p Pad extra closed-free arithmetic
/// instructions precede the return so the body can clear the cost model.
std::string twinModule(unsigned Index, unsigned Pad);

/// Module m holding f1, f2 and f3, each loading four public cells at
/// instructions 0-3: (A,A,B,A), (A,B,A,B) and (A,A,A,A). Five more
/// instructions combine the loads so the group clears the cost model.
std::string fourLoadModule();

std::vector<Word> randomArgs(std::mt19937_64 &Rng, std::size_t N);

/// Public functions of \p P with their parameter counts, sorted by name.
std::vector<std::pair<std::string, std::size_t>>
publicEntries(const Program &P);

/// Runs \p Samples random (entry, args) pairs on the unfolded link of \p P
/// and on \p Image and compares the traces under \p Aliases. Returns a
/// description of the first mismatch.
std::optional<std::string>
compareTraces(const Program &P, const LinkedImage &Image,
              const std::map<std::string, std::string> &Aliases,
              std::uint64_t Seed, unsigned Samples);

/// Fold classes computed by fully resolving every function reference into
/// the referenced body text. Only meaningful on acyclic reference graphs.
/// Each class is sorted; classes are sorted by their first member.
std::vector<std::vector<std::string>> oracleFoldClasses(const LinkedImage &I,
                                                        IcfMode Mode);

/// Small corpus settings used by the randomized suites.
CorpusConfig smallCorpus(std::uint64_t Seed);

Word zeroMix(Word, Word);

} // namespace mergelink::test

#endif // MERGELINK_TESTS_TESTSUPPORT_H
