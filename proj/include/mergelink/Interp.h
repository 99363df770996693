//===- Interp.h - Reference interpreter -------------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
///
/// \file
/// Executes a linked image and records the observable behavior: the returned
/// word, every store to a global cell, and every call to an external symbol.
/// Programs are linked before they run, so source programs and pipeline
/// outputs are executed by the same machinery.
///
/// Every global and function has an address token, a word derived from its
/// linked name. Function references evaluate to their token and calls
/// through a word dispatch on it; loads and stores through a word must hit a
/// global's token.
///
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_INTERP_H
#define MERGELINK_INTERP_H

#include "mergelink/Linker.h"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mergelink {

struct ExecLimits {
  std::uint64_t MaxSteps = 1000000;
  unsigned MaxDepth = 512;
};

struct Event {
  enum class Kind { Store, ExternCall };

  Kind K = Kind::Store;
  /// Global cell for stores, callee for extern calls.
  std::string Symbol;
  /// Stored value, or the synthesized return of an extern call.
  Word Value = 0;
  std::vector<Word> Args;

  friend bool operator==(const Event &, const Event &) = default;
};

enum class FaultKind {
  StepLimit,
  DepthLimit,
  NotAFunction,
  BadAddress,
  ArityMismatch,
  Malformed,
};

std::string_view faultName(FaultKind K);

struct Fault {
  FaultKind K = FaultKind::Malformed;
  std::string Message;
};

struct ExecResult {
  std::optional<Word> Returned;
  std::vector<Event> Trace;
  std::uint64_t Steps = 0;
  std::optional<Fault> Error;
};

Word functionToken(const std::string &LinkedName);
Word dataToken(const std::string &LinkedName);
Word externToken(const std::string &Name);

/// Deterministic result of calling an external symbol.
Word externReturn(const std::string &Name, const std::vector<Word> &Args);

/// Prepares an image once for many runs. Every run starts from the initial
/// global cell contents.
class Interpreter {
public:
  explicit Interpreter(const LinkedImage &Image, const ExecLimits &Limits = {});
  ~Interpreter();
  Interpreter(const Interpreter &) = delete;
  Interpreter &operator=(const Interpreter &) = delete;

  /// Parameter count of \p Entry, if it names a function or alias.
  std::optional<std::size_t> arity(const std::string &Entry) const;

  /// Throws if \p Entry does not name a function or the argument count is
  /// wrong; runtime problems are reported in ExecResult::Error.
  ExecResult run(const std::string &Entry, const std::vector<Word> &Args);

private:
  class Machine;
  std::unique_ptr<Machine> Impl;
};

/// Throws if \p Entry does not name a function or the argument count is
/// wrong; runtime problems are reported in ExecResult::Error.
ExecResult run(const LinkedImage &Image, const std::string &Entry,
               const std::vector<Word> &Args, const ExecLimits &Limits = {});
ExecResult run(const Program &P, const std::string &Entry,
               const std::vector<Word> &Args, const ExecLimits &Limits = {});

/// Unions two fold-alias maps into one flat map onto the least name of each
/// combined class.
std::map<std::string, std::string>
unionAliases(const std::map<std::string, std::string> &A,
             const std::map<std::string, std::string> &B);

/// Same return, same events and same fault kind, with function names and
/// function tokens normalized through \p Aliases.
bool traceEqual(const ExecResult &A, const ExecResult &B,
                const std::map<std::string, std::string> &Aliases = {});

std::string formatResult(const ExecResult &R);

} // namespace mergelink

#endif // MERGELINK_INTERP_H
