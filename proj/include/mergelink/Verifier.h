//===- Verifier.h - IR well-formedness checks -------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_VERIFIER_H
#define MERGELINK_VERIFIER_H

#include "mergelink/IR.h"

#include <string>
#include <vector>

namespace mergelink {

struct Diagnostic {
  std::string Where;
  std::string Message;

  std::string str() const;
};

/// Empty iff every module, function, and block invariant holds.
std::vector<Diagnostic> validate(const Module &M);

/// Per-module validation plus program-wide module name uniqueness.
std::vector<Diagnostic> validate(const Program &P);

} // namespace mergelink

#endif // MERGELINK_VERIFIER_H
