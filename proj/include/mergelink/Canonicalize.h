//===- Canonicalize.h - Value renumbering -----------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_CANONICALIZE_H
#define MERGELINK_CANONICALIZE_H

#include "mergelink/IR.h"

#include <map>
#include <string>

namespace mergelink {

/// Definition-order numbering: parameters first, then for each block its
/// parameters followed by its instruction results.
std::map<std::string, unsigned> valueNumbering(const Function &F);

/// Renames every value to %0, %1, ... in definition order.
Function canonicalizeValues(const Function &F);

/// Renames blocks to bb0, bb1, ... in order.
Function canonicalizeLabels(const Function &F);

} // namespace mergelink

#endif // MERGELINK_CANONICALIZE_H
