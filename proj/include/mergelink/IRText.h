//===- IRText.h - Textual IR reader and writer ------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
///
/// \file
/// Canonical text form:
///
///   module <ident>
///   extern global @<ident>
///   global @<ident> = <u64> | "<escaped>" public|private
///   func @<ident>(%p, ...) public|private [origin=<tag>] {
///   <label>[(%x, ...)]:
///     <instruction>
///   }
///
/// Statements are separated by newlines or ';'. Comments run from "//" to the
/// end of the line. Literals are decimal or 0x-hex.
///
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_IRTEXT_H
#define MERGELINK_IRTEXT_H

#include "mergelink/IR.h"

#include <functional>
#include <string>
#include <string_view>

namespace mergelink {

/// Parses and then validates; throws ParseError on syntax errors and Error
/// when validation reports diagnostics.
Module parseModule(std::string_view Text);

/// Syntax and local structure only (duplicate symbols, arity, labels).
Module parseModuleUnchecked(std::string_view Text);

std::string printModule(const Module &M);
std::string printFunction(const Function &F);
std::string printInstruction(const Instruction &I, const Function &F);

/// Formats a global reference operand; used to print bodies with symbols
/// abstracted or renamed.
using GlobalFormatter = std::function<std::string(const std::string &)>;

/// Canonical content of a function body: values renumbered, labels renamed
/// bb0..bbN, name/linkage/origin omitted. Two functions with the same body
/// text are interchangeable modulo their symbol name.
std::string canonicalBody(const Function &F,
                          const GlobalFormatter &FormatGlobal = nullptr);

std::string escapeBytes(std::string_view Bytes);

} // namespace mergelink

#endif // MERGELINK_IRTEXT_H
