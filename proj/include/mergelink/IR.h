//===- IR.h - Toy word-valued SSA IR ----------------------------*- C++ -*-===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
///
/// \file
/// The data model shared by every stage of the merge/outline/link pipeline.
///
/// Values are untyped 64-bit words. A function body is an ordered list of
/// blocks; each block declares its own parameters and ends in exactly one
/// terminator. Values only flow between blocks through branch arguments, so
/// a use is legal iff it names a function parameter, a parameter of the
/// enclosing block, or a result defined earlier in the same block.
///
/// Operand layout per opcode (operand indices are what a Loc addresses):
///   add/sub/mul   [lhs, rhs]
///   const         [literal]
///   call          [callee, args...]
///   invoke        [callee, args..., normal-label, unwind-label]
///   load          [address]
///   store         [value, address]
///   br            [label, args...]
///   brcond        [cond, label, args..., label, args...]
///   ret           [] or [value]
///
//===----------------------------------------------------------------------===//

#ifndef MERGELINK_IR_H
#define MERGELINK_IR_H

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mergelink {

using Word = std::uint64_t;

enum class Linkage { Public, Private };

enum class Origin { Original, MergedTgm, Thunk, Outlined };

enum class Opcode {
  Add,
  Sub,
  Mul,
  Const,
  Call,
  Invoke,
  Load,
  Store,
  Br,
  BrCond,
  Ret,
};

std::string_view mnemonic(Opcode Op);
std::optional<Opcode> opcodeFromMnemonic(std::string_view Text);
bool isTerminator(Opcode Op);

std::string_view linkageName(Linkage L);
std::string_view originName(Origin O);
std::optional<Origin> originFromName(std::string_view Text);

/// Suffix carried by every parameterized merged instance.
inline constexpr std::string_view MergedSuffix = ".Tgm";

struct Operand {
  enum class Kind { Literal, Global, Value, Label, Param };

  Kind K = Kind::Literal;
  Word Lit = 0;
  /// Symbol name for Global, value name for Value, block label for Label.
  std::string Name;
  /// Parameter index for Param.
  unsigned Index = 0;

  static Operand literal(Word V);
  static Operand global(std::string Name);
  static Operand value(std::string Name);
  static Operand label(std::string Name);
  static Operand param(unsigned Index);

  bool isConstant() const { return K == Kind::Literal || K == Kind::Global; }
  bool isLabel() const { return K == Kind::Label; }

  friend bool operator==(const Operand &, const Operand &) = default;
  friend auto operator<=>(const Operand &, const Operand &) = default;
};

struct Instruction {
  Opcode Op = Opcode::Ret;
  std::optional<std::string> Result;
  std::vector<Operand> Ops;

  friend bool operator==(const Instruction &, const Instruction &) = default;
};

/// One outgoing edge of a terminator or invoke: target label plus the
/// operand slice passed as block arguments.
struct BranchEdge {
  std::string Label;
  std::size_t ArgBegin = 0;
  std::size_t ArgEnd = 0;
};

/// Decodes the label operands of br/brcond/invoke. Empty for other opcodes.
std::vector<BranchEdge> branchEdges(const Instruction &I);

struct Block {
  std::string Label;
  std::vector<std::string> Params;
  std::vector<Instruction> Insts;

  friend bool operator==(const Block &, const Block &) = default;
};

struct Function {
  std::string Name;
  std::vector<std::string> Params;
  std::vector<Block> Blocks;
  Linkage Link = Linkage::Public;
  Origin Orig = Origin::Original;

  std::size_t instCount() const;
  /// Index of the block labelled \p Label, if any.
  std::optional<std::size_t> blockIndex(std::string_view Label) const;
  /// True if any ret carries a value.
  bool returnsValue() const;

  friend bool operator==(const Function &, const Function &) = default;
};

struct GlobalDef {
  using Payload = std::variant<std::monostate, Word, std::string>;

  std::string Name;
  Linkage Link = Linkage::Public;
  bool Extern = false;
  Payload Data;

  friend bool operator==(const GlobalDef &, const GlobalDef &) = default;
};

struct Module {
  std::string Name;
  std::vector<GlobalDef> Globals;
  std::vector<Function> Functions;

  const Function *findFunction(std::string_view Name) const;
  Function *findFunction(std::string_view Name);
  const GlobalDef *findGlobal(std::string_view Name) const;

  friend bool operator==(const Module &, const Module &) = default;
};

struct Program {
  std::vector<Module> Modules;

  const Module *findModule(std::string_view Name) const;
  /// Orders modules by name; every pipeline output is a function of the
  /// sorted program.
  void sortModules();

  friend bool operator==(const Program &, const Program &) = default;
};

/// A straight-line position (instruction index counted across all blocks in
/// order, operand index within that instruction).
struct Loc {
  std::uint32_t Inst = 0;
  std::uint32_t Opnd = 0;

  friend bool operator==(const Loc &, const Loc &) = default;
  friend auto operator<=>(const Loc &, const Loc &) = default;
};

/// Resolves a Loc to the instruction it names, or nullptr if out of range.
const Instruction *instructionAt(const Function &F, std::uint32_t Index);
Instruction *instructionAt(Function &F, std::uint32_t Index);

} // namespace mergelink

#endif // MERGELINK_IR_H
