//===- Verifier.cpp - IR well-formedness checks ---------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/Verifier.h"

#include <algorithm>
#include <set>

namespace mergelink {

std::string Diagnostic::str() const {
  return Where.empty() ? Message : Where + ": " + Message;
}

namespace {

class FunctionVerifier {
public:
  FunctionVerifier(const Module &M, const Function &F,
                   std::vector<Diagnostic> &Diags)
      : M(M), F(F), Diags(Diags) {}

  void run() {
    if (F.Blocks.empty()) {
      report("function has no blocks");
      return;
    }
    if (!F.Blocks.front().Params.empty())
      report("entry block cannot have parameters", F.Blocks.front().Label);
    if (F.Orig == Origin::MergedTgm && !F.Name.ends_with(MergedSuffix))
      report("merged function name must end with '.Tgm'");

    std::set<std::string> ParamNames(F.Params.begin(), F.Params.end());
    if (ParamNames.size() != F.Params.size())
      report("duplicate parameter name");

    std::set<std::string> Labels;
    for (const Block &B : F.Blocks)
      if (!Labels.insert(B.Label).second)
        report("duplicate label '" + B.Label + "'");

    std::set<std::string> Defined(ParamNames);
    bool SawValueRet = false;
    bool SawVoidRet = false;
    for (const Block &B : F.Blocks) {
      Scope.clear();
      for (const std::string &P : B.Params) {
        if (!Defined.insert(P).second)
          report("redefinition of '%" + P + "'", B.Label);
        Scope.insert(P);
      }
      if (B.Insts.empty()) {
        report("empty block", B.Label);
        continue;
      }
      for (std::size_t I = 0; I < B.Insts.size(); ++I) {
        const Instruction &Inst = B.Insts[I];
        bool Last = I + 1 == B.Insts.size();
        if (isTerminator(Inst.Op) && !Last)
          report("terminator before end of block", B.Label);
        if (Last && !isTerminator(Inst.Op))
          report("block does not end with a terminator", B.Label);
        if (Inst.Op == Opcode::Ret)
          (Inst.Ops.empty() ? SawVoidRet : SawValueRet) = true;
        checkInstruction(Inst, B.Label);
        if (Inst.Result) {
          if (!Defined.insert(*Inst.Result).second)
            report("redefinition of '%" + *Inst.Result + "'", B.Label);
          Scope.insert(*Inst.Result);
        }
      }
    }
    if (SawValueRet && SawVoidRet)
      report("mixes 'ret' with and without a value");
  }

private:
  const Module &M;
  const Function &F;
  std::vector<Diagnostic> &Diags;
  std::set<std::string> Scope;

  void report(const std::string &Msg, const std::string &Block = "") {
    std::string Where = "@" + F.Name;
    if (!Block.empty())
      Where += ":" + Block;
    Diags.push_back({Where, Msg});
  }

  bool symbolKnown(const std::string &Name) const {
    return M.findGlobal(Name) || M.findFunction(Name);
  }

  void checkOperand(const Operand &O, const std::string &BlockLabel) {
    switch (O.K) {
    case Operand::Kind::Literal:
    case Operand::Kind::Label:
      break;
    case Operand::Kind::Param:
      if (O.Index >= F.Params.size())
        report("parameter index " + std::to_string(O.Index) + " out of range",
               BlockLabel);
      break;
    case Operand::Kind::Value:
      if (std::find(F.Params.begin(), F.Params.end(), O.Name) !=
          F.Params.end())
        report("parameter '%" + O.Name + "' referenced as a value",
               BlockLabel);
      else if (!Scope.count(O.Name))
        report("use of '%" + O.Name + "' before definition", BlockLabel);
      break;
    case Operand::Kind::Global:
      if (!symbolKnown(O.Name))
        report("reference to undefined symbol '@" + O.Name +
                   "' without extern declaration",
               BlockLabel);
      break;
    }
  }

  void checkEdge(const BranchEdge &E, const std::string &BlockLabel) {
    std::optional<std::size_t> Target = F.blockIndex(E.Label);
    if (!Target) {
      report("undefined label '" + E.Label + "'", BlockLabel);
      return;
    }
    if (F.Blocks[*Target].Params.size() != E.ArgEnd - E.ArgBegin)
      report("argument count mismatch for block '" + E.Label + "'",
             BlockLabel);
  }

  void checkInstruction(const Instruction &I, const std::string &BL) {
    std::string Name(mnemonic(I.Op));
    auto Arity = [&](bool Ok) {
      if (!Ok)
        report("arity mismatch for '" + Name + "'", BL);
      return Ok;
    };
    bool NeedsResult = I.Op == Opcode::Add || I.Op == Opcode::Sub ||
                       I.Op == Opcode::Mul || I.Op == Opcode::Const ||
                       I.Op == Opcode::Load;
    bool MayHaveResult =
        NeedsResult || I.Op == Opcode::Call || I.Op == Opcode::Invoke;
    if (NeedsResult && !I.Result)
      report("'" + Name + "' requires a result", BL);
    if (!MayHaveResult && I.Result)
      report("'" + Name + "' produces no result", BL);

    std::size_t Labels = 0;
    for (const Operand &O : I.Ops)
      Labels += O.isLabel();
    bool LabelsAllowed = I.Op == Opcode::Br || I.Op == Opcode::BrCond ||
                        I.Op == Opcode::Invoke;
    if (Labels && !LabelsAllowed)
      report("label operand in '" + Name + "'", BL);

    switch (I.Op) {
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Store:
      Arity(I.Ops.size() == 2);
      break;
    case Opcode::Const:
      if (Arity(I.Ops.size() == 1) && I.Ops[0].K != Operand::Kind::Literal)
        report("'const' operand must be a literal", BL);
      break;
    case Opcode::Load:
      Arity(I.Ops.size() == 1);
      break;
    case Opcode::Call:
      if (Arity(!I.Ops.empty()))
        checkDirectCallArity(I.Ops[0], I.Ops.size() - 1, BL);
      break;
    case Opcode::Invoke: {
      bool Ok = I.Ops.size() >= 3 && Labels == 2 &&
                I.Ops[I.Ops.size() - 1].isLabel() &&
                I.Ops[I.Ops.size() - 2].isLabel() && !I.Ops[0].isLabel();
      if (Arity(Ok)) {
        checkDirectCallArity(I.Ops[0], I.Ops.size() - 3, BL);
        for (const BranchEdge &E : branchEdges(I))
          checkEdge(E, BL);
      }
      break;
    }
    case Opcode::Br:
      if (Arity(!I.Ops.empty() && I.Ops[0].isLabel() && Labels == 1))
        for (const BranchEdge &E : branchEdges(I))
          checkEdge(E, BL);
      break;
    case Opcode::BrCond:
      if (Arity(I.Ops.size() >= 3 && !I.Ops[0].isLabel() &&
                I.Ops[1].isLabel() && Labels == 2))
        for (const BranchEdge &E : branchEdges(I))
          checkEdge(E, BL);
      break;
    case Opcode::Ret:
      Arity(I.Ops.size() <= 1);
      break;
    }

    for (const Operand &O : I.Ops)
      checkOperand(O, BL);
  }

  void checkDirectCallArity(const Operand &Callee, std::size_t Args,
                            const std::string &BL) {
    if (Callee.K != Operand::Kind::Global)
      return;
    const Function *Target = M.findFunction(Callee.Name);
    if (Target && Target->Params.size() != Args)
      report("call to '@" + Callee.Name + "' passes " + std::to_string(Args) +
                 " arguments, expected " +
                 std::to_string(Target->Params.size()),
             BL);
  }
};

} // namespace

std::vector<Diagnostic> validate(const Module &M) {
  std::vector<Diagnostic> Diags;
  std::set<std::string> Symbols;
  for (const GlobalDef &G : M.Globals) {
    if (!Symbols.insert(G.Name).second)
      Diags.push_back({"@" + G.Name, "duplicate symbol"});
    if (G.Extern && !std::holds_alternative<std::monostate>(G.Data))
      Diags.push_back({"@" + G.Name, "extern global carries a payload"});
  }
  for (const Function &F : M.Functions)
    if (!Symbols.insert(F.Name).second)
      Diags.push_back({"@" + F.Name, "duplicate symbol"});
  for (const Function &F : M.Functions)
    FunctionVerifier(M, F, Diags).run();
  for (Diagnostic &D : Diags)
    D.Where = M.Name + (D.Where.empty() ? "" : ":" + D.Where);
  return Diags;
}

std::vector<Diagnostic> validate(const Program &P) {
  std::vector<Diagnostic> Diags;
  std::set<std::string> Names;
  for (const Module &M : P.Modules) {
    if (!Names.insert(M.Name).second)
      Diags.push_back({M.Name, "duplicate module name"});
    std::vector<Diagnostic> Sub = validate(M);
    Diags.insert(Diags.end(), Sub.begin(), Sub.end());
  }
  return Diags;
}

} // namespace mergelink
