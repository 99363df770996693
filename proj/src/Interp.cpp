//===- Interp.cpp - Reference interpreter ---------------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/Interp.h"

#include "mergelink/Canonicalize.h"
#include "mergelink/Error.h"
#include "mergelink/StableHash.h"

#include <functional>
#include <sstream>
#include <unordered_map>

namespace mergelink {

std::string_view faultName(FaultKind K) {
  switch (K) {
  case FaultKind::StepLimit:
    return "step-limit";
  case FaultKind::DepthLimit:
    return "depth-limit";
  case FaultKind::NotAFunction:
    return "not-a-function";
  case FaultKind::BadAddress:
    return "bad-address";
  case FaultKind::ArityMismatch:
    return "arity-mismatch";
  case FaultKind::Malformed:
    return "malformed";
  }
  return "";
}

static constexpr Word TokenBit = Word(1) << 63;

Word functionToken(const std::string &LinkedName) {
  return fnv1a("func:" + LinkedName) | TokenBit;
}

Word dataToken(const std::string &LinkedName) {
  return fnv1a("data:" + LinkedName) | TokenBit;
}

Word externToken(const std::string &Name) {
  return fnv1a("extern:" + Name) | TokenBit;
}

Word externReturn(const std::string &Name, const std::vector<Word> &Args) {
  Word H = fnv1a(Name);
  for (Word A : Args)
    H = stableMix(H, A);
  return H;
}

namespace {

struct RuntimeFault {
  FaultKind K;
  std::string Message;
};

/// Operand resolved against the image and the function's value numbering.
struct ROp {
  enum class Kind { Imm, Slot, Func, Data, Extern, Block };
  Kind K = Kind::Imm;
  /// Immediate word, or the token of a symbol reference.
  Word Imm = 0;
  std::size_t Idx = 0;
};

struct REdge {
  std::size_t Target = 0;
  std::size_t ArgBegin = 0;
  std::size_t ArgEnd = 0;
};

struct RInst {
  Opcode Op = Opcode::Ret;
  long Result = -1;
  std::vector<ROp> Ops;
  std::vector<REdge> Edges;
};

struct RBlock {
  std::vector<std::size_t> ParamSlots;
  std::vector<RInst> Insts;
};

struct RFunction {
  std::string Name;
  std::size_t NumParams = 0;
  std::size_t NumSlots = 0;
  std::vector<RBlock> Blocks;
};

} // namespace

class Interpreter::Machine {
public:
  Machine(const LinkedImage &Image, const ExecLimits &Limits)
      : Limits(Limits) {
    for (const auto &[Name, G] : Image.Globals) {
      DataIndex.emplace(Name, InitialCells.size());
      CellNames.push_back(Name);
      Word Init = 0;
      if (const auto *W = std::get_if<Word>(&G.Data))
        Init = *W;
      else if (const auto *S = std::get_if<std::string>(&G.Data))
        for (std::size_t I = 0; I < 8 && I < S->size(); ++I)
          Init |= Word(static_cast<unsigned char>((*S)[I])) << (8 * I);
      InitialCells.push_back(Init);
      TokenToData.emplace(dataToken(Name), DataIndex[Name]);
    }
    for (const std::string &Name : Image.Externals) {
      ExternIndex.emplace(Name, ExternNames.size());
      TokenToExtern.emplace(externToken(Name), ExternNames.size());
      ExternNames.push_back(Name);
    }
    for (const auto &[Name, F] : Image.Functions) {
      FuncIndex.emplace(Name, Funcs.size());
      Funcs.emplace_back();
    }
    for (const auto &[From, To] : Image.Aliases) {
      auto It = FuncIndex.find(To);
      if (It != FuncIndex.end())
        FuncIndex.emplace(From, It->second);
    }
    for (const auto &[Name, Idx] : FuncIndex)
      TokenToFunc.emplace(functionToken(Name), Idx);
    for (const auto &[Name, F] : Image.Functions)
      Funcs[FuncIndex.at(Name)] = compile(F, Image);
  }

  std::optional<std::size_t> findFunction(const std::string &Name) const {
    auto It = FuncIndex.find(Name);
    if (It == FuncIndex.end())
      return std::nullopt;
    return It->second;
  }
  std::size_t arity(std::size_t F) const { return Funcs[F].NumParams; }

  ExecResult run(std::size_t Entry, const std::vector<Word> &Args) {
    Cells = InitialCells;
    Trace.clear();
    Steps = 0;
    ExecResult R;
    try {
      R.Returned = call(Entry, Args, 1);
    } catch (const RuntimeFault &F) {
      R.Error = Fault{F.K, F.Message};
      R.Returned.reset();
    }
    R.Trace = std::move(Trace);
    R.Steps = Steps;
    return R;
  }

private:
  ExecLimits Limits;
  std::vector<Word> InitialCells;
  std::vector<Word> Cells;
  std::vector<std::string> CellNames;
  std::map<std::string, std::size_t> DataIndex;
  std::vector<std::string> ExternNames;
  std::map<std::string, std::size_t> ExternIndex;
  std::map<std::string, std::size_t> FuncIndex;
  std::unordered_map<Word, std::size_t> TokenToFunc;
  std::unordered_map<Word, std::size_t> TokenToData;
  std::unordered_map<Word, std::size_t> TokenToExtern;
  std::vector<RFunction> Funcs;
  std::vector<Event> Trace;
  std::uint64_t Steps = 0;

  ROp resolveGlobal(const std::string &Name, const LinkedImage &Image) {
    std::string Target = Image.resolve(Name);
    if (auto It = FuncIndex.find(Target); It != FuncIndex.end())
      return {ROp::Kind::Func, functionToken(Target), It->second};
    if (auto It = DataIndex.find(Target); It != DataIndex.end())
      return {ROp::Kind::Data, dataToken(Target), It->second};
    if (auto It = ExternIndex.find(Target); It != ExternIndex.end())
      return {ROp::Kind::Extern, externToken(Target), It->second};
    throw Error("unresolved symbol '@" + Name + "' in linked image");
  }

  RFunction compile(const Function &F, const LinkedImage &Image) {
    std::map<std::string, unsigned> Numbering = valueNumbering(F);
    RFunction R;
    R.Name = F.Name;
    R.NumParams = F.Params.size();
    R.NumSlots = Numbering.size();
    for (const Block &B : F.Blocks) {
      RBlock RB;
      for (const std::string &P : B.Params)
        RB.ParamSlots.push_back(Numbering.at(P));
      for (const Instruction &I : B.Insts) {
        RInst RI;
        RI.Op = I.Op;
        if (I.Result)
          RI.Result = Numbering.at(*I.Result);
        for (const Operand &O : I.Ops) {
          switch (O.K) {
          case Operand::Kind::Literal:
            RI.Ops.push_back({ROp::Kind::Imm, O.Lit, 0});
            break;
          case Operand::Kind::Global:
            RI.Ops.push_back(resolveGlobal(O.Name, Image));
            break;
          case Operand::Kind::Value: {
            auto It = Numbering.find(O.Name);
            if (It == Numbering.end())
              throw Error("undefined value '%" + O.Name + "' in @" + F.Name);
            RI.Ops.push_back({ROp::Kind::Slot, 0, It->second});
            break;
          }
          case Operand::Kind::Param:
            if (O.Index >= F.Params.size())
              throw Error("parameter index out of range in @" + F.Name);
            RI.Ops.push_back({ROp::Kind::Slot, 0, O.Index});
            break;
          case Operand::Kind::Label: {
            std::optional<std::size_t> Target = F.blockIndex(O.Name);
            if (!Target)
              throw Error("undefined label '" + O.Name + "' in @" + F.Name);
            RI.Ops.push_back({ROp::Kind::Block, 0, *Target});
            break;
          }
          }
        }
        for (const BranchEdge &E : branchEdges(I))
          RI.Edges.push_back({*F.blockIndex(E.Label), E.ArgBegin, E.ArgEnd});
        RB.Insts.push_back(std::move(RI));
      }
      R.Blocks.push_back(std::move(RB));
    }
    return R;
  }

  static Word value(const ROp &O, const std::vector<Word> &Slots) {
    return O.K == ROp::Kind::Slot ? Slots[O.Idx] : O.Imm;
  }

  std::size_t cellFor(const ROp &O, const std::vector<Word> &Slots) {
    if (O.K == ROp::Kind::Data)
      return O.Idx;
    if (O.K == ROp::Kind::Slot) {
      auto It = TokenToData.find(Slots[O.Idx]);
      if (It != TokenToData.end())
        return It->second;
    }
    throw RuntimeFault{FaultKind::BadAddress, "access to unresolved address"};
  }

  Word callTarget(const ROp &Callee, const std::vector<Word> &Args,
                  const std::vector<Word> &Slots, unsigned Depth) {
    if (Callee.K == ROp::Kind::Func)
      return call(Callee.Idx, Args, Depth + 1);
    if (Callee.K == ROp::Kind::Extern)
      return callExtern(Callee.Idx, Args);
    Word W = value(Callee, Slots);
    if (auto It = TokenToFunc.find(W); It != TokenToFunc.end())
      return call(It->second, Args, Depth + 1);
    if (auto It = TokenToExtern.find(W); It != TokenToExtern.end())
      return callExtern(It->second, Args);
    throw RuntimeFault{FaultKind::NotAFunction, "call of a non-function word"};
  }

  Word callExtern(std::size_t Idx, const std::vector<Word> &Args) {
    const std::string &Name = ExternNames[Idx];
    Word Ret = externReturn(Name, Args);
    Trace.push_back({Event::Kind::ExternCall, Name, Ret, Args});
    return Ret;
  }

  Word call(std::size_t FIdx, const std::vector<Word> &Args, unsigned Depth) {
    if (Depth > Limits.MaxDepth)
      throw RuntimeFault{FaultKind::DepthLimit, "call depth limit exceeded"};
    const RFunction &F = Funcs[FIdx];
    if (Args.size() != F.NumParams)
      throw RuntimeFault{FaultKind::ArityMismatch,
                         "@" + F.Name + " called with wrong argument count"};
    std::vector<Word> Slots(F.NumSlots, 0);
    std::copy(Args.begin(), Args.end(), Slots.begin());
    std::size_t BI = 0;
    std::vector<Word> CallArgs;
    while (true) {
      const RBlock &B = F.Blocks[BI];
      std::optional<std::size_t> Next;
      for (const RInst &I : B.Insts) {
        if (++Steps > Limits.MaxSteps)
          throw RuntimeFault{FaultKind::StepLimit, "step limit exceeded"};
        auto V = [&](std::size_t J) { return value(I.Ops[J], Slots); };
        Word Res = 0;
        switch (I.Op) {
        case Opcode::Add:
          Res = V(0) + V(1);
          break;
        case Opcode::Sub:
          Res = V(0) - V(1);
          break;
        case Opcode::Mul:
          Res = V(0) * V(1);
          break;
        case Opcode::Const:
          Res = V(0);
          break;
        case Opcode::Load:
          Res = Cells[cellFor(I.Ops[0], Slots)];
          break;
        case Opcode::Store: {
          std::size_t Cell = cellFor(I.Ops[1], Slots);
          Cells[Cell] = V(0);
          Trace.push_back({Event::Kind::Store, CellNames[Cell], V(0), {}});
          break;
        }
        case Opcode::Call:
        case Opcode::Invoke: {
          std::size_t ArgEnd =
              I.Op == Opcode::Invoke ? I.Ops.size() - 2 : I.Ops.size();
          CallArgs.clear();
          for (std::size_t J = 1; J < ArgEnd; ++J)
            CallArgs.push_back(V(J));
          Res = callTarget(I.Ops[0], std::vector<Word>(CallArgs), Slots, Depth);
          break;
        }
        case Opcode::Br:
        case Opcode::BrCond: {
          const REdge &E =
              I.Op == Opcode::Br || V(0) != 0 ? I.Edges[0] : I.Edges[1];
          const RBlock &T = F.Blocks[E.Target];
          std::vector<Word> Passed;
          for (std::size_t J = E.ArgBegin; J < E.ArgEnd; ++J)
            Passed.push_back(V(J));
          for (std::size_t J = 0; J < T.ParamSlots.size(); ++J)
            Slots[T.ParamSlots[J]] = Passed[J];
          Next = E.Target;
          break;
        }
        case Opcode::Ret:
          return I.Ops.empty() ? 0 : V(0);
        }
        if (I.Result >= 0)
          Slots[static_cast<std::size_t>(I.Result)] = Res;
        if (Next)
          break;
      }
      if (!Next)
        throw RuntimeFault{FaultKind::Malformed, "fell off the end of a block"};
      BI = *Next;
    }
  }
};

Interpreter::Interpreter(const LinkedImage &Image, const ExecLimits &Limits)
    : Impl(std::make_unique<Machine>(Image, Limits)) {}

Interpreter::~Interpreter() = default;

std::optional<std::size_t> Interpreter::arity(const std::string &Entry) const {
  std::optional<std::size_t> F = Impl->findFunction(Entry);
  if (!F)
    return std::nullopt;
  return Impl->arity(*F);
}

ExecResult Interpreter::run(const std::string &Entry,
                            const std::vector<Word> &Args) {
  std::optional<std::size_t> F = Impl->findFunction(Entry);
  if (!F)
    throw Error("entry '@" + Entry + "' is not a function");
  if (Impl->arity(*F) != Args.size())
    throw Error("entry '@" + Entry + "' expects " +
                std::to_string(Impl->arity(*F)) + " arguments, got " +
                std::to_string(Args.size()));
  return Impl->run(*F, Args);
}

ExecResult run(const LinkedImage &Image, const std::string &Entry,
               const std::vector<Word> &Args, const ExecLimits &Limits) {
  return Interpreter(Image, Limits).run(Entry, Args);
}

ExecResult run(const Program &P, const std::string &Entry,
               const std::vector<Word> &Args, const ExecLimits &Limits) {
  return run(link(P), Entry, Args, Limits);
}

std::map<std::string, std::string>
unionAliases(const std::map<std::string, std::string> &A,
             const std::map<std::string, std::string> &B) {
  std::map<std::string, std::string> Parent;
  std::function<std::string(const std::string &)> Find =
      [&](const std::string &X) -> std::string {
    auto It = Parent.find(X);
    if (It == Parent.end() || It->second == X)
      return X;
    std::string Root = Find(It->second);
    Parent[X] = Root;
    return Root;
  };
  auto Unite = [&](const std::string &X, const std::string &Y) {
    std::string RX = Find(X), RY = Find(Y);
    if (RX == RY)
      return;
    if (RY < RX)
      std::swap(RX, RY);
    Parent[RY] = RX;
    Parent.emplace(RX, RX);
  };
  for (const auto *Map : {&A, &B})
    for (const auto &[From, To] : *Map)
      Unite(From, To);
  std::map<std::string, std::string> Out;
  for (const auto &[Name, P] : Parent) {
    std::string Root = Find(Name);
    if (Root != Name)
      Out.emplace(Name, Root);
  }
  return Out;
}

bool traceEqual(const ExecResult &A, const ExecResult &B,
                const std::map<std::string, std::string> &Aliases) {
  std::unordered_map<Word, Word> Tokens;
  for (const auto &[From, To] : Aliases)
    Tokens.emplace(functionToken(From), functionToken(To));
  auto Word_ = [&](Word W) {
    auto It = Tokens.find(W);
    return It == Tokens.end() ? W : It->second;
  };
  auto Name = [&](const std::string &N) {
    auto It = Aliases.find(N);
    return It == Aliases.end() ? N : It->second;
  };

  if (A.Error.has_value() != B.Error.has_value())
    return false;
  if (A.Error && A.Error->K != B.Error->K)
    return false;
  if (A.Returned.has_value() != B.Returned.has_value())
    return false;
  if (A.Returned && Word_(*A.Returned) != Word_(*B.Returned))
    return false;
  if (A.Trace.size() != B.Trace.size())
    return false;
  for (std::size_t I = 0; I < A.Trace.size(); ++I) {
    const Event &X = A.Trace[I], &Y = B.Trace[I];
    if (X.K != Y.K || Name(X.Symbol) != Name(Y.Symbol) ||
        Word_(X.Value) != Word_(Y.Value) || X.Args.size() != Y.Args.size())
      return false;
    for (std::size_t J = 0; J < X.Args.size(); ++J)
      if (Word_(X.Args[J]) != Word_(Y.Args[J]))
        return false;
  }
  return true;
}

std::string formatResult(const ExecResult &R) {
  std::ostringstream OS;
  if (R.Error)
    OS << "fault " << faultName(R.Error->K) << ": " << R.Error->Message
       << '\n';
  else
    OS << "returned 0x" << hex16(R.Returned.value_or(0)) << " ("
       << R.Returned.value_or(0) << ")\n";
  OS << "steps " << R.Steps << '\n';
  for (const Event &E : R.Trace) {
    if (E.K == Event::Kind::Store) {
      OS << "store @" << E.Symbol << " = " << E.Value << '\n';
      continue;
    }
    OS << "extern_call @" << E.Symbol << '(';
    for (std::size_t I = 0; I < E.Args.size(); ++I)
      OS << (I ? ", " : "") << E.Args[I];
    OS << ") -> " << E.Value << '\n';
  }
  return OS.str();
}

} // namespace mergelink
