//===- Outliner.cpp - Hash-sequence function outliner ---------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/Outliner.h"

#include "mergelink/Canonicalize.h"
#include "mergelink/Error.h"

#include <algorithm>
#include <limits>
#include <sstream>

namespace mergelink {

namespace {

/// Per-instruction facts that make closedness an O(len) check.
struct BlockFacts {
  /// Smallest in-block definition position among value operands; -1 if any
  /// operand comes from outside the block's straight-line results.
  std::vector<long> MinDef;
  /// Last in-block position using the instruction's result; -1 if unused.
  std::vector<long> LastUse;
  std::vector<bool> Outlinable;
  /// Definition position of each value operand, -1 if not a local result.
  std::vector<std::vector<long>> OperandDefs;

  explicit BlockFacts(const Block &B) {
    std::size_t N = B.Insts.size();
    MinDef.assign(N, std::numeric_limits<long>::max());
    LastUse.assign(N, -1);
    Outlinable.assign(N, false);
    OperandDefs.resize(N);
    std::map<std::string, long> DefPos;
    for (std::size_t I = 0; I < N; ++I) {
      const Instruction &Inst = B.Insts[I];
      Outlinable[I] = !isTerminator(Inst.Op) && Inst.Op != Opcode::Invoke;
      for (const Operand &O : Inst.Ops) {
        long Def = -1;
        if (O.K == Operand::Kind::Value) {
          auto It = DefPos.find(O.Name);
          if (It != DefPos.end()) {
            Def = It->second;
            LastUse[Def] = static_cast<long>(I);
          }
          MinDef[I] = std::min(MinDef[I], Def);
        } else if (O.K == Operand::Kind::Param) {
          MinDef[I] = -1;
        }
        OperandDefs[I].push_back(Def);
      }
      if (Inst.Result)
        DefPos[*Inst.Result] = static_cast<long>(I);
    }
  }

  bool closed(std::size_t Start, std::size_t Len) const {
    if (Len == 0 || Start + Len > Outlinable.size())
      return false;
    long S = static_cast<long>(Start), E = static_cast<long>(Start + Len);
    for (long I = S; I < E; ++I)
      if (!Outlinable[I] || MinDef[I] < S || LastUse[I] >= E)
        return false;
    return true;
  }

  /// Calls \p Fn(Start, Len) for every closed range of at least \p MinLen.
  template <typename FnT> void forEachClosed(unsigned MinLen, FnT Fn) const {
    long N = static_cast<long>(Outlinable.size());
    for (long S = 0; S < N; ++S) {
      long MaxUse = -1;
      for (long E = S + 1; E <= N; ++E) {
        long I = E - 1;
        // Both conditions stay violated for every longer range.
        if (!Outlinable[I] || MinDef[I] < S)
          break;
        MaxUse = std::max(MaxUse, LastUse[I]);
        if (E - S >= static_cast<long>(MinLen) && MaxUse < E)
          Fn(static_cast<std::size_t>(S), static_cast<std::size_t>(E - S));
      }
    }
  }
};

Word hashInstruction(const Instruction &I, std::size_t Pos,
                     const std::vector<long> &Defs, const Function &F,
                     const Block &B, const StableHasher &H) {
  Word Hash = H.mix(0, H.opcodeHash(I.Op));
  for (std::size_t J = 0; J < I.Ops.size(); ++J) {
    const Operand &O = I.Ops[J];
    Word OpHash;
    if (O.K == Operand::Kind::Value) {
      if (Defs[J] >= 0) {
        OpHash = H.tagged(HashTag::Value, Pos - static_cast<std::size_t>(Defs[J]));
      } else {
        auto It = std::find(B.Params.begin(), B.Params.end(), O.Name);
        OpHash = It == B.Params.end()
                     ? H.tagged(HashTag::Value, ~Word(0))
                     : H.tagged(HashTag::BlockParam,
                                static_cast<Word>(It - B.Params.begin()));
      }
    } else {
      OpHash = H.hashOperand(O, F, {});
    }
    Hash = H.mix(Hash, OpHash);
  }
  return Hash;
}

InstHashSeq hashesWith(const Block &B, const Function &F,
                       const StableHasher &H, const BlockFacts &Facts) {
  InstHashSeq Seq;
  for (std::size_t I = 0; I < B.Insts.size(); ++I) {
    if (isTerminator(B.Insts[I].Op))
      break;
    Seq.push_back(hashInstruction(B.Insts[I], I, Facts.OperandDefs[I], F, B, H));
  }
  return Seq;
}

/// Exact position-independent spelling of an instruction; value operands by
/// distance, so equal spellings over a closed range mean alpha-equivalence.
std::string instKey(const Instruction &I, std::size_t Pos,
                    const std::vector<long> &Defs) {
  std::ostringstream OS;
  OS << mnemonic(I.Op) << (I.Result ? "=" : "");
  for (std::size_t J = 0; J < I.Ops.size(); ++J) {
    const Operand &O = I.Ops[J];
    switch (O.K) {
    case Operand::Kind::Literal:
      OS << " #" << O.Lit;
      break;
    case Operand::Kind::Global:
      OS << " @" << O.Name;
      break;
    case Operand::Kind::Value:
      if (Defs[J] >= 0)
        OS << " d" << (Pos - static_cast<std::size_t>(Defs[J]));
      else
        OS << " %" << O.Name;
      break;
    case Operand::Kind::Label:
      OS << " :" << O.Name;
      break;
    case Operand::Kind::Param:
      OS << " $" << O.Index;
      break;
    }
  }
  return OS.str();
}

struct Site {
  std::size_t Fn = 0;
  std::size_t Blk = 0;
  std::size_t Start = 0;
  std::size_t Len = 0;
  std::string Callee;
};

std::string freshName(const Module &M, const std::set<std::string> &Taken,
                      const std::string &Prefix, unsigned &Counter) {
  while (true) {
    std::string Name = Prefix + std::to_string(Counter++);
    if (!M.findFunction(Name) && !M.findGlobal(Name) && !Taken.count(Name))
      return Name;
  }
}

Function makeOutlined(const std::string &Name, const Block &B,
                      std::size_t Start, std::size_t Len) {
  Function F;
  F.Name = Name;
  F.Link = Linkage::Private;
  F.Orig = Origin::Outlined;
  Block Body;
  Body.Label = "entry";
  Body.Insts.assign(B.Insts.begin() + Start, B.Insts.begin() + Start + Len);
  Body.Insts.push_back({Opcode::Ret, std::nullopt, {}});
  F.Blocks.push_back(std::move(Body));
  return canonicalizeLabels(canonicalizeValues(F));
}

/// Replaces every site with a call to its callee. Sites in one block must not
/// overlap.
void applySites(Module &M, std::vector<Site> Sites) {
  std::sort(Sites.begin(), Sites.end(), [](const Site &A, const Site &B) {
    return std::tie(A.Fn, A.Blk, B.Start) < std::tie(B.Fn, B.Blk, A.Start);
  });
  for (const Site &S : Sites) {
    auto &Insts = M.Functions[S.Fn].Blocks[S.Blk].Insts;
    auto First = Insts.begin() + static_cast<long>(S.Start);
    First = Insts.erase(First, First + static_cast<long>(S.Len));
    Insts.insert(First, {Opcode::Call, std::nullopt, {Operand::global(S.Callee)}});
  }
}

bool eligibleForLocal(const Function &F, const OutlineConfig &Cfg) {
  if (F.Orig == Origin::Outlined || F.Orig == Origin::Thunk)
    return false;
  return F.Orig != Origin::MergedTgm || Cfg.TgmLocalOutlining;
}

} // namespace

InstHashSeq instHashSeq(const Block &B, const Function &F,
                        const StableHasher &Hasher) {
  return hashesWith(B, F, Hasher, BlockFacts(B));
}

bool isClosedRange(const Block &B, std::size_t Start, std::size_t Len) {
  return BlockFacts(B).closed(Start, Len);
}

std::vector<OutlineRange> legalRanges(const Block &B, unsigned MinLen) {
  BlockFacts Facts(B);
  // Closed ranges that overlap or touch have a closed union, so the maximal
  // ones are disjoint and the longest from each start suffices.
  std::vector<OutlineRange> Longest;
  Facts.forEachClosed(MinLen, [&](std::size_t S, std::size_t L) {
    if (!Longest.empty() && Longest.back().Start == S)
      Longest.back().Len = L;
    else
      Longest.push_back({S, L});
  });
  std::vector<OutlineRange> Out;
  for (const OutlineRange &R : Longest)
    if (Out.empty() || R.Start + R.Len > Out.back().Start + Out.back().Len)
      Out.push_back(R);
  return Out;
}

GlobalPrefixTree::GlobalPrefixTree() : Nodes(1) {}

void GlobalPrefixTree::insert(const InstHashSeq &Seq) {
  if (Seq.empty())
    return;
  std::size_t Cur = 0;
  for (Word H : Seq) {
    auto It = Nodes[Cur].Children.find(H);
    if (It == Nodes[Cur].Children.end()) {
      Nodes.emplace_back();
      It = Nodes[Cur].Children.emplace(H, Nodes.size() - 1).first;
    }
    Cur = It->second;
  }
  Nodes[Cur].Terminal = true;
}

std::vector<std::size_t>
GlobalPrefixTree::terminalMatches(const InstHashSeq &Hashes,
                                  std::size_t Start) const {
  std::vector<std::size_t> Lens;
  std::size_t Cur = 0;
  for (std::size_t I = Start; I < Hashes.size(); ++I) {
    auto It = Nodes[Cur].Children.find(Hashes[I]);
    if (It == Nodes[Cur].Children.end())
      break;
    Cur = It->second;
    if (Nodes[Cur].Terminal)
      Lens.push_back(I - Start + 1);
  }
  return Lens;
}

bool GlobalPrefixTree::contains(const InstHashSeq &Seq) const {
  std::vector<std::size_t> Lens = terminalMatches(Seq, 0);
  return !Seq.empty() && !Lens.empty() && Lens.back() == Seq.size();
}

std::vector<InstHashSeq> GlobalPrefixTree::sequences() const {
  std::vector<InstHashSeq> Out;
  InstHashSeq Path;
  auto Walk = [&](auto &Self, std::size_t N) -> void {
    if (Nodes[N].Terminal)
      Out.push_back(Path);
    for (const auto &[H, Child] : Nodes[N].Children) {
      Path.push_back(H);
      Self(Self, Child);
      Path.pop_back();
    }
  };
  Walk(Walk, 0);
  return Out;
}

GlobalPrefixTree buildPrefixTree(std::vector<InstHashSeq> Seqs) {
  std::sort(Seqs.begin(), Seqs.end());
  GlobalPrefixTree T;
  for (const InstHashSeq &S : Seqs)
    T.insert(S);
  return T;
}

std::string writePrefixTree(const GlobalPrefixTree &T) {
  std::vector<std::string> Lines;
  for (const InstHashSeq &S : T.sequences()) {
    std::string Line = "SEQ v1 ";
    for (std::size_t I = 0; I < S.size(); ++I)
      Line += (I ? "," : "") + hex16(S[I]);
    Lines.push_back(std::move(Line));
  }
  std::sort(Lines.begin(), Lines.end());
  std::string Out;
  for (const std::string &L : Lines)
    Out += L + "\n";
  return Out;
}

GlobalPrefixTree readPrefixTree(std::string_view Text) {
  std::vector<InstHashSeq> Seqs;
  std::istringstream IS{std::string(Text)};
  std::string Line;
  unsigned LineNo = 0;
  while (std::getline(IS, Line)) {
    ++LineNo;
    if (Line.empty())
      continue;
    std::istringstream LS(Line);
    std::string Tag, Version, List, Extra;
    LS >> Tag >> Version >> List;
    if (Tag != "SEQ" || Version != "v1" || List.empty() || (LS >> Extra))
      throw ParseError(LineNo, 1, "malformed sequence line");
    InstHashSeq Seq;
    try {
      std::string_view Rest = List;
      while (true) {
        std::size_t Comma = Rest.find(',');
        Seq.push_back(parseHex16(Rest.substr(0, Comma)));
        if (Comma == std::string_view::npos)
          break;
        Rest.remove_prefix(Comma + 1);
      }
    } catch (const Error &E) {
      throw ParseError(LineNo, 1, E.what());
    }
    Seqs.push_back(std::move(Seq));
  }
  return buildPrefixTree(std::move(Seqs));
}

std::pair<Module, std::vector<InstHashSeq>>
outlineLocal(const Module &M, const OutlineConfig &Cfg) {
  struct Occ {
    std::size_t Fn, Blk, Start;
  };
  std::map<std::string, std::uint32_t> KeyIds;
  std::map<std::vector<std::uint32_t>, std::vector<Occ>> Groups;
  std::vector<std::vector<BlockFacts>> Facts(M.Functions.size());

  for (std::size_t FI = 0; FI < M.Functions.size(); ++FI) {
    const Function &F = M.Functions[FI];
    for (std::size_t BI = 0; BI < F.Blocks.size(); ++BI) {
      const Block &B = F.Blocks[BI];
      Facts[FI].emplace_back(B);
      if (!eligibleForLocal(F, Cfg))
        continue;
      const BlockFacts &BF = Facts[FI].back();
      std::vector<std::uint32_t> Ids;
      for (std::size_t I = 0; I < B.Insts.size(); ++I) {
        auto [It, _] = KeyIds.emplace(instKey(B.Insts[I], I, BF.OperandDefs[I]),
                                      static_cast<std::uint32_t>(KeyIds.size()));
        Ids.push_back(It->second);
      }
      BF.forEachClosed(Cfg.MinOutlineLen, [&](std::size_t S, std::size_t L) {
        std::vector<std::uint32_t> Key(Ids.begin() + S, Ids.begin() + S + L);
        Groups[std::move(Key)].push_back({FI, BI, S});
      });
    }
  }
  std::erase_if(Groups, [&](const auto &G) {
    return G.second.size() < std::max(2u, Cfg.MinLocalOccurrences);
  });

  std::vector<std::vector<std::vector<bool>>> Used(M.Functions.size());
  for (std::size_t FI = 0; FI < M.Functions.size(); ++FI)
    for (const Block &B : M.Functions[FI].Blocks)
      Used[FI].emplace_back(B.Insts.size(), false);

  auto Available = [&](const std::vector<Occ> &Occs, std::size_t Len) {
    std::vector<Occ> Picked;
    for (const Occ &O : Occs) {
      const std::vector<bool> &U = Used[O.Fn][O.Blk];
      if (std::any_of(U.begin() + O.Start, U.begin() + O.Start + Len,
                      [](bool B) { return B; }))
        continue;
      if (!Picked.empty() && Picked.back().Fn == O.Fn &&
          Picked.back().Blk == O.Blk && Picked.back().Start + Len > O.Start)
        continue;
      Picked.push_back(O);
    }
    return Picked;
  };

  Module Out = M;
  std::vector<Site> Sites;
  std::vector<InstHashSeq> Published;
  std::set<std::string> Taken;
  StableHasher Hasher(M, Cfg.Mix);
  unsigned Counter = 0;
  while (true) {
    const std::vector<std::uint32_t> *BestKey = nullptr;
    std::vector<Occ> BestOccs;
    long long BestBenefit = 0;
    for (const auto &[Key, Occs] : Groups) {
      std::vector<Occ> Picked = Available(Occs, Key.size());
      if (Picked.size() < Cfg.MinLocalOccurrences)
        continue;
      long long N = static_cast<long long>(Picked.size());
      long long L = static_cast<long long>(Key.size());
      long long Benefit = N * L - (N * Cfg.CallOverhead + L);
      if (Benefit <= 0)
        continue;
      // Map order already breaks remaining ties deterministically.
      if (!BestKey || Benefit > BestBenefit ||
          (Benefit == BestBenefit && Key.size() > BestKey->size())) {
        BestKey = &Key;
        BestOccs = std::move(Picked);
        BestBenefit = Benefit;
      }
    }
    if (!BestKey)
      break;

    std::size_t Len = BestKey->size();
    const Occ &First = BestOccs.front();
    const Function &SrcF = M.Functions[First.Fn];
    const Block &SrcB = SrcF.Blocks[First.Blk];
    std::string Name = freshName(M, Taken, "outlined." + M.Name + ".", Counter);
    Taken.insert(Name);
    Out.Functions.push_back(makeOutlined(Name, SrcB, First.Start, Len));
    InstHashSeq Seq = hashesWith(SrcB, SrcF, Hasher, Facts[First.Fn][First.Blk]);
    Published.emplace_back(Seq.begin() + First.Start,
                           Seq.begin() + First.Start + Len);
    for (const Occ &O : BestOccs) {
      std::fill(Used[O.Fn][O.Blk].begin() + O.Start,
                Used[O.Fn][O.Blk].begin() + O.Start + Len, true);
      Sites.push_back({O.Fn, O.Blk, O.Start, Len, Name});
    }
  }
  applySites(Out, std::move(Sites));
  std::sort(Published.begin(), Published.end());
  Published.erase(std::unique(Published.begin(), Published.end()),
                  Published.end());
  return {std::move(Out), std::move(Published)};
}

Module outlineWithTree(const Module &M, const GlobalPrefixTree &Tree,
                       const OutlineConfig &Cfg) {
  Module Out = outlineLocal(M, Cfg).first;
  if (Tree.empty())
    return Out;

  StableHasher Hasher(Out, Cfg.Mix);
  std::vector<Site> Sites;
  std::vector<Function> NewFunctions;
  std::set<std::string> Taken;
  unsigned Counter = 0;
  for (std::size_t FI = 0; FI < Out.Functions.size(); ++FI) {
    const Function &F = Out.Functions[FI];
    if (F.Orig == Origin::Outlined || F.Orig == Origin::Thunk)
      continue;
    for (std::size_t BI = 0; BI < F.Blocks.size(); ++BI) {
      const Block &B = F.Blocks[BI];
      BlockFacts Facts(B);
      InstHashSeq Hashes = hashesWith(B, F, Hasher, Facts);
      std::size_t I = 0;
      while (I < Hashes.size()) {
        std::vector<std::size_t> Lens = Tree.terminalMatches(Hashes, I);
        std::size_t Hit = 0;
        for (auto It = Lens.rbegin(); It != Lens.rend(); ++It)
          if (*It >= Cfg.MinOutlineLen && Facts.closed(I, *It)) {
            Hit = *It;
            break;
          }
        if (!Hit) {
          ++I;
          continue;
        }
        std::string Name =
            freshName(Out, Taken, "outlined." + Out.Name + ".g", Counter);
        Taken.insert(Name);
        NewFunctions.push_back(makeOutlined(Name, B, I, Hit));
        Sites.push_back({FI, BI, I, Hit, Name});
        I += Hit;
      }
    }
  }
  applySites(Out, std::move(Sites));
  for (Function &F : NewFunctions)
    Out.Functions.push_back(std::move(F));
  return Out;
}

} // namespace mergelink
