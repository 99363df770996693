//===- StableHash.cpp - Stable function summaries -------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/StableHash.h"

#include "mergelink/Canonicalize.h"
#include "mergelink/Error.h"
#include "mergelink/IRText.h"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace mergelink {

Word stableMix(Word H, Word X) {
  for (int I = 0; I < 8; ++I) {
    H ^= (X >> (8 * I)) & 0xff;
    H *= FnvPrime;
  }
  return H;
}

Word fnv1a(std::string_view Bytes) {
  Word H = FnvBasis;
  for (char C : Bytes) {
    H ^= static_cast<unsigned char>(C);
    H *= FnvPrime;
  }
  return H;
}

StableHasher::StableHasher(const Module &M, MixFn Mix) : M(M), Mix(Mix) {}

Word StableHasher::tagged(HashTag Tag, Word Payload) const {
  return Mix(Mix(FnvBasis, static_cast<Word>(Tag)), Payload);
}

Word StableHasher::opcodeHash(Opcode Op) const { return fnv1a(mnemonic(Op)); }

Word StableHasher::literalHash(Word V) const {
  return tagged(HashTag::Literal, V);
}

static std::string payloadBytes(const GlobalDef &G) {
  if (const auto *W = std::get_if<Word>(&G.Data)) {
    std::string Bytes(8, '\0');
    for (int I = 0; I < 8; ++I)
      Bytes[I] = static_cast<char>((*W >> (8 * I)) & 0xff);
    return Bytes;
  }
  if (const auto *S = std::get_if<std::string>(&G.Data))
    return *S;
  return {};
}

Word StableHasher::globalHash(const std::string &Name) const {
  if (const GlobalDef *G = M.findGlobal(Name)) {
    if (G->Extern || G->Link == Linkage::Public)
      return tagged(HashTag::PublicSymbol, fnv1a(Name));
    return tagged(HashTag::PrivateContent, fnv1a(payloadBytes(*G)));
  }
  if (const Function *F = M.findFunction(Name)) {
    if (F->Link == Linkage::Public)
      return tagged(HashTag::PublicSymbol, fnv1a(Name));
    auto It = PrivateFnCache.find(Name);
    if (It != PrivateFnCache.end())
      return It->second;
    // References inside the body print by name, which keeps this finite for
    // recursive private functions.
    Word H = tagged(HashTag::PrivateContent, fnv1a(canonicalBody(*F)));
    PrivateFnCache.emplace(Name, H);
    return H;
  }
  throw Error("unresolved symbol '@" + Name + "' in module '" + M.Name + "'");
}

Word StableHasher::hashOperand(
    const Operand &O, const Function &F,
    const std::map<std::string, unsigned> &Numbering) const {
  switch (O.K) {
  case Operand::Kind::Literal:
    return literalHash(O.Lit);
  case Operand::Kind::Global:
    return globalHash(O.Name);
  case Operand::Kind::Value: {
    auto It = Numbering.find(O.Name);
    Word Index = It == Numbering.end() ? ~Word(0) : It->second;
    return tagged(HashTag::Value, Index);
  }
  case Operand::Kind::Label: {
    std::optional<std::size_t> Index = F.blockIndex(O.Name);
    return tagged(HashTag::Label, Index ? *Index : ~Word(0));
  }
  case Operand::Kind::Param:
    return tagged(HashTag::Param, O.Index);
  }
  return 0;
}

StableFunctionSummary StableHasher::computeStableFn(const Function &F) const {
  std::map<std::string, unsigned> Numbering = valueNumbering(F);
  StableFunctionSummary SF;
  SF.ModName = M.Name;
  SF.FnName = F.Name;
  Word H = 0;
  std::uint32_t Index = 0;
  for (const Block &B : F.Blocks) {
    for (const Instruction &I : B.Insts) {
      H = Mix(H, opcodeHash(I.Op));
      for (std::uint32_t J = 0; J < I.Ops.size(); ++J) {
        Word OpndHash = hashOperand(I.Ops[J], F, Numbering);
        if (canParam(I.Op, J, I.Ops[J]))
          SF.LocToHash[{Index, J}] = OpndHash;
        else
          H = Mix(H, OpndHash);
      }
      ++Index;
    }
  }
  SF.Hash = H;
  SF.InstCount = Index;
  return SF;
}

Word hashOperand(const Operand &O, const Function &F, const Module &M) {
  return StableHasher(M).hashOperand(O, F, valueNumbering(F));
}

bool canParam(Opcode Op, std::size_t OpndIndex, const Operand &O) {
  if (!O.isConstant())
    return false;
  switch (Op) {
  case Opcode::Call:
  case Opcode::Invoke:
    // Callee and every constant argument; labels are never constant.
    return true;
  case Opcode::Load:
    return OpndIndex == 0;
  case Opcode::Store:
    return OpndIndex <= 1;
  default:
    return false;
  }
}

StableFunctionSummary computeStableFn(const Function &F, const Module &M,
                                      MixFn Mix) {
  return StableHasher(M, Mix).computeStableFn(F);
}

bool isValidSummary(const StableFunctionSummary &SF, const Function &F) {
  return SF.InstCount >= 2 && F.Orig == Origin::Original;
}

std::vector<StableFunctionSummary> analyzeModule(const Module &M, MixFn Mix) {
  StableHasher Hasher(M, Mix);
  std::vector<StableFunctionSummary> Out;
  for (const Function &F : M.Functions) {
    if (F.Orig != Origin::Original)
      continue;
    StableFunctionSummary SF = Hasher.computeStableFn(F);
    if (isValidSummary(SF, F))
      Out.push_back(std::move(SF));
  }
  std::sort(Out.begin(), Out.end(),
            [](const StableFunctionSummary &A, const StableFunctionSummary &B) {
              return A.FnName < B.FnName;
            });
  return Out;
}

std::string hex16(Word V) {
  static const char Digits[] = "0123456789abcdef";
  std::string S(16, '0');
  for (int I = 15; I >= 0; --I) {
    S[I] = Digits[V & 0xf];
    V >>= 4;
  }
  return S;
}

Word parseHex16(std::string_view Text) {
  if (Text.size() != 16)
    throw Error("expected 16 hex digits, got '" + std::string(Text) + "'");
  Word V = 0;
  auto [Ptr, Ec] = std::from_chars(Text.data(), Text.data() + Text.size(), V, 16);
  if (Ec != std::errc() || Ptr != Text.data() + Text.size())
    throw Error("malformed hex value '" + std::string(Text) + "'");
  return V;
}

std::string formatLoc(const Loc &L) {
  return "(" + std::to_string(L.Inst) + "," + std::to_string(L.Opnd) + ")";
}

std::string formatLocHashList(const std::map<Loc, Word> &Map) {
  std::string S = "[";
  bool First = true;
  for (const auto &[L, H] : Map) {
    if (!First)
      S += ",";
    First = false;
    S += formatLoc(L) + ":" + hex16(H);
  }
  return S + "]";
}

static std::uint32_t parseIndex(std::string_view Text) {
  std::uint32_t V = 0;
  auto [Ptr, Ec] = std::from_chars(Text.data(), Text.data() + Text.size(), V);
  if (Ec != std::errc() || Ptr != Text.data() + Text.size() || Text.empty())
    throw Error("malformed index '" + std::string(Text) + "'");
  return V;
}

std::map<Loc, Word> parseLocHashList(std::string_view Text) {
  if (Text.size() < 2 || Text.front() != '[' || Text.back() != ']')
    throw Error("malformed location list '" + std::string(Text) + "'");
  std::map<Loc, Word> Map;
  std::string_view Body = Text.substr(1, Text.size() - 2);
  while (!Body.empty()) {
    // (i,j):hhhhhhhhhhhhhhhh
    std::size_t Close = Body.find(')');
    if (Body.front() != '(' || Close == std::string_view::npos ||
        Close + 18 > Body.size() || Body[Close + 1] != ':')
      throw Error("malformed location entry in '" + std::string(Text) + "'");
    std::string_view Pair = Body.substr(1, Close - 1);
    std::size_t Comma = Pair.find(',');
    if (Comma == std::string_view::npos)
      throw Error("malformed location '" + std::string(Pair) + "'");
    Loc L{parseIndex(Pair.substr(0, Comma)), parseIndex(Pair.substr(Comma + 1))};
    Word H = parseHex16(Body.substr(Close + 2, 16));
    if (!Map.emplace(L, H).second)
      throw Error("duplicate location " + formatLoc(L));
    Body.remove_prefix(Close + 18);
    if (!Body.empty()) {
      if (Body.front() != ',' || Body.size() == 1)
        throw Error("malformed location list '" + std::string(Text) + "'");
      Body.remove_prefix(1);
    }
  }
  return Map;
}

std::string writeSummaries(std::vector<StableFunctionSummary> Summaries) {
  std::sort(Summaries.begin(), Summaries.end(),
            [](const StableFunctionSummary &A, const StableFunctionSummary &B) {
              return std::tie(A.ModName, A.FnName) <
                     std::tie(B.ModName, B.FnName);
            });
  std::ostringstream OS;
  for (const StableFunctionSummary &SF : Summaries)
    OS << "SF v1 " << hex16(SF.Hash) << ' ' << SF.ModName << ' ' << SF.FnName
       << ' ' << SF.InstCount << ' ' << formatLocHashList(SF.LocToHash)
       << '\n';
  return OS.str();
}

std::vector<StableFunctionSummary> readSummaries(std::string_view Text) {
  std::vector<StableFunctionSummary> Out;
  std::istringstream IS{std::string(Text)};
  std::string Line;
  unsigned LineNo = 0;
  while (std::getline(IS, Line)) {
    ++LineNo;
    if (Line.empty())
      continue;
    std::istringstream LS(Line);
    std::string Tag, Version, Hash, Mod, Fn, Count, Locs, Extra;
    LS >> Tag >> Version >> Hash >> Mod >> Fn >> Count >> Locs;
    if (Tag != "SF" || Version != "v1" || Locs.empty() || (LS >> Extra))
      throw ParseError(LineNo, 1, "malformed summary line");
    try {
      StableFunctionSummary SF;
      SF.Hash = parseHex16(Hash);
      SF.ModName = Mod;
      SF.FnName = Fn;
      SF.InstCount = parseIndex(Count);
      SF.LocToHash = parseLocHashList(Locs);
      Out.push_back(std::move(SF));
    } catch (const ParseError &) {
      throw;
    } catch (const Error &E) {
      throw ParseError(LineNo, 1, E.what());
    }
  }
  return Out;
}

} // namespace mergelink
