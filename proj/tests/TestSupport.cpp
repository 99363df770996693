//===- TestSupport.cpp - Shared test helpers ------------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "TestSupport.h"

#include "mergelink/Error.h"
#include "mergelink/IRText.h"

#include <algorithm>
#include <functional>
#include <set>

namespace mergelink::test {

Program parseProgram(const std::vector<std::string_view> &Texts) {
  Program P;
  for (std::string_view T : Texts)
    P.Modules.push_back(parseModule(T));
  P.sortModules();
  return P;
}

const Function &getFunction(const Module &M, std::string_view Name) {
  if (const Function *F = M.findFunction(Name))
    return *F;
  throw Error("no function " + std::string(Name) + " in " + M.Name);
}

const Function &getFunction(const LinkedImage &I, std::string_view Name) {
  auto It = I.Functions.find(std::string(Name));
  if (It == I.Functions.end())
    throw Error("no function " + std::string(Name) + " in image");
  return It->second;
}

std::string twinModule(unsigned Index, unsigned Pad) {
  std::string N = std::to_string(Index);
  std::string S = "module m" + N + "\n\n";
  S += "func @g" + N + "(%x) public {\nentry:\n  %r = add %x, " +
       std::to_string(10 * Index) + "\n  ret %r\n}\n\n";
  S += "func @f" + N + "(%a) public {\nentry:\n";
  S += "  %0 = add %a, 1\n  %1 = call @g" + N + "(%0)\n  %2 = sub %a, %1\n";
  unsigned Last = 2;
  for (unsigned I = 0; I < Pad; ++I, ++Last)
    S += "  %" + std::to_string(Last + 1) + " = " + (I % 2 ? "mul" : "add") +
         " %" + std::to_string(Last) + ", " + std::to_string(I + 3) + "\n";
  S += "  ret %" + std::to_string(Last) + "\n}\n";
  return S;
}

std::string fourLoadModule() {
  const char *Cells[3][4] = {
      {"A", "A", "B", "A"}, {"A", "B", "A", "B"}, {"A", "A", "A", "A"}};
  std::string S = "module m\nglobal @A = 11 public\nglobal @B = 22 public\n";
  for (int F = 0; F < 3; ++F) {
    S += "\nfunc @f" + std::to_string(F + 1) + "(%a) public {\nentry:\n";
    for (int I = 0; I < 4; ++I)
      S += "  %" + std::to_string(I) + " = load @" + Cells[F][I] + "\n";
    S += "  %4 = add %0, %1\n  %5 = add %4, %2\n  %6 = add %5, %3\n"
         "  %7 = mul %6, %a\n  ret %7\n}\n";
  }
  return S;
}

std::vector<Word> randomArgs(std::mt19937_64 &Rng, std::size_t N) {
  std::vector<Word> Args;
  for (std::size_t I = 0; I < N; ++I)
    Args.push_back(Rng() % 4 == 0 ? Rng() : Rng() % 100);
  return Args;
}

std::vector<std::pair<std::string, std::size_t>>
publicEntries(const Program &P) {
  std::vector<std::pair<std::string, std::size_t>> Out;
  for (const Module &M : P.Modules)
    for (const Function &F : M.Functions)
      if (F.Link == Linkage::Public)
        Out.emplace_back(F.Name, F.Params.size());
  std::sort(Out.begin(), Out.end());
  return Out;
}

std::optional<std::string>
compareTraces(const Program &P, const LinkedImage &Image,
              const std::map<std::string, std::string> &Aliases,
              std::uint64_t Seed, unsigned Samples) {
  std::vector<std::pair<std::string, std::size_t>> Entries = publicEntries(P);
  if (Entries.empty())
    return std::nullopt;
  LinkedImage Base = link(P);
  Interpreter Before(Base);
  Interpreter After(Image);
  std::mt19937_64 Rng(Seed);
  for (unsigned S = 0; S < Samples; ++S) {
    const auto &[Entry, Arity] = Entries[Rng() % Entries.size()];
    std::vector<Word> Args = randomArgs(Rng, Arity);
    ExecResult A = Before.run(Entry, Args);
    ExecResult B = After.run(Image.resolve(Entry), Args);
    if (!traceEqual(A, B, Aliases))
      return "entry @" + Entry + ":\n-- before\n" + formatResult(A) +
             "-- after\n" + formatResult(B);
  }
  return std::nullopt;
}

std::vector<std::vector<std::string>> oracleFoldClasses(const LinkedImage &I,
                                                        IcfMode Mode) {
  auto Foldable = [&](const Function &F) {
    if (Mode == IcfMode::All)
      return true;
    return Mode == IcfMode::Safe && F.Link == Linkage::Private;
  };
  std::map<std::string, std::string> Memo;
  std::set<std::string> Active;
  std::function<std::string(const std::string &)> Resolve =
      [&](const std::string &Name) -> std::string {
    auto Hit = Memo.find(Name);
    if (Hit != Memo.end())
      return Hit->second;
    const Function &F = I.Functions.at(Name);
    if (!Foldable(F))
      return Memo[Name] = "U" + Name;
    if (!Active.insert(Name).second)
      throw Error("reference cycle through " + Name);
    std::string Text =
        "F" + canonicalBody(F, [&](const std::string &Ref) -> std::string {
          if (I.Functions.count(Ref))
            return "{" + Resolve(Ref) + "}";
          return "@" + Ref;
        });
    Active.erase(Name);
    return Memo[Name] = Text;
  };

  std::map<std::string, std::vector<std::string>> ByText;
  for (const auto &[Name, F] : I.Functions)
    ByText[Resolve(Name)].push_back(Name);
  std::vector<std::vector<std::string>> Classes;
  for (auto &[Text, Names] : ByText)
    Classes.push_back(std::move(Names));
  std::sort(Classes.begin(), Classes.end());
  return Classes;
}

CorpusConfig smallCorpus(std::uint64_t Seed) {
  std::mt19937_64 Rng(Seed * 0x9e3779b97f4a7c15ULL + 1);
  CorpusConfig C;
  C.Seed = Seed;
  C.Modules = 1 + Rng() % 5;
  C.FunctionsPerModule = 3 + Rng() % 5;
  C.FamilySizeMin = 2;
  C.FamilySizeMax = 2 + Rng() % 2;
  C.Spread = static_cast<FamilySpread>(Rng() % 3);
  if (C.Spread == FamilySpread::CrossModule && C.Modules < C.FamilySizeMax)
    C.Spread = FamilySpread::Mixed;
  unsigned Capacity = C.Modules * C.FunctionsPerModule / C.FamilySizeMax;
  C.Families = std::min<unsigned>(Rng() % 4, Capacity);
  C.DivergentLocs = Rng() % 3;
  C.BodyLenMin = 6 + Rng() % 6;
  C.BodyLenMax = C.BodyLenMin + Rng() % 8;
  C.BlocksMax = 1 + Rng() % 3;
  C.Motifs = Rng() % 3;
  C.MotifLen = 2 + Rng() % 3;
  C.MotifRemoteSites = Rng() % 3;
  C.LeavesPerModule = 1 + Rng() % 2;
  C.Externs = 1 + Rng() % 2;
  C.PadFamiliesForCostModel = Rng() % 4 != 0;
  return C;
}

Word zeroMix(Word, Word) { return 0; }

} // namespace mergelink::test
