//===- Linker.cpp - Simulated static linker -------------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/Linker.h"

#include "mergelink/Error.h"
#include "mergelink/IRText.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace mergelink {

std::string_view icfModeName(IcfMode M) {
  switch (M) {
  case IcfMode::Off:
    return "off";
  case IcfMode::Safe:
    return "safe";
  case IcfMode::All:
    return "all";
  }
  return "";
}

std::optional<IcfMode> icfModeFromName(std::string_view Text) {
  for (IcfMode M : {IcfMode::Off, IcfMode::Safe, IcfMode::All})
    if (icfModeName(M) == Text)
      return M;
  return std::nullopt;
}

std::string LinkedImage::resolve(const std::string &Name) const {
  auto It = Aliases.find(Name);
  return It == Aliases.end() ? Name : It->second;
}

std::map<std::string, std::string> LinkerMap::aliases() const {
  std::map<std::string, std::string> Out;
  for (const FoldGroup &G : Groups)
    for (const std::string &M : G.Members)
      Out.emplace(M, G.Rep);
  return Out;
}

std::string linkedName(const Module &M, const std::string &Name) {
  return M.Name + "$" + Name;
}

LinkedImage link(const std::vector<Module> &Modules) {
  LinkedImage Image;
  std::map<std::string, std::string> PublicOwner;
  auto Claim = [&](const std::string &Name, const Module &M) {
    auto [It, Inserted] = PublicOwner.emplace(Name, M.Name);
    if (!Inserted)
      throw Error("duplicate public symbol '@" + Name + "' in modules '" +
                  It->second + "' and '" + M.Name + "'");
  };
  for (const Module &M : Modules) {
    for (const GlobalDef &G : M.Globals)
      if (!G.Extern && G.Link == Linkage::Public)
        Claim(G.Name, M);
    for (const Function &F : M.Functions)
      if (F.Link == Linkage::Public)
        Claim(F.Name, M);
  }

  for (const Module &M : Modules) {
    auto Resolve = [&](const std::string &Name) -> std::string {
      if (const GlobalDef *G = M.findGlobal(Name)) {
        if (!G->Extern)
          return G->Link == Linkage::Private ? linkedName(M, Name) : Name;
        if (!PublicOwner.count(Name))
          Image.Externals.insert(Name);
        return Name;
      }
      if (const Function *F = M.findFunction(Name))
        return F->Link == Linkage::Private ? linkedName(M, Name) : Name;
      throw Error("unresolved reference to '@" + Name + "' in module '" +
                  M.Name + "'");
    };

    for (const GlobalDef &G : M.Globals) {
      if (G.Extern) {
        Resolve(G.Name);
        continue;
      }
      GlobalDef Copy = G;
      Copy.Name = Resolve(G.Name);
      Image.Globals.emplace(Copy.Name, std::move(Copy));
    }
    for (const Function &F : M.Functions) {
      Function Copy = F;
      Copy.Name = Resolve(F.Name);
      for (Block &B : Copy.Blocks)
        for (Instruction &I : B.Insts)
          for (Operand &O : I.Ops)
            if (O.K == Operand::Kind::Global)
              O.Name = Resolve(O.Name);
      Image.Functions.emplace(Copy.Name, std::move(Copy));
    }
  }
  return Image;
}

LinkedImage link(const Program &P) { return link(P.Modules); }

namespace {

bool foldable(const Function &F, IcfMode Mode) {
  switch (Mode) {
  case IcfMode::Off:
    return false;
  case IcfMode::Safe:
    return F.Link == Linkage::Private;
  case IcfMode::All:
    return true;
  }
  return false;
}

} // namespace

std::pair<LinkedImage, LinkerMap> icf(const LinkedImage &Image, IcfMode Mode) {
  std::vector<const Function *> Fns;
  std::map<std::string, std::size_t> Index;
  for (const auto &[Name, F] : Image.Functions) {
    Index.emplace(Name, Fns.size());
    Fns.push_back(&F);
  }
  std::size_t N = Fns.size();

  // Function references in operand order, as indices into Fns.
  std::vector<std::vector<std::size_t>> Refs(N);
  std::vector<std::size_t> Class(N);
  {
    std::map<std::string, std::size_t> KeyIds;
    auto Fmt = [&](const std::string &Name) {
      return Index.count(Name) ? std::string("@<fn>") : "@" + Name;
    };
    for (std::size_t I = 0; I < N; ++I) {
      for (const Block &B : Fns[I]->Blocks)
        for (const Instruction &Inst : B.Insts)
          for (const Operand &O : Inst.Ops)
            if (O.K == Operand::Kind::Global) {
              auto It = Index.find(O.Name);
              if (It != Index.end())
                Refs[I].push_back(It->second);
            }
      std::string Key = foldable(*Fns[I], Mode)
                            ? "F" + canonicalBody(*Fns[I], Fmt)
                            : "U" + Fns[I]->Name;
      Class[I] = KeyIds.emplace(Key, KeyIds.size()).first->second;
    }
  }

  // Refine until the class count is stable. Each round only splits.
  std::size_t NumClasses = 0;
  for (std::size_t C : Class)
    NumClasses = std::max(NumClasses, C + 1);
  while (true) {
    std::map<std::vector<std::size_t>, std::size_t> SigIds;
    std::vector<std::size_t> Next(N);
    for (std::size_t I = 0; I < N; ++I) {
      std::vector<std::size_t> Sig{Class[I]};
      for (std::size_t R : Refs[I])
        Sig.push_back(Class[R]);
      Next[I] = SigIds.emplace(std::move(Sig), SigIds.size()).first->second;
    }
    std::size_t NextCount = SigIds.size();
    Class = std::move(Next);
    if (NextCount == NumClasses)
      break;
    NumClasses = NextCount;
  }

  std::map<std::size_t, std::vector<std::size_t>> Members;
  for (std::size_t I = 0; I < N; ++I)
    Members[Class[I]].push_back(I);

  LinkerMap Map;
  std::map<std::string, std::string> NewAliases;
  for (const auto &[C, List] : Members) {
    if (List.size() < 2)
      continue;
    // Fns is in name order, so the first member is the least name.
    FoldGroup G;
    G.Rep = Fns[List.front()]->Name;
    for (std::size_t J = 1; J < List.size(); ++J) {
      G.Members.push_back(Fns[List[J]]->Name);
      NewAliases.emplace(G.Members.back(), G.Rep);
    }
    Map.Groups.push_back(std::move(G));
  }
  std::sort(Map.Groups.begin(), Map.Groups.end(),
            [](const FoldGroup &A, const FoldGroup &B) { return A.Rep < B.Rep; });

  LinkedImage Out;
  Out.Globals = Image.Globals;
  Out.Externals = Image.Externals;
  for (const auto &[From, To] : Image.Aliases) {
    auto It = NewAliases.find(To);
    Out.Aliases.emplace(From, It == NewAliases.end() ? To : It->second);
  }
  for (const auto &[From, To] : NewAliases)
    Out.Aliases.emplace(From, To);
  for (const auto &[Name, F] : Image.Functions) {
    if (NewAliases.count(Name))
      continue;
    Function Copy = F;
    for (Block &B : Copy.Blocks)
      for (Instruction &I : B.Insts)
        for (Operand &O : I.Ops)
          if (O.K == Operand::Kind::Global) {
            auto It = NewAliases.find(O.Name);
            if (It != NewAliases.end())
              O.Name = It->second;
          }
    Out.Functions.emplace(Name, std::move(Copy));
  }
  return {std::move(Out), std::move(Map)};
}

std::size_t functionSize(const Function &F) { return F.instCount(); }

std::size_t imageSize(const LinkedImage &Image) {
  std::size_t Size = 0;
  for (const auto &[Name, F] : Image.Functions)
    Size += functionSize(F);
  return Size;
}

std::string writeLinkerMap(const LinkerMap &Map) {
  std::vector<std::string> Lines;
  for (const FoldGroup &G : Map.Groups)
    for (const std::string &M : G.Members)
      Lines.push_back("FOLD " + G.Rep + " <- " + M);
  std::sort(Lines.begin(), Lines.end());
  std::string Out;
  for (const std::string &L : Lines)
    Out += L + "\n";
  return Out;
}

std::string printImage(const LinkedImage &Image) {
  Module M;
  M.Name = "image";
  for (const auto &[Name, G] : Image.Globals)
    M.Globals.push_back(G);
  for (const std::string &Name : Image.Externals)
    M.Globals.push_back({Name, Linkage::Public, true, {}});
  for (const auto &[Name, F] : Image.Functions)
    M.Functions.push_back(F);
  std::string Out = printModule(M);
  if (!Image.Aliases.empty())
    Out += "\n";
  for (const auto &[From, To] : Image.Aliases)
    Out += "alias @" + From + " = @" + To + "\n";
  return Out;
}

LinkedImage parseImage(std::string_view Text) {
  std::string Body;
  LinkedImage Image;
  std::istringstream IS{std::string(Text)};
  std::string Line;
  unsigned LineNo = 0;
  while (std::getline(IS, Line)) {
    ++LineNo;
    if (!Line.starts_with("alias ")) {
      Body += Line + "\n";
      continue;
    }
    // Keep line numbers of the module text intact for diagnostics.
    Body += "\n";
    std::istringstream LS(Line);
    std::string Kw, From, Eq, To, Extra;
    LS >> Kw >> From >> Eq >> To;
    if (Eq != "=" || From.size() < 2 || To.size() < 2 || From[0] != '@' ||
        To[0] != '@' || (LS >> Extra))
      throw ParseError(LineNo, 1, "malformed alias line");
    Image.Aliases.emplace(From.substr(1), To.substr(1));
  }
  Module M = parseModuleUnchecked(Body);
  for (GlobalDef &G : M.Globals) {
    if (G.Extern)
      Image.Externals.insert(G.Name);
    else
      Image.Globals.emplace(G.Name, std::move(G));
  }
  for (Function &F : M.Functions)
    Image.Functions.emplace(F.Name, std::move(F));
  for (const auto &[From, To] : Image.Aliases)
    if (!Image.Functions.count(To))
      throw Error("alias target '@" + To + "' is not a retained function");
  return Image;
}

static double pct(std::size_t Num, std::size_t Den) {
  return Den ? 100.0 * static_cast<double>(Num) / static_cast<double>(Den)
             : 0.0;
}

double MergeStats::mergedPct() const { return pct(MergedCount, TotalFunctions); }
double MergeStats::mismatchedPct() const {
  return pct(MismatchedCount, TotalFunctions);
}
double MergeStats::mismatchedOverMergedPct() const {
  return pct(MismatchedCount, MergedCount);
}

MergeStats computeStats(const LinkedImage &Baseline,
                        const LinkedImage &PostPre, const LinkedImage &Post,
                        const LinkerMap &PostMap,
                        const std::vector<MergeReport> &Reports) {
  MergeStats S;
  S.TotalFunctions = Baseline.Functions.size() + Baseline.Aliases.size();
  S.SizeBefore = imageSize(Baseline);
  S.SizeAfter = imageSize(Post);
  S.Reports = Reports;
  for (const MergeReport &R : Reports) {
    S.MergedCount += R.Entries.size();
    for (const MergeEntry &E : R.Entries) {
      ++S.ParamHist[E.Args.size()];
      ++S.BlockHist[E.Blocks];
    }
  }

  std::map<std::string, std::string> Aliases = PostMap.aliases();
  std::map<std::string, std::size_t> TgmPerClass;
  auto ClassOf = [&](const std::string &Name) {
    auto It = Aliases.find(Name);
    return It == Aliases.end() ? Name : It->second;
  };
  for (const auto &[Name, F] : PostPre.Functions)
    if (F.Orig == Origin::MergedTgm)
      ++TgmPerClass[ClassOf(Name)];
  for (const auto &[Name, F] : PostPre.Functions)
    if (F.Orig == Origin::MergedTgm && TgmPerClass[ClassOf(Name)] < 2)
      ++S.MismatchedCount;
  return S;
}

static std::string formatPct(double V) {
  char Buf[64];
  std::snprintf(Buf, sizeof(Buf), "%.4f", V);
  return Buf;
}

static std::string formatArg(const Operand &O) {
  if (O.K == Operand::Kind::Literal)
    return std::to_string(O.Lit);
  if (O.K == Operand::Kind::Global)
    return "@" + O.Name;
  return "?";
}

std::string writeStats(const MergeStats &S) {
  std::vector<std::string> Lines = {
      "merged_count=" + std::to_string(S.MergedCount),
      "merged_pct=" + formatPct(S.mergedPct()),
      "mismatched_count=" + std::to_string(S.MismatchedCount),
      "mismatched_over_merged_pct=" + formatPct(S.mismatchedOverMergedPct()),
      "mismatched_pct=" + formatPct(S.mismatchedPct()),
      "size_after=" + std::to_string(S.SizeAfter),
      "size_before=" + std::to_string(S.SizeBefore),
      "total_functions=" + std::to_string(S.TotalFunctions),
  };
  std::size_t Matched = 0, Stale = 0, Single = 0, Failed = 0;
  for (const MergeReport &R : S.Reports) {
    Matched += R.Matched;
    Stale += R.SkippedStale;
    Single += R.SkippedSingleLocal;
    Failed += R.SkippedError;
    for (const MergeEntry &E : R.Entries) {
      std::string Args;
      for (std::size_t I = 0; I < E.Args.size(); ++I)
        Args += (I ? "," : "") + formatArg(E.Args[I]);
      Lines.push_back("MERGE " + R.ModName + " " + E.Original + " -> " +
                      E.Merged + " args=" + Args);
    }
  }
  Lines.push_back("matched=" + std::to_string(Matched));
  Lines.push_back("skipped_error=" + std::to_string(Failed));
  Lines.push_back("skipped_single_local=" + std::to_string(Single));
  Lines.push_back("skipped_stale=" + std::to_string(Stale));
  for (const auto &[K, C] : S.ParamHist)
    Lines.push_back("HIST param " + std::to_string(K) + " " + std::to_string(C));
  for (const auto &[K, C] : S.BlockHist)
    Lines.push_back("HIST block " + std::to_string(K) + " " + std::to_string(C));
  std::sort(Lines.begin(), Lines.end());
  std::string Out;
  for (const std::string &L : Lines)
    Out += L + "\n";
  return Out;
}

} // namespace mergelink
