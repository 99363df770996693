//===- MergeCombine.cpp - Build global merge info -------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/MergeCombine.h"

#include "mergelink/Error.h"

#include <algorithm>
#include <set>
#include <sstream>

namespace mergelink {

std::map<Word, std::vector<StableFunctionSummary>>
groupByHash(std::vector<StableFunctionSummary> Summaries) {
  std::sort(Summaries.begin(), Summaries.end(),
            [](const StableFunctionSummary &A, const StableFunctionSummary &B) {
              return std::tie(A.ModName, A.FnName) <
                     std::tie(B.ModName, B.FnName);
            });
  for (std::size_t I = 1; I < Summaries.size(); ++I)
    if (Summaries[I - 1].ModName == Summaries[I].ModName &&
        Summaries[I - 1].FnName == Summaries[I].FnName)
      throw Error("duplicate summary for " + Summaries[I].ModName + ":" +
                  Summaries[I].FnName);

  std::map<Word, std::vector<StableFunctionSummary>> Groups;
  for (StableFunctionSummary &SF : Summaries)
    Groups[SF.Hash].push_back(std::move(SF));
  std::erase_if(Groups, [](const auto &G) { return G.second.size() < 2; });
  return Groups;
}

static bool sameKeys(const std::map<Loc, Word> &A,
                     const std::map<Loc, Word> &B) {
  return A.size() == B.size() &&
         std::equal(A.begin(), A.end(), B.begin(),
                    [](const auto &X, const auto &Y) {
                      return X.first == Y.first;
                    });
}

bool canMerge(const std::vector<StableFunctionSummary> &Group) {
  if (Group.empty())
    return false;
  const StableFunctionSummary &Ref = Group.front();
  return std::all_of(Group.begin() + 1, Group.end(),
                     [&](const StableFunctionSummary &SF) {
                       return SF.InstCount == Ref.InstCount &&
                              sameKeys(SF.LocToHash, Ref.LocToHash);
                     });
}

ParamVecs computeParams(const std::vector<StableFunctionSummary> &Group) {
  ParamVecs Params;
  if (Group.empty())
    return Params;
  std::map<std::vector<Word>, std::size_t> SeqToParam;
  for (const auto &[L, Hash] : Group.front().LocToHash) {
    std::vector<Word> Seq{Hash};
    bool Distinct = false;
    for (std::size_t I = 1; I < Group.size(); ++I) {
      Word Other = Group[I].LocToHash.at(L);
      Distinct |= Other != Hash;
      Seq.push_back(Other);
    }
    if (!Distinct)
      continue;
    auto [It, Inserted] = SeqToParam.emplace(Seq, Params.size());
    if (Inserted)
      Params.push_back({std::move(Seq), {}});
    Params[It->second].Locs.push_back(L);
  }
  return Params;
}

unsigned thunkSize(std::size_t NumParams, const CostConfig &Cfg) {
  return 1 + static_cast<unsigned>(NumParams) + Cfg.ThunkFixedOverhead;
}

bool isProfitable(std::size_t N, std::size_t SizeFunc, std::size_t SizeThunk) {
  if (N < 2)
    return false;
  return SizeThunk * N < SizeFunc * (N - 1);
}

bool shouldMerge(const std::vector<StableFunctionSummary> &Group,
                 const ParamVecs &Params, const CostConfig &Cfg) {
  if (Group.empty())
    return false;
  return isProfitable(Group.size(), Group.front().InstCount,
                      thunkSize(Params.size(), Cfg));
}

GlobalMergeInfo combine(std::vector<StableFunctionSummary> Summaries,
                        const CostConfig &Cfg) {
  GlobalMergeInfo GMI;
  GMI.Cost = Cfg;
  std::size_t MinSize = std::max<std::size_t>(2, Cfg.MinGroupSize);
  for (auto &[H, Group] : groupByHash(std::move(Summaries))) {
    if (Group.size() < MinSize || !canMerge(Group))
      continue;
    ParamVecs Params = computeParams(Group);
    if (!shouldMerge(Group, Params, Cfg))
      continue;
    GMI.Groups.emplace(H, MergeGroup{H, std::move(Group), std::move(Params)});
  }
  return GMI;
}

std::string writeMergeInfo(const GlobalMergeInfo &GMI) {
  std::ostringstream OS;
  OS << "GMI v" << GlobalMergeInfo::Version
     << " overhead=" << GMI.Cost.ThunkFixedOverhead << '\n';
  for (const auto &[H, G] : GMI.Groups) {
    OS << "G " << hex16(H) << ' ' << G.instCount() << ' '
       << G.Summaries.size() << '\n';
    for (const StableFunctionSummary &SF : G.Summaries)
      OS << "  M " << SF.ModName << ' ' << SF.FnName << ' '
         << formatLocHashList(SF.LocToHash) << '\n';
    for (std::size_t P = 0; P < G.Params.size(); ++P) {
      OS << "  P " << P << " locs=";
      for (std::size_t I = 0; I < G.Params[P].Locs.size(); ++I)
        OS << (I ? ";" : "") << formatLoc(G.Params[P].Locs[I]);
      OS << " seq=";
      for (std::size_t I = 0; I < G.Params[P].HashSeq.size(); ++I)
        OS << (I ? "," : "") << hex16(G.Params[P].HashSeq[I]);
      OS << '\n';
    }
  }
  return OS.str();
}

namespace {

std::vector<std::string_view> split(std::string_view S, char Sep) {
  std::vector<std::string_view> Parts;
  if (S.empty())
    return Parts;
  std::size_t Start = 0;
  while (true) {
    std::size_t End = S.find(Sep, Start);
    Parts.push_back(S.substr(Start, End - Start));
    if (End == std::string_view::npos)
      break;
    Start = End + 1;
  }
  return Parts;
}

unsigned parseUnsigned(std::string_view Text) {
  if (Text.empty() ||
      !std::all_of(Text.begin(), Text.end(), [](char C) {
        return C >= '0' && C <= '9';
      }) ||
      Text.size() > 9)
    throw Error("malformed count '" + std::string(Text) + "'");
  return static_cast<unsigned>(std::stoul(std::string(Text)));
}

Loc parseLoc(std::string_view Text) {
  if (Text.size() < 5 || Text.front() != '(' || Text.back() != ')')
    throw Error("malformed location '" + std::string(Text) + "'");
  auto Parts = split(Text.substr(1, Text.size() - 2), ',');
  if (Parts.size() != 2)
    throw Error("malformed location '" + std::string(Text) + "'");
  return {parseUnsigned(Parts[0]), parseUnsigned(Parts[1])};
}

std::string_view stripPrefix(std::string_view S, std::string_view Prefix) {
  if (!S.starts_with(Prefix))
    throw Error("expected '" + std::string(Prefix) + "'");
  return S.substr(Prefix.size());
}

} // namespace

GlobalMergeInfo readMergeInfo(std::string_view Text) {
  std::istringstream IS{std::string(Text)};
  std::string Line;
  unsigned LineNo = 0;
  GlobalMergeInfo GMI;
  MergeGroup *Cur = nullptr;
  std::size_t Expected = 0;
  std::uint32_t InstCount = 0;

  auto FinishGroup = [&]() {
    if (!Cur)
      return;
    if (Cur->Summaries.size() != Expected || Expected < 2)
      throw Error("group " + hex16(Cur->Hash) + " member count mismatch");
    if (!canMerge(Cur->Summaries))
      throw Error("group " + hex16(Cur->Hash) + " members disagree");
    std::set<Loc> Seen;
    for (const ParamEntry &P : Cur->Params) {
      if (P.HashSeq.size() != Expected || P.Locs.empty())
        throw Error("group " + hex16(Cur->Hash) + " malformed parameter");
      for (std::size_t I = 0; I < P.Locs.size(); ++I) {
        const Loc &L = P.Locs[I];
        if (!Seen.insert(L).second)
          throw Error("location used by two parameters");
        for (std::size_t M = 0; M < Expected; ++M) {
          auto It = Cur->Summaries[M].LocToHash.find(L);
          if (It == Cur->Summaries[M].LocToHash.end() ||
              It->second != P.HashSeq[M])
            throw Error("parameter sequence disagrees with member hashes");
        }
      }
    }
    // Catches files truncated or edited between parameter lines.
    if (Cur->Params != computeParams(Cur->Summaries))
      throw Error("group " + hex16(Cur->Hash) + " parameters are incomplete");
    Cur = nullptr;
  };

  try {
    while (std::getline(IS, Line)) {
      ++LineNo;
      if (Line.empty())
        continue;
      std::istringstream LS(Line);
      std::vector<std::string> F;
      for (std::string W; LS >> W;)
        F.push_back(W);
      if (LineNo == 1) {
        if (F.size() != 3 || F[0] != "GMI" || F[1] != "v1")
          throw Error("unsupported merge info header");
        GMI.Cost.ThunkFixedOverhead = parseUnsigned(stripPrefix(F[2], "overhead="));
        continue;
      }
      if (F[0] == "G") {
        FinishGroup();
        if (F.size() != 4)
          throw Error("malformed group line");
        Word H = parseHex16(F[1]);
        auto [It, Inserted] = GMI.Groups.emplace(H, MergeGroup{});
        if (!Inserted)
          throw Error("duplicate group " + F[1]);
        Cur = &It->second;
        Cur->Hash = H;
        InstCount = parseUnsigned(F[2]);
        Expected = parseUnsigned(F[3]);
      } else if (F[0] == "M") {
        if (!Cur || F.size() != 4 || !Cur->Params.empty())
          throw Error("member line outside group");
        StableFunctionSummary SF;
        SF.Hash = Cur->Hash;
        SF.ModName = F[1];
        SF.FnName = F[2];
        SF.InstCount = InstCount;
        SF.LocToHash = parseLocHashList(F[3]);
        if (!Cur->Summaries.empty()) {
          const StableFunctionSummary &Prev = Cur->Summaries.back();
          if (std::tie(Prev.ModName, Prev.FnName) >=
              std::tie(SF.ModName, SF.FnName))
            throw Error("members not sorted");
        }
        Cur->Summaries.push_back(std::move(SF));
      } else if (F[0] == "P") {
        if (!Cur || F.size() != 4 ||
            parseUnsigned(F[1]) != Cur->Params.size())
          throw Error("malformed parameter line");
        ParamEntry P;
        for (std::string_view L : split(stripPrefix(F[2], "locs="), ';'))
          P.Locs.push_back(parseLoc(L));
        for (std::string_view H : split(stripPrefix(F[3], "seq="), ','))
          P.HashSeq.push_back(parseHex16(H));
        Cur->Params.push_back(std::move(P));
      } else {
        throw Error("unknown record '" + F[0] + "'");
      }
    }
    if (LineNo == 0)
      throw Error("missing merge info header");
    FinishGroup();
  } catch (const ParseError &) {
    throw;
  } catch (const Error &E) {
    throw ParseError(LineNo, 1, E.what());
  }
  return GMI;
}

} // namespace mergelink
