//===- Corpus.cpp - Seeded synthetic programs -----------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/Corpus.h"

#include "mergelink/Error.h"
#include "mergelink/IRText.h"
#include "mergelink/MergeCombine.h"
#include "mergelink/Outliner.h"
#include "mergelink/StableHash.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace mergelink {

std::string_view spreadName(FamilySpread S) {
  switch (S) {
  case FamilySpread::Local:
    return "local";
  case FamilySpread::CrossModule:
    return "cross_module";
  case FamilySpread::Mixed:
    return "mixed";
  }
  return "";
}

std::optional<FamilySpread> spreadFromName(std::string_view Text) {
  for (FamilySpread S :
       {FamilySpread::Local, FamilySpread::CrossModule, FamilySpread::Mixed})
    if (spreadName(S) == Text)
      return S;
  return std::nullopt;
}

namespace {

enum class Marker { Callee, LoadAddr, StoreAddr, ExternLit };

struct Callable {
  std::string Name;
  std::size_t Mod = 0;
  std::size_t Arity = 0;
  bool Public = true;
};

struct BodySpec {
  std::size_t Mod = 0;
  std::size_t Params = 1;
  std::size_t Blocks = 1;
  /// Total instruction count including terminators.
  std::size_t Len = 2;
  Word UniqueLit = 0;
  bool AllowPrivate = false;
  bool AllowLowerCall = false;
  std::vector<Marker> Markers;
};

struct BuiltBody {
  Function F;
  /// Location of each marker, in BodySpec::Markers order.
  std::vector<Loc> MarkerLocs;
};

class Generator {
public:
  explicit Generator(const CorpusConfig &Cfg) : Cfg(Cfg), Rng(Cfg.Seed) {}

  Corpus run();

private:
  const CorpusConfig &Cfg;
  std::mt19937_64 Rng;
  Corpus Out;
  Word NextUnique = 1000003;
  std::vector<std::vector<std::string>> PublicGlobals, PrivateGlobals;
  std::vector<std::vector<std::string>> PublicLeaves, PrivateLeaves;
  std::vector<unsigned> LeafCount, GlobalCount;
  std::vector<std::string> Externs;
  std::vector<Callable> Callables;
  /// Filler function names per module, in creation order.
  std::vector<std::vector<std::string>> Fillers;

  std::uint64_t draw(std::uint64_t N) { return N ? Rng() % N : 0; }
  std::uint64_t range(std::uint64_t Lo, std::uint64_t Hi) {
    return Hi <= Lo ? Lo : Lo + draw(Hi - Lo + 1);
  }
  Word unique() {
    Word W = NextUnique;
    NextUnique += 97;
    return W;
  }
  Module &mod(std::size_t M) { return Out.Prog.Modules[M]; }
  std::string modName(std::size_t M) const { return "m" + std::to_string(M); }

  std::string newLeaf(std::size_t M, bool Public);
  std::string newGlobal(std::size_t M, bool Public);
  template <typename T>
  const T &pick(const std::vector<T> &V) { return V[draw(V.size())]; }
  std::string pickGlobal(std::size_t M, bool AllowPrivate);
  std::string pickLeaf(std::size_t M, bool AllowPrivate);

  BuiltBody buildBody(const BodySpec &Spec, const std::string &Name);
  Instruction randomInst(const BodySpec &Spec, std::vector<Operand> &Avail,
                         unsigned &NextVal, bool &UsedLowerCall);
  Instruction markerInst(Marker K, const BodySpec &Spec,
                         std::vector<Operand> &Avail, unsigned &NextVal,
                         std::uint32_t &Opnd);

  void makeFamilies();
  void makeFillers();
  void makeMotifs();
  void addExternDecls();
};

std::string Generator::newLeaf(std::size_t M, bool Public) {
  std::string Name = (Public ? "leaf" : "pleaf") + std::to_string(M) + "_" +
                     std::to_string(LeafCount[M]++);
  Function F;
  F.Name = Name;
  F.Params = {"a"};
  F.Link = Public ? Linkage::Public : Linkage::Private;
  Block B;
  B.Label = "entry";
  B.Insts.push_back(
      {Opcode::Add, "x", {Operand::param(0), Operand::literal(unique())}});
  B.Insts.push_back({Opcode::Ret, std::nullopt, {Operand::value("x")}});
  F.Blocks.push_back(std::move(B));
  mod(M).Functions.push_back(std::move(F));
  (Public ? PublicLeaves : PrivateLeaves)[M].push_back(Name);
  return Name;
}

std::string Generator::newGlobal(std::size_t M, bool Public) {
  std::string Name = (Public ? "G" : "S") + std::to_string(M) + "_" +
                     std::to_string(GlobalCount[M]++);
  GlobalDef G;
  G.Name = Name;
  G.Link = Public ? Linkage::Public : Linkage::Private;
  if (!Public && draw(2)) {
    std::string Bytes;
    std::size_t Len = range(3, 12);
    for (std::size_t I = 0; I < Len; ++I)
      Bytes.push_back(static_cast<char>(range(0x20, 0x7e)));
    G.Data = Bytes;
  } else {
    G.Data = Word(draw(1000));
  }
  mod(M).Globals.push_back(std::move(G));
  (Public ? PublicGlobals : PrivateGlobals)[M].push_back(Name);
  return Name;
}

std::string Generator::pickGlobal(std::size_t M, bool AllowPrivate) {
  if (AllowPrivate && !PrivateGlobals[M].empty() && draw(10) < 3)
    return pick(PrivateGlobals[M]);
  return pick(PublicGlobals[draw(PublicGlobals.size())]);
}

std::string Generator::pickLeaf(std::size_t M, bool AllowPrivate) {
  if (AllowPrivate && !PrivateLeaves[M].empty() && draw(10) < 3)
    return pick(PrivateLeaves[M]);
  return pick(PublicLeaves[draw(PublicLeaves.size())]);
}

static std::string valueName(unsigned &NextVal) {
  return "v" + std::to_string(NextVal++);
}

Instruction Generator::markerInst(Marker K, const BodySpec &Spec,
                                  std::vector<Operand> &Avail,
                                  unsigned &NextVal, std::uint32_t &Opnd) {
  Instruction I;
  switch (K) {
  case Marker::Callee:
    I = {Opcode::Call, valueName(NextVal),
         {Operand::global(pickLeaf(Spec.Mod, false)), pick(Avail)}};
    Opnd = 0;
    break;
  case Marker::LoadAddr:
    I = {Opcode::Load, valueName(NextVal),
         {Operand::global(pickGlobal(Spec.Mod, false))}};
    Opnd = 0;
    break;
  case Marker::StoreAddr:
    I = {Opcode::Store, std::nullopt,
         {pick(Avail), Operand::global(pickGlobal(Spec.Mod, false))}};
    Opnd = 1;
    break;
  case Marker::ExternLit:
    I = {Opcode::Call, valueName(NextVal),
         {Operand::global(pick(Externs)), pick(Avail),
          Operand::literal(draw(100))}};
    Opnd = 2;
    break;
  }
  if (I.Result)
    Avail.push_back(Operand::value(*I.Result));
  return I;
}

Instruction Generator::randomInst(const BodySpec &Spec,
                                  std::vector<Operand> &Avail,
                                  unsigned &NextVal, bool &UsedLowerCall) {
  Instruction I;
  std::uint64_t R = draw(100);
  if (R >= 90 && Spec.AllowLowerCall && !UsedLowerCall) {
    std::vector<const Callable *> Choices;
    for (const Callable &C : Callables)
      if (C.Public || C.Mod == Spec.Mod)
        Choices.push_back(&C);
    if (!Choices.empty()) {
      const Callable &C = *pick(Choices);
      I = {Opcode::Call, valueName(NextVal), {Operand::global(C.Name)}};
      for (std::size_t A = 0; A < C.Arity; ++A)
        I.Ops.push_back(pick(Avail));
      UsedLowerCall = true;
      Avail.push_back(Operand::value(*I.Result));
      return I;
    }
  }
  if (R < 30 || R >= 90) {
    static constexpr Opcode Arith[] = {Opcode::Add, Opcode::Sub, Opcode::Mul};
    Operand Rhs = draw(2) ? pick(Avail) : Operand::literal(range(1, 50));
    I = {Arith[draw(3)], valueName(NextVal), {pick(Avail), Rhs}};
  } else if (R < 40) {
    I = {Opcode::Const, valueName(NextVal), {Operand::literal(draw(1000))}};
  } else if (R < 52) {
    I = {Opcode::Load, valueName(NextVal),
         {Operand::global(pickGlobal(Spec.Mod, Spec.AllowPrivate))}};
  } else if (R < 64) {
    I = {Opcode::Store, std::nullopt,
         {pick(Avail),
          Operand::global(pickGlobal(Spec.Mod, Spec.AllowPrivate))}};
  } else if (R < 80) {
    I = {Opcode::Call, valueName(NextVal),
         {Operand::global(pickLeaf(Spec.Mod, Spec.AllowPrivate)),
          pick(Avail)}};
  } else {
    I = {Opcode::Call, valueName(NextVal),
         {Operand::global(pick(Externs)), pick(Avail),
          Operand::literal(draw(100))}};
  }
  if (I.Result)
    Avail.push_back(Operand::value(*I.Result));
  return I;
}

BuiltBody Generator::buildBody(const BodySpec &Spec, const std::string &Name) {
  std::size_t BodySlots = Spec.Len - Spec.Blocks;
  if (Spec.Len < Spec.Blocks || BodySlots < 1 + Spec.Markers.size())
    throw Error("body too short for its blocks and markers");

  std::vector<std::size_t> PerBlock(Spec.Blocks, 1);
  for (std::size_t I = Spec.Blocks; I < BodySlots; ++I)
    ++PerBlock[draw(Spec.Blocks)];

  // Slot 0 holds the uniquing add; markers take distinct later slots.
  std::vector<std::size_t> Slots;
  for (std::size_t I = 1; I < BodySlots; ++I)
    Slots.push_back(I);
  for (std::size_t I = 0; I + 1 < Slots.size(); ++I)
    std::swap(Slots[I], Slots[I + draw(Slots.size() - I)]);
  std::map<std::size_t, std::size_t> SlotMarker;
  for (std::size_t K = 0; K < Spec.Markers.size(); ++K)
    SlotMarker.emplace(Slots[K], K);

  BuiltBody Out;
  Function &F = Out.F;
  F.Name = Name;
  for (std::size_t I = 0; I < Spec.Params; ++I)
    F.Params.push_back("a" + std::to_string(I));
  Out.MarkerLocs.resize(Spec.Markers.size());

  unsigned NextVal = 0;
  bool UsedLowerCall = false;
  std::size_t Slot = 0;
  std::uint32_t InstIndex = 0;
  for (std::size_t BI = 0; BI < Spec.Blocks; ++BI) {
    Block B;
    std::vector<Operand> Avail;
    if (BI == 0) {
      B.Label = "entry";
      for (std::size_t I = 0; I < Spec.Params; ++I)
        Avail.push_back(Operand::param(static_cast<unsigned>(I)));
    } else {
      B.Label = "bb" + std::to_string(BI);
      B.Params.push_back("b" + std::to_string(BI));
      Avail.push_back(Operand::value(B.Params.back()));
    }
    for (std::size_t J = 0; J < PerBlock[BI]; ++J, ++Slot, ++InstIndex) {
      if (Slot == 0) {
        std::string R = valueName(NextVal);
        B.Insts.push_back(
            {Opcode::Add, R, {Avail.front(), Operand::literal(Spec.UniqueLit)}});
        Avail.push_back(Operand::value(R));
        continue;
      }
      auto It = SlotMarker.find(Slot);
      if (It != SlotMarker.end()) {
        std::uint32_t Opnd = 0;
        B.Insts.push_back(
            markerInst(Spec.Markers[It->second], Spec, Avail, NextVal, Opnd));
        Out.MarkerLocs[It->second] = {InstIndex, Opnd};
        continue;
      }
      B.Insts.push_back(randomInst(Spec, Avail, NextVal, UsedLowerCall));
    }

    std::size_t Last = Spec.Blocks - 1;
    if (BI == Last) {
      B.Insts.push_back({Opcode::Ret, std::nullopt, {pick(Avail)}});
    } else if (Last - BI >= 2 && draw(2)) {
      std::size_t Far = range(BI + 2, Last);
      B.Insts.push_back({Opcode::BrCond,
                         std::nullopt,
                         {pick(Avail), Operand::label("bb" + std::to_string(BI + 1)),
                          pick(Avail), Operand::label("bb" + std::to_string(Far)),
                          pick(Avail)}});
    } else {
      B.Insts.push_back({Opcode::Br,
                         std::nullopt,
                         {Operand::label("bb" + std::to_string(BI + 1)),
                          pick(Avail)}});
    }
    ++InstIndex;
    F.Blocks.push_back(std::move(B));
  }
  return Out;
}

void Generator::makeFamilies() {
  std::size_t M = Cfg.Modules;
  for (unsigned K = 0; K < Cfg.Families; ++K) {
    std::size_t N = range(Cfg.FamilySizeMin, Cfg.FamilySizeMax);
    std::vector<std::size_t> Homes(N);
    std::size_t Start = draw(M);
    for (std::size_t J = 0; J < N; ++J) {
      switch (Cfg.Spread) {
      case FamilySpread::Local:
        Homes[J] = Start;
        break;
      case FamilySpread::CrossModule:
        Homes[J] = (Start + J) % M;
        break;
      case FamilySpread::Mixed:
        Homes[J] = draw(M);
        break;
      }
    }

    BodySpec Spec;
    Spec.Mod = Homes[0];
    Spec.Params = range(1, 2);
    Spec.Blocks = range(Cfg.BlocksMin, Cfg.BlocksMax);
    Spec.Len = range(Cfg.BodyLenMin, Cfg.BodyLenMax);
    Spec.UniqueLit = unique();
    for (unsigned D = 0; D < Cfg.DivergentLocs; ++D)
      Spec.Markers.push_back(static_cast<Marker>(draw(4)));
    Spec.Len = std::max(Spec.Len, Spec.Blocks + 1 + Spec.Markers.size());
    if (Cfg.PadFamiliesForCostModel) {
      CostConfig Default;
      std::size_t Thunk = thunkSize(Spec.Markers.size(), Default);
      while (Thunk * N >= Spec.Len * (N - 1))
        ++Spec.Len;
    }
    BuiltBody Template = buildBody(Spec, "");

    FamilyInfo Info;
    Info.Index = K;
    Info.Params = static_cast<unsigned>(Spec.Markers.size());
    Info.InstCount = static_cast<unsigned>(Template.F.instCount());
    Info.Blocks = static_cast<unsigned>(Template.F.Blocks.size());
    Info.Locs = Template.MarkerLocs;
    std::sort(Info.Locs.begin(), Info.Locs.end());

    for (std::size_t J = 0; J < N; ++J) {
      Function F = Template.F;
      F.Name = "fam" + std::to_string(K) + "_" + std::to_string(J);
      for (std::size_t D = 0; D < Spec.Markers.size(); ++D) {
        const Loc &L = Template.MarkerLocs[D];
        Operand &O = instructionAt(F, L.Inst)->Ops[L.Opnd];
        switch (Spec.Markers[D]) {
        case Marker::Callee:
          O = Operand::global(newLeaf(Homes[J], true));
          break;
        case Marker::LoadAddr:
        case Marker::StoreAddr:
          O = Operand::global(newGlobal(Homes[J], true));
          break;
        case Marker::ExternLit:
          O = Operand::literal(unique());
          break;
        }
      }
      Info.Members.emplace_back(modName(Homes[J]), F.Name);
      Callables.push_back({F.Name, Homes[J], F.Params.size(), true});
      mod(Homes[J]).Functions.push_back(std::move(F));
    }
    std::sort(Info.Members.begin(), Info.Members.end());
    Out.Manifest.Families.push_back(std::move(Info));
  }
}

void Generator::makeFillers() {
  std::vector<std::size_t> Placed(Cfg.Modules, 0);
  for (const FamilyInfo &F : Out.Manifest.Families)
    for (const auto &[Mod, Fn] : F.Members)
      ++Placed[std::stoul(Mod.substr(1))];
  for (std::size_t M = 0; M < Cfg.Modules; ++M) {
    std::size_t Count =
        Cfg.FunctionsPerModule > Placed[M] ? Cfg.FunctionsPerModule - Placed[M]
                                           : 0;
    for (std::size_t I = 0; I < Count; ++I) {
      BodySpec Spec;
      Spec.Mod = M;
      Spec.Params = range(1, 2);
      Spec.Blocks = range(Cfg.BlocksMin, Cfg.BlocksMax);
      Spec.Len = std::max<std::size_t>(range(Cfg.BodyLenMin / 2 + 1, Cfg.BodyLenMax),
                                       Spec.Blocks + 1);
      Spec.UniqueLit = unique();
      Spec.AllowPrivate = true;
      Spec.AllowLowerCall = true;
      std::string Name = "fn" + std::to_string(M) + "_" + std::to_string(I);
      Function F = buildBody(Spec, Name).F;
      F.Link = draw(5) == 0 ? Linkage::Private : Linkage::Public;
      Callables.push_back({Name, M, F.Params.size(), F.Link == Linkage::Public});
      Fillers[M].push_back(Name);
      mod(M).Functions.push_back(std::move(F));
    }
  }
}

void Generator::makeMotifs() {
  std::set<std::string> Hosts;
  auto FreeFiller = [&](std::size_t M) -> std::optional<std::string> {
    std::vector<std::string> Free;
    for (const std::string &N : Fillers[M])
      if (!Hosts.count(N))
        Free.push_back(N);
    if (Free.empty())
      return std::nullopt;
    return pick(Free);
  };

  for (unsigned K = 0; K < Cfg.Motifs; ++K) {
    std::size_t Home = draw(Cfg.Modules);
    std::string Cell = "GM" + std::to_string(K);
    mod(Home).Globals.push_back({Cell, Linkage::Public, false, Word(0)});
    std::vector<Word> Lits;
    for (unsigned I = 0; I + 1 < std::max(2u, Cfg.MotifLen); ++I)
      Lits.push_back(unique());

    std::vector<std::size_t> SiteMods{Home, Home};
    for (unsigned R = 1; R <= Cfg.MotifRemoteSites && R < Cfg.Modules; ++R)
      SiteMods.push_back((Home + R) % Cfg.Modules);

    MotifInfo Info;
    Info.Index = K;
    Info.Len = static_cast<unsigned>(Lits.size() + 1);
    for (std::size_t S = 0; S < SiteMods.size(); ++S) {
      std::optional<std::string> Host = FreeFiller(SiteMods[S]);
      if (!Host)
        continue;
      Hosts.insert(*Host);
      Function &F = *mod(SiteMods[S]).findFunction(*Host);
      std::size_t BI = draw(F.Blocks.size());
      Block &B = F.Blocks[BI];
      std::size_t Pos = draw(B.Insts.size());
      std::string Prefix = "mk" + std::to_string(K) + "s" + std::to_string(S) + "_";
      std::vector<Instruction> Run;
      Run.push_back({Opcode::Const, Prefix + "0", {Operand::literal(Lits[0])}});
      for (std::size_t I = 1; I < Lits.size(); ++I)
        Run.push_back({Opcode::Add,
                       Prefix + std::to_string(I),
                       {Operand::value(Prefix + std::to_string(I - 1)),
                        Operand::literal(Lits[I])}});
      Run.push_back({Opcode::Store,
                     std::nullopt,
                     {Operand::value(Prefix + std::to_string(Lits.size() - 1)),
                      Operand::global(Cell)}});
      B.Insts.insert(B.Insts.begin() + static_cast<long>(Pos), Run.begin(),
                     Run.end());
      Info.Sites.push_back({modName(SiteMods[S]), *Host, BI, Pos});
    }
    Out.Manifest.Motifs.push_back(std::move(Info));
  }
}

void Generator::addExternDecls() {
  for (Module &M : Out.Prog.Modules) {
    std::set<std::string> Needed;
    for (const Function &F : M.Functions)
      for (const Block &B : F.Blocks)
        for (const Instruction &I : B.Insts)
          for (const Operand &O : I.Ops)
            if (O.K == Operand::Kind::Global && !M.findFunction(O.Name) &&
                !M.findGlobal(O.Name))
              Needed.insert(O.Name);
    for (const std::string &N : Needed)
      M.Globals.push_back({N, Linkage::Public, true, {}});
  }
}

Corpus Generator::run() {
  if (Cfg.Modules == 0)
    throw Error("corpus needs at least one module");
  if (Cfg.FamilySizeMin < 2 || Cfg.FamilySizeMin > Cfg.FamilySizeMax)
    throw Error("family size range must satisfy 2 <= min <= max");
  if (std::size_t(Cfg.Families) * Cfg.FamilySizeMax >
      std::size_t(Cfg.Modules) * Cfg.FunctionsPerModule)
    throw Error("families do not fit in the requested function count");
  if (Cfg.Spread == FamilySpread::CrossModule &&
      Cfg.FamilySizeMax > Cfg.Modules && Cfg.Families)
    throw Error("cross-module families need one module per member");
  if (Cfg.BlocksMin == 0 || Cfg.BlocksMin > Cfg.BlocksMax)
    throw Error("block count range must satisfy 1 <= min <= max");
  if (Cfg.BodyLenMin > Cfg.BodyLenMax)
    throw Error("body length range is empty");

  std::size_t M = Cfg.Modules;
  PublicGlobals.resize(M);
  PrivateGlobals.resize(M);
  PublicLeaves.resize(M);
  PrivateLeaves.resize(M);
  LeafCount.assign(M, 0);
  GlobalCount.assign(M, 0);
  Fillers.resize(M);
  for (std::size_t I = 0; I < M; ++I)
    Out.Prog.Modules.push_back({modName(I), {}, {}});
  for (unsigned I = 0; I < std::max(1u, Cfg.Externs); ++I)
    Externs.push_back("ext" + std::to_string(I));
  for (std::size_t I = 0; I < M; ++I) {
    for (unsigned L = 0; L < std::max(1u, Cfg.LeavesPerModule); ++L)
      newLeaf(I, true);
    newLeaf(I, false);
    newGlobal(I, true);
    newGlobal(I, true);
    newGlobal(I, false);
  }
  makeFamilies();
  makeFillers();
  makeMotifs();
  addExternDecls();
  Out.Prog.sortModules();
  return std::move(Out);
}

} // namespace

Corpus generateCorpus(const CorpusConfig &Cfg) { return Generator(Cfg).run(); }

std::vector<std::string> verifyManifest(const Program &P,
                                        const CorpusManifest &Manifest) {
  std::vector<std::string> Issues;
  std::map<std::pair<std::string, std::string>, StableFunctionSummary> ById;
  std::map<Word, std::size_t> HashCount;
  for (const Module &M : P.Modules) {
    try {
      for (StableFunctionSummary &SF : analyzeModule(M)) {
        ++HashCount[SF.Hash];
        ById.emplace(std::make_pair(SF.ModName, SF.FnName), std::move(SF));
      }
    } catch (const Error &E) {
      Issues.push_back("module " + M.Name + ": " + E.what());
    }
  }

  for (const FamilyInfo &Fam : Manifest.Families) {
    std::string Tag = "family " + std::to_string(Fam.Index);
    std::vector<StableFunctionSummary> Group;
    for (const auto &Id : Fam.Members) {
      auto It = ById.find(Id);
      if (It == ById.end()) {
        Issues.push_back(Tag + ": member " + Id.first + ":" + Id.second +
                         " has no summary");
        continue;
      }
      Group.push_back(It->second);
    }
    if (Group.size() != Fam.Members.size())
      continue;
    bool SameHash = std::all_of(Group.begin(), Group.end(),
                                [&](const StableFunctionSummary &SF) {
                                  return SF.Hash == Group.front().Hash;
                                });
    if (!SameHash) {
      Issues.push_back(Tag + ": members do not share a hash");
      continue;
    }
    if (HashCount[Group.front().Hash] != Group.size())
      Issues.push_back(Tag + ": hash shared with functions outside the family");
    if (!canMerge(Group)) {
      Issues.push_back(Tag + ": members are not structurally mergeable");
      continue;
    }
    if (Group.front().InstCount != Fam.InstCount)
      Issues.push_back(Tag + ": instruction count " +
                       std::to_string(Group.front().InstCount) + ", expected " +
                       std::to_string(Fam.InstCount));
    ParamVecs Params = computeParams(Group);
    if (Params.size() != Fam.Params)
      Issues.push_back(Tag + ": " + std::to_string(Params.size()) +
                       " parameters, expected " + std::to_string(Fam.Params));
    std::vector<Loc> Locs;
    for (const ParamEntry &PE : Params)
      Locs.insert(Locs.end(), PE.Locs.begin(), PE.Locs.end());
    std::sort(Locs.begin(), Locs.end());
    if (Locs != Fam.Locs)
      Issues.push_back(Tag + ": parameter locations differ from the manifest");
  }

  for (const MotifInfo &Mo : Manifest.Motifs) {
    std::string Tag = "motif " + std::to_string(Mo.Index);
    std::optional<std::string> Text;
    for (const MotifSite &S : Mo.Sites) {
      std::string Where = S.Mod + ":" + S.Fn + ":" + std::to_string(S.Block) +
                          ":" + std::to_string(S.Start);
      const Module *M = P.findModule(S.Mod);
      const Function *F = M ? M->findFunction(S.Fn) : nullptr;
      if (!F || S.Block >= F->Blocks.size() ||
          !isClosedRange(F->Blocks[S.Block], S.Start, Mo.Len)) {
        Issues.push_back(Tag + ": site " + Where + " is not a closed run");
        continue;
      }
      Function Run;
      Block B;
      B.Label = "entry";
      const auto &Insts = F->Blocks[S.Block].Insts;
      B.Insts.assign(Insts.begin() + static_cast<long>(S.Start),
                     Insts.begin() + static_cast<long>(S.Start + Mo.Len));
      Run.Blocks.push_back(std::move(B));
      std::string Body = canonicalBody(Run);
      if (!Text)
        Text = Body;
      else if (*Text != Body)
        Issues.push_back(Tag + ": site " + Where + " differs from the first");
    }
  }
  return Issues;
}

std::string writeManifest(const CorpusManifest &Manifest) {
  std::ostringstream OS;
  for (const FamilyInfo &F : Manifest.Families) {
    OS << "FAM " << F.Index << " params=" << F.Params << " insts="
       << F.InstCount << " blocks=" << F.Blocks << " locs=";
    for (std::size_t I = 0; I < F.Locs.size(); ++I)
      OS << (I ? ";" : "") << formatLoc(F.Locs[I]);
    OS << " members=";
    for (std::size_t I = 0; I < F.Members.size(); ++I)
      OS << (I ? "," : "") << F.Members[I].first << ':' << F.Members[I].second;
    OS << '\n';
  }
  for (const MotifInfo &M : Manifest.Motifs) {
    OS << "MOTIF " << M.Index << " len=" << M.Len << " sites=";
    for (std::size_t I = 0; I < M.Sites.size(); ++I) {
      const MotifSite &S = M.Sites[I];
      OS << (I ? "," : "") << S.Mod << ':' << S.Fn << ':' << S.Block << ':'
         << S.Start;
    }
    OS << '\n';
  }
  return OS.str();
}

namespace {

std::vector<std::string> splitOn(const std::string &S, char Sep) {
  std::vector<std::string> Parts;
  if (S.empty())
    return Parts;
  std::string Cur;
  std::istringstream IS(S);
  while (std::getline(IS, Cur, Sep))
    Parts.push_back(Cur);
  return Parts;
}

std::string field(const std::string &Token, const std::string &Key) {
  if (Token.rfind(Key + "=", 0) != 0)
    throw Error("expected '" + Key + "='");
  return Token.substr(Key.size() + 1);
}

unsigned number(const std::string &S) {
  if (S.empty() || !std::all_of(S.begin(), S.end(), ::isdigit) || S.size() > 9)
    throw Error("malformed number '" + S + "'");
  return static_cast<unsigned>(std::stoul(S));
}

} // namespace

CorpusManifest readManifest(std::string_view Text) {
  CorpusManifest Manifest;
  std::istringstream IS{std::string(Text)};
  std::string Line;
  unsigned LineNo = 0;
  while (std::getline(IS, Line)) {
    ++LineNo;
    if (Line.empty())
      continue;
    std::istringstream LS(Line);
    std::vector<std::string> T;
    for (std::string W; LS >> W;)
      T.push_back(W);
    try {
      if (T[0] == "FAM" && T.size() == 7) {
        FamilyInfo F;
        F.Index = number(T[1]);
        F.Params = number(field(T[2], "params"));
        F.InstCount = number(field(T[3], "insts"));
        F.Blocks = number(field(T[4], "blocks"));
        for (const std::string &L : splitOn(field(T[5], "locs"), ';')) {
          std::vector<std::string> P = splitOn(L.substr(1, L.size() - 2), ',');
          if (L.size() < 5 || L.front() != '(' || L.back() != ')' ||
              P.size() != 2)
            throw Error("malformed location '" + L + "'");
          F.Locs.push_back({number(P[0]), number(P[1])});
        }
        for (const std::string &M : splitOn(field(T[6], "members"), ',')) {
          std::size_t Colon = M.find(':');
          if (Colon == std::string::npos)
            throw Error("malformed member '" + M + "'");
          F.Members.emplace_back(M.substr(0, Colon), M.substr(Colon + 1));
        }
        Manifest.Families.push_back(std::move(F));
      } else if (T[0] == "MOTIF" && T.size() == 4) {
        MotifInfo M;
        M.Index = number(T[1]);
        M.Len = number(field(T[2], "len"));
        for (const std::string &S : splitOn(field(T[3], "sites"), ',')) {
          std::vector<std::string> P = splitOn(S, ':');
          if (P.size() != 4)
            throw Error("malformed site '" + S + "'");
          M.Sites.push_back({P[0], P[1], number(P[2]), number(P[3])});
        }
        Manifest.Motifs.push_back(std::move(M));
      } else {
        throw Error("unknown manifest record");
      }
    } catch (const ParseError &) {
      throw;
    } catch (const Error &E) {
      throw ParseError(LineNo, 1, E.what());
    }
  }
  return Manifest;
}

} // namespace mergelink
