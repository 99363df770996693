//===- mergelink.cpp - Command-line driver --------------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//
//
// Exit status: 0 on success, 1 when the inputs produce diagnostics, 2 on
// usage errors.
//
//===----------------------------------------------------------------------===//

#include "mergelink/Corpus.h"
#include "mergelink/Driver.h"
#include "mergelink/Error.h"
#include "mergelink/IRText.h"
#include "mergelink/Interp.h"

#include "CLI11.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace mergelink;

namespace {

std::string readText(const std::string &Path) {
  std::ifstream IS(Path, std::ios::binary);
  if (!IS)
    throw Error("cannot read " + Path);
  std::ostringstream SS;
  SS << IS.rdbuf();
  return SS.str();
}

void writeText(const fs::path &Path, const std::string &Text) {
  if (Path.has_parent_path())
    fs::create_directories(Path.parent_path());
  std::ofstream OS(Path, std::ios::binary | std::ios::trunc);
  OS << Text;
  OS.close();
  if (!OS)
    throw Error("cannot write " + Path.string());
}

/// Writes to \p Path, or stdout when it is empty or "-".
void emit(const std::string &Path, const std::string &Text) {
  if (Path.empty() || Path == "-")
    std::cout << Text;
  else
    writeText(Path, Text);
}

Module loadModule(const std::string &Path) {
  try {
    return parseModule(readText(Path));
  } catch (const Error &E) {
    throw Error(Path + ":" + E.what());
  }
}

/// Files are taken as given; directories contribute their *.ir files.
Program loadProgram(const std::vector<std::string> &Inputs) {
  std::vector<std::string> Files;
  for (const std::string &In : Inputs) {
    if (!fs::is_directory(In)) {
      Files.push_back(In);
      continue;
    }
    std::vector<std::string> Found;
    for (const fs::directory_entry &E : fs::directory_iterator(In))
      if (E.is_regular_file() && E.path().extension() == ".ir")
        Found.push_back(E.path().string());
    std::sort(Found.begin(), Found.end());
    Files.insert(Files.end(), Found.begin(), Found.end());
  }
  Program P;
  for (const std::string &F : Files)
    P.Modules.push_back(loadModule(F));
  P.sortModules();
  return P;
}

std::vector<Word> parseArgs(const std::string &Csv) {
  std::vector<Word> Args;
  if (Csv.empty())
    return Args;
  std::istringstream IS(Csv);
  for (std::string Item; std::getline(IS, Item, ',');) {
    try {
      std::size_t Used = 0;
      long long V = std::stoll(Item, &Used, 0);
      if (Used != Item.size())
        throw std::invalid_argument(Item);
      Args.push_back(static_cast<Word>(V));
    } catch (const std::exception &) {
      try {
        std::size_t Used = 0;
        Word V = std::stoull(Item, &Used, 0);
        if (Used != Item.size())
          throw std::invalid_argument(Item);
        Args.push_back(V);
      } catch (const std::exception &) {
        throw CLI::ValidationError("--args", "not a word: '" + Item + "'");
      }
    }
  }
  return Args;
}

struct PipelineFlags {
  std::string Mode = "two-round";
  bool Merge = true;
  bool Outline = true;
  unsigned Overhead = CostConfig().ThunkFixedOverhead;
  unsigned MinOutlineLen = OutlineConfig().MinOutlineLen;
  std::string Icf = "all";
  std::string ArtifactDir;

  void addTo(CLI::App &Cmd, bool WithMode) {
    if (WithMode)
      Cmd.add_option("--mode", Mode, "two-round, write-artifacts or read-artifacts")
          ->check(CLI::IsMember({"two-round", "write-artifacts", "read-artifacts"}));
    Cmd.add_flag("--merge,!--no-merge", Merge, "Enable function merging");
    Cmd.add_flag("--outline,!--no-outline", Outline, "Enable outlining");
    Cmd.add_option("--overhead", Overhead, "Fixed thunk overhead");
    Cmd.add_option("--min-outline-len", MinOutlineLen,
                   "Shortest sequence worth outlining");
    Cmd.add_option("--icf", Icf, "Identical code folding: all, safe or off")
        ->check(CLI::IsMember({"all", "safe", "off"}));
    Cmd.add_option("--artifact-dir", ArtifactDir, "Artifact bundle directory");
  }

  PipelineConfig config() const {
    PipelineConfig Cfg;
    Cfg.Mode = *pipelineModeFromName(Mode);
    Cfg.EnableMerge = Merge;
    Cfg.EnableOutline = Outline;
    Cfg.Cost.ThunkFixedOverhead = Overhead;
    Cfg.Outline.MinOutlineLen = MinOutlineLen;
    Cfg.Icf = *icfModeFromName(Icf);
    Cfg.ArtifactDir = ArtifactDir;
    return Cfg;
  }
};

void printWarnings(const std::vector<std::string> &Warnings) {
  for (const std::string &W : Warnings)
    std::cerr << "warning: " << W << '\n';
}

/// Runs the configured pipeline; write-artifacts mode yields no result.
std::optional<PipelineResult> runPipeline(const Program &P,
                                          const PipelineConfig &Cfg) {
  switch (Cfg.Mode) {
  case PipelineMode::TwoRound:
    return runTwoRound(P, Cfg);
  case PipelineMode::WriteArtifacts:
    if (Cfg.ArtifactDir.empty())
      throw Error("write-artifacts mode needs --artifact-dir");
    runWriteArtifacts(P, Cfg);
    return std::nullopt;
  case PipelineMode::ReadArtifacts: {
    PipelineResult R = runReadArtifacts(P, Cfg);
    printWarnings(R.Warnings);
    return R;
  }
  }
  return std::nullopt;
}

LinkedImage loadImage(const std::vector<std::string> &Inputs) {
  if (Inputs.size() == 1 && !fs::is_directory(Inputs[0])) {
    std::string Text = readText(Inputs[0]);
    try {
      Module M = parseModule(Text);
      if (M.Name != "image")
        return link(std::vector<Module>{M});
    } catch (const Error &) {
    }
    return parseImage(Text);
  }
  return link(loadProgram(Inputs));
}

} // namespace

int main(int argc, char **argv) {
  CLI::App App{"Cross-module function merging, outlining and linking"};
  App.require_subcommand(1);

  std::vector<std::string> Inputs;
  std::string Output;
  PipelineFlags Flags;

  CLI::App *Analyze = App.add_subcommand("analyze", "Summarize one module");
  Analyze->add_option("module", Inputs, "Module file")->required();
  Analyze->add_option("-o,--output", Output, "Summary file");

  CLI::App *Combine =
      App.add_subcommand("combine", "Combine summaries into merge info");
  Combine->add_option("summaries", Inputs, "Summary files")->required();
  Combine->add_option("-o,--output", Output, "Merge info file");
  unsigned Overhead = CostConfig().ThunkFixedOverhead;
  Combine->add_option("--overhead", Overhead, "Fixed thunk overhead");

  CLI::App *Codegen = App.add_subcommand(
      "codegen", "Merge and outline one module against an artifact bundle");
  Codegen->add_option("module", Inputs, "Module file")->required();
  Codegen->add_option("-o,--output", Output, "Output module");
  Flags.addTo(*Codegen, false);

  CLI::App *Link = App.add_subcommand("link", "Link and fold modules");
  Link->add_option("inputs", Inputs, "Module files or directories")->required();
  Link->add_option("-o,--output", Output, "Image file");
  std::string MapPath;
  Link->add_option("--map", MapPath, "Linker map file");
  Link->add_option("--icf", Flags.Icf, "Identical code folding: all, safe or off")
      ->check(CLI::IsMember({"all", "safe", "off"}));

  CLI::App *Pipeline = App.add_subcommand("pipeline", "Run a whole pipeline");
  Pipeline->add_option("inputs", Inputs, "Module files or directories")
      ->required();
  Pipeline->add_option("-o,--output", Output,
                       "Directory for image.ir, linker.map and stats.txt");
  Flags.addTo(*Pipeline, true);

  CLI::App *Report = App.add_subcommand(
      "report", "Run a pipeline and print its statistics");
  Report->add_option("inputs", Inputs, "Module files or directories")
      ->required();
  Flags.addTo(*Report, true);

  CLI::App *Gen = App.add_subcommand("gen-corpus", "Generate a seeded corpus");
  CorpusConfig CC;
  std::string Spread = std::string(spreadName(CC.Spread));
  Gen->add_option("-o,--output", Output, "Output directory")->required();
  Gen->add_option("--seed", CC.Seed, "Generator seed");
  Gen->add_option("--modules", CC.Modules, "Module count");
  Gen->add_option("--functions", CC.FunctionsPerModule,
                  "Functions per module");
  Gen->add_option("--families", CC.Families, "Planted families");
  Gen->add_option("--family-size-min", CC.FamilySizeMin, "Smallest family");
  Gen->add_option("--family-size-max", CC.FamilySizeMax, "Largest family");
  Gen->add_option("--spread", Spread, "local, cross_module or mixed")
      ->check(CLI::IsMember({"local", "cross_module", "mixed"}));
  Gen->add_option("--divergent-locs", CC.DivergentLocs,
                  "Differing locations per family");
  Gen->add_option("--body-len-min", CC.BodyLenMin, "Shortest body");
  Gen->add_option("--body-len-max", CC.BodyLenMax, "Longest body");
  Gen->add_option("--blocks-max", CC.BlocksMax, "Most blocks per body");
  Gen->add_option("--motifs", CC.Motifs, "Planted outlining motifs");
  Gen->add_option("--motif-len", CC.MotifLen, "Motif length");

  CLI::App *Run = App.add_subcommand("run", "Interpret an image or program");
  Run->add_option("inputs", Inputs, "Image file, module files or directories")
      ->required();
  std::string Entry, ArgCsv;
  Run->add_option("--entry", Entry, "Function to call")->required();
  Run->add_option("--args", ArgCsv, "Comma-separated arguments");

  try {
    App.parse(argc, argv);
  } catch (const CLI::ParseError &E) {
    int Code = App.exit(E);
    return Code == 0 ? 0 : 2;
  }

  try {
    if (Analyze->parsed()) {
      emit(Output, writeSummaries(analyzeModule(loadModule(Inputs[0]))));
    } else if (Combine->parsed()) {
      std::vector<StableFunctionSummary> Sums;
      for (const std::string &In : Inputs) {
        std::vector<StableFunctionSummary> S = readSummaries(readText(In));
        Sums.insert(Sums.end(), S.begin(), S.end());
      }
      CostConfig Cost;
      Cost.ThunkFixedOverhead = Overhead;
      emit(Output, writeMergeInfo(combine(std::move(Sums), Cost)));
    } else if (Codegen->parsed()) {
      PipelineConfig Cfg = Flags.config();
      ArtifactBundle B;
      if (Cfg.ArtifactDir.empty()) {
        printWarnings({"no artifact directory given"});
      } else {
        BundleLoad Load = readBundle(Cfg.ArtifactDir);
        printWarnings(Load.Warnings);
        if (Load.Bundle)
          B = std::move(*Load.Bundle);
      }
      emit(Output, printModule(codegenModule(loadModule(Inputs[0]), B, Cfg).first));
    } else if (Link->parsed()) {
      auto [Image, Map] =
          icf(link(loadProgram(Inputs)), *icfModeFromName(Flags.Icf));
      emit(Output, printImage(Image));
      if (!MapPath.empty())
        writeText(MapPath, writeLinkerMap(Map));
    } else if (Pipeline->parsed() || Report->parsed()) {
      PipelineConfig Cfg = Flags.config();
      std::optional<PipelineResult> R = runPipeline(loadProgram(Inputs), Cfg);
      if (Report->parsed()) {
        if (R)
          std::cout << writeStats(R->Stats);
      } else if (R) {
        if (Output.empty())
          throw Error("pipeline needs -o <dir>");
        fs::path Dir(Output);
        writeText(Dir / "image.ir", printImage(R->Image));
        writeText(Dir / "linker.map", writeLinkerMap(R->Map));
        writeText(Dir / "stats.txt", writeStats(R->Stats));
      }
    } else if (Gen->parsed()) {
      CC.Spread = *spreadFromName(Spread);
      Corpus C = generateCorpus(CC);
      fs::path Dir(Output);
      for (const Module &M : C.Prog.Modules)
        writeText(Dir / (M.Name + ".ir"), printModule(M));
      writeText(Dir / "manifest.txt", writeManifest(C.Manifest));
    } else if (Run->parsed()) {
      LinkedImage Image = loadImage(Inputs);
      std::vector<Word> Args;
      try {
        Args = parseArgs(ArgCsv);
      } catch (const CLI::ParseError &E) {
        return App.exit(E) == 0 ? 0 : 2;
      }
      ExecResult R = run(Image, Image.resolve(Entry), Args);
      std::cout << formatResult(R);
      return R.Error ? 1 : 0;
    }
  } catch (const Error &E) {
    std::cerr << "error: " << E.what() << '\n';
    return 1;
  } catch (const std::exception &E) {
    std::cerr << "error: " << E.what() << '\n';
    return 1;
  }
  return 0;
}
