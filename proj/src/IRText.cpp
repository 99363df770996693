//===- IRText.cpp - Textual IR reader and writer --------------------------===//
//
// Licensed under the Apache License v2.0 with LLVM Exceptions.
// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
//
//===----------------------------------------------------------------------===//

#include "mergelink/IRText.h"

#include "mergelink/Canonicalize.h"
#include "mergelink/Error.h"
#include "mergelink/Verifier.h"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

namespace mergelink {

namespace {

struct Token {
  enum class Kind {
    Ident,
    Value,  // %name
    Global, // @name
    Number,
    String,
    Punct,
    Sep, // newline or ';'
    End,
  };

  Kind K = Kind::End;
  std::string Text;
  Word Num = 0;
  unsigned Line = 1;
  unsigned Col = 1;
};

bool isNameChar(char C) {
  return std::isalnum(static_cast<unsigned char>(C)) || C == '_' || C == '.' ||
         C == '$';
}

class Lexer {
public:
  explicit Lexer(std::string_view Src) : Src(Src) {}

  std::vector<Token> run() {
    std::vector<Token> Toks;
    while (true) {
      Token T = next();
      Toks.push_back(T);
      if (T.K == Token::Kind::End)
        break;
    }
    return Toks;
  }

private:
  std::string_view Src;
  std::size_t Pos = 0;
  unsigned Line = 1;
  unsigned Col = 1;

  char peek(std::size_t Ahead = 0) const {
    return Pos + Ahead < Src.size() ? Src[Pos + Ahead] : '\0';
  }

  char advance() {
    char C = Src[Pos++];
    if (C == '\n') {
      ++Line;
      Col = 1;
    } else {
      ++Col;
    }
    return C;
  }

  [[noreturn]] void fail(unsigned L, unsigned C, const std::string &Msg) {
    throw ParseError(L, C, Msg);
  }

  Token next() {
    while (Pos < Src.size()) {
      char C = peek();
      if (C == ' ' || C == '\t' || C == '\r') {
        advance();
      } else if (C == '/' && peek(1) == '/') {
        while (Pos < Src.size() && peek() != '\n')
          advance();
      } else {
        break;
      }
    }

    Token T;
    T.Line = Line;
    T.Col = Col;
    if (Pos >= Src.size())
      return T;

    char C = peek();
    if (C == '\n' || C == ';') {
      advance();
      T.K = Token::Kind::Sep;
      T.Text = std::string(1, C);
      return T;
    }
    if (C == '%' || C == '@') {
      advance();
      std::string Name;
      while (isNameChar(peek()))
        Name.push_back(advance());
      if (Name.empty())
        fail(T.Line, T.Col, std::string("expected name after '") + C + "'");
      T.K = C == '%' ? Token::Kind::Value : Token::Kind::Global;
      T.Text = std::move(Name);
      return T;
    }
    if (C == '"') {
      advance();
      std::string Bytes;
      while (true) {
        if (Pos >= Src.size() || peek() == '\n')
          fail(T.Line, T.Col, "unterminated string");
        char D = advance();
        if (D == '"')
          break;
        if (D != '\\') {
          Bytes.push_back(D);
          continue;
        }
        if (Pos >= Src.size())
          fail(T.Line, T.Col, "unterminated escape");
        char E = advance();
        switch (E) {
        case 'n':
          Bytes.push_back('\n');
          break;
        case 't':
          Bytes.push_back('\t');
          break;
        case '\\':
        case '"':
          Bytes.push_back(E);
          break;
        case 'x': {
          int V = 0;
          for (int K = 0; K < 2; ++K) {
            char H = Pos < Src.size() ? advance() : '\0';
            if (!std::isxdigit(static_cast<unsigned char>(H)))
              fail(Line, Col, "bad \\x escape");
            V = V * 16 + (std::isdigit(static_cast<unsigned char>(H))
                              ? H - '0'
                              : std::tolower(H) - 'a' + 10);
          }
          Bytes.push_back(static_cast<char>(V));
          break;
        }
        default:
          fail(Line, Col, std::string("unknown escape '\\") + E + "'");
        }
      }
      T.K = Token::Kind::String;
      T.Text = std::move(Bytes);
      return T;
    }
    if (std::isdigit(static_cast<unsigned char>(C))) {
      std::string Digits;
      while (isNameChar(peek()))
        Digits.push_back(advance());
      T.K = Token::Kind::Number;
      T.Text = Digits;
      T.Num = parseNumber(Digits, T);
      return T;
    }
    if (isNameChar(C)) {
      std::string Name;
      while (isNameChar(peek()))
        Name.push_back(advance());
      T.K = Token::Kind::Ident;
      T.Text = std::move(Name);
      return T;
    }
    if (std::string_view("(),=:{}").find(C) != std::string_view::npos) {
      advance();
      T.K = Token::Kind::Punct;
      T.Text = std::string(1, C);
      return T;
    }
    fail(T.Line, T.Col, std::string("unexpected character '") + C + "'");
  }

  Word parseNumber(const std::string &Digits, const Token &T) {
    Word V = 0;
    bool Hex = Digits.size() > 2 && Digits[0] == '0' &&
               (Digits[1] == 'x' || Digits[1] == 'X');
    std::size_t Start = Hex ? 2 : 0;
    Word Base = Hex ? 16 : 10;
    for (std::size_t I = Start; I < Digits.size(); ++I) {
      char D = Digits[I];
      Word Digit;
      if (std::isdigit(static_cast<unsigned char>(D)))
        Digit = static_cast<Word>(D - '0');
      else if (Hex && std::isxdigit(static_cast<unsigned char>(D)))
        Digit = static_cast<Word>(std::tolower(D) - 'a' + 10);
      else
        fail(T.Line, T.Col, "malformed literal '" + Digits + "'");
      if (V > (~Word(0) - Digit) / Base)
        fail(T.Line, T.Col, "literal out of range '" + Digits + "'");
      V = V * Base + Digit;
    }
    return V;
  }
};

struct LabelUse {
  std::string Label;
  std::size_t Args;
  unsigned Line;
  unsigned Col;
};

class Parser {
public:
  explicit Parser(std::string_view Src) : Toks(Lexer(Src).run()) {}

  Module parse() {
    Module M;
    skipSeps();
    expectKeyword("module");
    M.Name = expectIdent("module name").Text;
    endStatement();

    std::set<std::string> Symbols;
    while (true) {
      skipSeps();
      const Token &T = peek();
      if (T.K == Token::Kind::End)
        break;
      if (isKeyword(T, "extern") || isKeyword(T, "global")) {
        GlobalDef G = parseGlobal();
        if (!Symbols.insert(G.Name).second)
          fail(T, "duplicate symbol '@" + G.Name + "'");
        M.Globals.push_back(std::move(G));
      } else if (isKeyword(T, "func")) {
        Function F = parseFunction();
        if (!Symbols.insert(F.Name).second)
          fail(T, "duplicate symbol '@" + F.Name + "'");
        M.Functions.push_back(std::move(F));
      } else {
        fail(T, "expected 'global', 'extern' or 'func'");
      }
    }
    return M;
  }

private:
  std::vector<Token> Toks;
  std::size_t Pos = 0;

  const Token &peek(std::size_t Ahead = 0) const {
    std::size_t I = std::min(Pos + Ahead, Toks.size() - 1);
    return Toks[I];
  }
  const Token &take() {
    const Token &T = Toks[Pos];
    if (Pos + 1 < Toks.size())
      ++Pos;
    return T;
  }

  [[noreturn]] static void fail(const Token &T, const std::string &Msg) {
    throw ParseError(T.Line, T.Col, Msg);
  }

  static bool isKeyword(const Token &T, std::string_view Word) {
    return T.K == Token::Kind::Ident && T.Text == Word;
  }
  static bool isPunct(const Token &T, char C) {
    return T.K == Token::Kind::Punct && T.Text.size() == 1 && T.Text[0] == C;
  }

  void skipSeps() {
    while (peek().K == Token::Kind::Sep)
      take();
  }

  void endStatement() {
    const Token &T = peek();
    if (T.K == Token::Kind::Sep) {
      take();
      return;
    }
    if (T.K == Token::Kind::End || isPunct(T, '}'))
      return;
    fail(T, "expected end of statement");
  }

  void expectKeyword(std::string_view Word) {
    const Token &T = take();
    if (!isKeyword(T, Word))
      fail(T, "expected '" + std::string(Word) + "'");
  }

  void expectPunct(char C) {
    const Token &T = take();
    if (!isPunct(T, C))
      fail(T, std::string("expected '") + C + "'");
  }

  const Token &expectIdent(const char *What) {
    const Token &T = take();
    if (T.K != Token::Kind::Ident)
      fail(T, std::string("expected ") + What);
    return T;
  }

  const Token &expectKind(Token::Kind K, const char *What) {
    const Token &T = take();
    if (T.K != K)
      fail(T, std::string("expected ") + What);
    return T;
  }

  std::optional<Linkage> parseLinkage() {
    if (isKeyword(peek(), "public")) {
      take();
      return Linkage::Public;
    }
    if (isKeyword(peek(), "private")) {
      take();
      return Linkage::Private;
    }
    return std::nullopt;
  }

  GlobalDef parseGlobal() {
    GlobalDef G;
    if (isKeyword(peek(), "extern")) {
      take();
      expectKeyword("global");
      G.Name = expectKind(Token::Kind::Global, "'@name'").Text;
      G.Extern = true;
      endStatement();
      return G;
    }
    expectKeyword("global");
    G.Name = expectKind(Token::Kind::Global, "'@name'").Text;
    expectPunct('=');
    const Token &V = take();
    if (V.K == Token::Kind::Number)
      G.Data = V.Num;
    else if (V.K == Token::Kind::String)
      G.Data = V.Text;
    else
      fail(V, "expected integer or string initializer");
    G.Link = parseLinkage().value_or(Linkage::Public);
    endStatement();
    return G;
  }

  Function parseFunction() {
    Function F;
    expectKeyword("func");
    F.Name = expectKind(Token::Kind::Global, "'@name'").Text;
    std::map<std::string, unsigned> ParamIndex;
    expectPunct('(');
    if (!isPunct(peek(), ')')) {
      while (true) {
        const Token &P = expectKind(Token::Kind::Value, "parameter");
        if (!ParamIndex.emplace(P.Text, F.Params.size()).second)
          fail(P, "duplicate parameter '%" + P.Text + "'");
        F.Params.push_back(P.Text);
        if (isPunct(peek(), ')'))
          break;
        expectPunct(',');
      }
    }
    expectPunct(')');
    F.Link = parseLinkage().value_or(Linkage::Public);
    if (isKeyword(peek(), "origin")) {
      take();
      expectPunct('=');
      const Token &Tag = expectIdent("origin tag");
      std::optional<Origin> O = originFromName(Tag.Text);
      if (!O)
        fail(Tag, "unknown origin '" + Tag.Text + "'");
      F.Orig = *O;
    }
    skipSeps();
    expectPunct('{');

    std::vector<LabelUse> Uses;
    while (true) {
      skipSeps();
      const Token &T = peek();
      if (isPunct(T, '}')) {
        take();
        break;
      }
      if (T.K == Token::Kind::End)
        fail(T, "unterminated function body");
      if (isLabelHeader()) {
        Block B;
        const Token &L = take();
        B.Label = L.Text;
        if (F.blockIndex(B.Label))
          fail(L, "duplicate label '" + B.Label + "'");
        if (isPunct(peek(), '(')) {
          take();
          if (!isPunct(peek(), ')')) {
            while (true) {
              B.Params.push_back(
                  expectKind(Token::Kind::Value, "block parameter").Text);
              if (isPunct(peek(), ')'))
                break;
              expectPunct(',');
            }
          }
          expectPunct(')');
        }
        expectPunct(':');
        F.Blocks.push_back(std::move(B));
        continue;
      }
      if (F.Blocks.empty())
        fail(T, "instruction before first label");
      F.Blocks.back().Insts.push_back(parseInstruction(ParamIndex, Uses));
      endStatement();
    }

    for (const LabelUse &U : Uses) {
      std::optional<std::size_t> Target = F.blockIndex(U.Label);
      if (!Target)
        throw ParseError(U.Line, U.Col, "undefined label '" + U.Label + "'");
      if (F.Blocks[*Target].Params.size() != U.Args)
        throw ParseError(U.Line, U.Col,
                         "arity mismatch: block '" + U.Label + "' takes " +
                             std::to_string(F.Blocks[*Target].Params.size()) +
                             " arguments, got " + std::to_string(U.Args));
    }
    return F;
  }

  bool isLabelHeader() const {
    const Token &T = peek();
    if (T.K != Token::Kind::Ident)
      return false;
    if (isPunct(peek(1), ':'))
      return true;
    return isPunct(peek(1), '(') && !opcodeFromMnemonic(T.Text);
  }

  Operand parseOperand(const std::map<std::string, unsigned> &ParamIndex) {
    const Token &T = take();
    switch (T.K) {
    case Token::Kind::Value: {
      auto It = ParamIndex.find(T.Text);
      if (It != ParamIndex.end())
        return Operand::param(It->second);
      return Operand::value(T.Text);
    }
    case Token::Kind::Global:
      return Operand::global(T.Text);
    case Token::Kind::Number:
      return Operand::literal(T.Num);
    default:
      fail(T, "expected operand");
    }
  }

  bool atOperand() const {
    Token::Kind K = peek().K;
    return K == Token::Kind::Value || K == Token::Kind::Global ||
           K == Token::Kind::Number;
  }

  void parseArgList(Instruction &I,
                    const std::map<std::string, unsigned> &ParamIndex) {
    expectPunct('(');
    if (!isPunct(peek(), ')')) {
      while (true) {
        I.Ops.push_back(parseOperand(ParamIndex));
        if (isPunct(peek(), ')'))
          break;
        expectPunct(',');
      }
    }
    expectPunct(')');
  }

  void parseEdge(Instruction &I,
                 const std::map<std::string, unsigned> &ParamIndex,
                 std::vector<LabelUse> &Uses, bool AllowArgs) {
    const Token &L = expectIdent("label");
    I.Ops.push_back(Operand::label(L.Text));
    std::size_t Before = I.Ops.size();
    if (AllowArgs && isPunct(peek(), '('))
      parseArgList(I, ParamIndex);
    Uses.push_back({L.Text, I.Ops.size() - Before, L.Line, L.Col});
  }

  Instruction parseInstruction(const std::map<std::string, unsigned> &PIdx,
                               std::vector<LabelUse> &Uses) {
    Instruction I;
    const Token &First = peek();
    if (First.K == Token::Kind::Value) {
      I.Result = take().Text;
      if (PIdx.count(*I.Result))
        fail(First, "redefinition of parameter '%" + *I.Result + "'");
      expectPunct('=');
    }
    const Token &OpTok = expectIdent("opcode");
    std::optional<Opcode> Op = opcodeFromMnemonic(OpTok.Text);
    if (!Op)
      fail(OpTok, "unknown opcode '" + OpTok.Text + "'");
    I.Op = *Op;

    switch (I.Op) {
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Mul:
    case Opcode::Store:
      I.Ops.push_back(parseOperand(PIdx));
      expectPunct(',');
      I.Ops.push_back(parseOperand(PIdx));
      break;
    case Opcode::Const: {
      const Token &V = take();
      if (V.K != Token::Kind::Number)
        fail(V, "arity mismatch: const takes one literal");
      I.Ops.push_back(Operand::literal(V.Num));
      break;
    }
    case Opcode::Load:
      I.Ops.push_back(parseOperand(PIdx));
      break;
    case Opcode::Call:
    case Opcode::Invoke:
      I.Ops.push_back(parseOperand(PIdx));
      parseArgList(I, PIdx);
      if (I.Op == Opcode::Invoke) {
        expectKeyword("to");
        parseEdge(I, PIdx, Uses, /*AllowArgs=*/false);
        expectKeyword("unwind");
        parseEdge(I, PIdx, Uses, /*AllowArgs=*/false);
      }
      break;
    case Opcode::Br:
      parseEdge(I, PIdx, Uses, /*AllowArgs=*/true);
      break;
    case Opcode::BrCond:
      I.Ops.push_back(parseOperand(PIdx));
      expectPunct(',');
      parseEdge(I, PIdx, Uses, /*AllowArgs=*/true);
      expectPunct(',');
      parseEdge(I, PIdx, Uses, /*AllowArgs=*/true);
      break;
    case Opcode::Ret:
      if (atOperand())
        I.Ops.push_back(parseOperand(PIdx));
      break;
    }

    bool NeedsResult = I.Op == Opcode::Add || I.Op == Opcode::Sub ||
                       I.Op == Opcode::Mul || I.Op == Opcode::Const ||
                       I.Op == Opcode::Load;
    bool MayHaveResult = NeedsResult || I.Op == Opcode::Call ||
                         I.Op == Opcode::Invoke;
    if (NeedsResult && !I.Result)
      fail(OpTok, "'" + OpTok.Text + "' requires a result");
    if (!MayHaveResult && I.Result)
      fail(OpTok, "'" + OpTok.Text + "' produces no result");
    return I;
  }
};

std::string formatOperand(const Operand &O, const Function &F,
                          const GlobalFormatter &FormatGlobal) {
  switch (O.K) {
  case Operand::Kind::Literal:
    return std::to_string(O.Lit);
  case Operand::Kind::Global:
    return FormatGlobal ? FormatGlobal(O.Name) : "@" + O.Name;
  case Operand::Kind::Value:
    return "%" + O.Name;
  case Operand::Kind::Label:
    return O.Name;
  case Operand::Kind::Param:
    if (O.Index < F.Params.size())
      return "%" + F.Params[O.Index];
    return "%<param" + std::to_string(O.Index) + ">";
  }
  return {};
}

void printOperandList(std::ostream &OS, const Instruction &I, std::size_t Begin,
                      std::size_t End, const Function &F,
                      const GlobalFormatter &Fmt) {
  OS << '(';
  for (std::size_t J = Begin; J < End; ++J) {
    if (J != Begin)
      OS << ", ";
    OS << formatOperand(I.Ops[J], F, Fmt);
  }
  OS << ')';
}

void printEdge(std::ostream &OS, const Instruction &I, const BranchEdge &E,
               const Function &F, const GlobalFormatter &Fmt) {
  OS << E.Label;
  if (E.ArgEnd > E.ArgBegin)
    printOperandList(OS, I, E.ArgBegin, E.ArgEnd, F, Fmt);
}

void printInstructionTo(std::ostream &OS, const Instruction &I,
                        const Function &F, const GlobalFormatter &Fmt) {
  if (I.Result)
    OS << '%' << *I.Result << " = ";
  OS << mnemonic(I.Op);
  auto Opnd = [&](std::size_t J) { return formatOperand(I.Ops[J], F, Fmt); };
  switch (I.Op) {
  case Opcode::Add:
  case Opcode::Sub:
  case Opcode::Mul:
  case Opcode::Store:
    OS << ' ' << Opnd(0) << ", " << Opnd(1);
    break;
  case Opcode::Const:
  case Opcode::Load:
    OS << ' ' << Opnd(0);
    break;
  case Opcode::Call:
    OS << ' ' << Opnd(0);
    printOperandList(OS, I, 1, I.Ops.size(), F, Fmt);
    break;
  case Opcode::Invoke: {
    std::size_t ArgEnd = I.Ops.size() >= 2 ? I.Ops.size() - 2 : I.Ops.size();
    OS << ' ' << Opnd(0);
    printOperandList(OS, I, 1, ArgEnd, F, Fmt);
    if (I.Ops.size() >= 3)
      OS << " to " << I.Ops[ArgEnd].Name << " unwind "
         << I.Ops[ArgEnd + 1].Name;
    break;
  }
  case Opcode::Br:
    OS << ' ';
    for (const BranchEdge &E : branchEdges(I))
      printEdge(OS, I, E, F, Fmt);
    break;
  case Opcode::BrCond: {
    OS << ' ' << Opnd(0);
    for (const BranchEdge &E : branchEdges(I)) {
      OS << ", ";
      printEdge(OS, I, E, F, Fmt);
    }
    break;
  }
  case Opcode::Ret:
    if (!I.Ops.empty())
      OS << ' ' << Opnd(0);
    break;
  }
}

void printBlocks(std::ostream &OS, const Function &F,
                 const GlobalFormatter &Fmt) {
  for (const Block &B : F.Blocks) {
    OS << B.Label;
    if (!B.Params.empty()) {
      OS << '(';
      for (std::size_t I = 0; I < B.Params.size(); ++I)
        OS << (I ? ", " : "") << '%' << B.Params[I];
      OS << ')';
    }
    OS << ":\n";
    for (const Instruction &I : B.Insts) {
      OS << "  ";
      printInstructionTo(OS, I, F, Fmt);
      OS << '\n';
    }
  }
}

void printParams(std::ostream &OS, const Function &F) {
  OS << '(';
  for (std::size_t I = 0; I < F.Params.size(); ++I)
    OS << (I ? ", " : "") << '%' << F.Params[I];
  OS << ')';
}

} // namespace

Module parseModuleUnchecked(std::string_view Text) {
  return Parser(Text).parse();
}

Module parseModule(std::string_view Text) {
  Module M = parseModuleUnchecked(Text);
  std::vector<Diagnostic> Diags = validate(M);
  if (!Diags.empty()) {
    std::string Msg = "invalid module '" + M.Name + "':";
    for (const Diagnostic &D : Diags)
      Msg += "\n  " + D.str();
    throw Error(Msg);
  }
  return M;
}

std::string escapeBytes(std::string_view Bytes) {
  static const char Hex[] = "0123456789abcdef";
  std::string Out;
  for (char C : Bytes) {
    auto U = static_cast<unsigned char>(C);
    if (C == '"' || C == '\\') {
      Out.push_back('\\');
      Out.push_back(C);
    } else if (C == '\n') {
      Out += "\\n";
    } else if (C == '\t') {
      Out += "\\t";
    } else if (U >= 0x20 && U < 0x7f) {
      Out.push_back(C);
    } else {
      Out += "\\x";
      Out.push_back(Hex[U >> 4]);
      Out.push_back(Hex[U & 0xf]);
    }
  }
  return Out;
}

std::string printInstruction(const Instruction &I, const Function &F) {
  std::ostringstream OS;
  printInstructionTo(OS, I, F, nullptr);
  return OS.str();
}

std::string printFunction(const Function &F) {
  std::ostringstream OS;
  OS << "func @" << F.Name;
  printParams(OS, F);
  OS << ' ' << linkageName(F.Link);
  if (F.Orig != Origin::Original)
    OS << " origin=" << originName(F.Orig);
  OS << " {\n";
  printBlocks(OS, F, nullptr);
  OS << "}\n";
  return OS.str();
}

std::string printModule(const Module &M) {
  std::ostringstream OS;
  OS << "module " << M.Name << '\n';
  for (const GlobalDef &G : M.Globals) {
    if (G.Extern) {
      OS << "extern global @" << G.Name << '\n';
      continue;
    }
    OS << "global @" << G.Name << " = ";
    if (const auto *W = std::get_if<Word>(&G.Data))
      OS << *W;
    else if (const auto *S = std::get_if<std::string>(&G.Data))
      OS << '"' << escapeBytes(*S) << '"';
    else
      OS << 0;
    OS << ' ' << linkageName(G.Link) << '\n';
  }
  for (const Function &F : M.Functions)
    OS << '\n' << printFunction(F);
  return OS.str();
}

std::string canonicalBody(const Function &F,
                          const GlobalFormatter &FormatGlobal) {
  Function C = canonicalizeLabels(canonicalizeValues(F));
  std::ostringstream OS;
  OS << "func";
  printParams(OS, C);
  OS << " {\n";
  printBlocks(OS, C, FormatGlobal);
  OS << "}\n";
  return OS.str();
}

} // namespace mergelink
