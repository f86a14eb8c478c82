#pragma once

// Concrete syntax.  One token stream serves every format in the project:
//
//   atoms            nu#-3
//   atom sets        {nu#0, nu#-1}
//   permission sets  perm(+{nu#0},-{nu#-1})
//   permutations     ((nu#-1 nu#0)(nu#1 nu#2)), () for the identity
//   renamings        [nu#-1->nu#0, nu#1->nu#0], [] for the identity
//   sorts            nu, iota, (iota,iota), [nu]iota
//   terms            var(nu#-1), (t1, t2), [nu#0] t, ((a b))*X, X:iota#perm(...)
//   propositions     bot, p => q, P(t), forall X:iota#perm(...). p
//   signatures       namesort/basesort/term/prop declarations
//   theories         unknown/axiom declarations
//
// Unknowns carry their sort and permission set with a ':' annotation; a
// bare occurrence refers back to an earlier annotation or declaration.
// Identifiers starting with '$' or '%' are reserved for the canonical bound
// names and are rejected here, which is what makes capture impossible in
// the substitution actions.  Comments run from "//" to end of line.

#include "pnl/syntax.hpp"

namespace pnl {

// ---------------------------------------------------------------------------
// Tokens
// ---------------------------------------------------------------------------

struct Token {
  enum class Type {
    Ident, AtomLit, Int, String,
    LParen, RParen, LBrack, RBrack, LBrace, RBrace,
    Comma, Dot, Colon, Hash, Plus, Minus, Star, Arrow, DArrow,
    Backslash, Turnstile, End
  };
  Type type = Type::End;
  std::string text;       // Ident/String
  std::int64_t num = 0;   // Int
  Atom atom;              // AtomLit
  std::size_t pos = 0;    // byte offset, for error messages
};

class Lexer {
 public:
  explicit Lexer(std::string src) : src_(std::move(src)) { tokenize(); }

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = cur_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  Token next() {
    Token t = peek();
    if (cur_ < toks_.size() - 1) ++cur_;
    return t;
  }
  std::size_t mark() const { return cur_; }
  void rewind(std::size_t m) { cur_ = m; }

  [[noreturn]] void synErr(const std::string& msg) const {
    std::size_t pos = peek().pos;
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos && i < src_.size(); ++i) {
      if (src_[i] == '\n') { ++line; col = 1; } else ++col;
    }
    fail("syntax error at line " + std::to_string(line) + ", column " +
         std::to_string(col) + ": " + msg);
  }

  Token expect(Token::Type ty, const std::string& what) {
    if (peek().type != ty) synErr("expected " + what);
    return next();
  }
  bool accept(Token::Type ty) {
    if (peek().type != ty) return false;
    next();
    return true;
  }
  bool atKeyword(const std::string& kw) const {
    return peek().type == Token::Type::Ident && peek().text == kw;
  }
  bool acceptKeyword(const std::string& kw) {
    if (!atKeyword(kw)) return false;
    next();
    return true;
  }
  void expectEnd() {
    if (peek().type != Token::Type::End) synErr("expected end of input");
  }

 private:
  static bool identStart(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool identChar(char c) {
    return identStart(c) || (c >= '0' && c <= '9') || c == '\'';
  }

  void push(Token::Type ty, std::size_t pos) {
    Token t;
    t.type = ty;
    t.pos = pos;
    toks_.push_back(std::move(t));
  }

  void tokenize() {
    std::size_t i = 0;
    const std::size_t n = src_.size();
    while (i < n) {
      char c = src_[i];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { ++i; continue; }
      if (c == '/' && i + 1 < n && src_[i + 1] == '/') {
        while (i < n && src_[i] != '\n') ++i;
        continue;
      }
      std::size_t start = i;
      if (identStart(c)) {
        std::size_t j = i;
        while (j < n && identChar(src_[j])) ++j;
        std::string name = src_.substr(i, j - i);
        // An immediately attached "#<int>" makes an atom literal.
        if (j < n && src_[j] == '#') {
          std::size_t k = j + 1;
          bool neg = k < n && src_[k] == '-';
          if (neg) ++k;
          std::size_t digits = k;
          while (k < n && src_[k] >= '0' && src_[k] <= '9') ++k;
          if (k > digits) {
            Token t;
            t.type = Token::Type::AtomLit;
            t.pos = start;
            t.atom = Atom{name, std::stoll(src_.substr(j + 1, k - j - 1))};
            toks_.push_back(std::move(t));
            i = k;
            continue;
          }
        }
        // An immediately attached "@[...]" extends the identifier (the
        // higher-order side mangles context into variable names this way).
        if (j + 1 < n && src_[j] == '@' && src_[j + 1] == '[') {
          std::size_t k = j + 2;
          while (k < n && src_[k] != ']') ++k;
          if (k == n) fail("unterminated '@[' in identifier " + name);
          name = src_.substr(i, k + 1 - i);
          j = k + 1;
        }
        Token t;
        t.type = Token::Type::Ident;
        t.pos = start;
        t.text = std::move(name);
        toks_.push_back(std::move(t));
        i = j;
        continue;
      }
      if ((c >= '0' && c <= '9') ||
          (c == '-' && i + 1 < n && src_[i + 1] >= '0' && src_[i + 1] <= '9')) {
        std::size_t j = i + (c == '-' ? 1 : 0);
        while (j < n && src_[j] >= '0' && src_[j] <= '9') ++j;
        Token t;
        t.type = Token::Type::Int;
        t.pos = start;
        t.num = std::stoll(src_.substr(i, j - i));
        toks_.push_back(std::move(t));
        i = j;
        continue;
      }
      if (c == '"') {
        std::string s;
        std::size_t j = i + 1;
        while (j < n && src_[j] != '"') {
          if (src_[j] == '\\' && j + 1 < n) ++j;
          s += src_[j++];
        }
        if (j == n) fail("unterminated string literal");
        Token t;
        t.type = Token::Type::String;
        t.pos = start;
        t.text = std::move(s);
        toks_.push_back(std::move(t));
        i = j + 1;
        continue;
      }
      auto two = [&](char a, char b) {
        return c == a && i + 1 < n && src_[i + 1] == b;
      };
      if (two('-', '>')) { push(Token::Type::Arrow, start); i += 2; continue; }
      if (two('=', '>')) { push(Token::Type::DArrow, start); i += 2; continue; }
      if (two('|', '-')) { push(Token::Type::Turnstile, start); i += 2; continue; }
      switch (c) {
        case '(': push(Token::Type::LParen, start); break;
        case ')': push(Token::Type::RParen, start); break;
        case '[': push(Token::Type::LBrack, start); break;
        case ']': push(Token::Type::RBrack, start); break;
        case '{': push(Token::Type::LBrace, start); break;
        case '}': push(Token::Type::RBrace, start); break;
        case ',': push(Token::Type::Comma, start); break;
        case '.': push(Token::Type::Dot, start); break;
        case ':': push(Token::Type::Colon, start); break;
        case '#': push(Token::Type::Hash, start); break;
        case '+': push(Token::Type::Plus, start); break;
        case '-': push(Token::Type::Minus, start); break;
        case '*': push(Token::Type::Star, start); break;
        case '\\': push(Token::Type::Backslash, start); break;
        case '$':
        case '%':
          fail("identifiers starting with '" + std::string(1, c) +
               "' are reserved");
        default:
          fail("unexpected character '" + std::string(1, c) + "' in input");
      }
      ++i;
    }
    push(Token::Type::End, n);
  }

  std::string src_;
  std::vector<Token> toks_;
  std::size_t cur_ = 0;
};

// ---------------------------------------------------------------------------
// Small pieces
// ---------------------------------------------------------------------------

inline Atom parseAtom(Lexer& lx) {
  if (lx.peek().type != Token::Type::AtomLit)
    lx.synErr("expected an atom like nu#-1");
  return lx.next().atom;
}

inline AtomSet parseAtomSet(Lexer& lx) {
  lx.expect(Token::Type::LBrace, "'{'");
  AtomSet out;
  if (!lx.accept(Token::Type::RBrace)) {
    do {
      out.insert(parseAtom(lx));
    } while (lx.accept(Token::Type::Comma));
    lx.expect(Token::Type::RBrace, "'}'");
  }
  return out;
}

// Either a finite set {..} or the permission form perm(+{..},-{..}).
inline AtomSetExpr parseAtomSetExpr(Lexer& lx) {
  if (lx.peek().type == Token::Type::LBrace)
    return AtomSetExpr::finite(parseAtomSet(lx));
  if (!lx.acceptKeyword("perm")) lx.synErr("expected '{' or 'perm('");
  lx.expect(Token::Type::LParen, "'(' after perm");
  lx.expect(Token::Type::Plus, "'+'");
  AtomSet adds = parseAtomSet(lx);
  lx.expect(Token::Type::Comma, "','");
  lx.expect(Token::Type::Minus, "'-'");
  AtomSet removes = parseAtomSet(lx);
  lx.expect(Token::Type::RParen, "')'");
  return AtomSetExpr::permissive(std::move(adds), std::move(removes));
}

inline PermissionSet parseGuardedPermissionSet(Lexer& lx) {
  if (lx.peek().type == Token::Type::LBrace)
    lx.synErr("a permission set must use the perm(+{..},-{..}) form");
  return parseAtomSetExpr(lx);
}

// Cycle list: ((a b)(c d)); () is the identity.
inline Permutation parsePermutation(Lexer& lx) {
  lx.expect(Token::Type::LParen, "'(' opening a permutation");
  std::map<Atom, Atom> entries;
  while (lx.peek().type == Token::Type::LParen) {
    lx.next();
    std::vector<Atom> cycle;
    while (lx.peek().type == Token::Type::AtomLit) cycle.push_back(lx.next().atom);
    lx.expect(Token::Type::RParen, "')' closing a cycle");
    if (cycle.size() < 2) lx.synErr("a cycle needs at least two atoms");
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      const Atom& from = cycle[i];
      if (entries.count(from)) lx.synErr("atom repeated across cycles");
      entries[from] = cycle[(i + 1) % cycle.size()];
    }
  }
  lx.expect(Token::Type::RParen, "')' closing the permutation");
  return Permutation::fromEntries(std::move(entries));
}

// [a->b, c->d]; [] is the identity.
inline Renaming parseRenaming(Lexer& lx) {
  lx.expect(Token::Type::LBrack, "'['");
  std::map<Atom, Atom> entries;
  if (!lx.accept(Token::Type::RBrack)) {
    do {
      Atom from = parseAtom(lx);
      lx.expect(Token::Type::Arrow, "'->'");
      Atom to = parseAtom(lx);
      if (entries.count(from)) lx.synErr("renaming maps an atom twice");
      entries[from] = to;
    } while (lx.accept(Token::Type::Comma));
    lx.expect(Token::Type::RBrack, "']'");
  }
  return Renaming::fromEntries(std::move(entries));
}

// ---------------------------------------------------------------------------
// Sorts
// ---------------------------------------------------------------------------

inline PnlSort parseSort(const PnlSignature& sig, Lexer& lx);

// A parenthesized list used both as tuple-sort literal and as the domain
// list in former declarations; a single element is just grouping.
inline PnlSort parseSortGroup(const PnlSignature& sig, Lexer& lx) {
  lx.expect(Token::Type::LParen, "'('");
  std::vector<PnlSort> comps;
  if (!lx.accept(Token::Type::RParen)) {
    do {
      comps.push_back(parseSort(sig, lx));
    } while (lx.accept(Token::Type::Comma));
    lx.expect(Token::Type::RParen, "')'");
  }
  if (comps.size() == 1) return comps[0];
  return PnlSort::tuple(std::move(comps));
}

inline PnlSort parseSort(const PnlSignature& sig, Lexer& lx) {
  if (lx.peek().type == Token::Type::LParen) return parseSortGroup(sig, lx);
  if (lx.accept(Token::Type::LBrack)) {
    Token name = lx.expect(Token::Type::Ident, "a name sort");
    if (!sig.isNameSort(name.text))
      lx.synErr(name.text + " is not a declared name sort");
    lx.expect(Token::Type::RBrack, "']'");
    return PnlSort::abs(name.text, parseSort(sig, lx));
  }
  Token name = lx.expect(Token::Type::Ident, "a sort");
  if (sig.isNameSort(name.text)) return PnlSort::nameSort(name.text);
  if (sig.isBaseSort(name.text)) return PnlSort::baseSort(name.text);
  lx.synErr(name.text + " is not a declared sort");
}

// ---------------------------------------------------------------------------
// Terms and propositions
// ---------------------------------------------------------------------------

// Names in scope while parsing: previously annotated or declared unknowns.
using UnknownEnv = std::map<std::string, Unknown>;

inline Unknown parseUnknownOccurrence(const PnlSignature& sig, Lexer& lx,
                                      UnknownEnv& env) {
  Token name = lx.expect(Token::Type::Ident, "an unknown");
  if (lx.accept(Token::Type::Colon)) {
    PnlSort sort = parseSort(sig, lx);
    lx.expect(Token::Type::Hash, "'#' before the permission set");
    PermissionSet pmss = parseGuardedPermissionSet(lx);
    Unknown u{name.text, std::move(sort), std::move(pmss)};
    auto it = env.find(name.text);
    if (it != env.end() && !(it->second == u))
      lx.synErr("unknown " + name.text +
                " annotated differently from its earlier declaration");
    env[name.text] = u;
    return u;
  }
  auto it = env.find(name.text);
  if (it == env.end())
    lx.synErr("unknown " + name.text +
              " needs a ':sort#perm(...)' annotation or prior declaration");
  return it->second;
}

inline PnlTerm parseTerm(const PnlSignature& sig, Lexer& lx, UnknownEnv& env);

// Former application with surface arity: the written arguments become the
// single tuple argument when there are zero or several of them.
inline PnlTerm parseFormerArg(const PnlSignature& sig, Lexer& lx,
                              UnknownEnv& env) {
  lx.expect(Token::Type::LParen, "'('");
  std::vector<PnlTerm> args;
  if (!lx.accept(Token::Type::RParen)) {
    do {
      args.push_back(parseTerm(sig, lx, env));
    } while (lx.accept(Token::Type::Comma));
    lx.expect(Token::Type::RParen, "')'");
  }
  if (args.size() == 1) return args[0];
  return mkTuple(std::move(args));
}

inline PnlTerm parseTerm(const PnlSignature& sig, Lexer& lx, UnknownEnv& env) {
  const Token& t = lx.peek();
  switch (t.type) {
    case Token::Type::AtomLit: {
      Atom a = lx.next().atom;
      if (!sig.isNameSort(a.sort))
        lx.synErr("atom " + a.display() + " has undeclared sort " + a.sort);
      return mkAtomTerm(a);
    }
    case Token::Type::LBrack: {
      lx.next();
      Atom binder = parseAtom(lx);
      if (!sig.isNameSort(binder.sort))
        lx.synErr("abstracted atom " + binder.display() + " has undeclared sort");
      lx.expect(Token::Type::RBrack, "']'");
      return mkAbs(binder, parseTerm(sig, lx, env));
    }
    case Token::Type::LParen: {
      // Try a suspension "pi*X" first, then fall back to tuple/grouping.
      std::size_t m = lx.mark();
      bool isSusp = false;
      Permutation p;
      try {
        p = parsePermutation(lx);
        isSusp = lx.peek().type == Token::Type::Star;
      } catch (const PnlError&) {
        isSusp = false;
      }
      if (isSusp) {
        lx.expect(Token::Type::Star, "'*'");
        Unknown u = parseUnknownOccurrence(sig, lx, env);
        return mkSusp(p, u);
      }
      lx.rewind(m);
      lx.next();  // '('
      std::vector<PnlTerm> comps;
      if (!lx.accept(Token::Type::RParen)) {
        do {
          comps.push_back(parseTerm(sig, lx, env));
        } while (lx.accept(Token::Type::Comma));
        lx.expect(Token::Type::RParen, "')'");
      }
      if (comps.size() == 1) return comps[0];
      return mkTuple(std::move(comps));
    }
    case Token::Type::Ident: {
      if (sig.termFormers.count(t.text)) {
        std::string former = lx.next().text;
        return mkApp(sig, former, parseFormerArg(sig, lx, env));
      }
      Unknown u = parseUnknownOccurrence(sig, lx, env);
      return mkUnknownTerm(u);
    }
    default:
      lx.synErr("expected a term");
  }
}

inline PnlProp parseProp(const PnlSignature& sig, Lexer& lx, UnknownEnv& env);

inline PnlProp parsePropAtom(const PnlSignature& sig, Lexer& lx,
                             UnknownEnv& env) {
  if (lx.acceptKeyword("bot")) return mkBot();
  if (lx.atKeyword("forall")) {
    lx.next();
    // One or more comma-separated binders.  A binder is either annotated in
    // place or a bare name that picks up the sort and permission set of an
    // unknown already in scope (typically a theory declaration).
    std::vector<Unknown> binders;
    std::vector<std::optional<Unknown>> shadowed;
    do {
      Token name = lx.expect(Token::Type::Ident, "a bound unknown");
      Unknown u{name.text, PnlSort::baseSort(""), PermissionSet::empty()};
      if (lx.accept(Token::Type::Colon)) {
        u.sort = parseSort(sig, lx);
        lx.expect(Token::Type::Hash, "'#' before the permission set");
        u.pmss = parseGuardedPermissionSet(lx);
      } else {
        auto known = env.find(name.text);
        if (known == env.end())
          lx.synErr("binder " + name.text +
                    " needs a ':sort#perm(...)' annotation or a prior "
                    "declaration");
        u = known->second;
      }
      auto it = env.find(u.name);
      shadowed.push_back(it == env.end() ? std::nullopt
                                         : std::optional<Unknown>(it->second));
      env[u.name] = u;
      binders.push_back(std::move(u));
    } while (lx.accept(Token::Type::Comma));
    lx.expect(Token::Type::Dot, "'.' after the quantifier binders");
    PnlProp body = parseProp(sig, lx, env);
    for (std::size_t i = binders.size(); i-- > 0;) {
      body = mkForall(binders[i], body);
      if (shadowed[i])
        env[binders[i].name] = *shadowed[i];
      else
        env.erase(binders[i].name);
    }
    return body;
  }
  if (lx.peek().type == Token::Type::LParen) {
    lx.next();
    PnlProp p = parseProp(sig, lx, env);
    lx.expect(Token::Type::RParen, "')'");
    return p;
  }
  if (lx.peek().type == Token::Type::Ident &&
      sig.propFormers.count(lx.peek().text)) {
    std::string former = lx.next().text;
    return mkPred(sig, former, parseFormerArg(sig, lx, env));
  }
  lx.synErr("expected a proposition");
}

inline PnlProp parseProp(const PnlSignature& sig, Lexer& lx, UnknownEnv& env) {
  PnlProp lhs = parsePropAtom(sig, lx, env);
  if (lx.accept(Token::Type::DArrow))
    return mkImp(std::move(lhs), parseProp(sig, lx, env));
  return lhs;
}

// ---------------------------------------------------------------------------
// Signature and theory files
// ---------------------------------------------------------------------------

// namesort nu [mu ...]
// basesort iota [...]
// term f : (alpha, ...) tau
// prop P : (alpha, ...)
inline PnlSignature parseSignature(const std::string& text) {
  Lexer lx(text);
  PnlSignature sig;
  auto atDeclKeyword = [&lx] {
    return lx.atKeyword("namesort") || lx.atKeyword("basesort") ||
           lx.atKeyword("term") || lx.atKeyword("prop");
  };
  // Single pass: formers may only mention earlier sorts, and all sort
  // declarations conventionally lead the file.
  while (lx.peek().type != Token::Type::End) {
    if (lx.acceptKeyword("namesort")) {
      do {
        sig.nameSorts.insert(lx.expect(Token::Type::Ident, "a sort name").text);
      } while (lx.peek().type == Token::Type::Ident && !atDeclKeyword());
      continue;
    }
    if (lx.acceptKeyword("basesort")) {
      do {
        sig.baseSorts.insert(lx.expect(Token::Type::Ident, "a sort name").text);
      } while (lx.peek().type == Token::Type::Ident && !atDeclKeyword());
      continue;
    }
    if (lx.acceptKeyword("term")) {
      Token name = lx.expect(Token::Type::Ident, "a term-former name");
      lx.expect(Token::Type::Colon, "':'");
      PnlSort domain = parseSortGroup(sig, lx);
      Token result = lx.expect(Token::Type::Ident, "a result base sort");
      if (!sig.isBaseSort(result.text))
        lx.synErr("result sort " + result.text + " is not a declared base sort");
      if (sig.termFormers.count(name.text) || sig.propFormers.count(name.text))
        lx.synErr("former " + name.text + " declared twice");
      sig.termFormers[name.text] = {std::move(domain), result.text};
      continue;
    }
    if (lx.acceptKeyword("prop")) {
      Token name = lx.expect(Token::Type::Ident, "a proposition-former name");
      lx.expect(Token::Type::Colon, "':'");
      PnlSort domain = parseSortGroup(sig, lx);
      if (sig.termFormers.count(name.text) || sig.propFormers.count(name.text))
        lx.synErr("former " + name.text + " declared twice");
      sig.propFormers[name.text] = {std::move(domain)};
      continue;
    }
    lx.synErr("expected namesort, basesort, term or prop");
  }
  sig.validate();
  return sig;
}

// unknown X : sort # perm(...)
// axiom name : prop
struct Theory {
  UnknownEnv unknowns;
  std::map<std::string, PnlProp> axioms;
  std::vector<std::string> axiomOrder;
};

inline Theory parseTheory(const PnlSignature& sig, const std::string& text) {
  Lexer lx(text);
  Theory thy;
  while (lx.peek().type != Token::Type::End) {
    if (lx.acceptKeyword("unknown")) {
      Token name = lx.expect(Token::Type::Ident, "an unknown name");
      lx.expect(Token::Type::Colon, "':'");
      PnlSort sort = parseSort(sig, lx);
      lx.expect(Token::Type::Hash, "'#'");
      PermissionSet pmss = parseGuardedPermissionSet(lx);
      if (thy.unknowns.count(name.text))
        lx.synErr("unknown " + name.text + " declared twice");
      thy.unknowns[name.text] = Unknown{name.text, std::move(sort), std::move(pmss)};
      continue;
    }
    if (lx.acceptKeyword("axiom")) {
      Token name = lx.expect(Token::Type::Ident, "an axiom name");
      lx.expect(Token::Type::Colon, "':'");
      UnknownEnv env = thy.unknowns;
      PnlProp p = parseProp(sig, lx, env);
      if (thy.axioms.count(name.text))
        lx.synErr("axiom " + name.text + " declared twice");
      thy.axioms[name.text] = std::move(p);
      thy.axiomOrder.push_back(name.text);
      continue;
    }
    lx.synErr("expected unknown or axiom");
  }
  return thy;
}

// ---------------------------------------------------------------------------
// Whole-string helpers
// ---------------------------------------------------------------------------

inline PnlTerm parseTermString(const PnlSignature& sig, const std::string& s,
                               UnknownEnv& env) {
  Lexer lx(s);
  PnlTerm t = parseTerm(sig, lx, env);
  lx.expectEnd();
  return t;
}

inline PnlTerm parseTermString(const PnlSignature& sig, const std::string& s) {
  UnknownEnv env;
  return parseTermString(sig, s, env);
}

inline PnlProp parsePropString(const PnlSignature& sig, const std::string& s,
                               UnknownEnv& env) {
  Lexer lx(s);
  PnlProp p = parseProp(sig, lx, env);
  lx.expectEnd();
  return p;
}

inline PnlProp parsePropString(const PnlSignature& sig, const std::string& s) {
  UnknownEnv env;
  return parsePropString(sig, s, env);
}

inline Permutation parsePermutationString(const std::string& s) {
  Lexer lx(s);
  Permutation p = parsePermutation(lx);
  lx.expectEnd();
  return p;
}

inline Renaming parseRenamingString(const std::string& s) {
  Lexer lx(s);
  Renaming r = parseRenaming(lx);
  lx.expectEnd();
  return r;
}

inline AtomSetExpr parseAtomSetExprString(const std::string& s) {
  Lexer lx(s);
  AtomSetExpr e = parseAtomSetExpr(lx);
  lx.expectEnd();
  return e;
}

}  // namespace pnl
