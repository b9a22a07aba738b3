// Copyright 2026 The kgsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgsynth/fol_text.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>

#include "kgsynth/error.h"
#include "kgsynth/patterns.h"

namespace kgsynth {
namespace {

constexpr std::string_view kAnd = "\xE2\x88\xA7";     // ∧
constexpr std::string_view kOr = "\xE2\x88\xA8";      // ∨
constexpr std::string_view kNot = "\xC2\xAC";         // ¬
constexpr std::string_view kExists = "\xE2\x88\x83";  // ∃

struct Term {
  std::string text;
  bool quoted = false;
  bool is_var = false;
};

struct Formula {
  enum class Kind { kAtom, kNot, kAnd, kOr };
  Kind kind = Kind::kAtom;
  std::string relation;
  Term lhs;
  Term rhs;
  std::vector<Formula> children;
};

struct ParsedText {
  std::string answer_var;
  std::set<std::string> declared;
  Formula formula;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  ParsedText parse() {
    ParsedText out;
    expect("q");
    expect("=");
    expect("?");
    out.answer_var = read_identifier("free variable");
    out.declared.insert(out.answer_var);
    expect(":");
    skip_ws();
    if (consume_exists()) {
      do {
        out.declared.insert(read_identifier("bound variable"));
      } while (consume(","));
      expect(":");
    }
    out.formula = parse_formula();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return out;
  }

 private:
  enum class Connective { kNone, kAnd, kOr };

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kSyntax,
                "syntax error at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() &&
           (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' ||
            s_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool consume(std::string_view token) {
    skip_ws();
    if (s_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    if (!consume(token)) fail("expected '" + std::string(token) + "'");
  }

  bool consume_exists() {
    if (consume(kExists)) return true;
    if (s_.substr(pos_, 6) == "exists" && pos_ + 6 < s_.size() &&
        (s_[pos_ + 6] == ' ' || s_[pos_ + 6] == '\t')) {
      pos_ += 6;
      return true;
    }
    return false;
  }

  std::string read_identifier(const char* what) {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
            s_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail(std::string("expected ") + what);
    return std::string(s_.substr(start, pos_ - start));
  }

  Connective peek_connective() {
    skip_ws();
    auto rest = s_.substr(pos_);
    if (rest.starts_with(kAnd) || rest.starts_with("&")) return Connective::kAnd;
    if (rest.starts_with(kOr) || rest.starts_with("|")) return Connective::kOr;
    return Connective::kNone;
  }

  void consume_connective() {
    auto rest = s_.substr(pos_);
    if (rest.starts_with(kAnd)) {
      pos_ += kAnd.size();
    } else if (rest.starts_with(kOr)) {
      pos_ += kOr.size();
    } else {
      ++pos_;
    }
  }

  Formula parse_formula() {
    Formula first = parse_unary();
    Connective level = Connective::kNone;
    std::vector<Formula> parts;
    parts.push_back(std::move(first));
    while (true) {
      Connective c = peek_connective();
      if (c == Connective::kNone) break;
      if (level != Connective::kNone && c != level) {
        fail("mixed connectives need parentheses");
      }
      level = c;
      consume_connective();
      parts.push_back(parse_unary());
    }
    if (parts.size() == 1) return std::move(parts.front());
    Formula f;
    f.kind = level == Connective::kAnd ? Formula::Kind::kAnd
                                       : Formula::Kind::kOr;
    f.children = std::move(parts);
    return f;
  }

  Formula parse_unary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (consume(kNot) || consume("!")) {
      Formula f;
      f.kind = Formula::Kind::kNot;
      f.children.push_back(parse_unary());
      return f;
    }
    if (consume("(")) {
      Formula f = parse_formula();
      expect(")");
      return f;
    }
    return parse_atom();
  }

  std::string read_quoted() {
    // Opening quote already at pos_.
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\') {
        ++pos_;
        if (pos_ >= s_.size()) break;
      }
      out.push_back(s_[pos_++]);
    }
    if (pos_ >= s_.size()) fail("unterminated quoted name");
    ++pos_;
    return out;
  }

  std::string read_bare(std::string_view stops) {
    std::size_t start = pos_;
    while (pos_ < s_.size() && stops.find(s_[pos_]) == std::string_view::npos) {
      ++pos_;
    }
    std::string_view text = s_.substr(start, pos_ - start);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
      text.remove_suffix(1);
    }
    return std::string(text);
  }

  Term read_term() {
    skip_ws();
    Term t;
    if (pos_ < s_.size() && s_[pos_] == '"') {
      t.text = read_quoted();
      t.quoted = true;
    } else {
      t.text = read_bare(",()");
      if (t.text.empty()) fail("expected an argument");
    }
    return t;
  }

  Formula parse_atom() {
    Formula f;
    f.kind = Formula::Kind::kAtom;
    skip_ws();
    if (s_[pos_] == '"') {
      f.relation = read_quoted();
    } else {
      f.relation = read_bare("(),");
      if (f.relation.empty()) fail("expected a relation name");
    }
    expect("(");
    f.lhs = read_term();
    expect(",");
    f.rhs = read_term();
    expect(")");
    return f;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool is_single_lower(std::string_view s) {
  return s.size() == 1 && s[0] >= 'a' && s[0] <= 'z';
}

void classify_terms(Formula& f, const std::set<std::string>& declared) {
  if (f.kind == Formula::Kind::kAtom) {
    for (Term* t : {&f.lhs, &f.rhs}) {
      t->is_var =
          !t->quoted && (declared.count(t->text) > 0 || is_single_lower(t->text));
    }
  }
  for (Formula& c : f.children) classify_terms(c, declared);
}

[[noreturn]] void unknown_shape(const std::string& why) {
  throw Error(ErrorCode::kUnknownPattern, "unrecognized query shape: " + why);
}

// Operator tree recovered from the formula, still carrying names.
struct ParsedNode {
  NodeKind kind = NodeKind::kAnchor;
  std::string anchor;
  SymbolicRelation relation;
  std::vector<ParsedNode> children;
};

struct Item {
  const Formula* formula;
  bool used = false;
};

bool mentions(const Formula& f, const std::string& var) {
  if (f.kind == Formula::Kind::kAtom) {
    return (f.lhs.is_var && f.lhs.text == var) ||
           (f.rhs.is_var && f.rhs.text == var);
  }
  return std::any_of(f.children.begin(), f.children.end(),
                     [&](const Formula& c) { return mentions(c, var); });
}

std::vector<Item> conjuncts(const Formula& f) {
  std::vector<Item> items;
  if (f.kind == Formula::Kind::kAnd) {
    for (const Formula& c : f.children) {
      auto sub = conjuncts(c);
      items.insert(items.end(), sub.begin(), sub.end());
    }
  } else {
    items.push_back({&f});
  }
  return items;
}

class TreeBuilder {
 public:
  ParsedNode build(const std::string& var, std::vector<Item>& items) {
    if (!active_.insert(var).second) unknown_shape("cycle through " + var);
    std::vector<ParsedNode> branches;
    for (Item& item : items) {
      if (item.used || !mentions(*item.formula, var)) continue;
      item.used = true;
      branches.push_back(branch(*item.formula, var, items));
    }
    active_.erase(var);
    if (branches.empty()) unknown_shape("variable " + var + " is unconstrained");
    if (branches.size() == 1) {
      if (branches[0].kind == NodeKind::kNegation) {
        unknown_shape("negation must be conjoined with a positive branch");
      }
      return std::move(branches[0]);
    }
    ParsedNode n;
    n.kind = NodeKind::kIntersection;
    n.children = std::move(branches);
    return n;
  }

  static void require_all_used(const std::vector<Item>& items) {
    for (const Item& i : items) {
      if (!i.used) unknown_shape("disconnected conjunct");
    }
  }

 private:
  ParsedNode branch(const Formula& f, const std::string& var,
                    std::vector<Item>& items) {
    switch (f.kind) {
      case Formula::Kind::kAtom: {
        bool lhs_is = f.lhs.is_var && f.lhs.text == var;
        bool rhs_is = f.rhs.is_var && f.rhs.text == var;
        if (lhs_is == rhs_is) unknown_shape("self-referencing atom");
        const Term& other = rhs_is ? f.lhs : f.rhs;
        ParsedNode n;
        n.kind = NodeKind::kProjection;
        n.relation = {f.relation, lhs_is};
        if (other.is_var) {
          n.children.push_back(build(other.text, items));
        } else {
          ParsedNode a;
          a.kind = NodeKind::kAnchor;
          a.anchor = other.text;
          n.children.push_back(std::move(a));
        }
        return n;
      }
      case Formula::Kind::kNot: {
        ParsedNode n;
        n.kind = NodeKind::kNegation;
        n.children.push_back(branch(f.children[0], var, items));
        return n;
      }
      case Formula::Kind::kOr: {
        ParsedNode n;
        n.kind = NodeKind::kUnion;
        for (const Formula& d : f.children) {
          n.children.push_back(nested(d, var));
        }
        return n;
      }
      case Formula::Kind::kAnd:
        return nested(f, var);
    }
    unknown_shape("unsupported formula");
  }

  // A parenthesised conjunction constraining `var` again from inside `var`.
  ParsedNode nested(const Formula& f, const std::string& var) {
    std::vector<Item> local = conjuncts(f);
    active_.erase(var);
    ParsedNode n = build(var, local);
    active_.insert(var);
    require_all_used(local);
    return n;
  }

  std::set<std::string> active_;
};

bool match(const ParsedNode& p, const FolNode& shape, SymbolicQuery& out) {
  if (p.kind != shape.kind || p.children.size() != shape.children.size()) {
    return false;
  }
  switch (shape.kind) {
    case NodeKind::kAnchor:
      out.anchors[shape.slot] = p.anchor;
      return true;
    case NodeKind::kProjection:
      out.relations[shape.slot] = p.relation;
      return match(p.children[0], shape.children[0], out);
    case NodeKind::kNegation:
      return match(p.children[0], shape.children[0], out);
    case NodeKind::kIntersection:
    case NodeKind::kUnion: {
      std::vector<std::size_t> order(p.children.size());
      std::iota(order.begin(), order.end(), 0);
      do {
        SymbolicQuery trial = out;
        bool ok = true;
        for (std::size_t i = 0; i < order.size() && ok; ++i) {
          ok = match(p.children[order[i]], shape.children[i], trial);
        }
        if (ok) {
          out = std::move(trial);
          return true;
        }
      } while (std::next_permutation(order.begin(), order.end()));
      return false;
    }
  }
  return false;
}

// --- formatting ---

bool needs_quotes_term(std::string_view s) {
  if (s.empty() || is_single_lower(s)) return true;
  if (s.front() == ' ' || s.back() == ' ') return true;
  for (unsigned char c : s) {
    if (c < 0x20 || c == ',' || c == '(' || c == ')' || c == '"' || c == '\\') {
      return true;
    }
  }
  return false;
}

bool needs_quotes_relation(std::string_view s) {
  if (s.empty() || s.front() == ' ' || s.back() == ' ') return true;
  if (s.starts_with("!") || s.starts_with(kNot) || s.starts_with(kExists) ||
      s.starts_with("exists")) {
    return true;
  }
  for (unsigned char c : s) {
    if (c < 0x20 || c == ',' || c == '(' || c == ')' || c == '"' || c == '\\') {
      return true;
    }
  }
  return false;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

struct Piece {
  std::string text;
  bool is_union = false;
};

class Emitter {
 public:
  Emitter(const SymbolicQuery& q, const PatternInfo& info) : q_(q), info_(info) {
    assign(info.shape);
  }

  std::string run() {
    std::string out = "q =?";
    out.push_back(info_.answer_var);
    out += " : ";
    if (!info_.bound_vars.empty()) {
      out += std::string(kExists) + " ";
      for (std::size_t i = 0; i < info_.bound_vars.size(); ++i) {
        if (i > 0) out += ", ";
        out.push_back(info_.bound_vars[i]);
      }
      out += " : ";
    }
    auto pieces = emit(info_.shape, info_.answer_var, false);
    out += join(pieces, pieces.size() > 1);
    return out;
  }

 private:
  void assign(const FolNode& n) {
    for (const FolNode& c : n.children) assign(c);
    if (n.kind == NodeKind::kProjection &&
        n.children[0].kind != NodeKind::kAnchor) {
      vars_[&n.children[0]] = info_.bound_vars[next_++];
    }
  }

  static std::string join(const std::vector<Piece>& pieces, bool wrap_unions) {
    std::string out;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      if (i > 0) out += " " + std::string(kAnd) + " ";
      if (wrap_unions && pieces[i].is_union) {
        out += "(" + pieces[i].text + ")";
      } else {
        out += pieces[i].text;
      }
    }
    return out;
  }

  std::vector<Piece> emit(const FolNode& n, char var, bool negated) {
    std::vector<Piece> out;
    switch (n.kind) {
      case NodeKind::kAnchor:
        break;
      case NodeKind::kProjection: {
        const FolNode& child = n.children[0];
        std::string input;
        if (child.kind == NodeKind::kAnchor) {
          const std::string& name = q_.anchors[child.slot];
          input = needs_quotes_term(name) ? quote(name) : name;
        } else {
          char inner = vars_.at(&child);
          out = emit(child, inner, false);
          input = std::string(1, inner);
        }
        const SymbolicRelation& rel = q_.relations[n.slot];
        std::string atom = negated ? std::string(kNot) : std::string();
        atom += needs_quotes_relation(rel.name) ? quote(rel.name) : rel.name;
        std::string output(1, var);
        atom += rel.inverse ? "(" + output + ", " + input + ")"
                            : "(" + input + ", " + output + ")";
        out.push_back({atom, false});
        break;
      }
      case NodeKind::kIntersection:
        for (const FolNode& c : n.children) {
          auto sub = emit(c, var, false);
          out.insert(out.end(), sub.begin(), sub.end());
        }
        break;
      case NodeKind::kNegation:
        out = emit(n.children[0], var, true);
        break;
      case NodeKind::kUnion: {
        std::string text;
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          auto sub = emit(n.children[i], var, false);
          if (i > 0) text += " " + std::string(kOr) + " ";
          std::string part = join(sub, true);
          text += sub.size() > 1 ? "(" + part + ")" : part;
        }
        out.push_back({text, true});
        break;
      }
    }
    return out;
  }

  const SymbolicQuery& q_;
  const PatternInfo& info_;
  std::map<const FolNode*, char> vars_;
  std::size_t next_ = 0;
};

}  // namespace

SymbolicQuery parse_fol(std::string_view text) {
  ParsedText parsed = Parser(text).parse();
  classify_terms(parsed.formula, parsed.declared);

  std::vector<Item> items = conjuncts(parsed.formula);
  TreeBuilder builder;
  ParsedNode tree = builder.build(parsed.answer_var, items);
  TreeBuilder::require_all_used(items);

  for (const PatternInfo& info : pattern_catalog()) {
    SymbolicQuery q;
    q.pattern = info.tag;
    q.anchors.resize(info.slots.anchors);
    q.relations.resize(info.slots.relations);
    if (match(tree, info.shape, q)) return q;
  }
  unknown_shape("no catalogued pattern matches");
}

std::string format_fol(const SymbolicQuery& q) {
  const PatternInfo& info = pattern_info(q.pattern);
  if (static_cast<int>(q.anchors.size()) != info.slots.anchors ||
      static_cast<int>(q.relations.size()) != info.slots.relations) {
    throw Error(ErrorCode::kContract,
                "binding count mismatch for pattern " + std::string(info.name));
  }
  return Emitter(q, info).run();
}

SymbolicQuery placeholder_query(PatternTag pattern) {
  const PatternInfo& info = pattern_info(pattern);
  SymbolicQuery q;
  q.pattern = pattern;
  for (int i = 0; i < info.slots.anchors; ++i) {
    q.anchors.push_back(std::string(1, static_cast<char>('A' + i)));
  }
  for (int i = 0; i < info.slots.relations; ++i) {
    q.relations.push_back({"Rel_" + std::to_string(i + 1), false});
  }
  return q;
}

SymbolicQuery to_symbolic(const KnowledgeGraph& g, const FolQuery& q) {
  SymbolicQuery out;
  out.pattern = q.pattern;
  for (EntityId e : q.anchors) out.anchors.push_back(g.entity_name(e));
  for (RelationRef r : q.relations) {
    out.relations.push_back({g.relation_name(r.id), r.is_inverse()});
  }
  return out;
}

FolQuery resolve(const KnowledgeGraph& g, const SymbolicQuery& q) {
  std::vector<EntityId> anchors;
  for (const std::string& name : q.anchors) {
    auto e = g.find_entity(name);
    if (!e) throw Error(ErrorCode::kUnknownId, "unknown entity '" + name + "'");
    anchors.push_back(*e);
  }
  std::vector<RelationRef> relations;
  for (const SymbolicRelation& rel : q.relations) {
    auto r = g.find_relation(rel.name);
    if (!r) {
      throw Error(ErrorCode::kUnknownId, "unknown relation '" + rel.name + "'");
    }
    relations.push_back(
        {*r, rel.inverse ? Direction::kInverse : Direction::kForward});
  }
  return make_query(q.pattern, std::move(anchors), std::move(relations));
}

}  // namespace kgsynth
