#include "clinn/rule_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include <fmt/format.h>

namespace clinn {
namespace {

enum class Tok { kWord, kVar, kString, kLBrace, kRBrace, kLParen, kRParen, kComma, kColon,
                 kArrow, kEnd };

struct Token {
  Tok type;
  std::string text;
  int line;
  int column;
};

const char* Describe(Tok type) {
  switch (type) {
    case Tok::kWord: return "identifier";
    case Tok::kVar: return "variable";
    case Tok::kString: return "string";
    case Tok::kLBrace: return "'{'";
    case Tok::kRBrace: return "'}'";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kComma: return "','";
    case Tok::kColon: return "':'";
    case Tok::kArrow: return "'=>'";
    case Tok::kEnd: return "end of input";
  }
  return "token";
}

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void Fail(ErrorKind kind, int line, int column, const std::string& message,
                       std::string rule_id = {}, std::string variable = {}) {
  throw RuleParseError(kind, {line, column, message, ParseDiagnostic::Severity::kError},
                       std::move(rule_id), std::move(variable));
}

std::vector<Token> Lex(std::string_view text) {
  std::vector<Token> tokens;
  int line = 1;
  int column = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const int tok_line = line;
    const int tok_col = column;
    auto single = [&](Tok type) {
      tokens.push_back({type, std::string(1, c), tok_line, tok_col});
      advance(1);
    };
    switch (c) {
      case '{': single(Tok::kLBrace); continue;
      case '}': single(Tok::kRBrace); continue;
      case '(': single(Tok::kLParen); continue;
      case ')': single(Tok::kRParen); continue;
      case ',': single(Tok::kComma); continue;
      case ':': single(Tok::kColon); continue;
      default: break;
    }
    if (c == '=') {
      if (i + 1 < text.size() && text[i + 1] == '>') {
        tokens.push_back({Tok::kArrow, "=>", tok_line, tok_col});
        advance(2);
        continue;
      }
      Fail(ErrorKind::kSyntax, tok_line, tok_col, "expected '=>'");
    }
    if (c == '?') {
      advance(1);
      std::size_t start = i;
      while (i < text.size() && IsWordChar(text[i])) advance(1);
      std::string name(text.substr(start, i - start));
      if (!IsValidVariableName(name)) {
        Fail(ErrorKind::kSyntax, tok_line, tok_col, "invalid variable name '?" + name + "'");
      }
      tokens.push_back({Tok::kVar, std::move(name), tok_line, tok_col});
      continue;
    }
    if (c == '"') {
      advance(1);
      std::string value;
      while (true) {
        if (i >= text.size() || text[i] == '\n') {
          Fail(ErrorKind::kSyntax, tok_line, tok_col, "unterminated string");
        }
        if (text[i] == '"') {
          advance(1);
          break;
        }
        if (text[i] == '\\' && i + 1 < text.size()) advance(1);
        value += text[i];
        advance(1);
      }
      tokens.push_back({Tok::kString, std::move(value), tok_line, tok_col});
      continue;
    }
    if (IsWordChar(c)) {
      std::size_t start = i;
      while (i < text.size() && IsWordChar(text[i])) advance(1);
      tokens.push_back({Tok::kWord, std::string(text.substr(start, i - start)), tok_line, tok_col});
      continue;
    }
    Fail(ErrorKind::kSyntax, tok_line, tok_col, fmt::format("unexpected character '{}'", c));
  }
  tokens.push_back({Tok::kEnd, "", line, column});
  return tokens;
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const Ontology& ontology)
      : tokens_(std::move(tokens)), ontology_(ontology) {}

  RuleSet Parse(std::string source_name) {
    RuleSet set;
    set.source_name = std::move(source_name);
    std::set<std::string> ids;
    std::size_t order = 0;
    while (Peek().type != Tok::kEnd) {
      const Token& start = Peek();
      TransitionRule rule = ParseRule();
      if (!ids.insert(rule.id).second) {
        Fail(ErrorKind::kDuplicateRuleId, start.line, start.column,
             "duplicate rule id '" + rule.id + "'", rule.id);
      }
      rule.order_index = order++;
      (rule.kind == RuleKind::kBelief ? set.belief_rules : set.action_rules)
          .push_back(std::move(rule));
    }
    return set;
  }

 private:
  const Token& Peek() const { return tokens_[pos_]; }

  const Token& Expect(Tok type) {
    const Token& tok = tokens_[pos_];
    if (tok.type != type) {
      Fail(ErrorKind::kSyntax, tok.line, tok.column,
           fmt::format("expected {}, found {}{}", Describe(type), Describe(tok.type),
                       tok.text.empty() ? "" : " '" + tok.text + "'"));
    }
    ++pos_;
    return tok;
  }

  bool Accept(Tok type) {
    if (Peek().type != type) return false;
    ++pos_;
    return true;
  }

  std::string ExpectKeyword(std::initializer_list<const char*> options) {
    const Token& tok = Expect(Tok::kWord);
    std::string word = Lower(tok.text);
    for (const char* option : options) {
      if (word == option) return word;
    }
    std::vector<std::string> names;
    for (const char* option : options) names.push_back(fmt::format("'{}'", option));
    Fail(ErrorKind::kSyntax, tok.line, tok.column,
         fmt::format("expected {}, found '{}'", fmt::join(names, " or "), tok.text));
  }

  TransitionRule ParseRule() {
    TransitionRule rule;
    rule.source_line = Peek().line;
    ExpectKeyword({"rule"});
    rule.id = Expect(Tok::kWord).text;
    Expect(Tok::kColon);
    rule.kind = ExpectKeyword({"belief", "action"}) == "belief" ? RuleKind::kBelief
                                                              : RuleKind::kAction;
    Expect(Tok::kLBrace);
    bool has_db = false;
    while (!Accept(Tok::kArrow)) {
      const Token& head = Peek();
      std::string section = ExpectKeyword({"user", "belief", "prev_action", "db"});
      auto duplicate = [&] {
        Fail(ErrorKind::kSyntax, head.line, head.column,
             "duplicate section '" + section + "' in rule " + rule.id, rule.id);
      };
      Expect(Tok::kLBrace);
      if (section == "user") {
        if (rule.pre_user) duplicate();
        rule.pre_user = ParseActList();
      } else if (section == "belief") {
        if (rule.pre_belief) duplicate();
        rule.pre_belief = ParseFactList();
      } else if (section == "prev_action") {
        if (rule.pre_prev_action) duplicate();
        rule.pre_prev_action = ParseActList();
      } else {
        if (has_db) duplicate();
        has_db = true;
        rule.pre_db = ParseDbPredicate();
      }
      Expect(Tok::kRBrace);
    }
    Expect(Tok::kLBrace);
    if (rule.kind == RuleKind::kBelief) {
      rule.effect_belief = ParseFactList();
    } else {
      rule.effect_action = ParseActList();
    }
    Expect(Tok::kRBrace);
    Expect(Tok::kRBrace);
    CheckRangeRestriction(rule);
    return rule;
  }

  Term ParseTerm() {
    const Token& tok = Peek();
    if (tok.type == Tok::kVar) {
      ++pos_;
      return Variable{tok.text};
    }
    if (tok.type == Tok::kWord || tok.type == Tok::kString) {
      ++pos_;
      try {
        return Value::Parse(tok.text);
      } catch (const Error& e) {
        Fail(ErrorKind::kSyntax, tok.line, tok.column, e.what());
      }
    }
    Fail(ErrorKind::kSyntax, tok.line, tok.column,
         fmt::format("expected a value or variable, found {}", Describe(tok.type)));
  }

  std::string ParseSlot(bool with_value) {
    const Token& tok = Expect(Tok::kWord);
    std::string slot = Lower(tok.text);
    bool known = with_value ? ontology_.HasSlot(slot) : ontology_.HasActSlot(slot, false);
    if (!known) Fail(ErrorKind::kUnknownSlot, tok.line, tok.column, "unknown slot '" + slot + "'");
    return slot;
  }

  FactPattern ParseFact() {
    std::string slot = ParseSlot(true);
    Expect(Tok::kLParen);
    Term value = ParseTerm();
    Expect(Tok::kRParen);
    return FactPattern{std::move(slot), std::move(value)};
  }

  ActPattern ParseAct() {
    const Token& tok = Expect(Tok::kWord);
    ActPattern act;
    act.act = Lower(tok.text);
    if (!ontology_.HasAct(act.act)) {
      Fail(ErrorKind::kUnknownAct, tok.line, tok.column, "unknown act '" + act.act + "'");
    }
    Expect(Tok::kLParen);
    if (Peek().type == Tok::kWord) {
      bool with_value = tokens_[pos_ + 1].type == Tok::kLParen;
      act.slot = ParseSlot(with_value);
      if (Accept(Tok::kLParen)) {
        act.value = ParseTerm();
        Expect(Tok::kRParen);
      }
    }
    Expect(Tok::kRParen);
    return act;
  }

  std::vector<ActPattern> ParseActList() {
    std::vector<ActPattern> items;
    if (Peek().type == Tok::kRBrace) return items;
    do {
      items.push_back(ParseAct());
    } while (Accept(Tok::kComma));
    return items;
  }

  std::vector<FactPattern> ParseFactList() {
    std::vector<FactPattern> items;
    if (Peek().type == Tok::kRBrace) return items;
    do {
      items.push_back(ParseFact());
    } while (Accept(Tok::kComma));
    return items;
  }

  std::int64_t ParseInt() {
    const Token& tok = Expect(Tok::kWord);
    std::int64_t value = 0;
    auto [end, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
    if (ec != std::errc() || end != tok.text.data() + tok.text.size() || value < 0) {
      Fail(ErrorKind::kSyntax, tok.line, tok.column,
           "expected a non-negative integer, found '" + tok.text + "'");
    }
    return value;
  }

  DbPredicate ParseDbPredicate() {
    const Token& head = Peek();
    if (head.type == Tok::kRBrace) {
      Fail(ErrorKind::kSyntax, head.line, head.column,
           "db section needs exactly one predicate (between, eq or any)");
    }
    std::string name = ExpectKeyword({"between", "eq", "any"});
    if (name == "any") return DbPredicate::Any();
    Expect(Tok::kLParen);
    std::int64_t lo = ParseInt();
    if (name == "eq") {
      Expect(Tok::kRParen);
      return DbPredicate::Eq(lo);
    }
    Expect(Tok::kComma);
    std::int64_t hi = ParseInt();
    Expect(Tok::kRParen);
    if (lo > hi) {
      Fail(ErrorKind::kSyntax, head.line, head.column,
           fmt::format("between({},{}): lower bound exceeds upper bound", lo, hi));
    }
    return DbPredicate::Between(lo, hi);
  }

  void CheckRangeRestriction(const TransitionRule& rule) {
    std::vector<std::string> bound;
    if (rule.pre_user) for (const auto& p : *rule.pre_user) CollectVariables(p, bound);
    if (rule.pre_belief) for (const auto& p : *rule.pre_belief) CollectVariables(p, bound);
    if (rule.pre_prev_action) {
      for (const auto& p : *rule.pre_prev_action) CollectVariables(p, bound);
    }
    std::vector<std::string> used;
    for (const auto& p : rule.effect_belief) CollectVariables(p, used);
    for (const auto& p : rule.effect_action) CollectVariables(p, used);
    for (const auto& name : used) {
      if (std::find(bound.begin(), bound.end(), name) == bound.end()) {
        Fail(ErrorKind::kRangeRestriction, rule.source_line, 1,
             fmt::format("rule {}: effect variable ?{} is not bound by any precondition",
                         rule.id, name),
             rule.id, name);
      }
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const Ontology& ontology_;
};

template <typename Pattern>
std::string JoinItems(const std::vector<Pattern>& items) {
  std::vector<std::string> parts;
  for (const auto& item : items) parts.push_back(ToString(item));
  return fmt::format("{}", fmt::join(parts, ", "));
}

}  // namespace

std::string ToString(const ParseDiagnostic& diag) {
  return fmt::format("{}:{}: {}: {}", diag.line, diag.column,
                     diag.severity == ParseDiagnostic::Severity::kError ? "error" : "warning",
                     diag.message);
}

RuleParseError::RuleParseError(ErrorKind kind, ParseDiagnostic diag, std::string rule_id,
                               std::string variable)
    : Error(kind, ToString(diag)),
      diag_(std::move(diag)),
      rule_id_(std::move(rule_id)),
      variable_(std::move(variable)) {}

RuleSet ParseRules(std::string_view text, const Ontology& ontology, std::string source_name) {
  return Parser(Lex(text), ontology).Parse(std::move(source_name));
}

RuleSet LoadRules(const std::filesystem::path& path, const Ontology& ontology) {
  std::string text = ReadFile(path);
  try {
    return ParseRules(text, ontology, path.string());
  } catch (const RuleParseError& e) {
    throw RuleParseError(e.kind(),
                         {e.diagnostic().line, e.diagnostic().column,
                          path.string() + ": " + e.diagnostic().message,
                          e.diagnostic().severity},
                         e.rule_id(), e.variable());
  }
}

std::string SerializeRule(const TransitionRule& rule) {
  std::string out = fmt::format("rule {}: {} {{\n", rule.id, ToString(rule.kind));
  if (rule.pre_user) out += fmt::format("  user {{ {} }}\n", JoinItems(*rule.pre_user));
  if (rule.pre_belief) out += fmt::format("  belief {{ {} }}\n", JoinItems(*rule.pre_belief));
  if (rule.pre_prev_action) {
    out += fmt::format("  prev_action {{ {} }}\n", JoinItems(*rule.pre_prev_action));
  }
  if (rule.pre_db) out += fmt::format("  db {{ {} }}\n", ToString(*rule.pre_db));
  out += fmt::format("  => {{ {} }}\n}}\n", rule.kind == RuleKind::kBelief
                                                ? JoinItems(rule.effect_belief)
                                                : JoinItems(rule.effect_action));
  return out;
}

std::string SerializeRuleSet(const RuleSet& rules) {
  std::vector<const TransitionRule*> all;
  for (const auto& r : rules.belief_rules) all.push_back(&r);
  for (const auto& r : rules.action_rules) all.push_back(&r);
  std::stable_sort(all.begin(), all.end(), [](const auto* a, const auto* b) {
    return a->order_index < b->order_index;
  });
  std::string out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i > 0) out += "\n";
    out += SerializeRule(*all[i]);
  }
  return out;
}

}  // namespace clinn
