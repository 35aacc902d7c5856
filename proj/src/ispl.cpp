#include "atlforge/ispl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "atlforge/error.hpp"

namespace atlforge {
namespace {

enum class Tok { Ident, Int, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int value = 0;
  int line = 1;
  int col = 1;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      t.kind = Tok::Int;
      t.text = std::string(src.substr(i, j - i));
      if (t.text.size() > 9) throw ParseError(line, col, "integer literal too large");
      t.value = std::stoi(t.text);
      advance(j - i);
    } else {
      t.kind = Tok::Punct;
      for (std::string_view p : {"..", "<=", ">=", "!="}) {
        if (src.substr(i, 2) == p) t.text = p;
      }
      if (t.text.empty()) {
        if (std::string_view(".:;,(){}=!<>+-").find(c) == std::string_view::npos) {
          throw ParseError(line, col, std::string("unexpected character '") + c + "'");
        }
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.col = col;
  out.push_back(end);
  return out;
}

// Evaluation-section conditions see every variable, qualified or unique.
constexpr AgentId kGlobalScope = -2;

enum class Type { Int, Bool };

struct Typed {
  Expr expr;
  Type type;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, ModelSpec& spec) : toks_(std::move(tokens)), spec_(spec) {}

  void parse_model();
  Formula parse_single_formula();

 private:
  struct PendingAgent {
    AgentId owner = kEnvironment;
    std::size_t protocol = 0;   // token index after `Protocol:`, 0 when absent
    std::size_t evolution = 0;  // token index after `Evolution:`, 0 when absent
  };

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at(std::string_view text) const { return peek().kind != Tok::End && peek().text == text; }
  bool accept(std::string_view text) {
    if (!at(text)) return false;
    next();
    return true;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(t.line, t.col, msg); }
  void expect(std::string_view text) {
    if (!accept(text)) fail(peek(), "expected '" + std::string(text) + "' but found " + describe(peek()));
  }
  std::string expect_ident() {
    if (peek().kind != Tok::Ident) fail(peek(), "expected identifier but found " + describe(peek()));
    return next().text;
  }
  static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of input" : "'" + t.text + "'"; }

  PendingAgent parse_agent_block(bool environment);
  void parse_vars(AgentId owner);
  Domain parse_domain();
  int parse_signed_int();
  std::size_t skip_section(std::string_view section);
  void parse_protocol(AgentDecl& agent, AgentId owner);
  std::vector<EvolutionRule> parse_evolution(AgentId owner);
  void parse_evaluation();
  void parse_groups();
  void parse_formulae();

  Typed parse_or(AgentId scope);
  Typed parse_and(AgentId scope);
  Typed parse_not(AgentId scope);
  Typed parse_comparison(AgentId scope);
  Typed parse_additive(AgentId scope);
  Typed parse_unary_minus(AgentId scope);
  Typed parse_primary(AgentId scope);
  Expr parse_condition(AgentId scope);
  Expr expect_type(Typed t, Type want, const Token& where) const;
  VarId resolve_reference(AgentId scope, const Token& at_token, const std::string& owner, const std::string& name) const;

  Formula parse_formula_or();
  Formula parse_formula_and();
  Formula parse_formula_unary();
  Formula parse_formula_primary();

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  ModelSpec& spec_;
  bool actions_allowed_ = false;
};

void Parser::parse_model() {
  std::vector<PendingAgent> pending;
  bool seen_environment = false;
  while (at("Agent")) {
    next();
    if (at("Environment")) {
      if (seen_environment) fail(peek(), "duplicate declaration of agent 'Environment'");
      if (!spec_.agents.empty()) fail(peek(), "Agent Environment must be declared before other agents");
      seen_environment = true;
      pending.push_back(parse_agent_block(true));
    } else {
      pending.push_back(parse_agent_block(false));
    }
  }
  if (spec_.agents.empty()) fail(peek(), "model declares no agents besides Environment");
  const std::size_t resume = pos_;

  // Rule bodies can mention agents declared further down, so they are parsed
  // once every declaration is known.
  actions_allowed_ = true;
  for (const auto& p : pending) {
    if (p.owner == kEnvironment) {
      if (p.evolution) {
        pos_ = p.evolution;
        spec_.env_evolution = parse_evolution(kEnvironment);
      }
      continue;
    }
    auto& agent = spec_.agents[p.owner];
    if (p.protocol) {
      actions_allowed_ = false;
      pos_ = p.protocol;
      parse_protocol(agent, p.owner);
      actions_allowed_ = true;
    }
    if (p.evolution) {
      pos_ = p.evolution;
      agent.evolution = parse_evolution(p.owner);
    }
  }
  actions_allowed_ = false;
  pos_ = resume;

  if (!accept("Evaluation")) fail(peek(), "expected 'Evaluation' section but found " + describe(peek()));
  parse_evaluation();
  if (accept("Groups")) parse_groups();
  if (!accept("Formulae")) fail(peek(), "empty Formulae: missing Formulae section");
  parse_formulae();
  if (peek().kind != Tok::End) fail(peek(), "unexpected " + describe(peek()) + " after Formulae section");
}

Parser::PendingAgent Parser::parse_agent_block(bool environment) {
  PendingAgent p;
  if (environment) {
    next();
    p.owner = kEnvironment;
  } else {
    const Token& name_tok = peek();
    std::string name = expect_ident();
    if (name == "Environment" || spec_.find_agent(name)) {
      fail(name_tok, "duplicate declaration of agent '" + name + "'");
    }
    p.owner = static_cast<AgentId>(spec_.agents.size());
    spec_.agents.push_back(AgentDecl{name, {}, {}, std::nullopt, {}});
  }
  bool seen_vars = false, seen_actions = false;
  while (!at("end")) {
    const Token& section = peek();
    if (accept("Vars")) {
      if (seen_vars) fail(section, "duplicate Vars section");
      seen_vars = true;
      expect(":");
      parse_vars(p.owner);
    } else if (accept("Actions")) {
      if (environment) fail(section, "Environment must not declare Actions");
      if (seen_actions) fail(section, "duplicate Actions section");
      seen_actions = true;
      expect("=");
      expect("{");
      auto& agent = spec_.agents[p.owner];
      do {
        const Token& a = peek();
        std::string action = expect_ident();
        if (agent.find_action(action)) fail(a, "duplicate declaration of action '" + action + "'");
        agent.actions.push_back(action);
      } while (accept(","));
      expect("}");
      expect(";");
    } else if (accept("Protocol")) {
      if (environment) fail(section, "Environment must not declare a Protocol");
      if (p.protocol) fail(section, "duplicate Protocol section");
      expect(":");
      p.protocol = skip_section("Protocol");
    } else if (accept("Evolution")) {
      if (p.evolution) fail(section, "duplicate Evolution section");
      expect(":");
      p.evolution = skip_section("Evolution");
    } else {
      fail(section, "unsupported section " + describe(section) + " in agent declaration");
    }
  }
  expect("end");
  expect("Agent");
  if (!environment && spec_.agents[p.owner].actions.empty()) {
    fail(peek(), "agent '" + spec_.agents[p.owner].name + "' declares no actions");
  }
  return p;
}

void Parser::parse_vars(AgentId owner) {
  while (!at("end")) {
    const Token& name_tok = peek();
    std::string name = expect_ident();
    if (spec_.find_var(owner, name)) fail(name_tok, "duplicate declaration of variable '" + name + "'");
    expect(":");
    Domain d = parse_domain();
    expect(";");
    VarId id = static_cast<VarId>(spec_.variables.size());
    spec_.variables.push_back(VarDecl{name, d, owner});
    if (owner != kEnvironment) spec_.agents[owner].locals.push_back(id);
  }
  expect("end");
  expect("Vars");
}

int Parser::parse_signed_int() {
  bool neg = accept("-");
  if (peek().kind != Tok::Int) fail(peek(), "expected integer but found " + describe(peek()));
  int v = next().value;
  return neg ? -v : v;
}

Domain Parser::parse_domain() {
  const Token& start = peek();
  if (accept("boolean")) return Domain{true, 0, 1};
  Domain d;
  d.lo = parse_signed_int();
  expect("..");
  d.hi = parse_signed_int();
  if (d.lo > d.hi) fail(start, "range error: lower bound " + std::to_string(d.lo) + " exceeds upper bound " + std::to_string(d.hi));
  if (d.lo == d.hi) fail(start, "range error: singleton domain " + std::to_string(d.lo) + ".." + std::to_string(d.hi));
  return d;
}

std::size_t Parser::skip_section(std::string_view section) {
  const std::size_t start = pos_;
  while (!(at("end") && peek(1).text == section)) {
    if (peek().kind == Tok::End) fail(peek(), "missing 'end " + std::string(section) + "'");
    next();
  }
  next();
  next();
  return start;
}

void Parser::parse_protocol(AgentDecl& agent, AgentId owner) {
  std::vector<ProtocolRule> rules;
  bool seen_other = false;
  while (!at("end")) {
    ProtocolRule rule;
    const Token& start = peek();
    if (accept("Other")) {
      if (seen_other) fail(start, "duplicate Other rule");
      seen_other = true;
    } else {
      rule.condition = parse_condition(owner);
    }
    expect(":");
    expect("{");
    do {
      const Token& a = peek();
      std::string action = expect_ident();
      auto id = agent.find_action(action);
      if (!id) fail(a, "undeclared action '" + action + "' for agent '" + agent.name + "'");
      if (std::find(rule.actions.begin(), rule.actions.end(), *id) == rule.actions.end()) rule.actions.push_back(*id);
    } while (accept(","));
    expect("}");
    expect(";");
    rules.push_back(std::move(rule));
  }
  agent.protocol = std::move(rules);
}

std::vector<EvolutionRule> Parser::parse_evolution(AgentId owner) {
  std::vector<EvolutionRule> rules;
  while (!at("end")) {
    EvolutionRule rule;
    do {
      const Token& target_tok = peek();
      std::string target = expect_ident();
      auto id = spec_.find_var(owner, target);
      if (!id) {
        fail(target_tok, "undeclared identifier '" + target + "': assignment target must be a variable of " + spec_.owner_name(owner));
      }
      const Token& eq = peek();
      expect("=");
      Typed value = parse_additive(owner);
      Type want = spec_.variables[*id].domain.boolean ? Type::Bool : Type::Int;
      rule.assignments.push_back(Assignment{*id, expect_type(std::move(value), want, eq)});
    } while (accept("and"));
    expect("if");
    rule.condition = parse_condition(owner);
    expect(";");
    rules.push_back(std::move(rule));
  }
  return rules;
}

void Parser::parse_evaluation() {
  while (!at("end")) {
    const Token& name_tok = peek();
    std::string name = expect_ident();
    if (spec_.find_proposition(name)) fail(name_tok, "duplicate declaration of proposition '" + name + "'");
    expect("if");
    Expr cond = parse_condition(kGlobalScope);
    expect(";");
    spec_.propositions.push_back(PropositionDef{name, std::move(cond)});
  }
  expect("end");
  expect("Evaluation");
}

void Parser::parse_groups() {
  while (!at("end")) {
    const Token& name_tok = peek();
    std::string name = expect_ident();
    if (spec_.find_group(name)) fail(name_tok, "duplicate declaration of group '" + name + "'");
    expect("=");
    expect("{");
    Group g{name, {}};
    do {
      const Token& m = peek();
      std::string member = expect_ident();
      auto id = spec_.find_agent(member);
      if (!id) fail(m, "undeclared agent '" + member + "' in group '" + name + "'");
      g.members.push_back(*id);
    } while (accept(","));
    expect("}");
    expect(";");
    std::sort(g.members.begin(), g.members.end());
    g.members.erase(std::unique(g.members.begin(), g.members.end()), g.members.end());
    spec_.groups.push_back(std::move(g));
  }
  expect("end");
  expect("Groups");
}

void Parser::parse_formulae() {
  while (!at("end")) {
    spec_.formulas.push_back(parse_formula_or());
    expect(";");
  }
  if (spec_.formulas.empty()) fail(peek(), "empty Formulae: at least one formula is required");
  expect("end");
  expect("Formulae");
}

Expr Parser::expect_type(Typed t, Type want, const Token& where) const {
  if (t.type != want) {
    fail(where, std::string("type mismatch: expected ") + (want == Type::Bool ? "boolean" : "integer") + " expression");
  }
  return std::move(t.expr);
}

Expr Parser::parse_condition(AgentId scope) {
  const Token& start = peek();
  return expect_type(parse_or(scope), Type::Bool, start);
}

Typed Parser::parse_or(AgentId scope) {
  const Token& start = peek();
  Typed lhs = parse_and(scope);
  while (at("or")) {
    const Token& op = next();
    Typed rhs = parse_and(scope);
    Expr l = expect_type(std::move(lhs), Type::Bool, start);
    Expr r = expect_type(std::move(rhs), Type::Bool, op);
    lhs = Typed{Expr::binary(Expr::Kind::Or, std::move(l), std::move(r)), Type::Bool};
  }
  return lhs;
}

Typed Parser::parse_and(AgentId scope) {
  const Token& start = peek();
  Typed lhs = parse_not(scope);
  while (at("and")) {
    const Token& op = next();
    Typed rhs = parse_not(scope);
    Expr l = expect_type(std::move(lhs), Type::Bool, start);
    Expr r = expect_type(std::move(rhs), Type::Bool, op);
    lhs = Typed{Expr::binary(Expr::Kind::And, std::move(l), std::move(r)), Type::Bool};
  }
  return lhs;
}

Typed Parser::parse_not(AgentId scope) {
  if (at("!")) {
    const Token& op = next();
    Typed inner = parse_not(scope);
    return Typed{Expr::unary(Expr::Kind::Not, expect_type(std::move(inner), Type::Bool, op)), Type::Bool};
  }
  return parse_comparison(scope);
}

Typed Parser::parse_comparison(AgentId scope) {
  // `Agent.Action = name` is a comparison against an action label, not a value.
  if (peek().kind == Tok::Ident && peek(1).text == "." && peek(2).text == "Action") {
    const Token& agent_tok = peek();
    if (!actions_allowed_) fail(agent_tok, "action tests are only allowed in Evolution rules");
    std::string agent_name = next().text;
    next();
    next();
    auto agent = spec_.find_agent(agent_name);
    if (!agent) fail(agent_tok, "undeclared agent '" + agent_name + "'");
    bool negated = false;
    if (accept("!=")) {
      negated = true;
    } else {
      expect("=");
    }
    const Token& action_tok = peek();
    std::string action = expect_ident();
    auto id = spec_.agents[*agent].find_action(action);
    if (!id) fail(action_tok, "undeclared action '" + action + "' for agent '" + agent_name + "'");
    Expr e = Expr::action_is(*agent, *id);
    if (negated) e = Expr::unary(Expr::Kind::Not, std::move(e));
    return Typed{std::move(e), Type::Bool};
  }
  const Token& start = peek();
  Typed lhs = parse_additive(scope);
  static const std::pair<std::string_view, Expr::Kind> ops[] = {
      {"=", Expr::Kind::Eq},  {"!=", Expr::Kind::Ne}, {"<", Expr::Kind::Lt},
      {"<=", Expr::Kind::Le}, {">", Expr::Kind::Gt},  {">=", Expr::Kind::Ge},
  };
  for (const auto& [text, kind] : ops) {
    if (!at(text)) continue;
    const Token& op = next();
    Typed rhs = parse_additive(scope);
    bool ordering = kind != Expr::Kind::Eq && kind != Expr::Kind::Ne;
    if (ordering) {
      Expr l = expect_type(std::move(lhs), Type::Int, start);
      Expr r = expect_type(std::move(rhs), Type::Int, op);
      return Typed{Expr::binary(kind, std::move(l), std::move(r)), Type::Bool};
    }
    if (lhs.type != rhs.type) fail(op, "type mismatch: comparison between boolean and integer");
    return Typed{Expr::binary(kind, std::move(lhs.expr), std::move(rhs.expr)), Type::Bool};
  }
  return lhs;
}

Typed Parser::parse_additive(AgentId scope) {
  const Token& start = peek();
  Typed lhs = parse_unary_minus(scope);
  while (at("+") || at("-")) {
    const Token& op = next();
    Expr::Kind kind = op.text == "+" ? Expr::Kind::Add : Expr::Kind::Sub;
    Typed rhs = parse_unary_minus(scope);
    Expr l = expect_type(std::move(lhs), Type::Int, start);
    Expr r = expect_type(std::move(rhs), Type::Int, op);
    lhs = Typed{Expr::binary(kind, std::move(l), std::move(r)), Type::Int};
  }
  return lhs;
}

Typed Parser::parse_unary_minus(AgentId scope) {
  if (at("-")) {
    const Token& op = next();
    Typed inner = parse_unary_minus(scope);
    Expr e = expect_type(std::move(inner), Type::Int, op);
    if (e.kind == Expr::Kind::IntLit) return Typed{Expr::literal(-e.value), Type::Int};
    return Typed{Expr::unary(Expr::Kind::Neg, std::move(e)), Type::Int};
  }
  return parse_primary(scope);
}

Typed Parser::parse_primary(AgentId scope) {
  const Token& t = peek();
  if (t.kind == Tok::Int) {
    next();
    return Typed{Expr::literal(t.value), Type::Int};
  }
  if (accept("(")) {
    Typed inner = parse_or(scope);
    expect(")");
    return inner;
  }
  if (t.kind != Tok::Ident) fail(t, "expected expression but found " + describe(t));
  if (t.text == "true" || t.text == "false") {
    next();
    return Typed{Expr::boolean(t.text == "true"), Type::Bool};
  }
  std::string first = next().text;
  std::string owner, name = first;
  if (accept(".")) {
    owner = first;
    name = expect_ident();
  }
  VarId id = resolve_reference(scope, t, owner, name);
  Type type = spec_.variables[id].domain.boolean ? Type::Bool : Type::Int;
  return Typed{Expr::var(id), type};
}

VarId Parser::resolve_reference(AgentId scope, const Token& at_token, const std::string& owner,
                                const std::string& name) const {
  std::string shown = owner.empty() ? name : owner + "." + name;
  if (!owner.empty()) {
    std::optional<VarId> id;
    if (owner == "Environment") {
      id = spec_.find_var(kEnvironment, name);
    } else if (auto agent = spec_.find_agent(owner)) {
      id = spec_.find_var(*agent, name);
    } else {
      fail(at_token, "undeclared agent '" + owner + "'");
    }
    if (!id) fail(at_token, "undeclared identifier '" + shown + "'");
    return *id;
  }
  if (scope != kGlobalScope) {
    if (auto id = spec_.find_var(scope, name)) return *id;
    fail(at_token, "undeclared identifier '" + name + "' in " + spec_.owner_name(scope));
  }
  std::optional<VarId> found;
  for (VarId i = 0; i < static_cast<VarId>(spec_.variables.size()); ++i) {
    if (spec_.variables[i].name != name) continue;
    if (found) fail(at_token, "ambiguous identifier '" + name + "'; qualify it with its owner");
    found = i;
  }
  if (!found) fail(at_token, "undeclared identifier '" + name + "'");
  return *found;
}

Formula Parser::parse_single_formula() {
  Formula f = parse_formula_or();
  accept(";");
  if (peek().kind != Tok::End) fail(peek(), "unexpected " + describe(peek()) + " after formula");
  return f;
}

Formula Parser::parse_formula_or() {
  Formula lhs = parse_formula_and();
  while (accept("or")) lhs = Formula::disjunction(std::move(lhs), parse_formula_and());
  return lhs;
}

Formula Parser::parse_formula_and() {
  Formula lhs = parse_formula_unary();
  while (accept("and")) lhs = Formula::conjunction(std::move(lhs), parse_formula_unary());
  return lhs;
}

Formula Parser::parse_formula_unary() {
  if (accept("!")) return Formula::negation(parse_formula_unary());
  return parse_formula_primary();
}

Formula Parser::parse_formula_primary() {
  const Token& t = peek();
  if (accept("(")) {
    Formula inner = parse_formula_or();
    expect(")");
    return inner;
  }
  if (accept("<")) {
    const Token& label_tok = peek();
    std::string label = expect_ident();
    std::vector<AgentId> coalition;
    if (const Group* g = spec_.find_group(label)) {
      coalition = g->members;
    } else if (auto agent = spec_.find_agent(label)) {
      coalition = {*agent};
    } else {
      fail(label_tok, "undeclared group '" + label + "'");
    }
    expect(">");
    const Token& op = peek();
    if (accept("(")) {
      Formula lhs = parse_formula_or();
      if (!accept("U")) fail(peek(), "expected 'U' in until formula but found " + describe(peek()));
      Formula rhs = parse_formula_or();
      expect(")");
      return Formula::temporal(Formula::Kind::U, label, coalition, {std::move(lhs), std::move(rhs)});
    }
    Formula::Kind kind;
    if (accept("X")) {
      kind = Formula::Kind::X;
    } else if (accept("F")) {
      kind = Formula::Kind::F;
    } else if (accept("G")) {
      kind = Formula::Kind::G;
    } else {
      fail(op, "expected temporal operator X, F, G or '(' after coalition but found " + describe(op));
    }
    expect("(");
    Formula arg = parse_formula_or();
    expect(")");
    return Formula::temporal(kind, label, coalition, {std::move(arg)});
  }
  if (t.kind != Tok::Ident) fail(t, "expected formula but found " + describe(t));
  if ((t.text == "X" || t.text == "F" || t.text == "G") && peek(1).text == "(") {
    fail(t, "temporal operator " + t.text + " requires a coalition prefix such as <group>");
  }
  next();
  if (!spec_.find_proposition(t.text)) fail(t, "undeclared proposition '" + t.text + "'");
  return Formula::atom(t.text);
}

// ---------------------------------------------------------------------------
// Pretty printing. Binary operators are always parenthesized so that the
// output re-parses to the same tree.

void print_expr_to(std::ostream& os, const ModelSpec& spec, const Expr& e) {
  using K = Expr::Kind;
  auto bin = [&](const char* op) {
    os << '(';
    print_expr_to(os, spec, e.args[0]);
    os << ' ' << op << ' ';
    print_expr_to(os, spec, e.args[1]);
    os << ')';
  };
  switch (e.kind) {
    case K::IntLit:
      if (e.value < 0) {
        os << "(-" << -static_cast<long>(e.value) << ')';
      } else {
        os << e.value;
      }
      break;
    case K::BoolLit: os << (e.value ? "true" : "false"); break;
    case K::Var: os << spec.qualified_name(e.value); break;
    case K::ActionIs:
      os << '(' << spec.agents.at(e.value).name << ".Action = " << spec.agents.at(e.value).actions.at(e.action) << ')';
      break;
    case K::Not:
      os << '!';
      print_expr_to(os, spec, e.args[0]);
      break;
    case K::Neg:
      os << "-(";
      print_expr_to(os, spec, e.args[0]);
      os << ')';
      break;
    case K::And: bin("and"); break;
    case K::Or: bin("or"); break;
    case K::Add: bin("+"); break;
    case K::Sub: bin("-"); break;
    case K::Eq: bin("="); break;
    case K::Ne: bin("!="); break;
    case K::Lt: bin("<"); break;
    case K::Le: bin("<="); break;
    case K::Gt: bin(">"); break;
    case K::Ge: bin(">="); break;
  }
}

void print_formula_to(std::ostream& os, const Formula& f) {
  using K = Formula::Kind;
  switch (f.kind) {
    case K::Atom: os << f.name; break;
    case K::Not:
      os << '!';
      print_formula_to(os, f.args[0]);
      break;
    case K::And:
    case K::Or:
      os << '(';
      print_formula_to(os, f.args[0]);
      os << (f.kind == K::And ? " and " : " or ");
      print_formula_to(os, f.args[1]);
      os << ')';
      break;
    case K::X:
    case K::F:
    case K::G:
      os << '<' << f.name << "> " << (f.kind == K::X ? 'X' : f.kind == K::F ? 'F' : 'G') << '(';
      print_formula_to(os, f.args[0]);
      os << ')';
      break;
    case K::U:
      os << '<' << f.name << ">(";
      print_formula_to(os, f.args[0]);
      os << " U ";
      print_formula_to(os, f.args[1]);
      os << ')';
      break;
  }
}

void print_domain(std::ostream& os, const Domain& d) {
  if (d.boolean) {
    os << "boolean";
  } else {
    os << d.lo << ".." << d.hi;
  }
}

void print_rules(std::ostream& os, const ModelSpec& spec, const std::vector<EvolutionRule>& rules) {
  os << "    Evolution:\n";
  for (const auto& r : rules) {
    os << "        ";
    for (std::size_t i = 0; i < r.assignments.size(); ++i) {
      if (i) os << " and ";
      os << spec.variables.at(r.assignments[i].target).name << " = ";
      print_expr_to(os, spec, r.assignments[i].value);
    }
    os << " if ";
    print_expr_to(os, spec, r.condition);
    os << ";\n";
  }
  os << "    end Evolution\n";
}

void print_vars(std::ostream& os, const ModelSpec& spec, AgentId owner) {
  os << "    Vars:\n";
  for (const auto& v : spec.variables) {
    if (v.owner != owner) continue;
    os << "        " << v.name << " : ";
    print_domain(os, v.domain);
    os << ";\n";
  }
  os << "    end Vars\n";
}

}  // namespace

ModelSpec parse_model(std::string_view text) {
  ModelSpec spec;
  Parser parser(tokenize(text), spec);
  parser.parse_model();
  return spec;
}

Formula parse_formula(std::string_view text, const ModelSpec& spec) {
  ModelSpec copy = spec;
  Parser parser(tokenize(text), copy);
  return parser.parse_single_formula();
}

std::string print_expr(const ModelSpec& spec, const Expr& e) {
  std::ostringstream os;
  print_expr_to(os, spec, e);
  return os.str();
}

std::string print_formula(const Formula& f) {
  std::ostringstream os;
  print_formula_to(os, f);
  return os.str();
}

std::string print_model(const ModelSpec& spec) {
  std::ostringstream os;
  os << "Agent Environment\n";
  print_vars(os, spec, kEnvironment);
  print_rules(os, spec, spec.env_evolution);
  os << "end Agent\n\n";
  for (AgentId a = 0; a < static_cast<AgentId>(spec.agents.size()); ++a) {
    const auto& agent = spec.agents[a];
    os << "Agent " << agent.name << "\n";
    print_vars(os, spec, a);
    os << "    Actions = {";
    for (std::size_t i = 0; i < agent.actions.size(); ++i) os << (i ? ", " : "") << agent.actions[i];
    os << "};\n";
    if (agent.protocol) {
      os << "    Protocol:\n";
      for (const auto& rule : *agent.protocol) {
        os << "        ";
        if (rule.condition) {
          print_expr_to(os, spec, *rule.condition);
        } else {
          os << "Other";
        }
        os << " : {";
        for (std::size_t i = 0; i < rule.actions.size(); ++i) os << (i ? ", " : "") << agent.actions.at(rule.actions[i]);
        os << "};\n";
      }
      os << "    end Protocol\n";
    }
    print_rules(os, spec, agent.evolution);
    os << "end Agent\n\n";
  }
  os << "Evaluation\n";
  for (const auto& p : spec.propositions) {
    os << "    " << p.name << " if ";
    print_expr_to(os, spec, p.condition);
    os << ";\n";
  }
  os << "end Evaluation\n\n";
  if (!spec.groups.empty()) {
    os << "Groups\n";
    for (const auto& g : spec.groups) {
      os << "    " << g.name << " = {";
      for (std::size_t i = 0; i < g.members.size(); ++i) os << (i ? ", " : "") << spec.agents.at(g.members[i]).name;
      os << "};\n";
    }
    os << "end Groups\n\n";
  }
  os << "Formulae\n";
  for (const auto& f : spec.formulas) {
    os << "    ";
    print_formula_to(os, f);
    os << ";\n";
  }
  os << "end Formulae\n";
  return os.str();
}

}  // namespace atlforge
