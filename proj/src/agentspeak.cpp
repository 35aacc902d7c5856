#include "atlforge/agentspeak.hpp"

#include <algorithm>
#include <cctype>

#include "atlforge/error.hpp"

namespace atlforge {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Entry {
  std::string name;
  VarId var;
};

std::vector<Entry> sorted_by_name(const ModelSpec& spec, const auto& vars) {
  std::vector<Entry> out;
  for (const auto& [v, _] : vars) out.push_back({lower(spec.variables[v].name), v});
  std::stable_sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.name < b.name; });
  return out;
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  bool done() {
    skip_space();
    return pos_ >= text_.size();
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, col_, msg); }

  void expect(std::string_view lit) {
    skip_space();
    if (text_.substr(pos_, lit.size()) != lit) fail("expected '" + std::string(lit) + "'");
    advance(lit.size());
  }

  bool accept(std::string_view lit) {
    skip_space();
    if (text_.substr(pos_, lit.size()) != lit) return false;
    advance(lit.size());
    return true;
  }

  bool peek(std::string_view lit) {
    skip_space();
    return text_.substr(pos_, lit.size()) == lit;
  }

  std::string word() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      advance(1);
    if (start == pos_) fail("expected an identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string literal() {
    skip_space();
    std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') advance(1);
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) advance(1);
    std::string lit(text_.substr(start, pos_ - start));
    bool numeric = !lit.empty() && std::all_of(lit.begin() + (lit[0] == '-'), lit.end(), ::isdigit) &&
                   lit.size() > static_cast<std::size_t>(lit[0] == '-');
    if (lit != "true" && lit != "false" && !numeric) fail("expected an integer or boolean literal");
    return lit;
  }

 private:
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i, ++pos_) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
    }
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance(1);
      } else if (c == '/' && pos_ + 1 < text_.size() && (text_[pos_ + 1] == '/' || text_[pos_ + 1] == '*')) {
        fail("comments are not supported in plan files");
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

GuardAtom read_atom(Reader& r) {
  std::string name = r.word();
  r.expect("(");
  GuardAtom atom;
  if (name == "poss") {
    atom.kind = GuardAtom::Kind::Possible;
    atom.variable = r.word();
    r.expect("(");
    atom.value = r.literal();
    r.expect(")");
  } else {
    atom.variable = name;
    atom.value = r.literal();
  }
  r.expect(")");
  return atom;
}

}  // namespace

std::string GuardAtom::str() const {
  std::string inner = variable + "(" + value + ")";
  return kind == Kind::Known ? inner : "poss(" + inner + ")";
}

std::vector<GuardAtom> make_guard(const ModelSpec& spec, const BeliefState& belief) {
  std::vector<GuardAtom> out;
  auto text = [&](VarId v, int x) { return spec.format_value(v, x); };
  for (const auto& e : sorted_by_name(spec, belief.fixed))
    out.push_back({GuardAtom::Kind::Known, e.name, text(e.var, belief.fixed.at(e.var))});
  for (const auto& e : sorted_by_name(spec, belief.known))
    out.push_back({GuardAtom::Kind::Known, e.name, text(e.var, belief.known.at(e.var))});
  for (const auto& e : sorted_by_name(spec, belief.possible))
    for (int x : belief.possible.at(e.var)) out.push_back({GuardAtom::Kind::Possible, e.name, text(e.var, x)});
  return out;
}

std::string guard_key(std::span<const GuardAtom> guard) {
  std::vector<std::string> parts;
  parts.reserve(guard.size());
  for (const auto& a : guard) parts.push_back(a.str());
  std::sort(parts.begin(), parts.end());
  std::string key;
  for (const auto& p : parts) key += p + "&";
  return key;
}

std::string format_guard(std::span<const GuardAtom> guard) {
  if (guard.empty()) return "true";
  std::string out;
  for (std::size_t i = 0; i < guard.size(); ++i) out += (i ? " & " : "") + guard[i].str();
  return out;
}

std::string emit(std::span<const Plan> plans) {
  std::string out;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const Plan& p = plans[i];
    if (p.body.empty()) throw Error("cannot emit plan for goal '" + p.goal + "' with an empty body");
    if (i) out += '\n';
    out += "+!" + p.goal + ":\n\t" + format_guard(p.guard) + "\n\t<-\n\t.drop_all_intentions;";
    for (const auto& a : p.body) out += " " + a + ";";
    out += p.successor ? " !" + *p.successor + ".\n" : " true.\n";
  }
  return out;
}

std::vector<Plan> load(std::string_view text) {
  Reader r(text);
  std::vector<Plan> plans;
  while (!r.done()) {
    Plan p;
    r.expect("+!");
    p.goal = r.word();
    r.expect(":");
    if (!r.accept("true")) {
      do {
        p.guard.push_back(read_atom(r));
      } while (r.accept("&"));
    }
    r.expect("<-");
    r.expect(".drop_all_intentions");
    r.expect(";");
    while (true) {
      if (r.accept("!")) {
        p.successor = r.word();
        break;
      }
      std::string w = r.word();
      if (w == "true" && r.peek(".")) break;
      p.body.push_back(std::move(w));
      r.expect(";");
    }
    r.expect(".");
    if (p.body.empty()) r.fail("plan for goal '" + p.goal + "' has an empty body");
    plans.push_back(std::move(p));
  }
  return plans;
}

}  // namespace atlforge
