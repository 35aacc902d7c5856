#include "atlforge/model.hpp"

#include <algorithm>
#include <charconv>

namespace atlforge {

std::optional<ActionId> AgentDecl::find_action(std::string_view action) const {
  auto it = std::find(actions.begin(), actions.end(), action);
  if (it == actions.end()) return std::nullopt;
  return static_cast<ActionId>(it - actions.begin());
}

std::vector<VarId> ModelSpec::environment_vars() const {
  std::vector<VarId> out;
  for (VarId i = 0; i < static_cast<VarId>(variables.size()); ++i)
    if (variables[i].owner == kEnvironment) out.push_back(i);
  return out;
}

std::optional<AgentId> ModelSpec::find_agent(std::string_view name) const {
  for (AgentId i = 0; i < static_cast<AgentId>(agents.size()); ++i)
    if (agents[i].name == name) return i;
  return std::nullopt;
}

std::optional<VarId> ModelSpec::find_var(AgentId owner, std::string_view name) const {
  for (VarId i = 0; i < static_cast<VarId>(variables.size()); ++i)
    if (variables[i].owner == owner && variables[i].name == name) return i;
  return std::nullopt;
}

std::optional<VarId> ModelSpec::resolve_var(std::string_view qualified) const {
  auto dot = qualified.find('.');
  if (dot != std::string_view::npos) {
    auto owner_text = qualified.substr(0, dot);
    auto name = qualified.substr(dot + 1);
    if (owner_text == "Environment") return find_var(kEnvironment, name);
    auto agent = find_agent(owner_text);
    if (!agent) return std::nullopt;
    return find_var(*agent, name);
  }
  std::optional<VarId> found;
  for (VarId i = 0; i < static_cast<VarId>(variables.size()); ++i) {
    if (variables[i].name != qualified) continue;
    if (found) return std::nullopt;  // ambiguous
    found = i;
  }
  return found;
}

const PropositionDef* ModelSpec::find_proposition(std::string_view name) const {
  for (const auto& p : propositions)
    if (p.name == name) return &p;
  return nullptr;
}

const Group* ModelSpec::find_group(std::string_view name) const {
  for (const auto& g : groups)
    if (g.name == name) return &g;
  return nullptr;
}

std::string ModelSpec::owner_name(AgentId owner) const {
  return owner == kEnvironment ? std::string("Environment") : agents.at(owner).name;
}

std::string ModelSpec::qualified_name(VarId id) const {
  const auto& v = variables.at(id);
  return owner_name(v.owner) + "." + v.name;
}

std::string ModelSpec::format_value(VarId id, int value) const {
  if (variables.at(id).domain.boolean) return value ? "true" : "false";
  return std::to_string(value);
}

std::optional<int> ModelSpec::parse_value(VarId id, std::string_view text) const {
  const auto& d = variables.at(id).domain;
  if (d.boolean) {
    if (text == "true") return 1;
    if (text == "false") return 0;
    return std::nullopt;
  }
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !d.contains(v)) return std::nullopt;
  return v;
}

}  // namespace atlforge
