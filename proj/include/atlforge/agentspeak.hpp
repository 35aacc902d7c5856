#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "atlforge/cgm.hpp"
#include "atlforge/model.hpp"

namespace atlforge {

struct GuardAtom {
  enum class Kind { Known, Possible };

  Kind kind = Kind::Known;
  std::string variable;  // lowercased
  std::string value;     // literal text: integer, `true` or `false`

  bool operator==(const GuardAtom&) const = default;
  std::string str() const;
};

// The textual content of one AgentSpeak plan.
struct Plan {
  std::string goal;
  std::vector<GuardAtom> guard;
  std::vector<std::string> body;
  std::optional<std::string> successor;

  bool operator==(const Plan&) const = default;
};

// Guard atoms for a belief: fixed variables, then known ones, then the
// possible values of each uncertain variable. Within each group variables
// are ordered by lowercased name and possible values ascend.
std::vector<GuardAtom> make_guard(const ModelSpec& spec, const BeliefState& belief);

// Order-insensitive identity of a guard, used to match beliefs to plans.
std::string guard_key(std::span<const GuardAtom> guard);

std::string format_guard(std::span<const GuardAtom> guard);

// Renders plans in the Jason layout:
//
//   +!goal:
//   <TAB>a(1) & poss(b(2)) & poss(b(3))
//   <TAB><-
//   <TAB>.drop_all_intentions; act1; act2; true.
//
// Plans are separated by a blank line. Throws Error on an empty body.
std::string emit(std::span<const Plan> plans);

// Reads text in the subset produced by emit. Throws ParseError with the
// offending line.
std::vector<Plan> load(std::string_view text);

}  // namespace atlforge
