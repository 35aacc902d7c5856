#pragma once

#include <string>
#include <string_view>

#include "atlforge/model.hpp"

namespace atlforge {

/// Parses the supported ISPL subset: `Agent Environment`, `Agent <name>`
/// blocks with Vars / Actions / Protocol / Evolution, then Evaluation,
/// Groups and Formulae. Lines starting with `--` are comments.
///
/// Throws ParseError (with line and column) on syntax errors, undeclared or
/// duplicate identifiers, type mismatches and an empty Formulae section.
ModelSpec parse_model(std::string_view text);

/// Parses one ATL formula against the atoms and groups declared in `spec`.
/// A coalition may name a group or a single agent.
Formula parse_formula(std::string_view text, const ModelSpec& spec);

std::string print_model(const ModelSpec& spec);
std::string print_formula(const Formula& f);
std::string print_expr(const ModelSpec& spec, const Expr& e);

}  // namespace atlforge
