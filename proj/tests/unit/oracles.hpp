#pragma once

// Reference implementations used as test oracles. They follow the textbook
// definitions directly (bounded minimax over explicit joint actions) and share
// no code with the checker beyond the Cgm queries.

#include <random>
#include <string>
#include <vector>

#include "atlforge/atl.hpp"
#include "atlforge/cgm.hpp"
#include "atlforge/model.hpp"

namespace oracle {

using atlforge::AgentId;
using atlforge::Cgm;
using atlforge::Formula;
using atlforge::StateId;

// Random explicit model: `states` states, two agents, 1..max_actions actions
// each, random nonempty protocols, propositions p and q.
Cgm random_model(std::mt19937& rng, std::size_t states, int max_actions);

// Random formula over atoms p, q with strategic operators for any coalition
// of the two agents (including the empty one).
Formula random_formula(std::mt19937& rng, int depth);

// [[f]] by memoized bounded minimax: a coalition wins a reachability game
// within |S| rounds iff it wins it at all, and a safety game for |S|+1 rounds
// iff it wins it forever.
std::vector<bool> satisfying(const Cgm& cgm, const Formula& f);

// Every play consistent with the strategy from `s` reaches the goal within
// `bound` steps, then (if there is a finishing move) that move lands in its target.
bool reach_sound(const Cgm& cgm, const atlforge::StrategyMap& st, StateId s, std::size_t bound);
// Every play consistent with the strategy from `s` stays inside `safe` for `bound` steps.
bool safety_sound(const Cgm& cgm, const atlforge::StrategyMap& st, const atlforge::StateSet& safe, StateId s,
                  std::size_t bound);

// Breadth-first search over joint actions of all agents: can the agents, all
// cooperating, reach a state satisfying `goal` and then take one joint action
// into `after`?
bool cooperative_reach_then_step(const Cgm& cgm, StateId start, const atlforge::StateSet& goal,
                                 const atlforge::StateSet& after);

// Can the other agents, all cooperating, pick moves so that `agent` playing
// `body` from `start` (each action enabled when played) ends inside `target`?
bool cooperative_body_reaches(const Cgm& cgm, StateId start, AgentId agent, const std::vector<atlforge::ActionId>& body,
                              const atlforge::StateSet& target);

// Product of (2^l - 1) over the domain sizes.
std::size_t belief_count(const std::vector<int>& domain_sizes);

std::string read_file(const std::string& path);
std::string source_path(const std::string& relative);

}  // namespace oracle
