#pragma once

#include <string>

#include <json.hpp>

#include "gnex/dynamic_game.hpp"
#include "gnex/gne.hpp"

namespace gnex {

using Json = nlohmann::json;

// Matrices serialize as {"shape": [r, c], "data": row-major array}; vectors
// as plain arrays; polyhedra as {"C", "d", "vars"}.
Json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const Json& j);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);
Json polyhedron_to_json(const Polyhedron& P);
Polyhedron polyhedron_from_json(const Json& j);

Json gnep_to_json(const GNEProblem& gp);
GNEProblem gnep_from_json(const Json& j);
Json game_to_json(const DynamicGameSpec& spec);
DynamicGameSpec game_from_json(const Json& j);

struct ProblemFile {
    std::string kind;  // "gnep" or "dynamic_game"
    GNEProblem gnep;   // condensed at load for dynamic games
    DynamicGameSpec game;
    Selection selection = Selection::None;
    GneOptions options;
};

Selection selection_from_string(const std::string& s);
std::string selection_to_string(Selection sel);

ProblemFile load_problem(const std::string& path);
void save_problem(const std::string& path, const ProblemFile& pf);

Json solution_to_json(const ExplicitGNESolution& sol);
ExplicitGNESolution solution_from_json(const Json& j);
void save_solution(const std::string& path, const ExplicitGNESolution& sol);
ExplicitGNESolution load_solution(const std::string& path);

Json agent_maps_to_json(const std::vector<BestResponseMap>& maps);

void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace gnex
