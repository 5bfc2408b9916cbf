#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "gnex/dynamic_game.hpp"
#include "gnex/io.hpp"

using namespace gnex;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/gnex_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("io: matrix and vector round trip exactly") {
    Matrix M(2, 3);
    M << 1.0, -2.5, 1.0 / 3.0, 1e-17, 3.14159265358979, -0.0;
    Matrix M2 = matrix_from_json(matrix_to_json(M));
    CHECK((M - M2).lpNorm<Eigen::Infinity>() == 0.0);

    Vector v(4);
    v << -1.0, 2.0 / 7.0, 0.0, 123456789.123456789;
    Vector v2 = vector_from_json(vector_to_json(v));
    CHECK((v - v2).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("io: polyhedron round trip keeps normalized rows") {
    Polyhedron P((Matrix(2, 2) << 3, 4, -1, 2).finished(),
                 (Vector(2) << 5, 1).finished(), {"a", "b"});
    Polyhedron P2 = polyhedron_from_json(polyhedron_to_json(P));
    CHECK((P.C() - P2.C()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((P.d() - P2.d()).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(P2.var_labels() == std::vector<std::string>{"a", "b"});
    // serializing again is byte-identical
    CHECK(polyhedron_to_json(P).dump() == polyhedron_to_json(P2).dump());
}

TEST_CASE("io: problem file round trip") {
    TempFile tmp("problem.json");
    ProblemFile pf;
    pf.kind = "gnep";
    pf.gnep = duopoly_fixture();
    pf.selection = Selection::MinNorm;
    pf.options.threads = 2;
    pf.options.max_shared_active = 1;
    pf.options.one_sided_agent = 1;
    save_problem(tmp.path, pf);
    ProblemFile pf2 = load_problem(tmp.path);
    CHECK(pf2.kind == "gnep");
    CHECK(pf2.selection == Selection::MinNorm);
    CHECK(pf2.options.threads == 2);
    CHECK(pf2.options.max_shared_active == 1);
    CHECK(pf2.options.one_sided_agent == 1);
    CHECK(problem_fingerprint(pf2.gnep) == problem_fingerprint(pf.gnep));
}

TEST_CASE("io: dynamic game files are condensed at load") {
    TempFile tmp("game.json");
    ProblemFile pf;
    pf.kind = "dynamic_game";
    pf.game = two_mass_game();
    pf.options = two_mass_options();
    save_problem(tmp.path, pf);
    ProblemFile pf2 = load_problem(tmp.path);
    CHECK(pf2.kind == "dynamic_game");
    CHECK(pf2.gnep.N == 2);
    CHECK(pf2.gnep.n_x() == 20);
    CHECK(problem_fingerprint(pf2.gnep) ==
          problem_fingerprint(condense(pf.game)));
    CHECK(pf2.options.max_shared_active == 1);
}

TEST_CASE("io: solution file save/load/save is byte-identical") {
    GNEProblem gp = duopoly_fixture();
    ExplicitGNESolution sol = solve_gnep(gp, Selection::MinNorm);
    TempFile a("sol_a.json"), b("sol_b.json");
    save_solution(a.path, sol);
    ExplicitGNESolution sol2 = load_solution(a.path);
    save_solution(b.path, sol2);
    CHECK(slurp(a.path) == slurp(b.path));
    CHECK(sol2.problem_hash == sol.problem_hash);
    CHECK(sol2.selection == Selection::MinNorm);
    REQUIRE(sol2.regions.size() == sol.regions.size());
    for (size_t k = 0; k < sol.regions.size(); ++k) {
        CHECK((sol2.regions[k].law.G - sol.regions[k].law.G)
                  .lpNorm<Eigen::Infinity>() == 0.0);
        CHECK(sol2.regions[k].subregions.size() ==
              sol.regions[k].subregions.size());
    }
}

TEST_CASE("io: repeated solves serialize byte-identically") {
    GNEProblem gp = duopoly_fixture();
    TempFile a("det_a.json"), b("det_b.json");
    save_solution(a.path, solve_gnep(gp, Selection::Welfare));
    save_solution(b.path, solve_gnep(gp, Selection::Welfare));
    CHECK(slurp(a.path) == slurp(b.path));
}

TEST_CASE("io: thread count does not change the serialized solution") {
    GNEProblem gp = duopoly_fixture();
    GneOptions one, four;
    one.threads = 1;
    four.threads = 4;
    TempFile a("thr_a.json"), b("thr_b.json");
    save_solution(a.path, solve_gnep(gp, Selection::MinNorm, one));
    save_solution(b.path, solve_gnep(gp, Selection::MinNorm, four));
    CHECK(slurp(a.path) == slurp(b.path));
}

TEST_CASE("io: selection names") {
    CHECK(selection_from_string("none") == Selection::None);
    CHECK(selection_from_string("min-norm") == Selection::MinNorm);
    CHECK(selection_from_string("welfare") == Selection::Welfare);
    CHECK(selection_from_string("vgne") == Selection::Vgne);
    CHECK(selection_to_string(Selection::Vgne) == "vgne");
    CHECK_THROWS_AS(selection_from_string("bogus"), GnexError);
}
