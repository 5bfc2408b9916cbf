// gnex: explicit multiparametric GNE solver front end.
//
// Commands: solve, eval, simulate, verify, make. Exit codes: 0 ok,
// 1 verification failure, 2 usage/input error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "gnex/dynamic_game.hpp"
#include "gnex/evaluator.hpp"
#include "gnex/io.hpp"
#include "gnex/verify.hpp"

namespace {

using namespace gnex;

Vector parse_vector(const std::string& s) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        vals.push_back(std::stod(tok));
    }
    Vector v(vals.size());
    for (size_t i = 0; i < vals.size(); ++i) v[i] = vals[i];
    return v;
}

std::string format_vector(const Vector& v) {
    std::ostringstream os;
    for (int i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", v[i]);
        os << buf;
    }
    return os.str();
}

// Two-agent duopoly with a shared capacity constraint and parameters in
// agent 1's cost and the constraint offset; the canonical small fixture.
GNEProblem running_example() {
    GNEProblem gp;
    gp.N = 2;
    gp.block_sizes = {1, 1};
    gp.Q = {(Matrix(2, 2) << 1, -1, -1, 0).finished(),
            (Matrix(2, 2) << 0, 1, 1, 2).finished()};
    gp.c = {Vector::Zero(2), Vector::Zero(2)};
    gp.F = {(Matrix(2, 2) << 0, 1, 0, 0).finished(), Matrix::Zero(2, 2)};
    gp.A = (Matrix(3, 2) << -1, -1, -1, 0, 0, -1).finished();
    gp.b = Vector::Zero(3);
    gp.S = (Matrix(3, 2) << 1, 0, 0, 0, 0, 0).finished();
    gp.p_box = Polyhedron::box(Vector::Constant(2, -10.0),
                               Vector::Constant(2, 10.0), {"p_c", "p_1"});
    gp.x_min = Vector::Zero(2);
    gp.x_max = Vector::Constant(2, 10.0);
    return gp;
}

void print_count_row(const ExplicitGNESolution& sol) {
    const auto& d = sol.diagnostics;
    std::printf(
        "unique=%d inf-many=%d vgne=%d min-norm=%d welfare=%d total=%d\n",
        d.unique_count, d.infinite_count, d.vgne_count, d.minnorm_count,
        d.welfare_count, d.total_count(sol.selection));
}

int cmd_solve(const std::string& problem_path, const std::string& selection,
              double tol_rank, double tol_region, const std::string& out,
              const std::string& dump_maps, int threads) {
    ProblemFile pf = load_problem(problem_path);
    if (!selection.empty()) pf.selection = selection_from_string(selection);
    if (tol_rank > 0) pf.options.rank_rel_tol = tol_rank;
    if (tol_region > 0) {
        pf.options.full_dim_eps = tol_region;
        pf.options.mpqp.full_dim_eps = tol_region;
    }
    if (threads >= 0) pf.options.threads = threads;

    ExplicitGNESolution sol = solve_gnep(pf.gnep, pf.selection, pf.options);
    print_count_row(sol);
    for (const auto& msg : sol.diagnostics.failures)
        std::fprintf(stderr, "note: %s\n", msg.c_str());
    if (!out.empty()) save_solution(out, sol);
    if (!dump_maps.empty()) {
        std::ofstream f(dump_maps);
        if (!f) throw GnexError("cannot write " + dump_maps);
        f << agent_maps_to_json(best_responses(pf.gnep, pf.options)).dump(2)
          << "\n";
    }
    return 0;
}

int cmd_eval(const std::string& solution_path, const std::string& p_str,
             const std::string& batch, const std::string& out) {
    ExplicitGNESolution sol = load_solution(solution_path);
    std::vector<Vector> ps;
    if (!p_str.empty()) {
        ps.push_back(parse_vector(p_str));
    } else if (!batch.empty()) {
        std::ifstream f(batch);
        if (!f) throw GnexError("cannot open " + batch);
        std::string line;
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            ps.push_back(parse_vector(line));
        }
    } else {
        throw GnexError("eval: provide --p or --batch");
    }

    std::ostream* os = &std::cout;
    std::ofstream fout;
    if (!out.empty()) {
        fout.open(out);
        if (!fout) throw GnexError("cannot write " + out);
        os = &fout;
    }
    for (const auto& p : ps) {
        EvaluateResult res = evaluate(sol, p);
        *os << format_vector(res.x) << ",region=" << res.region_index;
        if (res.subregion_index >= 0)
            *os << ",subregion=" << res.subregion_index;
        if (res.y2.size() > 0) *os << ",y2=" << format_vector(res.y2);
        *os << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& game_path, const std::string& solution_path,
                 const std::string& x0_str, const std::string& u_prev_str,
                 const std::string& p_fixed_str, int steps,
                 const std::string& out) {
    ProblemFile pf = load_problem(game_path);
    if (pf.kind != "dynamic_game")
        throw GnexError("simulate: problem file must be a dynamic game");
    ExplicitGNESolution sol = load_solution(solution_path);

    Vector x0 = parse_vector(x0_str);
    Vector u_prev = u_prev_str.empty() ? Vector::Zero(pf.game.m_total())
                                       : parse_vector(u_prev_str);
    Vector p_fixed = p_fixed_str.empty() ? Vector::Zero(pf.game.n_p)
                                         : parse_vector(p_fixed_str);

    Trajectory traj =
        simulate_closed_loop(pf.game, sol, x0, u_prev, p_fixed, steps);
    const Vector totals = traj.stage_costs.colwise().sum();
    std::printf("steps=%d final_state=%s cost_totals=%s\n", steps,
                format_vector(traj.states.row(steps)).c_str(),
                format_vector(totals).c_str());
    if (!out.empty()) write_trajectory_csv(out, traj);
    return 0;
}

int cmd_verify(const std::string& problem_path, const std::string& solution_path,
               int samples, bool check_invalid) {
    ProblemFile pf = load_problem(problem_path);
    ExplicitGNESolution sol = load_solution(solution_path);
    VerifyOptions vo;
    if (samples > 0) {
        vo.residual_samples = samples;
        vo.coverage_samples = samples;
    }
    vo.check_invalid_combinations = check_invalid;
    vo.gne = pf.options;
    VerifyReport rep = verify_solution(pf.gnep, sol, vo);
    for (const auto& c : rep.checks)
        std::printf("%s %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
    return rep.all_passed() ? 0 : 1;
}

int cmd_make(const std::string& name, const std::string& out) {
    ProblemFile pf;
    if (name == "running-example") {
        pf.kind = "gnep";
        pf.gnep = running_example();
    } else if (name == "battery") {
        pf.kind = "dynamic_game";
        pf.game = battery_game();
        pf.options = battery_options();
    } else if (name == "two-mass") {
        pf.kind = "dynamic_game";
        pf.game = two_mass_game();
        pf.options = two_mass_options();
    } else {
        throw GnexError("make: unknown game '" + name +
                        "' (running-example, battery, two-mass)");
    }
    save_problem(out, pf);
    std::printf("wrote %s\n", out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"explicit multiparametric GNE solver"};
    app.require_subcommand(1);

    std::string problem_path, solution_path, out, selection, dump_maps;
    std::string p_str, batch, x0_str, u_prev_str, p_fixed_str, make_name;
    double tol_rank = -1, tol_region = -1;
    int steps = 50, samples = -1, threads = -1;
    bool check_invalid = false;

    auto* solve = app.add_subcommand("solve", "compute the explicit solution");
    solve->add_option("problem", problem_path)->required();
    solve->add_option("--selection", selection,
                      "none|min-norm|welfare|vgne (overrides the file)");
    solve->add_option("--tol-rank", tol_rank, "relative SVD rank tolerance");
    solve->add_option("--tol-region", tol_region,
                      "full-dimensionality threshold");
    solve->add_option("--threads", threads, "worker threads (0: env/default)");
    solve->add_option("--out", out, "solution file to write");
    solve->add_option("--dump-agent-maps", dump_maps,
                      "write per-agent best-response maps as JSON");

    auto* eval = app.add_subcommand("eval", "evaluate an explicit law");
    eval->add_option("solution", solution_path)->required();
    eval->add_option("--p", p_str, "comma-separated parameter vector");
    eval->add_option("--batch", batch, "CSV of parameter rows");
    eval->add_option("--out", out, "output CSV (default stdout)");

    auto* sim = app.add_subcommand("simulate", "closed-loop rollout");
    sim->add_option("game", problem_path)->required();
    sim->add_option("solution", solution_path)->required();
    sim->add_option("--x0", x0_str, "initial state")->required();
    sim->add_option("--u-prev", u_prev_str, "initial previous input");
    sim->add_option("--p-fixed", p_fixed_str,
                    "non-state parameter entries (references, prices, caps)");
    sim->add_option("--steps", steps, "simulation steps");
    sim->add_option("--out", out, "trajectory CSV");

    auto* verify = app.add_subcommand("verify", "run the invariant suites");
    verify->add_option("problem", problem_path)->required();
    verify->add_option("solution", solution_path)->required();
    verify->add_option("--samples", samples, "samples per region");
    verify->add_flag("--check-invalid", check_invalid,
                     "also test discarded combinations (small games only)");

    auto* make = app.add_subcommand("make", "emit a builtin problem file");
    make->add_option("name", make_name, "running-example|battery|two-mass")
        ->required();
    make->add_option("--out", out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return cmd_solve(problem_path, selection, tol_rank, tol_region, out,
                             dump_maps, threads);
        if (eval->parsed()) return cmd_eval(solution_path, p_str, batch, out);
        if (sim->parsed())
            return cmd_simulate(problem_path, solution_path, x0_str, u_prev_str,
                                p_fixed_str, steps, out);
        if (verify->parsed())
            return cmd_verify(problem_path, solution_path, samples,
                              check_invalid);
        if (make->parsed()) return cmd_make(make_name, out);
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
