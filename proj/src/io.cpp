#include "gnex/io.hpp"

#include <fstream>

namespace gnex {

namespace {

Json affine_to_json(const AffineFunction& f) {
    return Json{{"G", matrix_to_json(f.G)}, {"g", vector_to_json(f.g)}};
}

AffineFunction affine_from_json(const Json& j) {
    return AffineFunction{matrix_from_json(j.at("G")),
                          vector_from_json(j.at("g"))};
}

Json subregions_to_json(
    const std::vector<std::pair<Polyhedron, AffineFunction>>& subs) {
    Json arr = Json::array();
    for (const auto& [poly, law] : subs)
        arr.push_back(Json{{"region", polyhedron_to_json(poly)},
                           {"law", affine_to_json(law)}});
    return arr;
}

std::vector<std::pair<Polyhedron, AffineFunction>> subregions_from_json(
    const Json& j) {
    std::vector<std::pair<Polyhedron, AffineFunction>> subs;
    for (const auto& e : j)
        subs.emplace_back(polyhedron_from_json(e.at("region")),
                          affine_from_json(e.at("law")));
    return subs;
}

Json constraint_to_json(const DynamicGameSpec::LinearConstraint& lc) {
    return Json{{"C", matrix_to_json(lc.C)},
                {"c", vector_to_json(lc.c)},
                {"S", matrix_to_json(lc.S)}};
}

DynamicGameSpec::LinearConstraint constraint_from_json(const Json& j) {
    DynamicGameSpec::LinearConstraint lc;
    lc.C = matrix_from_json(j.at("C"));
    lc.c = vector_from_json(j.at("c"));
    lc.S = matrix_from_json(j.at("S"));
    return lc;
}

Json options_to_json(const GneOptions& o) {
    Json j;
    j["rank_rel_tol"] = o.rank_rel_tol;
    j["full_dim_eps"] = o.full_dim_eps;
    j["fm_max_dim"] = o.fm_max_dim;
    j["fm_row_cap"] = o.fm_row_cap;
    j["vgne_zero_tol"] = o.vgne_zero_tol;
    j["threads"] = o.threads;
    j["max_shared_active"] = o.max_shared_active;
    j["one_sided_agent"] = o.one_sided_agent;
    j["mpqp"] = Json{{"full_dim_eps", o.mpqp.full_dim_eps},
                     {"candidate_budget", o.mpqp.candidate_budget},
                     {"coverage_samples", o.mpqp.coverage_samples},
                     {"check_coverage", o.mpqp.check_coverage},
                     {"reduce_regions", o.mpqp.reduce_regions},
                     {"seed", o.mpqp.seed}};
    if (o.welfare.user_supplied)
        j["welfare"] = Json{{"Qf", matrix_to_json(o.welfare.Qf)},
                            {"cf", vector_to_json(o.welfare.cf)},
                            {"Ff", matrix_to_json(o.welfare.Ff)}};
    return j;
}

GneOptions options_from_json(const Json& j) {
    GneOptions o;
    o.rank_rel_tol = j.value("rank_rel_tol", o.rank_rel_tol);
    o.full_dim_eps = j.value("full_dim_eps", o.full_dim_eps);
    o.fm_max_dim = j.value("fm_max_dim", o.fm_max_dim);
    o.fm_row_cap = j.value("fm_row_cap", o.fm_row_cap);
    o.vgne_zero_tol = j.value("vgne_zero_tol", o.vgne_zero_tol);
    o.threads = j.value("threads", o.threads);
    o.max_shared_active = j.value("max_shared_active", o.max_shared_active);
    o.one_sided_agent = j.value("one_sided_agent", o.one_sided_agent);
    if (j.contains("mpqp")) {
        const Json& m = j.at("mpqp");
        o.mpqp.full_dim_eps = m.value("full_dim_eps", o.mpqp.full_dim_eps);
        o.mpqp.candidate_budget =
            m.value("candidate_budget", o.mpqp.candidate_budget);
        o.mpqp.coverage_samples =
            m.value("coverage_samples", o.mpqp.coverage_samples);
        o.mpqp.check_coverage = m.value("check_coverage", o.mpqp.check_coverage);
        o.mpqp.reduce_regions = m.value("reduce_regions", o.mpqp.reduce_regions);
        o.mpqp.seed = m.value("seed", o.mpqp.seed);
    }
    if (j.contains("welfare")) {
        o.welfare.user_supplied = true;
        o.welfare.Qf = matrix_from_json(j.at("welfare").at("Qf"));
        o.welfare.cf = vector_from_json(j.at("welfare").at("cf"));
        o.welfare.Ff = matrix_from_json(j.at("welfare").at("Ff"));
    }
    return o;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GnexError("cannot open " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw GnexError(path + ": " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw GnexError("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace

Json matrix_to_json(const Matrix& M) {
    Json data = Json::array();
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j) data.push_back(M(i, j));
    return Json{{"shape", {M.rows(), M.cols()}}, {"data", data}};
}

Matrix matrix_from_json(const Json& j) {
    const auto& shape = j.at("shape");
    const int r = shape.at(0).get<int>(), c = shape.at(1).get<int>();
    const auto& data = j.at("data");
    if (static_cast<int>(data.size()) != r * c)
        throw GnexError("matrix: shape/data length mismatch");
    Matrix M(r, c);
    int k = 0;
    for (int i = 0; i < r; ++i)
        for (int jj = 0; jj < c; ++jj) M(i, jj) = data.at(k++).get<double>();
    return M;
}

Json vector_to_json(const Vector& v) {
    Json arr = Json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vector vector_from_json(const Json& j) {
    Vector v(j.size());
    for (size_t i = 0; i < j.size(); ++i) v[i] = j.at(i).get<double>();
    return v;
}

Json polyhedron_to_json(const Polyhedron& P) {
    Json C = Json::array();
    for (int i = 0; i < P.rows(); ++i)
        for (int j = 0; j < P.dim(); ++j) C.push_back(P.C()(i, j));
    return Json{{"C", C},
                {"d", vector_to_json(P.d())},
                {"vars", P.var_labels()}};
}

Polyhedron polyhedron_from_json(const Json& j) {
    std::vector<std::string> vars =
        j.at("vars").get<std::vector<std::string>>();
    Vector d = vector_from_json(j.at("d"));
    const int n = static_cast<int>(vars.size());
    const int m = static_cast<int>(d.size());
    const auto& data = j.at("C");
    if (static_cast<int>(data.size()) != m * n)
        throw GnexError("polyhedron: C length mismatch");
    Matrix C(m, n);
    int k = 0;
    for (int i = 0; i < m; ++i)
        for (int jj = 0; jj < n; ++jj) C(i, jj) = data.at(k++).get<double>();
    return Polyhedron::from_normalized(std::move(C), std::move(d),
                                       std::move(vars));
}

Json gnep_to_json(const GNEProblem& gp) {
    Json j;
    j["kind"] = "gnep";
    j["block_sizes"] = gp.block_sizes;
    Json Q = Json::array(), c = Json::array(), F = Json::array();
    for (int i = 0; i < gp.N; ++i) {
        Q.push_back(matrix_to_json(gp.Q[i]));
        c.push_back(vector_to_json(gp.c[i]));
        F.push_back(matrix_to_json(gp.F[i]));
    }
    j["Q"] = Q;
    j["c"] = c;
    j["F"] = F;
    j["A"] = matrix_to_json(gp.A);
    j["b"] = vector_to_json(gp.b);
    j["S"] = matrix_to_json(gp.S);
    j["p_box"] = polyhedron_to_json(gp.p_box);
    j["x_min"] = vector_to_json(gp.x_min);
    j["x_max"] = vector_to_json(gp.x_max);
    return j;
}

GNEProblem gnep_from_json(const Json& j) {
    GNEProblem gp;
    gp.block_sizes = j.at("block_sizes").get<std::vector<int>>();
    gp.N = static_cast<int>(gp.block_sizes.size());
    if (gp.N == 0) throw GnexError("gnep: empty agent list");
    for (const auto& e : j.at("Q")) gp.Q.push_back(matrix_from_json(e));
    for (const auto& e : j.at("c")) gp.c.push_back(vector_from_json(e));
    for (const auto& e : j.at("F")) gp.F.push_back(matrix_from_json(e));
    gp.A = matrix_from_json(j.at("A"));
    gp.b = vector_from_json(j.at("b"));
    gp.S = matrix_from_json(j.at("S"));
    gp.p_box = polyhedron_from_json(j.at("p_box"));
    gp.x_min = vector_from_json(j.at("x_min"));
    gp.x_max = vector_from_json(j.at("x_max"));
    gp.validate();
    return gp;
}

Json game_to_json(const DynamicGameSpec& spec) {
    Json j;
    j["kind"] = "dynamic_game";
    j["A"] = matrix_to_json(spec.A_dyn);
    Json B = Json::array();
    for (const auto& Bi : spec.B) B.push_back(matrix_to_json(Bi));
    j["B"] = B;
    j["W_d"] = matrix_to_json(spec.W_d);
    j["K"] = spec.K;
    Json agents = Json::array();
    for (const auto& ac : spec.agents)
        agents.push_back(Json{{"Qx", matrix_to_json(ac.Qx)},
                              {"R", matrix_to_json(ac.R)},
                              {"Fx", matrix_to_json(ac.Fx)},
                              {"Fu", matrix_to_json(ac.Fu)},
                              {"lx", vector_to_json(ac.lx)},
                              {"lu", vector_to_json(ac.lu)}});
    j["agents"] = agents;
    j["rate_cost"] = spec.rate_cost;
    Json local = Json::array();
    for (const auto& lc : spec.local_input) local.push_back(constraint_to_json(lc));
    j["local_input"] = local;
    j["coupled_input"] = constraint_to_json(spec.coupled_input);
    j["coupled_state"] = constraint_to_json(spec.coupled_state);
    j["state_constraint_steps"] = spec.state_constraint_steps;
    j["n_p"] = spec.n_p;
    j["state_param_idx"] = spec.state_param_idx;
    j["prev_input_param_idx"] = spec.prev_input_param_idx;
    j["p_labels"] = spec.p_labels;
    j["p_box"] = polyhedron_to_json(spec.p_box);
    j["u_min"] = vector_to_json(spec.u_min);
    j["u_max"] = vector_to_json(spec.u_max);
    return j;
}

DynamicGameSpec game_from_json(const Json& j) {
    DynamicGameSpec spec;
    spec.A_dyn = matrix_from_json(j.at("A"));
    for (const auto& e : j.at("B")) spec.B.push_back(matrix_from_json(e));
    spec.W_d = matrix_from_json(j.at("W_d"));
    spec.K = j.at("K").get<int>();
    for (const auto& e : j.at("agents")) {
        DynamicGameSpec::AgentCost ac;
        ac.Qx = matrix_from_json(e.at("Qx"));
        ac.R = matrix_from_json(e.at("R"));
        ac.Fx = matrix_from_json(e.at("Fx"));
        ac.Fu = matrix_from_json(e.at("Fu"));
        ac.lx = vector_from_json(e.at("lx"));
        ac.lu = vector_from_json(e.at("lu"));
        spec.agents.push_back(ac);
    }
    spec.rate_cost = j.at("rate_cost").get<bool>();
    for (const auto& e : j.at("local_input"))
        spec.local_input.push_back(constraint_from_json(e));
    spec.coupled_input = constraint_from_json(j.at("coupled_input"));
    spec.coupled_state = constraint_from_json(j.at("coupled_state"));
    spec.state_constraint_steps = j.at("state_constraint_steps").get<int>();
    spec.n_p = j.at("n_p").get<int>();
    spec.state_param_idx = j.at("state_param_idx").get<std::vector<int>>();
    spec.prev_input_param_idx =
        j.at("prev_input_param_idx").get<std::vector<int>>();
    spec.p_labels = j.at("p_labels").get<std::vector<std::string>>();
    spec.p_box = polyhedron_from_json(j.at("p_box"));
    spec.u_min = vector_from_json(j.at("u_min"));
    spec.u_max = vector_from_json(j.at("u_max"));
    spec.validate();
    return spec;
}

Selection selection_from_string(const std::string& s) {
    if (s == "none") return Selection::None;
    if (s == "min-norm") return Selection::MinNorm;
    if (s == "welfare") return Selection::Welfare;
    if (s == "vgne") return Selection::Vgne;
    throw GnexError("unknown selection rule: " + s);
}

std::string selection_to_string(Selection sel) {
    switch (sel) {
        case Selection::None: return "none";
        case Selection::MinNorm: return "min-norm";
        case Selection::Welfare: return "welfare";
        case Selection::Vgne: return "vgne";
    }
    return "none";
}

ProblemFile load_problem(const std::string& path) {
    const Json j = read_json_file(path);
    ProblemFile pf;
    pf.kind = j.value("kind", std::string());
    if (j.contains("selection"))
        pf.selection = selection_from_string(j.at("selection").get<std::string>());
    if (j.contains("options")) pf.options = options_from_json(j.at("options"));
    if (pf.kind == "gnep") {
        pf.gnep = gnep_from_json(j);
    } else if (pf.kind == "dynamic_game") {
        pf.game = game_from_json(j);
        pf.gnep = condense(pf.game);
    } else {
        throw GnexError(path + ": unknown problem kind '" + pf.kind + "'");
    }
    return pf;
}

void save_problem(const std::string& path, const ProblemFile& pf) {
    Json j;
    if (pf.kind == "gnep") {
        j = gnep_to_json(pf.gnep);
    } else if (pf.kind == "dynamic_game") {
        j = game_to_json(pf.game);
    } else {
        throw GnexError("save_problem: unknown kind '" + pf.kind + "'");
    }
    j["selection"] = selection_to_string(pf.selection);
    j["options"] = options_to_json(pf.options);
    write_json_file(path, j);
}

Json solution_to_json(const ExplicitGNESolution& sol) {
    Json j;
    j["format"] = "gnex-solution-1";
    j["problem_hash"] = sol.problem_hash;
    j["selection"] = selection_to_string(sol.selection);
    j["p_box"] = polyhedron_to_json(sol.p_box);

    const auto& d = sol.diagnostics;
    j["diagnostics"] = Json{{"combinations_total", d.combinations_total},
                            {"combinations_invalid", d.combinations_invalid},
                            {"combinations_inconsistent", d.combinations_inconsistent},
                            {"combinations_empty", d.combinations_empty},
                            {"unique_count", d.unique_count},
                            {"infinite_count", d.infinite_count},
                            {"vgne_count", d.vgne_count},
                            {"minnorm_count", d.minnorm_count},
                            {"welfare_count", d.welfare_count},
                            {"failures", d.failures}};

    Json regions = Json::array();
    for (const auto& er : sol.regions) {
        Json r;
        r["kind"] =
            er.kind == EquilibriumRegion::Kind::Unique ? "unique" : "infinite";
        r["combination"] = er.combination.region_indices;
        r["law"] = affine_to_json(er.law);
        r["has_region"] = er.has_region;
        if (er.has_region) r["region"] = polyhedron_to_json(er.region);
        if (er.kind == EquilibriumRegion::Kind::Infinite) {
            r["U1"] = matrix_to_json(er.U1);
            r["U2"] = matrix_to_json(er.U2);
            r["V1"] = matrix_to_json(er.V1);
            r["V2"] = matrix_to_json(er.V2);
            r["sigma1"] = vector_to_json(er.sigma1);
            r["Mx"] = matrix_to_json(er.Mx);
            r["Mp"] = matrix_to_json(er.Mp);
            r["M1"] = vector_to_json(er.M1);
            r["lifted"] = polyhedron_to_json(er.lifted);
            r["y2_dim"] = er.y2_dim;
            r["subregions"] = subregions_to_json(er.subregions);
            r["residual_subregions"] = subregions_to_json(er.residual_subregions);
        }
        regions.push_back(r);
    }
    j["regions"] = regions;
    return j;
}

ExplicitGNESolution solution_from_json(const Json& j) {
    ExplicitGNESolution sol;
    sol.problem_hash = j.at("problem_hash").get<std::string>();
    sol.selection = selection_from_string(j.at("selection").get<std::string>());
    sol.p_box = polyhedron_from_json(j.at("p_box"));

    const Json& d = j.at("diagnostics");
    auto& dg = sol.diagnostics;
    dg.combinations_total = d.at("combinations_total").get<long>();
    dg.combinations_invalid = d.at("combinations_invalid").get<long>();
    dg.combinations_inconsistent = d.at("combinations_inconsistent").get<long>();
    dg.combinations_empty = d.at("combinations_empty").get<long>();
    dg.unique_count = d.at("unique_count").get<int>();
    dg.infinite_count = d.at("infinite_count").get<int>();
    dg.vgne_count = d.at("vgne_count").get<int>();
    dg.minnorm_count = d.at("minnorm_count").get<int>();
    dg.welfare_count = d.at("welfare_count").get<int>();
    dg.failures = d.at("failures").get<std::vector<std::string>>();

    for (const auto& r : j.at("regions")) {
        EquilibriumRegion er;
        er.kind = r.at("kind").get<std::string>() == "unique"
                      ? EquilibriumRegion::Kind::Unique
                      : EquilibriumRegion::Kind::Infinite;
        er.combination.region_indices =
            r.at("combination").get<std::vector<int>>();
        er.law = affine_from_json(r.at("law"));
        er.has_region = r.at("has_region").get<bool>();
        if (er.has_region) er.region = polyhedron_from_json(r.at("region"));
        if (er.kind == EquilibriumRegion::Kind::Infinite) {
            er.U1 = matrix_from_json(r.at("U1"));
            er.U2 = matrix_from_json(r.at("U2"));
            er.V1 = matrix_from_json(r.at("V1"));
            er.V2 = matrix_from_json(r.at("V2"));
            er.sigma1 = vector_from_json(r.at("sigma1"));
            er.Mx = matrix_from_json(r.at("Mx"));
            er.Mp = matrix_from_json(r.at("Mp"));
            er.M1 = vector_from_json(r.at("M1"));
            er.lifted = polyhedron_from_json(r.at("lifted"));
            er.y2_dim = r.at("y2_dim").get<int>();
            er.subregions = subregions_from_json(r.at("subregions"));
            er.residual_subregions =
                subregions_from_json(r.at("residual_subregions"));
        }
        sol.regions.push_back(std::move(er));
    }
    return sol;
}

void save_solution(const std::string& path, const ExplicitGNESolution& sol) {
    write_json_file(path, solution_to_json(sol));
}

ExplicitGNESolution load_solution(const std::string& path) {
    return solution_from_json(read_json_file(path));
}

Json agent_maps_to_json(const std::vector<BestResponseMap>& maps) {
    Json arr = Json::array();
    for (const auto& map : maps) {
        Json regions = Json::array();
        for (const auto& cr : map.regions)
            regions.push_back(Json{{"active_set", cr.active_set},
                                   {"primal", affine_to_json(cr.primal)},
                                   {"dual", affine_to_json(cr.dual)},
                                   {"region", polyhedron_to_json(cr.region)}});
        arr.push_back(Json{{"agent_id", map.agent_id},
                           {"theta_box", polyhedron_to_json(map.theta_box)},
                           {"regions", regions}});
    }
    return arr;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw GnexError("cannot write " + path);
    out << "t";
    for (const auto& s : traj.state_names) out << "," << s;
    for (const auto& s : traj.input_names) out << "," << s;
    for (int i = 0; i < traj.stage_costs.cols(); ++i)
        out << ",cost_agent" << (i + 1);
    out << ",region_index,min_margin\n";

    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << "," << buf;
    };
    const int steps = static_cast<int>(traj.inputs.rows());
    for (int t = 0; t <= steps; ++t) {
        out << t;
        for (int jcol = 0; jcol < traj.states.cols(); ++jcol)
            put(traj.states(t, jcol));
        if (t < steps) {
            for (int jcol = 0; jcol < traj.inputs.cols(); ++jcol)
                put(traj.inputs(t, jcol));
            for (int jcol = 0; jcol < traj.stage_costs.cols(); ++jcol)
                put(traj.stage_costs(t, jcol));
            out << "," << traj.region_index[t];
            put(traj.constraint_margin[t]);
        }
        out << "\n";
    }
}

}  // namespace gnex
