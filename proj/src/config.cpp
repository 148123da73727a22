#include "degopt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "degopt/errors.hpp"
#include "degopt/io.hpp"

namespace degopt {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& block,
                  const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw config_error("block '" + block + "' must be a JSON object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw config_error("unknown key '" + key + "' in block '" + block + "'");
}

const json& need(const json& obj, const std::string& block, const std::string& key) {
    if (!obj.contains(key))
        throw config_error("missing required key '" + key + "' in block '" + block + "'");
    return obj.at(key);
}

double need_number(const json& obj, const std::string& block, const std::string& key) {
    const json& v = need(obj, block, key);
    if (!v.is_number()) throw config_error("key '" + key + "' in '" + block + "' must be a number");
    return v.get<double>();
}

int need_int(const json& obj, const std::string& block, const std::string& key) {
    const json& v = need(obj, block, key);
    if (!v.is_number_integer())
        throw config_error("key '" + key + "' in '" + block + "' must be an integer");
    return v.get<int>();
}

void check_profile(const json& p, const std::string& what, bool allow_nodal, bool allow_forward) {
    if (!p.is_object() || !p.contains("type"))
        throw config_error(what + " must be an object with a 'type'");
    const std::string type = p.at("type").get<std::string>();
    if (type == "constant") {
        require_keys(p, what, {"type", "value"});
        need_number(p, what, "value");
    } else if (type == "gaussian") {
        require_keys(p, what, {"type", "center", "width", "height"});
        need_number(p, what, "center");
        if (!(need_number(p, what, "width") > 0.0))
            throw config_error(what + ": gaussian width must be > 0");
        need_number(p, what, "height");
    } else if (type == "nodal" && allow_nodal) {
        require_keys(p, what, {"type", "values"});
        if (!need(p, what, "values").is_array())
            throw config_error(what + ": nodal values must be an array");
    } else if (type == "forward" && allow_forward) {
        require_keys(p, what, {"type", "control"});
        check_profile(need(p, what, "control"), what + ".control", false, false);
    } else {
        throw config_error(what + ": unsupported profile type '" + type + "'");
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    require_keys(root, "(top level)", {"problem", "scheme", "optimizer", "verify", "output", "seed"});

    RunConfig cfg;
    cfg.raw = text;
    cfg.hash = hash_hex(text);

    const json& prob = need(root, "(top level)", "problem");
    require_keys(prob, "problem",
                 {"coefficient", "omega", "T", "n_steps", "n_cells", "grading", "quad_order", "m",
                  "M", "alpha", "y0", "yd", "control"});

    const json& coeff = need(prob, "problem", "coefficient");
    require_keys(coeff, "problem.coefficient", {"kind", "p", "x", "a"});
    cfg.coeff_kind = need(coeff, "problem.coefficient", "kind").get<std::string>();
    if (cfg.coeff_kind == "power") {
        cfg.coeff_p = need_number(coeff, "problem.coefficient", "p");
    } else if (cfg.coeff_kind == "tabulated") {
        for (const auto& v : need(coeff, "problem.coefficient", "x"))
            cfg.coeff_x.push_back(v.get<double>());
        for (const auto& v : need(coeff, "problem.coefficient", "a"))
            cfg.coeff_a.push_back(v.get<double>());
    } else if (cfg.coeff_kind != "budyko") {
        throw config_error("problem.coefficient.kind must be budyko|power|tabulated");
    }

    const json& om = need(prob, "problem", "omega");
    if (!om.is_array() || om.empty())
        throw config_error("problem.omega must be a nonempty array of [lo,hi] pairs");
    for (const auto& iv : om) {
        if (!iv.is_array() || iv.size() != 2)
            throw config_error("each omega interval must be a [lo,hi] pair");
        cfg.omega.emplace_back(iv[0].get<double>(), iv[1].get<double>());
    }

    cfg.T = need_number(prob, "problem", "T");
    if (!(cfg.T > 0.0)) throw config_error("problem.T must be > 0");
    cfg.n_steps = need_int(prob, "problem", "n_steps");
    if (cfg.n_steps < 1) throw config_error("problem.n_steps must be >= 1");
    cfg.n_cells = need_int(prob, "problem", "n_cells");
    if (cfg.n_cells < 2) throw config_error("problem.n_cells must be >= 2");
    if (prob.contains("grading")) {
        const std::string g = prob.at("grading").get<std::string>();
        if (g == "uniform") {
            cfg.grading = Grading::uniform;
        } else if (g == "boundary_refined") {
            cfg.grading = Grading::boundary_refined;
        } else {
            throw config_error("problem.grading must be uniform|boundary_refined");
        }
    }
    if (prob.contains("quad_order")) cfg.quad_order = prob.at("quad_order").get<int>();
    cfg.lower = need_number(prob, "problem", "m");
    cfg.upper = need_number(prob, "problem", "M");
    if (!(cfg.lower < cfg.upper)) throw config_error("problem requires m < M");
    cfg.alpha = need_number(prob, "problem", "alpha");
    if (!(cfg.alpha > 0.0)) throw config_error("problem.alpha must be > 0");

    cfg.y0_spec = need(prob, "problem", "y0");
    check_profile(cfg.y0_spec, "problem.y0", true, false);
    cfg.yd_spec = need(prob, "problem", "yd");
    check_profile(cfg.yd_spec, "problem.yd", true, true);
    if (prob.contains("control")) {
        cfg.control_spec = prob.at("control");
        check_profile(cfg.control_spec, "problem.control", false, false);
    }

    if (root.contains("scheme")) {
        const json& sch = root.at("scheme");
        require_keys(sch, "scheme", {"theta", "mass", "shift_r", "linear_solver_tol"});
        if (sch.contains("theta")) cfg.scheme.theta = sch.at("theta").get<double>();
        if (sch.contains("mass")) {
            const std::string m = sch.at("mass").get<std::string>();
            if (m == "consistent") {
                cfg.scheme.mass = MassKind::consistent;
            } else if (m == "lumped") {
                cfg.scheme.mass = MassKind::lumped;
            } else {
                throw config_error("scheme.mass must be consistent|lumped");
            }
        }
        if (sch.contains("shift_r")) cfg.scheme.shift_r = sch.at("shift_r").get<double>();
        if (sch.contains("linear_solver_tol"))
            cfg.scheme.linear_solver_tol = sch.at("linear_solver_tol").get<double>();
        try {
            cfg.scheme.validate();
        } catch (const invalid_argument& e) {
            throw config_error(e.what());
        }
    }

    if (root.contains("optimizer")) {
        const json& opt = root.at("optimizer");
        require_keys(opt, "optimizer",
                     {"max_iters", "stationarity_tol", "armijo_c", "backtrack_factor",
                      "initial_step", "min_step", "seed", "initial", "continuation"});
        if (opt.contains("max_iters")) cfg.optimizer.max_iters = opt.at("max_iters").get<int>();
        if (opt.contains("stationarity_tol"))
            cfg.optimizer.stationarity_tol = opt.at("stationarity_tol").get<double>();
        if (opt.contains("armijo_c")) cfg.optimizer.armijo_c = opt.at("armijo_c").get<double>();
        if (opt.contains("backtrack_factor"))
            cfg.optimizer.backtrack_factor = opt.at("backtrack_factor").get<double>();
        if (opt.contains("initial_step"))
            cfg.optimizer.initial_step = opt.at("initial_step").get<double>();
        if (opt.contains("min_step")) cfg.optimizer.min_step = opt.at("min_step").get<double>();
        if (opt.contains("seed"))
            cfg.optimizer.seed = opt.at("seed").get<unsigned long long>();
        if (opt.contains("initial")) {
            cfg.u0_spec = opt.at("initial");
            if (!(cfg.u0_spec.is_object() && cfg.u0_spec.value("type", "") == "random"))
                check_profile(cfg.u0_spec, "optimizer.initial", false, false);
        }
        if (opt.contains("continuation")) {
            for (const auto& v : opt.at("continuation"))
                cfg.optimizer.alpha_continuation.push_back(v.get<double>());
        }
        try {
            cfg.optimizer.validate();
        } catch (const invalid_argument& e) {
            throw config_error(e.what());
        }
    }

    if (root.contains("verify")) {
        const json& ver = root.at("verify");
        require_keys(ver, "verify", {"trials", "pairs"});
        if (ver.contains("trials")) cfg.verify_trials = ver.at("trials").get<int>();
        if (ver.contains("pairs")) cfg.verify_pairs = ver.at("pairs").get<int>();
    }

    if (root.contains("output")) {
        const json& out = root.at("output");
        require_keys(out, "output", {"directory", "dump_trajectories"});
        if (out.contains("directory")) cfg.out_dir = out.at("directory").get<std::string>();
        if (out.contains("dump_trajectories"))
            cfg.dump_trajectories = out.at("dump_trajectories").get<bool>();
    }

    if (root.contains("seed")) cfg.seed = root.at("seed").get<unsigned long long>();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

std::vector<double> eval_nodal_profile(const json& p, const Mesh1D& mesh) {
    const std::string type = p.at("type").get<std::string>();
    std::vector<double> out(mesh.n_nodes(), 0.0);
    if (type == "constant") {
        std::fill(out.begin(), out.end(), p.at("value").get<double>());
    } else if (type == "gaussian") {
        const double c = p.at("center").get<double>();
        const double w = p.at("width").get<double>();
        const double h = p.at("height").get<double>();
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            const double d = (mesh.nodes[i] - c) / w;
            out[i] = h * std::exp(-0.5 * d * d);
        }
    } else if (type == "nodal") {
        const auto& vals = p.at("values");
        if (static_cast<int>(vals.size()) != mesh.n_nodes())
            throw config_error("nodal profile needs exactly n_cells+1 values, got " +
                               std::to_string(vals.size()) + " for " +
                               std::to_string(mesh.n_nodes()) + " nodes");
        for (int i = 0; i < mesh.n_nodes(); ++i) out[i] = vals[i].get<double>();
    } else {
        throw config_error("unsupported nodal profile type: " + type);
    }
    return out;
}

ControlField eval_control_profile(const json& p, const TimeGrid& grid,
                                  const AssembledOperators& ops, double lower, double upper) {
    ControlField v(grid, ops, lower, upper);
    if (p.is_null()) return v;  // zero control
    const std::string type = p.at("type").get<std::string>();
    if (type == "constant") {
        v.fill(p.at("value").get<double>());
    } else if (type == "gaussian") {
        const double c = p.at("center").get<double>();
        const double w = p.at("width").get<double>();
        const double h = p.at("height").get<double>();
        v.sample([&](double, double x) {
            const double d = (x - c) / w;
            return h * std::exp(-0.5 * d * d);
        }, ops.mesh);
    } else {
        throw config_error("unsupported control profile type: " + type);
    }
    return v;
}

}  // namespace

BuiltProblem build_problem(const RunConfig& cfg) {
    DiffusionCoefficient a = DiffusionCoefficient::budyko();
    try {
        if (cfg.coeff_kind == "power") {
            a = DiffusionCoefficient::power(cfg.coeff_p);
        } else if (cfg.coeff_kind == "tabulated") {
            a = DiffusionCoefficient::tabulated(cfg.coeff_x, cfg.coeff_a);
        }
    } catch (const invalid_argument& e) {
        throw config_error(e.what());
    }

    Mesh1D mesh = build_mesh(cfg.n_cells, cfg.grading);
    ControlRegion omega = [&] {
        try {
            return ControlRegion(cfg.omega);
        } catch (const invalid_argument& e) {
            throw config_error(e.what());
        }
    }();

    AssembledOperators ops = assemble(mesh, a, omega, cfg.quad_order);

    ProblemSpec spec;
    spec.a = a;
    spec.omega = omega;
    spec.time = TimeGrid(cfg.T, cfg.n_steps);
    spec.lower = cfg.lower;
    spec.upper = cfg.upper;
    spec.alpha = cfg.alpha;
    spec.y0 = eval_nodal_profile(cfg.y0_spec, mesh);

    // the box implies |v|_inf <= beta for every admissible control
    const double guard = spec.time.dt() * spec.beta();
    if (!(guard < 1.0)) {
        std::ostringstream msg;
        msg << "solvability guard violated: dt * max(|m|,|M|) = " << guard
            << " must be < 1 (dt = " << spec.time.dt() << ", m = " << spec.lower
            << ", M = " << spec.upper << ")";
        throw config_error(msg.str());
    }

    BuiltProblem built{std::move(mesh), std::move(ops), std::move(spec), {}, {}};

    built.control = eval_control_profile(cfg.control_spec, built.spec.time, built.ops,
                                         built.spec.lower, built.spec.upper);
    const double cg = built.spec.time.dt() * built.control.max_abs();
    if (!(cg < 1.0)) {
        std::ostringstream msg;
        msg << "solvability guard violated by problem.control: dt*|v|_inf = " << cg
            << " must be < 1 (dt = " << built.spec.time.dt()
            << ", |v|_inf = " << built.control.max_abs() << ")";
        throw config_error(msg.str());
    }

    if (cfg.yd_spec.at("type").get<std::string>() == "forward") {
        ControlField planted = eval_control_profile(cfg.yd_spec.at("control"), built.spec.time,
                                                    built.ops, built.spec.lower, built.spec.upper);
        ProblemSpec tmp = built.spec;
        tmp.yd.assign(built.ops.n_nodes(), 0.0);
        const Trajectory traj = solve_state(tmp, built.ops, planted, cfg.scheme);
        const auto last = traj.level(tmp.time.n_steps);
        built.spec.yd.assign(last.begin(), last.end());
    } else {
        built.spec.yd = eval_nodal_profile(cfg.yd_spec, built.mesh);
    }

    if (cfg.u0_spec.is_object() && cfg.u0_spec.value("type", "") == "random") {
        ControlField u0(built.spec.time, built.ops, built.spec.lower, built.spec.upper);
        std::mt19937_64 rng(cfg.optimizer.seed);
        u0.randomize(rng, built.spec.lower, built.spec.upper);
        built.u0 = u0;
    } else {
        built.u0 = eval_control_profile(cfg.u0_spec, built.spec.time, built.ops, built.spec.lower,
                                        built.spec.upper);
        // keep the initial iterate feasible
        for (double& v : built.u0.raw()) v = std::clamp(v, built.spec.lower, built.spec.upper);
    }

    return built;
}

}  // namespace degopt
