#include "jdctrl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace jdctrl {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key))
            throw ConfigError("unknown key \"" + path + "." + key + "\"");
    }
}

const json* find(const json& j, const std::string& key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double get_number(const json& j, const std::string& path, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
    const json* v = find(j, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("missing field \"" + path + "." + key + "\"");
    }
    if (!v->is_number()) throw ConfigError("field \"" + path + "." + key + "\" must be a number");
    return v->get<double>();
}

int get_int(const json& j, const std::string& path, const std::string& key,
            std::optional<int> fallback = std::nullopt) {
    const json* v = find(j, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("missing field \"" + path + "." + key + "\"");
    }
    if (!v->is_number_integer())
        throw ConfigError("field \"" + path + "." + key + "\" must be an integer");
    return v->get<int>();
}

std::string get_string(const json& j, const std::string& path, const std::string& key,
                       std::optional<std::string> fallback = std::nullopt) {
    const json* v = find(j, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("missing field \"" + path + "." + key + "\"");
    }
    if (!v->is_string()) throw ConfigError("field \"" + path + "." + key + "\" must be a string");
    return v->get<std::string>();
}

std::vector<double> get_vector(const json& j, const std::string& path, const std::string& key,
                               std::optional<std::vector<double>> fallback = std::nullopt) {
    const json* v = find(j, key);
    if (!v) {
        if (fallback) return *fallback;
        throw ConfigError("missing field \"" + path + "." + key + "\"");
    }
    if (!v->is_array()) throw ConfigError("field \"" + path + "." + key + "\" must be an array");
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number())
            throw ConfigError("field \"" + path + "." + key + "\" must contain numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

Eigen::MatrixXd get_matrix(const json& j, const std::string& path, const std::string& key) {
    const json* v = find(j, key);
    if (!v) throw ConfigError("missing field \"" + path + "." + key + "\"");
    if (!v->is_array() || v->empty() || !(*v)[0].is_array())
        throw ConfigError("field \"" + path + "." + key + "\" must be a 2-D array");
    const std::size_t rows = v->size();
    const std::size_t cols = (*v)[0].size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = (*v)[r];
        if (!row.is_array() || row.size() != cols)
            throw ConfigError("field \"" + path + "." + key + "\" has ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!row[c].is_number())
                throw ConfigError("field \"" + path + "." + key + "\" must contain numbers");
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
        }
    }
    return m;
}

JumpMeasure atoms_from_json(const json& j, const std::string& path) {
    const json* v = find(j, "jump_atoms");
    if (!v) return JumpMeasure();
    if (!v->is_array()) throw ConfigError("field \"" + path + ".jump_atoms\" must be an array");
    std::vector<JumpAtom> atoms;
    for (const auto& e : *v) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_array() || !e[1].is_number())
            throw ConfigError("field \"" + path + ".jump_atoms\" entries must be [[z...], w]");
        std::vector<double> z;
        for (const auto& c : e[0]) {
            if (!c.is_number())
                throw ConfigError("field \"" + path + ".jump_atoms\" entries must be numeric");
            z.push_back(c.get<double>());
        }
        atoms.push_back({to_eigen(z), e[1].get<double>()});
    }
    JumpMeasure measure{std::move(atoms)};
    measure.validate();
    return measure;
}

NetworkParams network_from_json(const json& m, const std::string& path) {
    NetworkParams params;
    params.ell = to_eigen(get_vector(m, path, "ell"));
    params.M1 = get_matrix(m, path, "M1");
    if (find(m, "M2")) params.M2 = get_matrix(m, path, "M2");
    params.gamma = to_eigen(get_vector(m, path, "gamma"));
    params.theta = to_eigen(get_vector(
        m, path, "theta", std::vector<double>(params.ell.size(), 1.0)));
    params.jump_rate = get_number(m, path, "jump_rate", 0.0);
    if (const json* sizes = find(m, "jump_sizes")) {
        if (!sizes->is_array())
            throw ConfigError("field \"" + path + ".jump_sizes\" must be an array of [t, p]");
        for (const auto& e : *sizes) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ConfigError("field \"" + path +
                                  ".jump_sizes\" entries must be numeric [t, p]");
            params.jump_sizes.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
    }
    params.cost_queue = to_eigen(get_vector(m, path, "cost_queue"));
    params.cost_idle = to_eigen(get_vector(m, path, "cost_idle", std::vector<double>{1.0}));
    params.cost_exponent = get_number(m, path, "cost_exponent", 1.0);
    if (find(m, "sigma_diag")) params.sigma_diag = to_eigen(get_vector(m, path, "sigma_diag"));
    return params;
}

// 1-D linear-pull fixture: dX = (offset - pull X) dt + sigma dW + dL, cost
// weight * x^2 (+ per-action charge for the two-action variant).
ModelSpec custom_1d_model(const json& m, const std::string& path, bool two_action) {
    const double sigma = get_number(m, path, "sigma", 1.0);
    if (sigma <= 0.0) throw ConfigError("field \"" + path + ".sigma\" must be > 0");
    const double cost_weight = get_number(m, path, "cost_weight", 1.0);
    const double offset = get_number(m, path, "offset", 0.0);
    JumpMeasure jumps = atoms_from_json(m, path);
    if (!jumps.empty() && jumps.dim() != 1)
        throw ConfigError("field \"" + path + ".jump_atoms\" must be 1-D for this builder");

    ModelSpec model;
    model.dim = 1;
    model.growth_degree = 2;
    model.jumps = std::move(jumps);
    model.diffusion = [sigma](const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Constant(1, 1, sigma);
    };

    if (two_action) {
        const auto pulls = get_vector(m, path, "pulls");
        const auto action_costs = get_vector(m, path, "action_costs");
        if (pulls.size() != action_costs.size() || pulls.empty())
            throw ConfigError("fields \"" + path + ".pulls\" and \"" + path +
                              ".action_costs\" must be equally sized and nonempty");
        for (double p : pulls)
            if (p <= 0.0) throw ConfigError("field \"" + path + ".pulls\" must be > 0");
        model.name = "twoaction1d";
        std::vector<Eigen::VectorXd> points;
        for (std::size_t k = 0; k < pulls.size(); ++k)
            points.push_back(Eigen::VectorXd::Constant(1, static_cast<double>(k)));
        model.controls = ControlSpace::finite_points(points);
        model.drift = [pulls, offset](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
            const std::size_t k = static_cast<std::size_t>(u[0]);
            return Eigen::VectorXd::Constant(1, offset - pulls[k] * x[0]);
        };
        model.cost = [cost_weight, action_costs](const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& u) {
            const std::size_t k = static_cast<std::size_t>(u[0]);
            return cost_weight * x[0] * x[0] + action_costs[k];
        };
    } else {
        const double pull = get_number(m, path, "pull", 1.0);
        if (pull <= 0.0) throw ConfigError("field \"" + path + ".pull\" must be > 0");
        model.name = "ou1d";
        model.controls =
            ControlSpace::finite_points({Eigen::VectorXd::Zero(1)});
        model.drift = [pull, offset](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
            return Eigen::VectorXd::Constant(1, offset - pull * x[0]);
        };
        model.cost = [cost_weight](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
            return cost_weight * x[0] * x[0];
        };
    }
    return model;
}

} // namespace

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown_keys(j, "config",
                        {"model", "grid", "solver", "sim", "sweep", "verify", "output",
                         "threads"});

    RunConfig config;
    config.raw = j;

    const json* model = find(j, "model");
    if (!model) throw ConfigError("missing field \"config.model\"");
    if (!model->is_object()) throw ConfigError("field \"config.model\" must be an object");
    const std::string builder = get_string(*model, "config.model", "builder");
    const std::set<std::string> network_keys = {
        "builder", "ell", "M1", "M2", "gamma", "theta", "jump_rate", "jump_sizes",
        "jump_atoms", "cost_queue", "cost_idle", "cost_exponent", "sigma_diag",
        "control_mesh"};
    const std::set<std::string> custom_keys = {
        "builder", "pull", "pulls", "offset", "action_costs", "sigma", "cost_weight",
        "jump_atoms"};
    if (builder == "v" || builder == "w")
        reject_unknown_keys(*model, "config.model", network_keys);
    else if (builder == "ou1d" || builder == "twoaction1d")
        reject_unknown_keys(*model, "config.model", custom_keys);
    else
        throw ConfigError("field \"config.model.builder\" must be one of "
                          "v | w | ou1d | twoaction1d");
    (void)config.build_model(); // validate eagerly so errors carry field names

    if (const json* grid = find(j, "grid")) {
        reject_unknown_keys(*grid, "config.grid", {"radius", "nodes"});
        config.grid.radius = get_number(*grid, "config.grid", "radius");
        config.grid.nodes = get_int(*grid, "config.grid", "nodes");
        if (config.grid.radius <= 0.0)
            throw ConfigError("field \"config.grid.radius\" must be > 0");
        if (config.grid.nodes < 3 || config.grid.nodes % 2 == 0)
            throw ConfigError("field \"config.grid.nodes\" must be odd and >= 3");
    }

    if (const json* solver = find(j, "solver")) {
        reject_unknown_keys(*solver, "config.solver",
                            {"alpha", "alpha_schedule", "epsilon", "tol", "max_iter",
                             "method", "boundary"});
        config.solver.alpha = get_number(*solver, "config.solver", "alpha", 0.2);
        if (config.solver.alpha <= 0.0 || config.solver.alpha > 1.0)
            throw ConfigError("field \"config.solver.alpha\" must lie in (0, 1]");
        config.solver.alpha_schedule =
            get_vector(*solver, "config.solver", "alpha_schedule", std::vector<double>{});
        for (double a : config.solver.alpha_schedule)
            if (a <= 0.0 || a > 1.0)
                throw ConfigError(
                    "field \"config.solver.alpha_schedule\" entries must lie in (0, 1]");
        for (std::size_t i = 0; i + 1 < config.solver.alpha_schedule.size(); ++i)
            if (config.solver.alpha_schedule[i + 1] >= config.solver.alpha_schedule[i])
                throw ConfigError(
                    "field \"config.solver.alpha_schedule\" must be strictly decreasing");
        config.solver.epsilon = get_number(*solver, "config.solver", "epsilon", 0.0);
        if (config.solver.epsilon < 0.0)
            throw ConfigError("field \"config.solver.epsilon\" must be >= 0");
        config.solver.tol = get_number(*solver, "config.solver", "tol", 1e-9);
        if (config.solver.tol <= 0.0)
            throw ConfigError("field \"config.solver.tol\" must be > 0");
        config.solver.max_iter = get_int(*solver, "config.solver", "max_iter", 60);
        if (config.solver.max_iter < 1)
            throw ConfigError("field \"config.solver.max_iter\" must be >= 1");
        config.solver.method =
            get_string(*solver, "config.solver", "method", std::string("policy-iteration"));
        if (config.solver.method != "policy-iteration" &&
            config.solver.method != "vanishing-discount")
            throw ConfigError("field \"config.solver.method\" must be policy-iteration or "
                              "vanishing-discount");
        config.solver.boundary =
            get_string(*solver, "config.solver", "boundary", std::string("clamp"));
        if (config.solver.boundary != "clamp" && config.solver.boundary != "dirichlet")
            throw ConfigError("field \"config.solver.boundary\" must be clamp or dirichlet");
    }

    if (const json* sim = find(j, "sim")) {
        reject_unknown_keys(*sim, "config.sim",
                            {"horizon", "burn_in", "step", "seed", "replications", "control"});
        config.sim.horizon = get_number(*sim, "config.sim", "horizon", 100.0);
        config.sim.burn_in = get_number(*sim, "config.sim", "burn_in", 0.0);
        config.sim.step = get_number(*sim, "config.sim", "step", 0.01);
        if (config.sim.step <= 0.0) throw ConfigError("field \"config.sim.step\" must be > 0");
        if (config.sim.burn_in < 0.0 || config.sim.horizon <= config.sim.burn_in)
            throw ConfigError("fields \"config.sim.horizon\"/\"config.sim.burn_in\" must "
                              "satisfy horizon > burn_in >= 0");
        const double seed = get_number(*sim, "config.sim", "seed", 1.0);
        if (seed < 0.0) throw ConfigError("field \"config.sim.seed\" must be >= 0");
        config.sim.seed = static_cast<std::uint64_t>(seed);
        config.sim.replications = get_int(*sim, "config.sim", "replications", 1);
        if (config.sim.replications < 1)
            throw ConfigError("field \"config.sim.replications\" must be >= 1");
        config.sim.control = get_int(*sim, "config.sim", "control", 0);
    }

    if (const json* sweep = find(j, "sweep")) {
        reject_unknown_keys(*sweep, "config.sweep", {"radii", "outer_control"});
        SweepConfig sc;
        sc.radii = get_vector(*sweep, "config.sweep", "radii");
        if (sc.radii.empty()) throw ConfigError("field \"config.sweep.radii\" must be nonempty");
        for (std::size_t i = 0; i + 1 < sc.radii.size(); ++i)
            if (sc.radii[i + 1] <= sc.radii[i])
                throw ConfigError("field \"config.sweep.radii\" must be strictly increasing");
        sc.outer_control = get_int(*sweep, "config.sweep", "outer_control", 0);
        config.sweep = sc;
    }

    if (const json* verify = find(j, "verify")) {
        reject_unknown_keys(*verify, "config.verify", {"epsilons", "lyapunov"});
        VerifyConfig vc;
        vc.epsilons =
            get_vector(*verify, "config.verify", "epsilons", std::vector<double>{});
        for (double e : vc.epsilons)
            if (e < 0.0) throw ConfigError("field \"config.verify.epsilons\" must be >= 0");
        if (const json* lyap = find(*verify, "lyapunov")) {
            reject_unknown_keys(*lyap, "config.verify.lyapunov",
                                {"q_cost", "q_policy", "kappa_hat", "delta", "ball_radius",
                                 "stabilizing_control"});
            LyapunovConfig lc;
            lc.q_cost = get_vector(*lyap, "config.verify.lyapunov", "q_cost");
            lc.q_policy = get_vector(*lyap, "config.verify.lyapunov", "q_policy");
            lc.kappa_hat = get_number(*lyap, "config.verify.lyapunov", "kappa_hat", 10.0);
            lc.delta = get_number(*lyap, "config.verify.lyapunov", "delta", 0.1);
            lc.ball_radius = get_number(*lyap, "config.verify.lyapunov", "ball_radius", 1.0);
            lc.stabilizing_control =
                get_int(*lyap, "config.verify.lyapunov", "stabilizing_control", 0);
            vc.lyapunov = lc;
        }
        config.verify = vc;
    }

    if (const json* output = find(j, "output")) {
        reject_unknown_keys(*output, "config.output", {"dir"});
        config.out_dir = get_string(*output, "config.output", "dir", std::string("out"));
    }
    if (find(j, "threads")) {
        config.threads = get_int(j, "config", "threads", 1);
        if (config.threads < 1) throw ConfigError("field \"config.threads\" must be >= 1");
    }
    return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return from_json(j);
}

std::string RunConfig::model_builder() const {
    return raw.at("model").at("builder").get<std::string>();
}

ModelSpec RunConfig::build_model() const {
    const json& m = raw.at("model");
    const std::string builder = get_string(m, "config.model", "builder");
    try {
        if (builder == "v" || builder == "w") {
            NetworkParams params = network_from_json(m, "config.model");
            const int mesh = get_int(m, "config.model", "control_mesh", 8);
            ModelSpec model =
                builder == "v" ? build_v_model(params, mesh) : build_w_model(params, mesh);
            // direct atoms override the theta-aligned construction
            JumpMeasure direct = atoms_from_json(m, "config.model");
            if (!direct.empty()) {
                if (direct.dim() != model.dim)
                    throw ConfigError("field \"config.model.jump_atoms\" dimension mismatch");
                model.jumps = std::move(direct);
            }
            return model;
        }
        return custom_1d_model(m, "config.model", builder == "twoaction1d");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config.model: ") + e.what());
    }
}

} // namespace jdctrl
