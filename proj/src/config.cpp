#include <deterrence/cli.hpp>

#include <fstream>
#include <set>

namespace deterrence::cli {

namespace {

// Reads named members of one JSON object and rejects anything left over.
class Section {
public:
    Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_ + ": expected an object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    const Json* take(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void num(const char* key, double& out) {
        if (const Json* v = take(key)) {
            if (!v->is_number()) throw ValidationError(where(key) + ": expected a number");
            out = v->get<double>();
        }
    }

    void num(const char* key, std::optional<double>& out) {
        if (const Json* v = take(key)) {
            if (!v->is_number()) throw ValidationError(where(key) + ": expected a number");
            out = v->get<double>();
        }
    }

    template <class Int>
    void integer(const char* key, Int& out, long long lo) {
        if (const Json* v = take(key)) {
            if (!v->is_number_integer() || v->get<long long>() < lo)
                throw ValidationError(where(key) + ": expected an integer >= " + std::to_string(lo));
            out = static_cast<Int>(v->get<long long>());
        }
    }

    void boolean(const char* key, bool& out) {
        if (const Json* v = take(key)) {
            if (!v->is_boolean()) throw ValidationError(where(key) + ": expected true or false");
            out = v->get<bool>();
        }
    }

    void text(const char* key, std::string& out) {
        if (const Json* v = take(key)) {
            if (!v->is_string()) throw ValidationError(where(key) + ": expected a string");
            out = v->get<std::string>();
        }
    }

    std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ValidationError("unknown key: " + where(it.key()));
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void require_all(const Section& s, std::initializer_list<const char*> keys, const std::string& what) {
    for (const char* k : keys)
        if (!s.has(k)) throw ValidationError(what + ": missing required key " + s.where(k));
}

template <class F>
void check(F&& validate) {
    try {
        validate();
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    }
}

const char* gamma_mode_name(GammaMode m) { return m == GammaMode::per_agent ? "per-agent" : "shared-mean"; }

}  // namespace

RunConfig parse_config(const Json& j) {
    RunConfig c;
    Section top(j, "");
    if (!top.has("schema_version")) throw ValidationError("missing required key schema_version");
    top.integer("schema_version", c.schema_version, 0);
    if (c.schema_version != kSchemaVersion)
        throw ValidationError("unsupported schema_version " + std::to_string(c.schema_version) + " (expected " +
                              std::to_string(kSchemaVersion) + ")");
    top.integer("seed", c.seed, 0);
    top.integer("threads", c.threads, 1);
    top.boolean("strict", c.strict);

    if (const Json* v = top.take("population")) {
        Section s(*v, "population");
        s.num("alpha", c.population.wealth.alpha);
        s.num("w_m", c.population.wealth.w_m);
        s.num("rho", c.population.discount.rho);
        s.num("beta", c.population.discount.beta);
        s.num("mu_gamma", c.population.gamma.mu_gamma);
        s.num("sigma_gamma", c.population.gamma.sigma_gamma);
        s.num("epsilon", c.population.epsilon);
        s.finish();
    }
    check([&] { c.population.validate(); });

    if (const Json* v = top.take("crime")) {
        Section s(*v, "crime");
        s.num("b", c.crime.b);
        s.num("s", c.crime.s);
        s.num("l", c.crime.l);
        s.num("g", c.crime.g);
        s.num("Lambda", c.crime.Lambda);
        s.finish();
    }
    check([&] { c.crime.validate(); });

    if (const Json* v = top.take("costs")) {
        Section s(*v, "costs");
        s.num("c_p", c.costs.c_p);
        s.num("c_f", c.costs.c_f);
        s.num("c_0", c.costs.c_0);
        s.num("c_t", c.costs.c_t);
        s.num("c_tau", c.costs.c_tau);
        s.num("m_options", c.costs.m_options);
        s.finish();
    }
    check([&] { c.costs.validate(); });

    if (const Json* v = top.take("strategy")) {
        Section s(*v, "strategy");
        require_all(s, {"p", "f", "t", "tau", "r"}, "strategy");
        PenalStrategy st;
        s.num("p", st.p);
        s.num("f", st.f);
        s.num("t", st.t);
        s.num("tau", st.tau);
        s.num("r", st.r);
        s.finish();
        check([&] { st.validate(); });
        c.strategy = st;
    }
    if (const Json* v = top.take("targets")) {
        Section s(*v, "targets");
        require_all(s, {"p", "w0", "k0", "t", "r"}, "targets");
        StrategyTargets x;
        s.num("p", x.p);
        s.num("w0", x.w0);
        s.num("k0", x.k0);
        s.num("t", x.t);
        s.num("r", x.r);
        s.finish();
        if (!(x.p > 0.0 && x.p <= 1.0)) throw ValidationError("targets.p must lie in (0,1]");
        if (!(x.w0 > 0.0 && x.k0 > 0.0 && x.t > 0.0 && x.r > 0.0))
            throw ValidationError("targets: w0, k0, t and r must be > 0");
        c.targets = x;
    }
    if (c.strategy && c.targets) throw ValidationError("give either strategy or targets, not both");

    if (const Json* v = top.take("simulation")) {
        Section s(*v, "simulation");
        s.integer("n_agents", c.simulation.n_agents, 1);
        s.num("delta_t", c.simulation.delta_t);
        s.num("lambda_rate", c.simulation.lambda_rate);
        std::string mode = gamma_mode_name(c.simulation.gamma_mode);
        s.text("gamma_mode", mode);
        if (mode == "shared-mean")
            c.simulation.gamma_mode = GammaMode::shared_mean;
        else if (mode == "per-agent")
            c.simulation.gamma_mode = GammaMode::per_agent;
        else
            throw ValidationError("simulation.gamma_mode must be \"shared-mean\" or \"per-agent\"");
        s.num("burglary_gain", c.simulation.burglary_gain);
        s.finish();
        if (!(c.simulation.delta_t > 0.0)) throw ValidationError("simulation.delta_t must be > 0");
        if (!(c.simulation.lambda_rate >= 0.0)) throw ValidationError("simulation.lambda_rate must be >= 0");
        if (c.simulation.burglary_gain && !(*c.simulation.burglary_gain > 0.0))
            throw ValidationError("simulation.burglary_gain must be > 0");
    }

    if (const Json* v = top.take("optimize")) {
        Section s(*v, "optimize");
        s.num("r", c.optimize.r);
        s.num("kappa0", c.optimize.kappa0);
        s.finish();
        if (c.optimize.r && !(*c.optimize.r > 0.0)) throw ValidationError("optimize.r must be > 0");
        if (!(c.optimize.kappa0 > 0.0)) throw ValidationError("optimize.kappa0 must be > 0");
    }

    if (const Json* v = top.take("phase_sweep")) {
        Section s(*v, "phase_sweep");
        auto& o = c.phase_sweep;
        s.num("p", o.p);
        s.num("r_min", o.r_min);
        s.num("r_max", o.r_max);
        s.num("f_min", o.f_min);
        s.num("f_max", o.f_max);
        s.integer("r_points", o.r_points, 2);
        s.integer("f_points", o.f_points, 2);
        s.num("kappa_max", o.kappa_max);
        s.integer("kappa_points", o.kappa_points, 1);
        s.finish();
        if (!(o.p > 0.0 && o.p <= 1.0)) throw ValidationError("phase_sweep.p must lie in (0,1]");
        if (!(o.kappa_max > 0.0)) throw ValidationError("phase_sweep.kappa_max must be > 0");
        for (auto* x : {&o.r_min, &o.r_max, &o.f_min, &o.f_max})
            if (*x && !(**x > 0.0)) throw ValidationError("phase_sweep ranges must be > 0");
        if (o.r_min && o.r_max && !(*o.r_min < *o.r_max)) throw ValidationError("phase_sweep: r_min must be < r_max");
        if (o.f_min && o.f_max && !(*o.f_min < *o.f_max)) throw ValidationError("phase_sweep: f_min must be < f_max");
    }

    if (const Json* v = top.take("survey")) {
        Section s(*v, "survey");
        s.text("input", c.survey.input);
        s.finish();
    }
    top.finish();
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

Json to_json(const RunConfig& c) {
    Json j;
    j["schema_version"] = c.schema_version;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["strict"] = c.strict;
    const auto& pop = c.population;
    j["population"] = {{"alpha", pop.wealth.alpha},        {"w_m", pop.wealth.w_m},
                       {"rho", pop.discount.rho},          {"beta", pop.discount.beta},
                       {"mu_gamma", pop.gamma.mu_gamma},   {"sigma_gamma", pop.gamma.sigma_gamma},
                       {"epsilon", pop.epsilon}};
    j["crime"] = {{"b", c.crime.b}, {"s", c.crime.s}, {"l", c.crime.l}, {"g", c.crime.g}, {"Lambda", c.crime.Lambda}};
    j["costs"] = {{"c_p", c.costs.c_p}, {"c_f", c.costs.c_f},     {"c_0", c.costs.c_0},
                  {"c_t", c.costs.c_t}, {"c_tau", c.costs.c_tau}, {"m_options", c.costs.m_options}};
    if (c.strategy)
        j["strategy"] = {{"p", c.strategy->p},
                         {"f", c.strategy->f},
                         {"t", c.strategy->t},
                         {"tau", c.strategy->tau},
                         {"r", c.strategy->r}};
    if (c.targets)
        j["targets"] = {
            {"p", c.targets->p}, {"w0", c.targets->w0}, {"k0", c.targets->k0}, {"t", c.targets->t}, {"r", c.targets->r}};
    const auto& sim = c.simulation;
    j["simulation"] = {{"n_agents", sim.n_agents},
                       {"delta_t", sim.delta_t},
                       {"lambda_rate", sim.lambda_rate},
                       {"gamma_mode", gamma_mode_name(sim.gamma_mode)}};
    if (sim.burglary_gain) j["simulation"]["burglary_gain"] = *sim.burglary_gain;
    j["optimize"] = {{"kappa0", c.optimize.kappa0}};
    if (c.optimize.r) j["optimize"]["r"] = *c.optimize.r;
    const auto& ph = c.phase_sweep;
    j["phase_sweep"] = {{"p", ph.p},
                        {"r_points", ph.r_points},
                        {"f_points", ph.f_points},
                        {"kappa_max", ph.kappa_max},
                        {"kappa_points", ph.kappa_points}};
    if (ph.r_min) j["phase_sweep"]["r_min"] = *ph.r_min;
    if (ph.r_max) j["phase_sweep"]["r_max"] = *ph.r_max;
    if (ph.f_min) j["phase_sweep"]["f_min"] = *ph.f_min;
    if (ph.f_max) j["phase_sweep"]["f_max"] = *ph.f_max;
    if (!c.survey.input.empty()) j["survey"] = {{"input", c.survey.input}};
    return j;
}

}  // namespace deterrence::cli
