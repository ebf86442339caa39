#include "ouest/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ouest::config {

namespace {

struct KeyInfo {
    const char* key;
    const char* desc;
};

const std::map<std::string, std::vector<KeyInfo>>& schema() {
    static const std::map<std::string, std::vector<KeyInfo>> s = {
        {"model",
         {{"a", "observation gain (nonzero for estimation)"},
          {"f", "mean-reversion rate of the hidden state, > 0"},
          {"b", "hidden-state noise intensity"},
          {"sigma", "observation noise intensity, nonzero"},
          {"d2", "initial state variance: number | \"stationary\" | \"matched\""}}},
        {"spec",
         {{"case", "unknown parameter: F | B | A | FB | FA"},
          {"alpha", "lower bound of the (first) unknown"},
          {"beta", "upper bound of the (first) unknown"},
          {"alpha2", "lower bound of the second unknown (pair cases)"},
          {"beta2", "upper bound of the second unknown (pair cases)"},
          {"delta", "learning exponent; K = floor(T^delta)"}}},
        {"sim",
         {{"dt", "grid step"},
          {"T", "horizon (multiple of dt)"},
          {"scheme", "exact | euler"},
          {"seed", "path seed (single-path subcommands)"},
          {"record_latent", "also record the hidden state"}}},
        {"filter",
         {{"theta", "parameter value the filter runs at"},
          {"theta2", "second coordinate (pair cases)"},
          {"with_mddot", "integrate the second derivative state (case F)"},
          {"stationary_gamma", "stationary gain (default) or transient"},
          {"m0", "initial conditional mean"},
          {"input", "path CSV to consume instead of simulating"}}},
        {"prelim", {{"input", "path CSV to consume instead of simulating"}}},
        {"onestep",
         {{"tau_grid", "evaluation fractions in (T^(delta-1), 1]"},
          {"norm", "normalization: \"t-Tdelta\" (default) | \"t\""},
          {"fisher_T", "aux horizon for the numeric information (pair cases)"},
          {"input", "path CSV to consume instead of simulating"}}},
        {"twostep",
         {{"tau_grid", "evaluation fractions in (T^(delta-1), 1]"},
          {"norm", "normalization: \"t-Tdelta\" (default) | \"t\""},
          {"input", "path CSV to consume instead of simulating"}}},
        {"adaptive",
         {{"norm", "normalization: \"t-Tdelta\" (default) | \"t\""},
          {"paper_drift", "literal recurrent drift -theta*/(t-T^delta)"},
          {"guard_widths", "clamp interval width in multiples of beta-alpha"},
          {"input", "path CSV to consume instead of simulating"}}},
        {"mle-grid",
         {{"grid_size", "number of likelihood grid points (>= 3)"},
          {"input", "path CSV to consume instead of simulating"}}},
        {"mc",
         {{"reps", "number of replications"},
          {"workers", "worker threads; 0 = hardware concurrency"},
          {"master_seed", "seed; replication i uses mix(master_seed, i)"},
          {"tau_grid", "evaluation fractions"},
          {"estimator", "onestep | twostep | vector | adaptive | prelim"},
          {"with_grid_mle", "also run the grid MLE per replication"},
          {"grid_size", "grid MLE size"},
          {"norm", "normalization: \"t-Tdelta\" (default) | \"t\""},
          {"fisher_T", "aux horizon for the per-rep numeric information"}}},
        {"checks",
         {{"name", "check label (unique)"},
          {"kind",
           "var_ratio | ks_normal | zeta_cov | mse_improvement | vector_cov"},
          {"tau", "evaluation fraction the check reads"},
          {"tol", "tolerance"},
          {"p_min", "minimal p-value (ks_normal)"},
          {"kappa", "left end of the tau window (zeta_cov)"}}},
    };
    return s;
}

const std::map<std::string, std::vector<std::string>>& sections_for() {
    static const std::map<std::string, std::vector<std::string>> s = {
        {"simulate", {"model", "sim"}},
        {"filter", {"model", "sim", "spec", "filter"}},
        {"prelim", {"model", "sim", "spec", "prelim"}},
        {"onestep", {"model", "sim", "spec", "onestep"}},
        {"twostep", {"model", "sim", "spec", "twostep"}},
        {"adaptive", {"model", "sim", "spec", "adaptive"}},
        {"mle-grid", {"model", "sim", "spec", "mle-grid"}},
        {"oracle", {}},
        {"mc", {"model", "sim", "spec", "mc", "checks"}},
    };
    return s;
}

double require_number(const json& sec, const std::string& section,
                      const char* key) {
    if (!sec.contains(key))
        throw std::invalid_argument("missing config key: " + section + "." +
                                    key);
    if (!sec.at(key).is_number())
        throw std::invalid_argument("config key " + section + "." + key +
                                    " must be a number");
    return sec.at(key).get<double>();
}

double number_or(const json& sec, const char* key, double fallback) {
    return sec.contains(key) ? sec.at(key).get<double>() : fallback;
}

}  // namespace

json load_with_overrides(const std::string& path,
                         const std::vector<std::string>& overrides) {
    json cfg = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open config file: " + path);
        try {
            in >> cfg;
        } catch (const json::exception& e) {
            throw std::invalid_argument("config parse error in " + path + ": " +
                                        e.what());
        }
        if (!cfg.is_object())
            throw std::invalid_argument("config root must be a JSON object");
    }
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("override must look like key.path=value: " +
                                        ov);
        const std::string keypath = ov.substr(0, eq);
        const std::string value = ov.substr(eq + 1);
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value;  // plain string
        }
        json* node = &cfg;
        std::istringstream keys(keypath);
        std::string key, prev;
        std::vector<std::string> parts;
        while (std::getline(keys, key, '.')) parts.push_back(key);
        if (parts.empty()) throw std::invalid_argument("empty override key");
        for (std::size_t i = 0; i + 1 < parts.size(); ++i)
            node = &(*node)[parts[i]];
        (*node)[parts.back()] = parsed;
    }
    return cfg;
}

void check_keys(const json& cfg, const std::string& subcommand) {
    const auto it = sections_for().find(subcommand);
    if (it == sections_for().end())
        throw std::invalid_argument("unknown subcommand: " + subcommand);
    std::set<std::string> allowed(it->second.begin(), it->second.end());
    for (const auto& [section, body] : cfg.items()) {
        if (!allowed.count(section))
            throw std::invalid_argument("config section not accepted by '" +
                                        subcommand + "': " + section);
        const auto& keys = schema().at(section);
        auto known = [&](const std::string& k) {
            for (const auto& ki : keys)
                if (k == ki.key) return true;
            return false;
        };
        if (section == "checks") {
            if (!body.is_array())
                throw std::invalid_argument("checks must be an array");
            for (const auto& chk : body)
                for (const auto& [k, v] : chk.items())
                    if (!known(k))
                        throw std::invalid_argument("unknown config key: checks[]." +
                                                    k);
        } else {
            if (!body.is_object())
                throw std::invalid_argument("config section must be an object: " +
                                            section);
            for (const auto& [k, v] : body.items())
                if (!known(k))
                    throw std::invalid_argument("unknown config key: " + section +
                                                "." + k);
        }
    }
}

SystemParams parse_model(const json& cfg) {
    SystemParams p;
    if (!cfg.contains("model")) return p;
    const json& m = cfg.at("model");
    p.a = number_or(m, "a", p.a);
    p.f = number_or(m, "f", p.f);
    p.b = number_or(m, "b", p.b);
    p.sigma = number_or(m, "sigma", p.sigma);
    if (m.contains("d2")) {
        const json& d2 = m.at("d2");
        if (d2.is_number()) {
            p.d2 = d2.get<double>();
        } else if (d2 == "stationary") {
            p.d2 = p.b * p.b / (2.0 * p.f);
        } else if (d2 == "matched") {
            const double r = std::hypot(p.f, p.a * p.b / p.sigma);
            p.d2 = p.b * p.b / (r + p.f);
        } else {
            throw std::invalid_argument(
                "config key model.d2 must be a number, \"stationary\" or "
                "\"matched\"");
        }
    }
    p.validate();
    return p;
}

ParamSpec parse_spec(const json& cfg, bool need_bounds) {
    if (!cfg.contains("spec"))
        throw std::invalid_argument("missing config section: spec");
    const json& s = cfg.at("spec");
    ParamSpec spec;
    if (!s.contains("case"))
        throw std::invalid_argument("missing config key: spec.case");
    spec.which = unknown_from_string(s.at("case").get<std::string>());
    spec.alpha = number_or(s, "alpha", 0.0);
    spec.beta = number_or(s, "beta", 0.0);
    spec.alpha2 = number_or(s, "alpha2", 0.0);
    spec.beta2 = number_or(s, "beta2", 0.0);
    spec.delta = number_or(s, "delta", 0.6);
    if (need_bounds) spec.validate();
    return spec;
}

SimConfig parse_sim(const json& cfg) {
    if (!cfg.contains("sim"))
        throw std::invalid_argument("missing config section: sim");
    const json& s = cfg.at("sim");
    SimConfig c;
    c.dt = require_number(s, "sim", "dt");
    c.horizon_T = require_number(s, "sim", "T");
    if (s.contains("scheme"))
        c.scheme = scheme_from_string(s.at("scheme").get<std::string>());
    if (s.contains("seed")) c.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("record_latent"))
        c.record_latent = s.at("record_latent").get<bool>();
    c.validate();
    return c;
}

ExperimentConfig parse_experiment(const json& cfg) {
    ExperimentConfig e;
    e.model = parse_model(cfg);
    e.spec = parse_spec(cfg);
    e.sim = parse_sim(cfg);
    if (cfg.contains("mc")) {
        const json& m = cfg.at("mc");
        e.reps = static_cast<long>(number_or(m, "reps", 100));
        e.workers = static_cast<int>(number_or(m, "workers", 0));
        if (m.contains("master_seed"))
            e.master_seed = m.at("master_seed").get<std::uint64_t>();
        if (m.contains("tau_grid"))
            e.tau_grid = m.at("tau_grid").get<std::vector<double>>();
        if (m.contains("estimator"))
            e.estimator = m.at("estimator").get<std::string>();
        if (m.contains("with_grid_mle"))
            e.with_grid_mle = m.at("with_grid_mle").get<bool>();
        e.grid_size = static_cast<int>(number_or(m, "grid_size", 50));
        if (m.contains("norm")) {
            const std::string n = m.at("norm").get<std::string>();
            if (n == "t")
                e.est_opts.norm_from_learning_end = false;
            else if (n != "t-Tdelta")
                throw std::invalid_argument(
                    "config key mc.norm must be \"t-Tdelta\" or \"t\"");
            e.adaptive_opts.norm_from_learning_end =
                e.est_opts.norm_from_learning_end;
        }
        e.fisher_T = number_or(m, "fisher_T", e.fisher_T);
    }
    if (cfg.contains("checks")) {
        for (const auto& c : cfg.at("checks")) {
            CheckSpec spec;
            if (!c.contains("name") || !c.contains("kind"))
                throw std::invalid_argument(
                    "each checks[] entry needs name and kind");
            spec.name = c.at("name").get<std::string>();
            spec.kind = c.at("kind").get<std::string>();
            spec.tau = number_or(c, "tau", 1.0);
            spec.tol = number_or(c, "tol", 0.15);
            spec.p_min = number_or(c, "p_min", 0.01);
            spec.kappa = number_or(c, "kappa", 0.2);
            e.checks.push_back(std::move(spec));
        }
    }
    return e;
}

std::vector<std::string> subcommand_names() {
    std::vector<std::string> out;
    for (const auto& [name, _] : sections_for()) out.push_back(name);
    return out;
}

std::vector<std::string> accepted_keys(const std::string& subcommand) {
    const auto it = sections_for().find(subcommand);
    if (it == sections_for().end())
        throw std::invalid_argument("unknown subcommand: " + subcommand);
    std::vector<std::string> out;
    for (const std::string& section : it->second)
        for (const auto& ki : schema().at(section))
            out.push_back(section + (section == "checks" ? "[]." : ".") +
                          ki.key);
    return out;
}

std::string help_text(const std::string& subcommand) {
    const auto it = sections_for().find(subcommand);
    if (it == sections_for().end())
        throw std::invalid_argument("unknown subcommand: " + subcommand);
    std::ostringstream os;
    os << "Config keys accepted by '" << subcommand << "':\n";
    if (it->second.empty()) os << "  (no config required)\n";
    for (const std::string& section : it->second) {
        for (const auto& ki : schema().at(section)) {
            os << "  " << section << (section == "checks" ? "[]." : ".")
               << ki.key;
            os << "  -  " << ki.desc << "\n";
        }
    }
    return os.str();
}

}  // namespace ouest::config
