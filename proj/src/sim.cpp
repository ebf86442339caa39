#include "ouest/sim.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ouest/rng.hpp"

namespace ouest {

const char* to_string(Scheme s) {
    return s == Scheme::Exact ? "exact" : "euler";
}

Scheme scheme_from_string(std::string_view s) {
    if (s == "exact") return Scheme::Exact;
    if (s == "euler") return Scheme::Euler;
    throw std::invalid_argument("unknown scheme: " + std::string(s));
}

void SimConfig::validate() const {
    if (!(dt > 0)) throw std::invalid_argument("SimConfig: dt must be > 0");
    if (!(horizon_T >= dt))
        throw std::invalid_argument("SimConfig: horizon_T must be >= dt");
    const double n = horizon_T / dt;
    if (n > 4e9) throw std::invalid_argument("SimConfig: too many grid points");
    if (std::abs(n - std::llround(n)) > 1e-6)
        throw std::invalid_argument("SimConfig: horizon_T must be a multiple of dt");
}

long SimConfig::n_steps() const { return std::llround(horizon_T / dt); }

namespace {

// Conditional moments of (Y_{t+dt}, int_t^{t+dt} Y ds) given Y_t for the OU
// transition, noise part only.
struct ExactStepCoeffs {
    double decay;      // e^{-f dt}
    double mean_int;   // (1 - e^{-f dt}) / f
    double sd_y;       // sd of the Y noise
    double sd_i_given_y;
    double slope_i_on_y;  // Cov(I, Y) / Var(Y)
};

ExactStepCoeffs exact_coeffs(const SystemParams& p, double dt) {
    using math_detail::integrated_ou_var_bracket;
    using math_detail::one_minus_exp_neg;
    const double f = p.f, b = p.b;
    const double x = f * dt;
    ExactStepCoeffs c{};
    c.decay = std::exp(-x);
    c.mean_int = one_minus_exp_neg(x) / f;
    const double var_y = b * b * one_minus_exp_neg(2.0 * x) / (2.0 * f);
    const double omen = one_minus_exp_neg(x);
    const double cov = b * b * omen * omen / (2.0 * f * f);
    const double var_i = b * b * integrated_ou_var_bracket(x) / (f * f * f);
    c.sd_y = std::sqrt(var_y);
    if (var_y > 0) {
        c.slope_i_on_y = cov / var_y;
        c.sd_i_given_y = std::sqrt(std::max(0.0, var_i - cov * cov / var_y));
    }
    return c;
}

}  // namespace

SamplePath simulate(const SystemParams& p, const SimConfig& cfg) {
    p.validate();
    cfg.validate();
    const long n = cfg.n_steps();

    SamplePath path;
    path.dt = cfg.dt;
    path.n_steps = n;
    path.seed = cfg.seed;
    path.params_used = p;
    path.X.resize(n + 1);
    path.X[0] = 0.0;
    if (cfg.record_latent) path.Y.resize(n + 1);

    Rng rng = make_rng(cfg.seed);
    std::normal_distribution<double> normal;

    double y = std::sqrt(p.d2) * normal(rng);
    if (cfg.record_latent) path.Y[0] = y;

    const double sq_dt = std::sqrt(cfg.dt);
    if (cfg.scheme == Scheme::Exact) {
        const ExactStepCoeffs c = exact_coeffs(p, cfg.dt);
        for (long k = 0; k < n; ++k) {
            const double z1 = normal(rng);
            const double z2 = normal(rng);
            const double z3 = normal(rng);
            const double noise_y = c.sd_y * z1;
            const double noise_i = c.slope_i_on_y * noise_y + c.sd_i_given_y * z2;
            const double integral = c.mean_int * y + noise_i;
            y = c.decay * y + noise_y;
            path.X[k + 1] = path.X[k] + p.a * integral + p.sigma * sq_dt * z3;
            if (cfg.record_latent) path.Y[k + 1] = y;
        }
    } else {
        for (long k = 0; k < n; ++k) {
            const double z1 = normal(rng);
            const double z3 = normal(rng);
            path.X[k + 1] =
                path.X[k] + p.a * y * cfg.dt + p.sigma * sq_dt * z3;
            y += -p.f * y * cfg.dt + p.b * sq_dt * z1;
            if (cfg.record_latent) path.Y[k + 1] = y;
        }
    }
    return path;
}

double sigma2_hat(const SamplePath& path) {
    if (path.n_steps < 1)
        throw std::invalid_argument("sigma2_hat: empty path");
    double qv = 0.0;
    for (long k = 0; k < path.n_steps; ++k) {
        const double dx = path.X[k + 1] - path.X[k];
        qv += dx * dx;
    }
    return qv / path.horizon();
}

namespace {

void append_g17(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace

void write_path_csv(std::ostream& os, const SamplePath& path) {
    const bool latent = !path.Y.empty();
    std::string line;
    os << (latent ? "t,X,Y\n" : "t,X\n");
    for (long k = 0; k <= path.n_steps; ++k) {
        line.clear();
        append_g17(line, path.time_at(k));
        line += ',';
        append_g17(line, path.X[k]);
        if (latent) {
            line += ',';
            append_g17(line, path.Y[k]);
        }
        line += '\n';
        os << line;
    }
}

SamplePath read_path_csv(std::istream& is, const SystemParams& params_used,
                         std::uint64_t seed) {
    std::string header;
    if (!std::getline(is, header))
        throw std::runtime_error("path csv: missing header");
    bool latent;
    if (header == "t,X")
        latent = false;
    else if (header == "t,X,Y")
        latent = true;
    else
        throw std::runtime_error("path csv: unexpected header '" + header + "'");

    SamplePath path;
    path.seed = seed;
    path.params_used = params_used;
    std::vector<double> times;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        double vals[3] = {0, 0, 0};
        int i = 0;
        while (std::getline(row, cell, ',') && i < 3) vals[i++] = std::stod(cell);
        if (i < 2 || (latent && i < 3))
            throw std::runtime_error("path csv: short row '" + line + "'");
        times.push_back(vals[0]);
        path.X.push_back(vals[1]);
        if (latent) path.Y.push_back(vals[2]);
    }
    if (path.X.size() < 2) throw std::runtime_error("path csv: too few rows");
    if (path.X[0] != 0.0) throw std::runtime_error("path csv: X[0] must be 0");
    path.n_steps = static_cast<long>(path.X.size()) - 1;
    path.dt = times[1] - times[0];
    if (!(path.dt > 0)) throw std::runtime_error("path csv: bad time grid");
    return path;
}

}  // namespace ouest
