#include "mixq/surrogate.hpp"

#include "mixq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace mixq {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double rbf(double sq, double lengthscale, double signal_var) {
    return signal_var * std::exp(-sq / (2.0 * lengthscale * lengthscale));
}

// in-place lower Cholesky of a row-major n x n matrix; returns false when a
// pivot goes non-positive
bool cholesky(std::vector<double>& m, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = m[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= m[i * n + k] * m[j * n + k];
            if (i == j) {
                if (s <= 0.0) return false;
                m[i * n + i] = std::sqrt(s);
            } else {
                m[i * n + j] = s / m[j * n + j];
            }
        }
        for (std::size_t j = i + 1; j < n; ++j) m[i * n + j] = 0.0;
    }
    return true;
}

void solve_lower(const std::vector<double>& l, std::size_t n, std::vector<double>& x) {
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * x[k];
        x[i] = s / l[i * n + i];
    }
}

void solve_upper_from_lower(const std::vector<double>& l, std::size_t n,
                            std::vector<double>& x) {
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * x[k];
        x[i] = s / l[i * n + i];
    }
}

struct FitCore {
    std::vector<double> chol;
    std::vector<double> alpha;
    double lml = 0.0;
    bool ok = false;
};

FitCore fit_core(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                 double lengthscale, double signal_var, double noise_var) {
    const std::size_t n = x.size();
    FitCore core;
    core.chol.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            core.chol[i * n + j] = rbf(sq_dist(x[i], x[j]), lengthscale, signal_var);
        }
        core.chol[i * n + i] += noise_var;
    }
    if (!cholesky(core.chol, n)) {
        // jitter once, then give up
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                core.chol[i * n + j] = rbf(sq_dist(x[i], x[j]), lengthscale, signal_var);
            }
            core.chol[i * n + i] += noise_var + 1e-8;
        }
        if (!cholesky(core.chol, n)) return core;
    }
    core.alpha = y;
    solve_lower(core.chol, n, core.alpha);
    double quad = 0.0;
    double logdet = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        quad += core.alpha[i] * core.alpha[i];
        logdet += std::log(core.chol[i * n + i]);
    }
    solve_upper_from_lower(core.chol, n, core.alpha);
    core.lml = -0.5 * quad - logdet -
               0.5 * static_cast<double>(n) * std::log(2.0 * 3.14159265358979323846);
    core.ok = true;
    return core;
}

} // namespace

GpState GpState::fit(const std::vector<EvalRecord>& records, const GpParams& params) {
    if (records.empty()) {
        throw std::invalid_argument("GpState::fit: needs at least one record");
    }

    // duplicate configs averaged
    std::map<QuantConfig, std::pair<double, int>> grouped;
    for (const auto& r : records) {
        auto& [sum, count] = grouped[r.config];
        sum += r.performance;
        ++count;
    }

    GpState state;
    state.params_ = params;
    std::vector<double> targets;
    for (const auto& [config, agg] : grouped) {
        state.inputs_.push_back(config.encoding());
        targets.push_back(agg.first / agg.second);
    }
    state.n_ = state.inputs_.size();

    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= static_cast<double>(targets.size());
    double var = 0.0;
    for (double t : targets) var += (t - mean) * (t - mean);
    var /= static_cast<double>(targets.size());
    state.target_mean_ = mean;
    state.target_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
    state.targets_std_.resize(targets.size());
    for (std::size_t i = 0; i < targets.size(); ++i) {
        state.targets_std_[i] = (targets[i] - mean) / state.target_scale_;
    }

    double best_ls = params.lengthscale;
    double best_noise = params.noise_var;
    FitCore best = fit_core(state.inputs_, state.targets_std_, best_ls, params.signal_var,
                            best_noise);
    if (params.grid_refit && state.n_ >= 3) {
        for (double ls : {0.5, 1.0, 2.0, 4.0}) {
            for (double noise : {1e-8, 1e-6, 1e-4}) { // sigma_n in {1e-4, 1e-3, 1e-2}
                FitCore cand =
                    fit_core(state.inputs_, state.targets_std_, ls, params.signal_var, noise);
                if (cand.ok && (!best.ok || cand.lml > best.lml)) {
                    best = std::move(cand);
                    best_ls = ls;
                    best_noise = noise;
                }
            }
        }
    }
    if (!best.ok) {
        throw std::runtime_error(
            "GpState::fit: kernel matrix not positive definite after jitter (n = " +
            std::to_string(state.n_) + ", lengthscale = " + std::to_string(best_ls) + ")");
    }
    state.params_.lengthscale = best_ls;
    state.params_.noise_var = best_noise;
    state.chol_ = std::move(best.chol);
    state.alpha_ = std::move(best.alpha);
    state.lml_ = best.lml;
    return state;
}

GpState::Prediction GpState::predict(const QuantConfig& q) const {
    const std::vector<double> x = q.encoding();
    std::vector<double> k_star(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        k_star[i] = rbf(sq_dist(inputs_[i], x), params_.lengthscale, params_.signal_var);
    }
    double mean_std = 0.0;
    for (std::size_t i = 0; i < n_; ++i) mean_std += k_star[i] * alpha_[i];

    std::vector<double> v = k_star;
    solve_lower(chol_, n_, v);
    double reduction = 0.0;
    for (std::size_t i = 0; i < n_; ++i) reduction += v[i] * v[i];
    const double var_std = std::max(0.0, params_.signal_var - reduction);

    Prediction p;
    p.mean = target_mean_ + target_scale_ * mean_std;
    p.stddev = target_scale_ * std::sqrt(var_std);
    return p;
}

double GpState::mean_absolute_error(const std::vector<EvalRecord>& holdout) const {
    if (holdout.empty()) return 0.0;
    double total = 0.0;
    for (const auto& r : holdout) {
        total += std::fabs(predict(r.config).mean - r.performance);
    }
    return total / static_cast<double>(holdout.size());
}

Suggestion suggest(const GpState& state, const std::vector<QuantConfig>& candidates,
                   const std::vector<EvalRecord>& evaluated, double lambda,
                   const std::function<std::int64_t(const QuantConfig&)>& memory_of,
                   const MemoryBounds& bounds) {
    std::set<QuantConfig> seen;
    for (const auto& r : evaluated) seen.insert(r.config);

    // best realized objective among the evaluations
    double best_j = std::numeric_limits<double>::infinity();
    for (const auto& r : evaluated) {
        best_j = std::min(best_j, bounds.normalize(r.memory_bytes) - lambda * r.performance);
    }

    std::optional<Suggestion> best;
    for (const auto& q : candidates) {
        if (seen.count(q)) continue;
        const GpState::Prediction pred = state.predict(q);
        const double m_norm = bounds.normalize(memory_of(q));
        const double mu_j = m_norm - lambda * pred.mean;
        const double sigma_j = lambda * pred.stddev;
        double ei;
        if (sigma_j > 0.0 && std::isfinite(best_j)) {
            const double z = (best_j - mu_j) / sigma_j;
            ei = sigma_j * (z * normal_cdf(z) + normal_pdf(z));
        } else {
            ei = std::isfinite(best_j) ? std::max(best_j - mu_j, 0.0) : -mu_j;
        }
        const bool better =
            !best ||
            ei > best->expected_improvement ||
            (ei == best->expected_improvement &&
             (mu_j < best->predicted_objective ||
              (mu_j == best->predicted_objective && q < best->config)));
        if (better) best = Suggestion{q, ei, mu_j};
    }
    if (!best) {
        throw SearchSpaceExhausted("suggest: every candidate has already been evaluated");
    }
    return *best;
}

} // namespace mixq
