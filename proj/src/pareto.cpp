#include "mixq/pareto.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <stdexcept>

namespace mixq {

bool dominates(const EvalRecord& a, const EvalRecord& b) {
    return a.memory_bytes <= b.memory_bytes && a.performance >= b.performance &&
           (a.memory_bytes < b.memory_bytes || a.performance > b.performance);
}

std::vector<QuantConfig> ParetoFront::configs() const {
    std::vector<QuantConfig> out;
    out.reserve(members.size());
    for (const auto& r : members) out.push_back(r.config);
    return out;
}

bool ParetoFront::same_configs(const ParetoFront& other) const {
    // members are kept sorted by M with unique configs, so set equality is
    // order-insensitive equality of the sorted config lists
    auto a = configs();
    auto b = other.configs();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

ParetoFront frontier(const std::vector<EvalRecord>& records) {
    if (records.empty()) {
        throw std::invalid_argument("frontier: needs at least one record");
    }
    // duplicate-config re-evaluations collapse to the mean P
    std::map<QuantConfig, std::vector<const EvalRecord*>> by_config;
    for (const auto& r : records) by_config[r.config].push_back(&r);
    std::vector<EvalRecord> collapsed;
    collapsed.reserve(by_config.size());
    for (auto& [config, group] : by_config) {
        EvalRecord rec = *group.front();
        if (group.size() > 1) {
            double sum = 0.0;
            for (const EvalRecord* r : group) sum += r->performance;
            rec.performance = sum / static_cast<double>(group.size());
        }
        collapsed.push_back(std::move(rec));
    }

    std::sort(collapsed.begin(), collapsed.end(), [](const EvalRecord& a, const EvalRecord& b) {
        if (a.memory_bytes != b.memory_bytes) return a.memory_bytes < b.memory_bytes;
        if (a.performance != b.performance) return a.performance > b.performance;
        return a.config < b.config;
    });

    ParetoFront front;
    double best_p = -1.0;
    std::int64_t last_m = -1;
    for (auto& rec : collapsed) {
        if (rec.performance > best_p && rec.memory_bytes != last_m) {
            best_p = rec.performance;
            last_m = rec.memory_bytes;
            front.members.push_back(std::move(rec));
        }
    }
    return front;
}

double scalarized_objective(const EvalRecord& r, double lambda, const MemoryBounds& bounds) {
    return bounds.normalize(r.memory_bytes) - lambda * r.performance;
}

const EvalRecord& select(const ParetoFront& front, double lambda, const MemoryBounds& bounds) {
    if (front.members.empty()) {
        throw std::invalid_argument("select: empty frontier");
    }
    const EvalRecord* best = &front.members.front();
    double best_obj = scalarized_objective(*best, lambda, bounds);
    for (const auto& r : front.members) {
        const double obj = scalarized_objective(r, lambda, bounds);
        if (obj < best_obj ||
            (obj == best_obj && (r.memory_bytes < best->memory_bytes ||
                                 (r.memory_bytes == best->memory_bytes &&
                                  r.config < best->config)))) {
            best = &r;
            best_obj = obj;
        }
    }
    return *best;
}

bool stabilized(const std::vector<ParetoFront>& history, int window) {
    if (window < 1) throw std::invalid_argument("stabilized: window must be >= 1");
    if (history.size() < static_cast<std::size_t>(window) + 1) return false;
    const ParetoFront& last = history.back();
    for (std::size_t i = history.size() - static_cast<std::size_t>(window) - 1;
         i + 1 < history.size(); ++i) {
        if (!history[i].same_configs(last)) return false;
    }
    return true;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string frontier_csv(const ParetoFront& front, double lambda, const MemoryBounds& bounds) {
    std::string csv = "iteration,config,P,M_bytes,M_norm,objective\n";
    for (const auto& r : front.members) {
        csv += std::to_string(r.iteration);
        csv += ',';
        csv += r.config.to_digits();
        csv += ',';
        csv += format_double(r.performance);
        csv += ',';
        csv += std::to_string(r.memory_bytes);
        csv += ',';
        csv += format_double(bounds.normalize(r.memory_bytes));
        csv += ',';
        csv += format_double(scalarized_objective(r, lambda, bounds));
        csv += '\n';
    }
    return csv;
}

} // namespace mixq
