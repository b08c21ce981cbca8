#pragma once

// Closed-form convergence and message bounds, and observed-vs-predicted
// analysis over traces.
//
//   alpha_k       exact rational min_i 1/|N_i^-(k)|
//   phase_bound   (n-f-1) * ceil( log(eps/delta) / log(1 - alpha^(n-f-1)/2) )
//   message_bound phase_bound * k * n^2
//
// Bounds are evaluated in long double with the exact rational alpha and
// log1p, so the near-one logarithm does not cancel.

#include "wavg/conditions.hpp"
#include "wavg/sim.hpp"

namespace wavg {

// Always of the form 1/d here, but kept as a reduced pair for serialization.
struct Rational {
    long long num = 0;
    long long den = 1;
    long double value() const { return static_cast<long double>(num) / static_cast<long double>(den); }
    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

// alpha_k = min over nodes of 1/|N_i^-(k)|, i.e. 1 / max_i |N_i^-(k)|.
inline Rational alpha_k(const DiGraph& g, int k) {
    int largest = 0;
    for (NodeId i = 0; i < g.size(); ++i) {
        int sz = static_cast<int>(k_in_neighborhood(g, i, k).size());
        if (sz == 0)
            throw std::invalid_argument("alpha_k: node " + g.display(i) +
                                        " has no k-hop in-neighbor");
        largest = std::max(largest, sz);
    }
    return Rational{1, largest};
}

// Upper bound on the number of phases for eps-convergence. 0 when
// delta <= eps; the ceiling applies to the count of contraction steps.
inline double phase_bound(int n, int f, double eps, double delta, const Rational& alpha) {
    if (!(eps > 0)) throw std::invalid_argument("phase_bound: eps must be > 0");
    if (delta < 0) throw std::invalid_argument("phase_bound: delta must be >= 0");
    if (alpha.num <= 0 || alpha.den <= 0 || alpha.value() > 1.0L)
        throw std::invalid_argument("phase_bound: need 0 < alpha <= 1");
    const int m = n - f - 1;
    if (m < 1) throw std::invalid_argument("phase_bound: need n - f - 1 >= 1");
    if (delta <= eps) return 0.0;
    long double am = std::pow(alpha.value(), static_cast<long double>(m));
    long double denom = std::log1p(-am / 2.0L);             // log(1 - alpha^m/2) < 0
    long double quot = std::log(static_cast<long double>(eps) / delta) / denom;
    return static_cast<double>(m) * static_cast<double>(std::ceil(quot));
}

// Message ceiling until eps-convergence: phase_bound * k * n^2.
inline double message_bound(int n, int f, double eps, double delta, const Rational& alpha,
                            int k) {
    return phase_bound(n, f, eps, delta, alpha) * static_cast<double>(k) *
           static_cast<double>(n) * static_cast<double>(n);
}

struct ConvergenceReport {
    double delta = 0.0;                   // U[0] - mu[0]
    std::vector<double> gap_series;       // gap_series[p] = U[p] - mu[p]
    std::optional<int> p_epsilon;         // first completed phase with gap <= eps
    std::optional<long> rounds_to_eps;
    long messages_sent = 0;
    std::optional<Rational> alpha;        // absent when some node is isolated
    std::optional<double> phase_bound;
    std::optional<double> message_bound;
    bool validity_ok = true;
    double epsilon = 0.0;
    int effective_k = 1;
};

// Effective relay depth used in the bound formulas: 1 for LocWA, k for the
// k-hop kinds, n for the flooding kinds.
inline int effective_k(const ProtocolKind& kind, int n) { return kind.relay_depth(n); }

inline ConvergenceReport analyze(const Trace& trace, double eps) {
    if (!(eps > 0)) throw std::invalid_argument("analyze: eps must be > 0");
    const SimConfig& cfg = trace.config;
    const int n = cfg.g.size();

    ConvergenceReport rep;
    rep.epsilon = eps;
    rep.effective_k = effective_k(cfg.kind, n);

    const double u0 = *std::max_element(cfg.inputs.begin(), cfg.inputs.end());
    const double mu0 = *std::min_element(cfg.inputs.begin(), cfg.inputs.end());
    rep.delta = u0 - mu0;

    for (int p = 0; p <= trace.max_settled_phase; ++p) {
        auto gp = trace.gap(p);
        if (!gp) break;
        rep.gap_series.push_back(*gp);
        if (p >= 1 && !rep.p_epsilon && *gp <= eps) rep.p_epsilon = p;
    }
    if (rep.p_epsilon) {
        long r = 0;
        for (const auto& [key, round] : trace.completion_round)
            if (key.second <= *rep.p_epsilon) r = std::max(r, round);
        rep.rounds_to_eps = r;
    }
    rep.messages_sent = static_cast<long>(trace.messages.size());

    for (const auto& [key, v] : trace.value_of)
        if (v < mu0 || v > u0) rep.validity_ok = false;

    try {
        Rational a = alpha_k(cfg.g, rep.effective_k);
        rep.alpha = a;
        rep.phase_bound = phase_bound(n, cfg.f, eps, rep.delta, a);
        rep.message_bound = message_bound(n, cfg.f, eps, rep.delta, a, rep.effective_k);
    } catch (const std::invalid_argument&) {
        // isolated node or degenerate n-f-1: bounds stay absent
    }
    return rep;
}

inline json report_json(const ConvergenceReport& r) {
    json j;
    j["t"] = "report";
    j["delta"] = r.delta;
    j["epsilon"] = r.epsilon;
    j["gap_series"] = r.gap_series;
    if (r.p_epsilon) j["p_epsilon"] = *r.p_epsilon;
    if (r.rounds_to_eps) j["rounds_to_eps"] = *r.rounds_to_eps;
    j["messages_sent"] = r.messages_sent;
    j["k"] = r.effective_k;
    if (r.alpha) j["alpha_k"] = r.alpha->str();
    if (r.phase_bound) j["phase_bound"] = *r.phase_bound;
    if (r.message_bound) j["message_bound"] = *r.message_bound;
    j["validity_ok"] = r.validity_ok;
    return j;
}

inline std::string gap_csv(const ConvergenceReport& r) {
    std::ostringstream out;
    out << "phase,gap\n";
    for (size_t p = 0; p < r.gap_series.size(); ++p) out << p << "," << r.gap_series[p] << "\n";
    return out.str();
}

}  // namespace wavg
