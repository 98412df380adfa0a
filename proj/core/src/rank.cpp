#include "efind/rank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace efind {

namespace {

int idx(ObjectType t) { return static_cast<int>(t); }

} // namespace

double RankConfig::lambda(ObjectType from, ObjectType to) const {
    if (use_lambda_matrix) return lambda_matrix[idx(from)][idx(to)];
    const bool pp = from == ObjectType::Paper && to == ObjectType::Paper;
    const bool aa = from == ObjectType::Author && to == ObjectType::Author;
    const bool vv = from == ObjectType::Venue && to == ObjectType::Venue;
    if (pp) return lambda_pp;
    if (aa) return lambda_aa;
    if (vv) return lambda_vv;
    const bool pa = (from == ObjectType::Paper && to == ObjectType::Author) ||
                    (from == ObjectType::Author && to == ObjectType::Paper);
    if (pa) return lambda_pa;
    return lambda_pv;   // paper<->venue (author<->venue has no relation)
}

double RankConfig::eta(ObjectType t) const {
    switch (t) {
        case ObjectType::Paper: return eta_p;
        case ObjectType::Author: return eta_a;
        case ObjectType::Venue: return eta_v;
    }
    return 0.0;
}

void RankConfig::set_lambda(const std::string& name, double value) {
    if (name == "pp") lambda_pp = value;
    else if (name == "pa" || name == "ap") lambda_pa = value;
    else if (name == "pv" || name == "vp") lambda_pv = value;
    else if (name == "aa") lambda_aa = value;
    else if (name == "vv") lambda_vv = value;
    else throw std::invalid_argument("unknown lambda name: " + name);
}

Transitions make_transitions(const RelevanceNetwork& net) {
    Transitions t;
    t.p_pp = transition(net.r_pp);
    t.p_ap = transition(net.r_ap);
    t.p_vp = transition(net.r_vp);
    t.p_aa = transition(net.r_aa);
    t.p_pa = transition(net.r_pa);
    t.p_vv = transition(net.r_vv);
    t.p_pv = transition(net.r_pv);
    return t;
}

RankState init_state(const RelevanceNetwork& net) {
    RankState s;
    auto uniform = [](std::size_t n) {
        return std::vector<double>(n, n ? 1.0 / static_cast<double>(n) : 0.0);
    };
    s.papers = uniform(net.papers.size());
    s.authors = uniform(net.authors.size());
    s.venues = uniform(net.venues.size());
    return s;
}

namespace {

struct Incoming {
    ObjectType from;
    const SparseMatrix* p;            // transition from-type -> to-type
    const std::vector<double>* r;     // r_from at t-1
};

std::vector<double> update_type(ObjectType to, std::span<const Incoming> incoming,
                                const std::vector<double>& restart,
                                const RankConfig& cfg) {
    if (restart.empty()) return {};
    const double eta = cfg.eta(to);
    std::vector<double> num(restart.size(), 0.0);
    double denom = eta;
    for (std::size_t i = 0; i < restart.size(); ++i) num[i] = eta * restart[i];

    for (const auto& in : incoming) {
        if (in.r->empty()) continue;   // empty source type drops out of the sums
        const double lambda = cfg.lambda(in.from, to);
        denom += lambda;
        if (lambda == 0.0) continue;
        auto contrib = in.p->left_multiply(*in.r);
        for (std::size_t i = 0; i < num.size(); ++i) num[i] += lambda * contrib[i];
    }

    if (denom > 0.0)
        for (auto& x : num) x /= denom;
    double total = 0.0;
    for (double x : num) total += x;
    if (total > 0.0)
        for (auto& x : num) x /= total;
    return num;
}

} // namespace

RankState step(const RankState& state, const Transitions& trans,
               const RelevanceNetwork& net, const RankConfig& cfg) {
    RankState next;
    auto restart = init_state(net);

    const Incoming into_papers[] = {
        {ObjectType::Paper, &trans.p_pp, &state.papers},
        {ObjectType::Author, &trans.p_ap, &state.authors},
        {ObjectType::Venue, &trans.p_vp, &state.venues},
    };
    const Incoming into_authors[] = {
        {ObjectType::Author, &trans.p_aa, &state.authors},
        {ObjectType::Paper, &trans.p_pa, &state.papers},
    };
    const Incoming into_venues[] = {
        {ObjectType::Venue, &trans.p_vv, &state.venues},
        {ObjectType::Paper, &trans.p_pv, &state.papers},
    };

    next.papers = update_type(ObjectType::Paper, into_papers, restart.papers, cfg);
    next.authors = update_type(ObjectType::Author, into_authors, restart.authors, cfg);
    next.venues = update_type(ObjectType::Venue, into_venues, restart.venues, cfg);

    auto l1 = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
        return s;
    };
    next.last_delta = l1(next.papers, state.papers) + l1(next.authors, state.authors) +
                      l1(next.venues, state.venues);
    next.iterations = state.iterations + 1;
    return next;
}

RankState step(const RankState& state, const RelevanceNetwork& net,
               const RankConfig& cfg) {
    return step(state, make_transitions(net), net, cfg);
}

RankState run(const RelevanceNetwork& net, const RankConfig& cfg) {
    const Transitions trans = make_transitions(net);
    RankState state = init_state(net);
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        state = step(state, trans, net, cfg);
        if (state.last_delta < cfg.tolerance) {
            state.converged = true;
            return state;
        }
    }
    state.converged = false;
    return state;
}

} // namespace efind
