#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "efind/network.hpp"

namespace efind {

enum class ObjectType { Paper = 0, Author = 1, Venue = 2 };

/// Walk weights. The five lambda scalars follow the symmetric convention
/// (lambda_pa covers both paper->author and author->paper); fully asymmetric
/// weights are available through the 3x3 override.
struct RankConfig {
    double lambda_pp = 1.0;
    double lambda_pa = 1.0;
    double lambda_pv = 1.0;
    double lambda_aa = 1.0;
    double lambda_vv = 1.0;

    double eta_p = 1.0;
    double eta_a = 1.0;
    double eta_v = 1.0;

    double tolerance = 1e-8;          // L1 change summed over all types
    std::size_t max_iterations = 100;

    bool use_lambda_matrix = false;   // when set, lambda_matrix[from][to] wins
    double lambda_matrix[3][3] = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};

    double lambda(ObjectType from, ObjectType to) const;
    double eta(ObjectType t) const;
    void set_lambda(const std::string& name, double value);   // "pp","pa","pv","aa","vv"
};

struct RankState {
    std::vector<double> papers;
    std::vector<double> authors;
    std::vector<double> venues;
    std::size_t iterations = 0;
    double last_delta = 0.0;
    bool converged = false;
};

/// Row-normalized transitions of every relation the walk uses.
struct Transitions {
    SparseMatrix p_pp, p_ap, p_vp;   // into papers
    SparseMatrix p_aa, p_pa;         // into authors
    SparseMatrix p_vv, p_pv;         // into venues
};

Transitions make_transitions(const RelevanceNetwork& net);

/// Uniform 1/|V_i| score vectors per type (empty types stay empty).
RankState init_state(const RelevanceNetwork& net);

/// One update of every type: (sum_j lambda_ji r_j P_ji + eta_i r_i^0) over
/// (sum_j lambda_ji + eta_i), then renormalized to a probability vector.
RankState step(const RankState& state, const Transitions& trans,
               const RelevanceNetwork& net, const RankConfig& cfg);
RankState step(const RankState& state, const RelevanceNetwork& net,
               const RankConfig& cfg);

/// Iterates until the summed L1 change drops below tolerance or the iteration
/// budget runs out (converged=false in that case, never an error).
RankState run(const RelevanceNetwork& net, const RankConfig& cfg);

} // namespace efind
