// Finite labeled continuous-time Markov chains: generator construction with
// conservation enforced from the off-diagonals, stationary solves, exports.
#pragma once

#include <fstream>
#include <map>
#include <stack>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "ghzres/core.hpp"

namespace ghzres {

/// Column-convention generator: dp/dt = A p, off-diagonals >= 0, columns sum to 0.
struct CtmcModel {
    std::vector<std::string> states;
    SparseMatrixD generator;
    bool irreducible = false;

    long num_states() const { return static_cast<long>(states.size()); }
    long index_of(const std::string& label) const {
        for (long i = 0; i < num_states(); ++i)
            if (states[i] == label) return i;
        throw std::out_of_range("no such state: " + label);
    }
};

/// Accumulates off-diagonal rates; the diagonal is always recomputed, never
/// trusted from construction.
class CtmcBuilder {
  public:
    explicit CtmcBuilder(std::vector<std::string> states) : states_(std::move(states)) {
        for (size_t i = 0; i < states_.size(); ++i) index_[states_[i]] = static_cast<long>(i);
    }

    void add_rate(long from, long to, double rate) {
        if (rate < 0) throw std::invalid_argument("transition rate must be >= 0");
        if (from == to || rate == 0.0) return; // self-loops carry no probability flow
        triplets_.emplace_back(to, from, rate);
        diag_[from] += rate;
    }
    void add_rate(const std::string& from, const std::string& to, double rate) {
        add_rate(index_.at(from), index_.at(to), rate);
    }

    CtmcModel build() {
        const long N = static_cast<long>(states_.size());
        for (const auto& [s, total] : diag_) triplets_.emplace_back(s, s, -total);
        SparseMatrixD A(N, N);
        A.setFromTriplets(triplets_.begin(), triplets_.end());
        CtmcModel model{states_, std::move(A), false};
        model.irreducible = strongly_connected(model.generator);
        return model;
    }

  private:
    static bool strongly_connected(const SparseMatrixD& A) {
        const long N = A.rows();
        if (N <= 1) return true;
        std::vector<std::vector<long>> fwd(N), bwd(N);
        for (long k = 0; k < A.outerSize(); ++k)
            for (SparseMatrixD::InnerIterator it(A, k); it; ++it) {
                if (it.row() == it.col() || it.value() <= 0) continue;
                fwd[it.col()].push_back(it.row());
                bwd[it.row()].push_back(it.col());
            }
        auto full_reach = [N](const std::vector<std::vector<long>>& adj) {
            std::vector<char> seen(N, 0);
            std::stack<long> st;
            st.push(0);
            seen[0] = 1;
            long count = 1;
            while (!st.empty()) {
                long v = st.top();
                st.pop();
                for (long w : adj[v])
                    if (!seen[w]) {
                        seen[w] = 1;
                        ++count;
                        st.push(w);
                    }
            }
            return count == N;
        };
        return full_reach(fwd) && full_reach(bwd);
    }

    std::vector<std::string> states_;
    std::map<std::string, long> index_;
    std::map<long, double> diag_;
    std::vector<Eigen::Triplet<double>> triplets_;
};

struct ChainReport {
    Eigen::VectorXd distribution;
    double residual = 0.0;
    std::map<std::string, double> aggregates;
};

/// Unique stationary vector via one balance row replaced by normalization.
inline ChainReport ctmc_stationary(const CtmcModel& model) {
    if (!model.irreducible) throw std::runtime_error("chain is reducible; stationary state not unique");
    const long N = model.num_states();
    SparseMatrixD M = model.generator;
    for (long k = 0; k < M.outerSize(); ++k)
        for (SparseMatrixD::InnerIterator it(M, k); it; ++it)
            if (it.row() == 0) it.valueRef() = 0.0;
    {
        SparseMatrixD ones(N, N);
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(N);
        for (long i = 0; i < N; ++i) t.emplace_back(0, i, 1.0);
        ones.setFromTriplets(t.begin(), t.end());
        M += ones;
    }
    M.makeCompressed();
    Eigen::SparseLU<SparseMatrixD> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success) throw std::runtime_error("stationary solve failed (singular system)");
    Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
    b(0) = 1.0;
    Eigen::VectorXd p = lu.solve(b);
    p /= p.sum();
    ChainReport rep;
    rep.distribution = p;
    rep.residual = (model.generator * p).lpNorm<Eigen::Infinity>();
    return rep;
}

/// Plain-text edge list (state_from, state_to, rate), tab separated.
inline void export_edge_list(const CtmcModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    const auto& A = model.generator;
    for (long k = 0; k < A.outerSize(); ++k)
        for (SparseMatrixD::InnerIterator it(A, k); it; ++it) {
            if (it.row() == it.col()) continue;
            out << model.states[it.col()] << '\t' << model.states[it.row()] << '\t' << it.value()
                << '\n';
        }
}

} // namespace ghzres
