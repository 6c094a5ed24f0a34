// Lindbladian assembly: labeled collapse operators, matrix-free application
// to density operators, and explicit sparse superoperator construction.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "ghzres/core.hpp"

namespace ghzres {

/// One jump operator with its (hypothetical) detection signal label,
/// e.g. {"1L","r"}, {"2+","i"}, {"U","r"}, {"3E","x"}, {"clock","st+"}.
struct LabeledCollapseOp {
    LocalOperator op;
    std::string label;
    std::string sub;
};

/// Immutable after assembly; safe for concurrent read-only application.
class LindbladianHandle {
  public:
    LindbladianHandle(SubsystemLayout layout,
                      std::vector<SparseMatrix> collapse,
                      std::vector<std::string> labels,
                      std::optional<SparseMatrix> hamiltonian)
        : layout_(std::move(layout)),
          collapse_(std::move(collapse)),
          labels_(std::move(labels)),
          hamiltonian_(std::move(hamiltonian)) {
        const long D = layout_.total_dim();
        anticomm_ = SparseMatrix(D, D);
        for (const auto& L : collapse_) anticomm_ += SparseMatrix(L.adjoint()) * L;
        anticomm_.makeCompressed();
        degenerate_warning_ = collapse_.empty() && !hamiltonian_;
    }

    const SubsystemLayout& layout() const { return layout_; }
    long dim() const { return layout_.total_dim(); }
    const std::vector<SparseMatrix>& collapse_ops() const { return collapse_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const SparseMatrix& anticommutator_part() const { return anticomm_; }
    bool degenerate_warning() const { return degenerate_warning_; }

    /// rho -> -i[H,rho] + sum_k L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho}.
    DenseMatrix apply(const DenseMatrix& rho) const {
        DenseMatrix out = DenseMatrix::Zero(rho.rows(), rho.cols());
        if (hamiltonian_) {
            const SparseMatrix& H = *hamiltonian_;
            out += cplx(0.0, -1.0) * (H * rho - rho * H);
        }
        for (const auto& L : collapse_) {
            DenseMatrix Lr = L * rho;
            out += Lr * L.adjoint();
        }
        out -= 0.5 * (anticomm_ * rho + rho * anticomm_);
        return out;
    }

    /// Explicit superoperator on column-major vec(rho):
    /// vec(A rho B) = (B^T kron A) vec(rho). Guarded by a row cap.
    SparseMatrix superoperator(long max_rows = 4'000'000) const {
        const long D = dim();
        if (D * D > max_rows)
            throw std::length_error("superoperator dimension exceeds materialization cap");
        SparseMatrix S(D * D, D * D);
        SparseMatrix I(D, D);
        I.setIdentity();
        for (const auto& L : collapse_) {
            SparseMatrix Lc = L.conjugate();
            S += Eigen::kroneckerProduct(Lc, L).eval();
        }
        SparseMatrix At = SparseMatrix(anticomm_.transpose());
        S -= 0.5 * Eigen::kroneckerProduct(At, I).eval();
        S -= 0.5 * Eigen::kroneckerProduct(I, anticomm_).eval();
        if (hamiltonian_) {
            const SparseMatrix& H = *hamiltonian_;
            SparseMatrix Ht = SparseMatrix(H.transpose());
            S += cplx(0.0, -1.0) * Eigen::kroneckerProduct(I, H).eval();
            S += cplx(0.0, 1.0) * Eigen::kroneckerProduct(Ht, I).eval();
        }
        S.makeCompressed();
        return S;
    }

    /// Largest jump rate (max amplitude^2 over channels), used for step-size guards.
    double max_rate() const { return max_rate_; }
    void set_max_rate(double r) { max_rate_ = r; }

  private:
    SubsystemLayout layout_;
    std::vector<SparseMatrix> collapse_;
    std::vector<std::string> labels_;
    std::optional<SparseMatrix> hamiltonian_;
    SparseMatrix anticomm_;
    bool degenerate_warning_ = false;
    double max_rate_ = 0.0;
};

inline LindbladianHandle assemble_lindbladian(const std::vector<LocalOperator>& hamiltonian_terms,
                                              const std::vector<LabeledCollapseOp>& collapse,
                                              const SubsystemLayout& layout) {
    std::vector<SparseMatrix> ops;
    std::vector<std::string> labels;
    double maxrate = 0.0;
    ops.reserve(collapse.size());
    for (const auto& c : collapse) {
        ops.push_back(embed(c.op, layout));
        labels.push_back(c.label + (c.sub.empty() ? "" : ":" + c.sub));
        maxrate = std::max(maxrate, c.op.amplitude * c.op.amplitude);
    }
    std::optional<SparseMatrix> H;
    if (!hamiltonian_terms.empty()) {
        const long D = layout.total_dim();
        SparseMatrix Hs(D, D);
        for (const auto& h : hamiltonian_terms) Hs += embed(h, layout);
        H = std::move(Hs);
    }
    LindbladianHandle handle(layout, std::move(ops), std::move(labels), std::move(H));
    handle.set_max_rate(maxrate);
    return handle;
}

inline DenseMatrix apply_lindbladian(const LindbladianHandle& handle, const DenseMatrix& rho) {
    return handle.apply(rho);
}

} // namespace ghzres
