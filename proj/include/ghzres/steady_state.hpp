// Steady-state computation for assembled Lindbladians: dense null space at
// desk scale, sparse factorization beyond, and an ancilla-block path that
// exploits the classical nature of the ancillas.
#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "ghzres/catalog.hpp"
#include "ghzres/lindblad.hpp"

namespace ghzres {

enum class SolveMethod { DenseNullSpace, SparseIterative, AncillaBlock, Auto };

struct SolverConfig {
    SolveMethod method = SolveMethod::Auto;
    double residual_tol = 1e-9;
    int max_iterations = 50;
    long dense_cap = 2000;          // superoperator dimension for the dense SVD path
    long dimension_cap = 4'000'000; // sparse superoperator materialization cap
    long rho_materialize_cap = 4096;
};

struct KernelDegenerateError : std::runtime_error {
    explicit KernelDegenerateError(int dim_estimate)
        : std::runtime_error("steady state not unique; estimated kernel dimension " +
                             std::to_string(dim_estimate)),
          kernel_dim(dim_estimate) {}
    int kernel_dim;
};

struct NoConvergenceError : std::runtime_error {
    explicit NoConvergenceError(double best)
        : std::runtime_error("steady-state solve did not reach tolerance; best residual " +
                             std::to_string(best)),
          best_residual(best) {}
    double best_residual;
};

struct AuditFailedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SteadyStateReport {
    DenseMatrix rho;                 // full-space density operator (may be empty above cap)
    std::vector<DenseMatrix> blocks; // ancilla-block representation when solved blockwise
    double ghz_fidelity = 0.0;
    double residual = 0.0;
    double min_eigenvalue = 0.0;
    double trace_error = 0.0;
    SolveMethod method = SolveMethod::Auto;
    int iterations = 0;
    double wall_time_s = 0.0;
    int kernel_dim = 1;
    std::vector<std::string> warnings;
};

namespace detail {

inline double ghz_fidelity_full(const DenseMatrix& rho, const SubsystemLayout& layout) {
    const DenseVector g = ghz_vector(layout);
    if (layout.num_ancilla() == 0) return std::real((g.adjoint() * rho * g)(0, 0));
    DenseMatrix rd = partial_trace_ancilla(rho, layout);
    return std::real((g.adjoint() * rd * g)(0, 0));
}

inline void finalize_hermitian(DenseMatrix& rho) {
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const cplx tr = rho.trace();
    rho /= tr;
}

inline double min_eigenvalue_of(const DenseMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Solve S x = 0 with trace(x) = 1 by replacing the balance row of the (0,0)
// element with the trace functional. Valid when the kernel is 1-dimensional.
inline DenseVector trace_replaced_solve(SparseMatrix S, long D) {
    for (long k = 0; k < S.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(S, k); it; ++it)
            if (it.row() == 0) it.valueRef() = cplx(0.0, 0.0);
    SparseMatrix traceRow(D * D, D * D);
    {
        std::vector<Triplet> t;
        t.reserve(D);
        for (long i = 0; i < D; ++i) t.emplace_back(0, i * D + i, cplx(1.0, 0.0));
        traceRow.setFromTriplets(t.begin(), t.end());
    }
    S += traceRow;
    S.makeCompressed();
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(S);
    if (lu.info() != Eigen::Success)
        throw KernelDegenerateError(2); // singular after trace replacement
    DenseVector b = DenseVector::Zero(D * D);
    b(0) = 1.0;
    DenseVector x = lu.solve(b);
    if (lu.info() != Eigen::Success) throw NoConvergenceError(std::nan(""));
    return x;
}

} // namespace detail

/// Block decomposition of a collapse operator over ancilla configurations:
/// for each global ancilla config a the operator acts as |phi(a)><a| (x) B.
struct BlockOp {
    std::vector<long> target;  // phi(a), or -1 when the op does not fire from a
    std::vector<int> data_op;  // index into the data-operator pool, -1 if idle
};

class AncillaBlockStructure {
  public:
    AncillaBlockStructure(const ReservoirSpec& spec, const std::vector<LabeledCollapseOp>& errors) {
        auto audit = ancilla_classical_audit(spec);
        if (!audit.passed)
            throw AuditFailedError("ancilla coherence audit failed: " + audit.failures.front());
        const auto& layout = spec.layout;
        if (!layout.data_first()) throw AuditFailedError("block solver expects data-first layout");
        n_data_ = layout.num_data();
        anc_sites_ = layout.ancilla_sites();
        data_dim_ = layout.data_dim();
        anc_dim_ = layout.ancilla_dim();

        SubsystemLayout data_layout = [&] {
            std::vector<Site> s;
            for (int k : layout.data_sites()) s.push_back(layout.site(k));
            return SubsystemLayout(std::move(s));
        }();
        data_layout_ = data_layout;

        std::vector<LabeledCollapseOp> all = spec.collapse_ops;
        all.insert(all.end(), errors.begin(), errors.end());

        std::vector<long> anc_strides(anc_sites_.size());
        {
            long s = 1;
            for (int i = static_cast<int>(anc_sites_.size()) - 1; i >= 0; --i) {
                anc_strides[i] = s;
                s *= layout.dim(anc_sites_[i]);
            }
        }
        auto anc_index_of = [&](int site) {
            for (size_t i = 0; i < anc_sites_.size(); ++i)
                if (anc_sites_[i] == site) return static_cast<int>(i);
            return -1;
        };

        for (const auto& c : all) {
            // split local sites into ancilla and data positions
            std::vector<int> apos, dpos;
            for (size_t i = 0; i < c.op.sites.size(); ++i) {
                if (layout.site(c.op.sites[i]).role == SiteRole::Ancilla)
                    apos.push_back(static_cast<int>(i));
                else
                    dpos.push_back(static_cast<int>(i));
            }
            std::vector<int> ldims(c.op.sites.size());
            for (size_t i = 0; i < c.op.sites.size(); ++i) ldims[i] = layout.dim(c.op.sites[i]);
            long la = 1, ld = 1;
            for (int i : apos) la *= ldims[i];
            for (int i : dpos) ld *= ldims[i];

            // extract (a_row, a_col) -> data block
            std::map<std::pair<long, long>, DenseMatrix> blocks;
            const long L = c.op.matrix.rows();
            auto split = [&](long idx) {
                std::vector<int> dig(ldims.size());
                for (int i = static_cast<int>(ldims.size()) - 1; i >= 0; --i) {
                    dig[i] = static_cast<int>(idx % ldims[i]);
                    idx /= ldims[i];
                }
                long a = 0, d = 0;
                for (int i : apos) a = a * ldims[i] + dig[i];
                for (int i : dpos) d = d * ldims[i] + dig[i];
                return std::pair<long, long>(a, d);
            };
            for (long r = 0; r < L; ++r)
                for (long cc = 0; cc < L; ++cc) {
                    const cplx v = c.op.matrix(r, cc);
                    if (v == cplx(0.0, 0.0)) continue;
                    auto [ar, dr] = split(r);
                    auto [ac, dc] = split(cc);
                    auto& B = blocks
                                  .try_emplace(std::make_pair(ar, ac),
                                               DenseMatrix::Zero(ld, ld))
                                  .first->second;
                    B(dr, dc) += v * c.op.amplitude;
                }

            // embed each block's data factor into the data space
            BlockOp bop;
            bop.target.assign(anc_dim_, -1);
            bop.data_op.assign(anc_dim_, -1);
            std::map<std::pair<long, long>, int> pool_index;
            std::vector<int> local_anc_dims;
            for (int i : apos) local_anc_dims.push_back(ldims[i]);
            std::vector<int> local_anc_sites;
            for (int i : apos) local_anc_sites.push_back(anc_index_of(c.op.sites[i]));

            std::vector<int> data_sites_local;
            for (int i : dpos) data_sites_local.push_back(c.op.sites[i]); // data indices coincide

            for (const auto& [key, B] : blocks) {
                int pool;
                auto it = pool_index.find(key);
                if (it == pool_index.end()) {
                    SparseMatrix Bemb;
                    if (dpos.empty()) {
                        Bemb = SparseMatrix(data_dim_, data_dim_);
                        Bemb.setIdentity();
                        Bemb *= B(0, 0);
                    } else {
                        Bemb = embed(LocalOperator{data_sites_local, B, 1.0}, data_layout_);
                    }
                    pool = static_cast<int>(data_pool_.size());
                    data_pool_.push_back(std::move(Bemb));
                    pool_index[key] = pool;
                } else {
                    pool = it->second;
                }
                // enumerate global ancilla configs matching the local column pattern
                const long a_col = key.second, a_row = key.first;
                for (long g = 0; g < anc_dim_; ++g) {
                    long rem = a_col;
                    bool match = true;
                    long gt = g;
                    // decode local digits of column pattern (most significant first)
                    std::vector<int> cdig(local_anc_dims.size());
                    for (int i = static_cast<int>(local_anc_dims.size()) - 1; i >= 0; --i) {
                        cdig[i] = static_cast<int>(rem % local_anc_dims[i]);
                        rem /= local_anc_dims[i];
                    }
                    std::vector<int> rdig(local_anc_dims.size());
                    long rrem = a_row;
                    for (int i = static_cast<int>(local_anc_dims.size()) - 1; i >= 0; --i) {
                        rdig[i] = static_cast<int>(rrem % local_anc_dims[i]);
                        rrem /= local_anc_dims[i];
                    }
                    for (size_t i = 0; i < local_anc_sites.size(); ++i) {
                        const long digit = (g / anc_strides[local_anc_sites[i]]) %
                                           local_anc_dims[i];
                        if (digit != cdig[i]) { match = false; break; }
                    }
                    if (!match) continue;
                    for (size_t i = 0; i < local_anc_sites.size(); ++i) {
                        const long stride = anc_strides[local_anc_sites[i]];
                        const long old_digit = (gt / stride) % local_anc_dims[i];
                        gt += (rdig[i] - old_digit) * stride;
                    }
                    if (bop.target[g] != -1)
                        throw AuditFailedError("operator fires twice from one ancilla configuration");
                    bop.target[g] = gt;
                    bop.data_op[g] = pool;
                }
            }
            block_ops_.push_back(std::move(bop));
        }
    }

    long anc_dim() const { return anc_dim_; }
    long data_dim() const { return data_dim_; }
    const SubsystemLayout& data_layout() const { return data_layout_; }

    /// Sparse generator over unknowns x = (vec(rho_a))_a, column-major per block.
    SparseMatrix generator() const {
        const long Dd = data_dim_;
        const long block = Dd * Dd;
        const long N = anc_dim_ * block;
        SparseMatrix I(Dd, Dd);
        I.setIdentity();
        // per-pool pieces, shared across ancilla configurations
        std::vector<SparseMatrix> jump_pool(data_pool_.size()), anti_pool(data_pool_.size());
        for (size_t p = 0; p < data_pool_.size(); ++p) {
            const SparseMatrix& B = data_pool_[p];
            jump_pool[p] = Eigen::kroneckerProduct(SparseMatrix(B.conjugate()), B).eval();
            SparseMatrix BdB = SparseMatrix(B.adjoint()) * B;
            anti_pool[p] = (Eigen::kroneckerProduct(I, BdB).eval() +
                            Eigen::kroneckerProduct(SparseMatrix(BdB.transpose()), I).eval());
        }
        std::vector<Triplet> trips;
        for (const auto& bop : block_ops_) {
            for (long a = 0; a < anc_dim_; ++a) {
                const int p = bop.data_op[a];
                if (p < 0) continue;
                const long rowOff = bop.target[a] * block, colOff = a * block;
                const SparseMatrix& jump = jump_pool[p];
                for (long k = 0; k < jump.outerSize(); ++k)
                    for (SparseMatrix::InnerIterator it(jump, k); it; ++it)
                        trips.emplace_back(rowOff + it.row(), colOff + it.col(), it.value());
                const SparseMatrix& anti = anti_pool[p];
                for (long k = 0; k < anti.outerSize(); ++k)
                    for (SparseMatrix::InnerIterator it(anti, k); it; ++it)
                        trips.emplace_back(colOff + it.row(), colOff + it.col(), -0.5 * it.value());
            }
        }
        SparseMatrix S(N, N);
        S.setFromTriplets(trips.begin(), trips.end());
        return S;
    }

  private:
    int n_data_ = 0;
    std::vector<int> anc_sites_;
    long data_dim_ = 0, anc_dim_ = 0;
    SubsystemLayout data_layout_;
    std::vector<SparseMatrix> data_pool_;
    std::vector<BlockOp> block_ops_;
};

inline double ghz_fidelity(const DenseMatrix& rho, const SubsystemLayout& layout) {
    return detail::ghz_fidelity_full(rho, layout);
}

inline SteadyStateReport solve_steady_state(const ReservoirSpec& spec,
                                            const std::vector<LabeledCollapseOp>& errors = {},
                                            const SolverConfig& config = {}) {
    if (!(config.residual_tol > 0)) throw std::invalid_argument("residual_tol must be > 0");
    const auto t0 = std::chrono::steady_clock::now();
    const long D = spec.layout.total_dim();

    SolveMethod method = config.method;
    if (method == SolveMethod::Auto) {
        if (spec.layout.num_ancilla() > 0 && ancilla_classical_audit(spec).passed)
            method = SolveMethod::AncillaBlock;
        else if (D * D <= config.dense_cap)
            method = SolveMethod::DenseNullSpace;
        else
            method = SolveMethod::SparseIterative;
    }

    std::vector<LabeledCollapseOp> all = spec.collapse_ops;
    all.insert(all.end(), errors.begin(), errors.end());
    LindbladianHandle handle = assemble_lindbladian({}, all, spec.layout);

    SteadyStateReport rep;
    rep.method = method;
    rep.warnings = spec.warnings;

    if (method == SolveMethod::AncillaBlock) {
        AncillaBlockStructure bs(spec, errors);
        const long Dd = bs.data_dim();
        const long block = Dd * Dd;
        const long Na = bs.anc_dim();
        const SparseMatrix Sgen = bs.generator();
        SparseMatrix S = Sgen;
        // trace row over all blocks' diagonal entries
        for (long k = 0; k < S.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(S, k); it; ++it)
                if (it.row() == 0) it.valueRef() = cplx(0.0, 0.0);
        {
            std::vector<Triplet> t;
            for (long a = 0; a < Na; ++a)
                for (long i = 0; i < Dd; ++i) t.emplace_back(0, a * block + i * Dd + i, cplx(1.0, 0.0));
            SparseMatrix traceRow(Na * block, Na * block);
            traceRow.setFromTriplets(t.begin(), t.end());
            S += traceRow;
        }
        S.makeCompressed();
        Eigen::SparseLU<SparseMatrix> lu;
        lu.compute(S);
        if (lu.info() != Eigen::Success) throw KernelDegenerateError(2);
        DenseVector b = DenseVector::Zero(Na * block);
        b(0) = 1.0;
        DenseVector x = lu.solve(b);

        rep.blocks.resize(Na);
        cplx tr = 0.0;
        for (long a = 0; a < Na; ++a) {
            DenseMatrix ra = Eigen::Map<const DenseMatrix>(x.data() + a * block, Dd, Dd);
            ra = 0.5 * (ra + ra.adjoint()).eval();
            rep.blocks[a] = ra;
            tr += ra.trace();
        }
        for (auto& ra : rep.blocks) ra /= tr;

        const DenseVector g = ghz_vector(spec.layout);
        double fid = 0.0, mineig = 0.0;
        for (const auto& ra : rep.blocks) {
            fid += std::real((g.adjoint() * ra * g)(0, 0));
            mineig = std::min(mineig, detail::min_eigenvalue_of(ra));
        }
        rep.ghz_fidelity = fid;
        rep.min_eigenvalue = mineig;

        // residual and full rho via the ancilla-diagonal full-space embedding
        if (D <= config.rho_materialize_cap) {
            DenseMatrix rho = DenseMatrix::Zero(D, D);
            const long Da = spec.layout.ancilla_dim();
            for (long a = 0; a < Da; ++a)
                for (long i = 0; i < Dd; ++i)
                    for (long j = 0; j < Dd; ++j) rho(i * Da + a, j * Da + a) = rep.blocks[a](i, j);
            rep.rho = rho;
            rep.residual = handle.apply(rho).norm();
            rep.trace_error = std::abs(rho.trace() - cplx(1.0, 0.0));
        } else {
            DenseVector xs = DenseVector::Zero(Na * block);
            for (long a = 0; a < Na; ++a)
                Eigen::Map<DenseMatrix>(xs.data() + a * block, Dd, Dd) = rep.blocks[a];
            rep.residual = (Sgen * xs).norm();
            rep.trace_error = 0.0; // blocks normalized exactly above
        }
        if (rep.residual > config.residual_tol * 10) throw NoConvergenceError(rep.residual);
    } else if (method == SolveMethod::DenseNullSpace) {
        SparseMatrix S = handle.superoperator(config.dimension_cap);
        DenseMatrix Sd = DenseMatrix(S);
        Eigen::BDCSVD<DenseMatrix> svd(Sd, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        const long N2 = sv.size();
        const double smin = sv(N2 - 1);
        const double thresh = std::max(1e3 * smin, sv(0) * 1e-12);
        int kdim = 0;
        for (long i = 0; i < N2; ++i) kdim += (sv(i) <= thresh);
        rep.kernel_dim = std::max(kdim, 1);
        if (rep.kernel_dim > 1) throw KernelDegenerateError(rep.kernel_dim);
        DenseVector x = svd.matrixV().col(N2 - 1);
        DenseMatrix rho = Eigen::Map<const DenseMatrix>(x.data(), D, D);
        detail::finalize_hermitian(rho);
        rep.rho = rho;
        rep.residual = handle.apply(rho).norm();
        rep.ghz_fidelity = detail::ghz_fidelity_full(rho, spec.layout);
        rep.min_eigenvalue = detail::min_eigenvalue_of(rho);
        rep.trace_error = std::abs(rho.trace() - cplx(1.0, 0.0));
        if (rep.residual > config.residual_tol * 10) throw NoConvergenceError(rep.residual);
    } else {
        SparseMatrix S = handle.superoperator(config.dimension_cap);
        DenseVector x = detail::trace_replaced_solve(std::move(S), D);
        DenseMatrix rho = Eigen::Map<const DenseMatrix>(x.data(), D, D);
        detail::finalize_hermitian(rho);
        rep.rho = rho;
        rep.residual = handle.apply(rho).norm();
        rep.ghz_fidelity = detail::ghz_fidelity_full(rho, spec.layout);
        if (D <= config.rho_materialize_cap) rep.min_eigenvalue = detail::min_eigenvalue_of(rho);
        rep.trace_error = std::abs(rho.trace() - cplx(1.0, 0.0));
        if (rep.residual > config.residual_tol * 10) throw NoConvergenceError(rep.residual);
    }

    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

/// Ancilla-block solve with the audit as a hard precondition.
inline SteadyStateReport solve_block(const ReservoirSpec& spec,
                                     const std::vector<LabeledCollapseOp>& errors = {},
                                     SolverConfig config = {}) {
    auto audit = ancilla_classical_audit(spec);
    if (!audit.passed) throw AuditFailedError(audit.failures.front());
    config.method = SolveMethod::AncillaBlock;
    return solve_steady_state(spec, errors, config);
}

/// Fourth-order fixed-step integration; returns the GHZ fidelity after every step.
inline std::vector<double> time_evolve(const ReservoirSpec& spec,
                                       const std::vector<LabeledCollapseOp>& errors,
                                       DenseMatrix rho, double dt, int steps) {
    std::vector<LabeledCollapseOp> all = spec.collapse_ops;
    all.insert(all.end(), errors.begin(), errors.end());
    LindbladianHandle handle = assemble_lindbladian({}, all, spec.layout);
    if (dt * handle.max_rate() > 0.1)
        throw std::invalid_argument("time step too large: dt * max rate must be <= 0.1");
    std::vector<double> fids;
    fids.reserve(steps);
    for (int s = 0; s < steps; ++s) {
        DenseMatrix k1 = handle.apply(rho);
        DenseMatrix k2 = handle.apply(rho + 0.5 * dt * k1);
        DenseMatrix k3 = handle.apply(rho + 0.5 * dt * k2);
        DenseMatrix k4 = handle.apply(rho + dt * k3);
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        fids.push_back(detail::ghz_fidelity_full(rho, spec.layout));
    }
    return fids;
}

/// Regression snapshot: small header (dims, scheme, rates) + row-major complex doubles.
inline void write_rho_dump(const std::string& path, const SteadyStateReport& rep,
                           const ReservoirSpec& spec) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    const char magic[4] = {'G', 'H', 'Z', 'R'};
    std::fwrite(magic, 1, 4, f);
    std::int32_t version = 1, nsites = spec.layout.num_sites(), scheme = static_cast<int>(spec.scheme);
    std::fwrite(&version, sizeof version, 1, f);
    std::fwrite(&scheme, sizeof scheme, 1, f);
    std::fwrite(&nsites, sizeof nsites, 1, f);
    for (int k = 0; k < nsites; ++k) {
        std::int32_t d = spec.layout.dim(k);
        std::fwrite(&d, sizeof d, 1, f);
    }
    const double rates[10] = {spec.rates.kappa_u, spec.rates.kappa_d,  spec.rates.kappa_t,
                              spec.rates.kappa_st, spec.rates.kappa_r, spec.rates.kappa_c,
                              spec.rates.kappa_f, spec.rates.kappa_x,  spec.rates.kappa_z,
                              spec.rates.kappa_p};
    std::fwrite(rates, sizeof(double), 10, f);
    const long D = rep.rho.rows();
    for (long i = 0; i < D; ++i)
        for (long j = 0; j < D; ++j) {
            const cplx v = rep.rho(i, j);
            const double re = v.real(), im = v.imag();
            std::fwrite(&re, sizeof re, 1, f);
            std::fwrite(&im, sizeof im, 1, f);
        }
    std::fclose(f);
}

} // namespace ghzres
