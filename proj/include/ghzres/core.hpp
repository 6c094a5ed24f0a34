// Multipartite Hilbert-space bookkeeping: subsystem layouts, local operators
// and their sparse embedding into the full tensor-product space.
#pragma once

#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace ghzres {

using cplx = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;
using SparseMatrixD = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<cplx>;

enum class SiteRole { Data, Ancilla };

struct Site {
    SiteRole role;
    int dim;
    std::vector<std::string> levels;
};

/// Ordered chain of subsystems. Data sites come first, ancilla sites after,
/// matching the double-chain picture; indices are 0-based throughout.
class SubsystemLayout {
  public:
    SubsystemLayout() = default;

    explicit SubsystemLayout(std::vector<Site> sites) : sites_(std::move(sites)) {
        validate();
        strides_.resize(sites_.size());
        long s = 1;
        for (int k = static_cast<int>(sites_.size()) - 1; k >= 0; --k) {
            strides_[k] = s;
            s *= sites_[k].dim;
        }
        total_ = s;
    }

    static SubsystemLayout qubits(int n) {
        std::vector<Site> s(n, Site{SiteRole::Data, 2, {"0", "1"}});
        return SubsystemLayout(std::move(s));
    }

    static SubsystemLayout qutrits(int n) {
        std::vector<Site> s(n, Site{SiteRole::Data, 3, {"0", "1", "2"}});
        return SubsystemLayout(std::move(s));
    }

    /// n data qubits followed by m ancillas with the given level labels.
    static SubsystemLayout double_chain(int n, int m, std::vector<std::string> ancilla_levels) {
        std::vector<Site> s;
        s.reserve(n + m);
        for (int k = 0; k < n; ++k) s.push_back(Site{SiteRole::Data, 2, {"0", "1"}});
        const int d = static_cast<int>(ancilla_levels.size());
        for (int k = 0; k < m; ++k) s.push_back(Site{SiteRole::Ancilla, d, ancilla_levels});
        return SubsystemLayout(std::move(s));
    }

    int num_sites() const { return static_cast<int>(sites_.size()); }
    const Site& site(int k) const { return sites_.at(k); }
    int dim(int k) const { return sites_.at(k).dim; }
    long total_dim() const { return total_; }
    long stride(int k) const { return strides_.at(k); }

    int num_data() const { return count(SiteRole::Data); }
    int num_ancilla() const { return count(SiteRole::Ancilla); }

    long data_dim() const {
        long d = 1;
        for (const auto& s : sites_)
            if (s.role == SiteRole::Data) d *= s.dim;
        return d;
    }
    long ancilla_dim() const {
        long d = 1;
        for (const auto& s : sites_)
            if (s.role == SiteRole::Ancilla) d *= s.dim;
        return d;
    }

    std::vector<int> data_sites() const { return indices(SiteRole::Data); }
    std::vector<int> ancilla_sites() const { return indices(SiteRole::Ancilla); }

    /// True when sites appear as all data first, then all ancillas.
    bool data_first() const {
        bool seen_anc = false;
        for (const auto& s : sites_) {
            if (s.role == SiteRole::Ancilla) seen_anc = true;
            else if (seen_anc) return false;
        }
        return true;
    }

  private:
    int count(SiteRole r) const {
        int c = 0;
        for (const auto& s : sites_) c += (s.role == r);
        return c;
    }
    std::vector<int> indices(SiteRole r) const {
        std::vector<int> out;
        for (int k = 0; k < num_sites(); ++k)
            if (sites_[k].role == r) out.push_back(k);
        return out;
    }
    void validate() const {
        int ndata = 0;
        for (const auto& s : sites_) {
            if (s.dim < 2) throw std::invalid_argument("site dimension must be >= 2");
            if (static_cast<int>(s.levels.size()) != s.dim)
                throw std::invalid_argument("level label count must equal site dimension");
            for (size_t i = 0; i < s.levels.size(); ++i)
                for (size_t j = i + 1; j < s.levels.size(); ++j)
                    if (s.levels[i] == s.levels[j])
                        throw std::invalid_argument("level labels must be unique per site");
            ndata += (s.role == SiteRole::Data);
        }
        if (ndata < 2) throw std::invalid_argument("layout needs at least 2 data sites");
    }

    std::vector<Site> sites_;
    std::vector<long> strides_;
    long total_ = 0;
};

/// Operator acting nontrivially on 1-3 sites; `matrix` is dense over the
/// product of those sites' dimensions in the order they appear in `sites`,
/// `amplitude` carries the sqrt-rate prefactor.
struct LocalOperator {
    std::vector<int> sites;
    DenseMatrix matrix;
    double amplitude = 1.0;
};

namespace detail {

inline void check_local_op(const LocalOperator& op, const SubsystemLayout& layout) {
    if (op.sites.empty() || op.sites.size() > 3)
        throw std::invalid_argument("local operator must touch 1-3 sites");
    long loc = 1;
    for (size_t i = 0; i < op.sites.size(); ++i) {
        const int s = op.sites[i];
        if (s < 0 || s >= layout.num_sites()) throw std::out_of_range("site index out of range");
        for (size_t j = i + 1; j < op.sites.size(); ++j)
            if (op.sites[j] == s) throw std::invalid_argument("local operator sites must be distinct");
        loc *= layout.dim(s);
    }
    if (op.matrix.rows() != loc || op.matrix.cols() != loc)
        throw std::invalid_argument("local matrix dimension inconsistent with sites");
}

} // namespace detail

/// Kronecker embedding I (x) op (x) I into the layout's full space, with
/// non-adjacent sites handled by index arithmetic. O(nnz(op) * dim(rest)).
inline SparseMatrix embed(const LocalOperator& op, const SubsystemLayout& layout) {
    detail::check_local_op(op, layout);
    const long D = layout.total_dim();
    const int nloc = static_cast<int>(op.sites.size());

    long loc_dim = 1;
    std::vector<int> ldims(nloc);
    for (int i = 0; i < nloc; ++i) {
        ldims[i] = layout.dim(op.sites[i]);
        loc_dim *= ldims[i];
    }

    // Enumerate the untouched factor once; every full-space index splits as
    // (local digits at op.sites, rest index).
    std::vector<int> rest_sites;
    for (int k = 0; k < layout.num_sites(); ++k) {
        bool touched = false;
        for (int s : op.sites) touched |= (s == k);
        if (!touched) rest_sites.push_back(k);
    }
    long rest_dim = 1;
    for (int k : rest_sites) rest_dim *= layout.dim(k);

    // base[r] = full-space offset of rest-configuration r with local digits 0.
    std::vector<long> base(rest_dim, 0);
    {
        std::vector<int> digit(rest_sites.size(), 0);
        for (long r = 0; r < rest_dim; ++r) {
            long off = 0;
            for (size_t i = 0; i < rest_sites.size(); ++i) off += digit[i] * layout.stride(rest_sites[i]);
            base[r] = off;
            for (int i = static_cast<int>(rest_sites.size()) - 1; i >= 0; --i) {
                if (++digit[i] < layout.dim(rest_sites[i])) break;
                digit[i] = 0;
            }
        }
    }

    auto local_offset = [&](long lidx) {
        long off = 0;
        for (int i = nloc - 1; i >= 0; --i) {
            off += (lidx % ldims[i]) * layout.stride(op.sites[i]);
            lidx /= ldims[i];
        }
        return off;
    };

    std::vector<Triplet> trips;
    for (long lc = 0; lc < loc_dim; ++lc) {
        const long coff = local_offset(lc);
        for (long lr = 0; lr < loc_dim; ++lr) {
            const cplx v = op.matrix(lr, lc);
            if (v == cplx(0.0, 0.0)) continue;
            const long roff = local_offset(lr);
            for (long r = 0; r < rest_dim; ++r)
                trips.emplace_back(base[r] + roff, base[r] + coff, op.amplitude * v);
        }
    }
    SparseMatrix out(D, D);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

// --- small state helpers -------------------------------------------------

inline DenseVector basis_ket(int dim, int i) {
    DenseVector v = DenseVector::Zero(dim);
    v(i) = 1.0;
    return v;
}

inline DenseVector plus_ket(int dim) {
    DenseVector v = DenseVector::Zero(dim);
    v(0) = v(1) = 1.0 / std::sqrt(2.0);
    return v;
}

inline DenseVector minus_ket(int dim) {
    DenseVector v = DenseVector::Zero(dim);
    v(0) = 1.0 / std::sqrt(2.0);
    v(1) = -1.0 / std::sqrt(2.0);
    return v;
}

inline DenseMatrix ketbra(const DenseVector& a, const DenseVector& b) { return a * b.adjoint(); }

/// (|00..0> + |11..1>)/sqrt(2) over the data sites' {0,1} sub-levels,
/// as a vector on the full space only if the layout is ancilla-free,
/// otherwise on the data factor.
inline DenseVector ghz_vector(const SubsystemLayout& layout) {
    const long Dd = layout.data_dim();
    DenseVector g = DenseVector::Zero(Dd);
    long i1 = 0;
    long stride = 1;
    std::vector<int> ddims;
    for (int s : layout.data_sites()) ddims.push_back(layout.dim(s));
    for (int i = static_cast<int>(ddims.size()) - 1; i >= 0; --i) {
        i1 += stride; // digit 1 at every data site
        stride *= ddims[i];
    }
    g(0) = 1.0 / std::sqrt(2.0);
    g(i1) += 1.0 / std::sqrt(2.0);
    return g;
}

/// Partial trace over all ancilla sites (layout must be data-first).
inline DenseMatrix partial_trace_ancilla(const DenseMatrix& rho, const SubsystemLayout& layout) {
    if (!layout.data_first()) throw std::invalid_argument("partial trace expects data-first layout");
    const long Dd = layout.data_dim();
    const long Da = layout.ancilla_dim();
    DenseMatrix out = DenseMatrix::Zero(Dd, Dd);
    for (long i = 0; i < Dd; ++i)
        for (long j = 0; j < Dd; ++j) {
            cplx s = 0.0;
            for (long a = 0; a < Da; ++a) s += rho(i * Da + a, j * Da + a);
            out(i, j) = s;
        }
    return out;
}

} // namespace ghzres
