#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "enaqt/errors.hpp"
#include "enaqt/lindblad.hpp"

namespace enaqt {

struct SteadyStateOptions {
    double degeneracy_tol = 1e-8;
    double residual_tol = 1e-9;  // relative to the Frobenius norm of L
    double max_amplification = 1e12;  // beyond this the sparse solve is treated as singular
};

namespace detail {

inline DensityMatrix normalized_state(const Eigen::VectorXcd& x, const Liouvillian& l)
{
    Eigen::MatrixXcd rho = superop::unvec(x, l.levels());
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const double tr = rho.trace().real();
    if (!(std::abs(tr) > 1e-300) || !std::isfinite(tr)) throw SolverFailure("steady state has zero trace");
    rho /= tr;
    return {std::move(rho), l.n_sites, l.has_trap};
}

/// Smallest-magnitude eigenpair of the dense Liouvillian; also decides uniqueness.
inline DensityMatrix dense_null_vector(const Liouvillian& l, const SteadyStateOptions& opts)
{
    const Eigen::MatrixXcd dense(l.matrix);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(dense, true);
    if (es.info() != Eigen::Success) throw SolverFailure("Liouvillian eigen-decomposition did not converge");
    const Eigen::VectorXd mags = es.eigenvalues().cwiseAbs();
    const double tol = opts.degeneracy_tol * std::max(1.0, mags.maxCoeff());
    Eigen::Index best = 0;
    int zeros = 0;
    for (Eigen::Index k = 0; k < mags.size(); ++k) {
        if (mags(k) <= tol) ++zeros;
        if (mags(k) < mags(best)) best = k;
    }
    if (zeros > 1) throw NonUniqueSteadyState("Liouvillian null space has dimension " + std::to_string(zeros));
    if (zeros == 0) throw SolverFailure("Liouvillian has no zero eigenvalue");
    return normalized_state(es.eigenvectors().col(best), l);
}

} // namespace detail

/// Zero eigenstate of L. One equation is replaced by the trace constraint and
/// the square system is solved by sparse LU; a dense eigen-solve backs it up
/// and is also where a degenerate null space is reported.
inline DensityMatrix steady_state(const Liouvillian& l, const SteadyStateOptions& opts = {})
{
    using Triplet = Eigen::Triplet<cplx>;
    const Eigen::Index d = l.levels();
    const Eigen::Index dim = d * d;

    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(l.matrix.nonZeros() + d));
    for (Eigen::Index col = 0; col < l.matrix.outerSize(); ++col) {
        for (SparseC::InnerIterator it(l.matrix, col); it; ++it) {
            if (it.row() != 0) entries.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (Eigen::Index i = 0; i < d; ++i) entries.emplace_back(0, i + i * d, 1.0);
    SparseC a(dim, dim);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();

    Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() == Eigen::Success) {
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
        rhs(0) = 1.0;
        const Eigen::VectorXcd x = lu.solve(rhs);
        // entries of a density matrix never exceed one in magnitude
        const bool bounded = x.allFinite() && x.cwiseAbs().maxCoeff() <= 1.0 + 1e-6;
        // A degenerate null space can still factorise with tiny pivots; a solve
        // against a generic right-hand side exposes it.
        Eigen::VectorXcd probe(dim);
        for (Eigen::Index i = 0; i < dim; ++i) probe(i) = cplx(std::sin(1.0 + double(i)), std::cos(2.0 + double(i)));
        const Eigen::VectorXcd y = lu.solve(probe);
        const bool conditioned = y.allFinite() && y.norm() <= opts.max_amplification * probe.norm();
        if (bounded && conditioned) {
            const double residual = (l.matrix * x).norm();
            if (residual <= opts.residual_tol * std::max(1.0, l.matrix.norm())) {
                return detail::normalized_state(x, l);
            }
        }
    }
    return detail::dense_null_vector(l, opts);
}

/// Real coordinates for Hermitian n x n matrices: the n populations first,
/// then (Re, Im) of each upper-triangle element.
class HermitianCoordinates {
public:
    explicit HermitianCoordinates(std::size_t n) : n_(n), pair_(n * n, 0)
    {
        std::size_t next = n;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                pair_[i * n + j] = next;
                next += 2;
            }
        }
    }

    std::size_t size() const { return n_ * n_; }
    std::size_t population(std::size_t i) const { return i; }
    /// Index of Re(X_ij) for i < j; Im(X_ij) follows it.
    std::size_t real_part(std::size_t i, std::size_t j) const { return pair_[i * n_ + j]; }

    Eigen::MatrixXcd to_matrix(const Eigen::VectorXd& x) const
    {
        const auto n = static_cast<Eigen::Index>(n_);
        Eigen::MatrixXcd m(n, n);
        for (std::size_t i = 0; i < n_; ++i) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = x(static_cast<Eigen::Index>(i));
            for (std::size_t j = i + 1; j < n_; ++j) {
                const auto k = static_cast<Eigen::Index>(real_part(i, j));
                const cplx v(x(k), x(k + 1));
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::conj(v);
            }
        }
        return m;
    }

private:
    std::size_t n_;
    std::vector<std::size_t> pair_;
};

/// Steady states of pump/trap generators L(Gamma) = fixed + Gamma * per_unit,
/// solved on the N-site block only. Trap-site coherences decouple and vanish,
/// so fixing rho_trap = 1 turns the null-vector problem into an invertible
/// real linear system of size N^2 whose source is the injection term. The
/// sparsity pattern is analysed once and reused for every Gamma.
///
/// Holds a factorization workspace: use one instance per thread.
class ReducedSteadyState {
public:
    /// Tolerance on populations leaving [0, 1] before a solve is rejected.
    static constexpr double population_tol = 1e-6;

    explicit ReducedSteadyState(const LiouvillianParts& parts, std::size_t dense_below = 400)
        : n_sites_(parts.n_sites), coords_(parts.n_sites)
    {
        if (!parts.has_trap) throw InvalidArgument("reduced steady-state solver needs a pump/trap generator");
        const auto dim = static_cast<Eigen::Index>(coords_.size());

        std::vector<Eigen::Triplet<double>> t0, t1;
        project(parts.fixed, t0, rhs_);
        Eigen::VectorXd unused;
        project(parts.per_unit_dephasing, t1, unused);
        rhs_ = -rhs_;

        // shared pattern so that fixed + Gamma*per_unit keeps its structure
        std::vector<Eigen::Triplet<double>> u0 = t0, u1 = t1;
        for (const auto& t : t1) u0.emplace_back(t.row(), t.col(), 0.0);
        for (const auto& t : t0) u1.emplace_back(t.row(), t.col(), 0.0);
        fixed_.resize(dim, dim);
        per_unit_.resize(dim, dim);
        fixed_.setFromTriplets(u0.begin(), u0.end());
        per_unit_.setFromTriplets(u1.begin(), u1.end());
        fixed_.makeCompressed();
        per_unit_.makeCompressed();

        dense_ = static_cast<std::size_t>(dim) < dense_below;
        if (dense_) {
            dense_fixed_ = Eigen::MatrixXd(fixed_);
            dense_per_unit_ = Eigen::MatrixXd(per_unit_);
        } else {
            work_ = fixed_;
            lu_.analyzePattern(work_);
        }
    }

    std::size_t n_sites() const { return n_sites_; }

    DensityMatrix solve(double dephasing_rate)
    {
        Eigen::VectorXd x;
        if (dense_) {
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense_fixed_ + dephasing_rate * dense_per_unit_);
            x = lu.solve(rhs_);
        } else {
            const auto nnz = fixed_.nonZeros();
            const double* v0 = fixed_.valuePtr();
            const double* v1 = per_unit_.valuePtr();
            double* w = work_.valuePtr();
            for (Eigen::Index k = 0; k < nnz; ++k) w[k] = v0[k] + dephasing_rate * v1[k];
            lu_.factorize(work_);
            if (lu_.info() != Eigen::Success) throw SolverFailure("sparse LU factorization failed");
            x = lu_.solve(rhs_);
        }
        if (!x.allFinite()) throw SolverFailure("steady-state solve produced non-finite values");

        const auto n = static_cast<Eigen::Index>(n_sites_);
        DensityMatrix rho{Eigen::MatrixXcd::Zero(n + 1, n + 1), n_sites_, true};
        rho.matrix.topLeftCorner(n, n) = coords_.to_matrix(x);
        rho.matrix(n, n) = 1.0;
        const double tr = rho.matrix.trace().real();
        if (!(tr > 0.0)) throw SolverFailure("steady-state solve produced a non-positive trace");
        rho.matrix /= tr;
        // Generators that are not completely positive (Redfield) can pass a
        // second eigenvalue through zero, where the normalised solution has a
        // pole. Populations outside [0, 1] mark such points as unphysical.
        const Eigen::VectorXd pops = rho.matrix.diagonal().real();
        if (pops.minCoeff() < -population_tol || pops.maxCoeff() > 1.0 + population_tol) {
            throw SolverFailure("steady state has populations outside [0, 1]");
        }
        return rho;
    }

private:
    // Real-coordinate image of the site block of a full (N+1)-level superoperator.
    // The trap-population column becomes the source vector.
    void project(const SparseC& l, std::vector<Eigen::Triplet<double>>& out, Eigen::VectorXd& source) const
    {
        const std::size_t n = n_sites_;
        const std::size_t d = n + 1;
        source = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(coords_.size()));

        auto emit = [&](Eigen::Index row_vec, cplx value, auto&& sink) {
            const std::size_t a = static_cast<std::size_t>(row_vec) % d;
            const std::size_t b = static_cast<std::size_t>(row_vec) / d;
            if (a >= n || b >= n || a > b) return;
            if (a == b) {
                sink(coords_.population(a), value.real());
            } else {
                const std::size_t k = coords_.real_part(a, b);
                sink(k, value.real());
                sink(k + 1, value.imag());
            }
        };

        auto column = [&](std::size_t i, std::size_t j) { return static_cast<Eigen::Index>(i + j * d); };
        auto accumulate = [&](Eigen::Index col, cplx coef, std::size_t target) {
            for (SparseC::InnerIterator it(l, col); it; ++it) {
                emit(it.row(), coef * it.value(), [&](std::size_t row, double v) {
                    if (v != 0.0) out.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(target), v);
                });
            }
        };

        for (std::size_t i = 0; i < n; ++i) {
            accumulate(column(i, i), 1.0, coords_.population(i));
            for (std::size_t j = i + 1; j < n; ++j) {
                const std::size_t k = coords_.real_part(i, j);
                accumulate(column(i, j), 1.0, k);
                accumulate(column(j, i), 1.0, k);
                accumulate(column(i, j), cplx(0.0, 1.0), k + 1);
                accumulate(column(j, i), cplx(0.0, -1.0), k + 1);
            }
        }
        for (SparseC::InnerIterator it(l, column(n, n)); it; ++it) {
            emit(it.row(), it.value(), [&](std::size_t row, double v) { source(static_cast<Eigen::Index>(row)) += v; });
        }
    }

    std::size_t n_sites_;
    HermitianCoordinates coords_;
    SparseR fixed_, per_unit_, work_;
    Eigen::VectorXd rhs_;
    bool dense_ = false;
    Eigen::MatrixXd dense_fixed_, dense_per_unit_;
    Eigen::SparseLU<SparseR, Eigen::COLAMDOrdering<int>> lu_;
};

} // namespace enaqt
