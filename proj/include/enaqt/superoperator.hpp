#pragma once

// Superoperators act on column-stacked density matrices:
// vec(rho)[i + j*d] = rho(i, j), so vec(A rho B) = (B^T kron A) vec(rho).

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

namespace enaqt {

using SparseC = Eigen::SparseMatrix<std::complex<double>>;
using SparseR = Eigen::SparseMatrix<double>;

namespace superop {

inline SparseC kron(const SparseC& a, const SparseC& b)
{
    SparseC out = Eigen::kroneckerProduct(a, b).eval();
    out.makeCompressed();
    return out;
}

inline SparseC identity(Eigen::Index d)
{
    SparseC eye(d, d);
    eye.setIdentity();
    return eye;
}

inline SparseC sparse(const Eigen::MatrixXcd& m) { return m.sparseView(0.0, 0.0); }

/// Removes exact zeros left behind by cancellation.
inline void drop_zeros(SparseC& m)
{
    m.prune([](Eigen::Index, Eigen::Index, const std::complex<double>& v) { return v != std::complex<double>(0.0); });
    m.makeCompressed();
}

/// rho -> A rho
inline SparseC pre(const SparseC& a) { return kron(identity(a.rows()), a); }
/// rho -> rho A
inline SparseC post(const SparseC& a) { return kron(SparseC(a.transpose()), identity(a.rows())); }
/// rho -> A rho B
inline SparseC pre_post(const SparseC& a, const SparseC& b) { return kron(SparseC(b.transpose()), a); }

/// rho -> -i[H, rho]
inline SparseC commutator(const Eigen::MatrixXcd& h)
{
    const SparseC hs = sparse(h);
    const std::complex<double> minus_i(0.0, -1.0);
    SparseC out = minus_i * (pre(hs) - post(hs));
    out.makeCompressed();
    return out;
}

/// rho -> A rho A^dag - 1/2 {A^dag A, rho}
inline SparseC dissipator(const Eigen::MatrixXcd& a)
{
    const SparseC as = sparse(a);
    const SparseC ad = sparse(a.adjoint());
    const SparseC ada = sparse(a.adjoint() * a);
    SparseC out = pre_post(as, ad) - 0.5 * pre(ada) - 0.5 * post(ada);
    drop_zeros(out);
    return out;
}

inline Eigen::VectorXcd vec(const Eigen::MatrixXcd& m)
{
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

inline Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, Eigen::Index d)
{
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
}

} // namespace superop
} // namespace enaqt
