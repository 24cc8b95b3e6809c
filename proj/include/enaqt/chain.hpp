#pragma once

// Single-excitation tight-binding chains with a linear energy gradient and
// Gaussian on-site disorder. Energies are in units of the hopping J.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "enaqt/errors.hpp"

namespace enaqt {

using cplx = std::complex<double>;

struct ChainSpec {
    std::size_t n_sites = 1;
    double gradient = 0.0;  // eta: total drop eta*N*J from first to last site
    double disorder = 0.0;  // sigma, standard deviation of the on-site noise
    double coupling = 1.0;  // J
    std::uint64_t seed = 0;

    void validate() const
    {
        if (n_sites < 1) throw InvalidArgument("chain needs at least one site");
        if (!(gradient >= 0.0)) throw InvalidArgument("gradient must be >= 0");
        if (!(disorder >= 0.0)) throw InvalidArgument("disorder strength must be >= 0");
        if (!(coupling > 0.0)) throw InvalidArgument("coupling must be > 0");
    }
};

struct SiteEnergies {
    Eigen::VectorXd values;

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

/// (N+1)x(N+1) Hermitian matrix over {|1>..|N>, |trap>}. The trap row and
/// column are identically zero.
struct Hamiltonian {
    Eigen::MatrixXcd matrix;

    std::size_t n_sites() const { return static_cast<std::size_t>(matrix.rows()) - 1; }
    std::size_t levels() const { return static_cast<std::size_t>(matrix.rows()); }
    Eigen::MatrixXcd site_block() const
    {
        const auto n = static_cast<Eigen::Index>(n_sites());
        return matrix.topLeftCorner(n, n);
    }
};

struct EigenDecomposition {
    Eigen::VectorXd energies;   // ascending
    Eigen::MatrixXcd vectors;   // columns are eigenvectors over sites
};

/// Linear baseline: eps_i = eta*J*N*(N-i)/(N-1) for sites i = 1..N.
inline Eigen::VectorXd gradient_baseline(const ChainSpec& spec)
{
    const auto n = spec.n_sites;
    Eigen::VectorXd base = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    if (n < 2) return base;
    const double drop = spec.gradient * spec.coupling * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        // 0-based i maps to site i+1
        base(static_cast<Eigen::Index>(i)) = drop * static_cast<double>(n - 1 - i) / static_cast<double>(n - 1);
    }
    return base;
}

template <class Engine>
SiteEnergies sample_site_energies(const ChainSpec& spec, Engine& engine)
{
    spec.validate();
    SiteEnergies e{gradient_baseline(spec)};
    if (spec.disorder > 0.0) {
        std::normal_distribution<double> noise(0.0, spec.disorder);
        for (Eigen::Index i = 0; i < e.values.size(); ++i) e.values(i) += noise(engine);
    }
    return e;
}

/// Draws from a fresh mt19937_64 stream seeded with spec.seed.
inline SiteEnergies sample_site_energies(const ChainSpec& spec)
{
    std::mt19937_64 engine(spec.seed);
    return sample_site_energies(spec, engine);
}

inline Hamiltonian build_hamiltonian(const SiteEnergies& energies, double coupling = 1.0)
{
    const auto n = static_cast<Eigen::Index>(energies.size());
    if (n < 1) throw InvalidArgument("chain needs at least one site");
    Hamiltonian h{Eigen::MatrixXcd::Zero(n + 1, n + 1)};
    for (Eigen::Index i = 0; i < n; ++i) {
        h.matrix(i, i) = energies.values(i);
        if (i + 1 < n) {
            h.matrix(i, i + 1) = coupling;
            h.matrix(i + 1, i) = coupling;
        }
    }
    return h;
}

inline Hamiltonian build_hamiltonian(const ChainSpec& spec)
{
    return build_hamiltonian(sample_site_energies(spec), spec.coupling);
}

inline EigenDecomposition eigen_decomposition(const Hamiltonian& h)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.site_block());
    if (solver.info() != Eigen::Success) throw SolverFailure("site-block eigen-decomposition failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Participation ratio 1/sum_i |<i|E_a>|^4 averaged over the site eigenstates.
inline double average_ipr(const EigenDecomposition& eig)
{
    const auto n = eig.vectors.cols();
    double total = 0.0;
    for (Eigen::Index a = 0; a < n; ++a) {
        const double p4 = eig.vectors.col(a).cwiseAbs2().array().square().sum();
        total += 1.0 / p4;
    }
    return total / static_cast<double>(n);
}

inline double average_ipr(const Hamiltonian& h) { return average_ipr(eigen_decomposition(h)); }

} // namespace enaqt
