#pragma once

// Pure-dephasing Lindblad generator with extraction from the last site into a
// trap level and re-injection from the trap back onto the chain.

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "enaqt/chain.hpp"
#include "enaqt/errors.hpp"
#include "enaqt/superoperator.hpp"

namespace enaqt {

struct InjectionMode {
    enum class Kind { AllSites, SingleSite };

    Kind kind = Kind::AllSites;
    std::size_t site = 0;  // 1-based, SingleSite only

    static InjectionMode all_sites() { return {}; }
    static InjectionMode single_site(std::size_t site) { return {Kind::SingleSite, site}; }

    bool operator==(const InjectionMode&) const = default;
};

struct TransportSpec {
    double dephasing_rate = 0.0;  // Gamma
    double trap_rate = 3.0;       // gamma_trap
    InjectionMode injection{};

    /// No pump and no trap: the generator acts on the N-site block only.
    bool closed() const { return trap_rate == 0.0; }

    /// Rate attached to each injector; the total always matches trap_rate.
    double injection_rate(std::size_t n_sites) const
    {
        if (injection.kind == InjectionMode::Kind::SingleSite) return trap_rate;
        return trap_rate / static_cast<double>(n_sites);
    }

    void validate(std::size_t n_sites) const
    {
        if (!(dephasing_rate >= 0.0)) throw InvalidArgument("dephasing rate must be >= 0");
        if (!(trap_rate >= 0.0)) throw InvalidArgument("trap rate must be >= 0");
        if (injection.kind == InjectionMode::Kind::SingleSite &&
            (injection.site < 1 || injection.site > n_sites)) {
            throw InvalidArgument("injection site out of range");
        }
    }
};

/// Operators over {|1>..|N>, |trap>}.
struct LindbladOperatorSet {
    std::vector<Eigen::MatrixXcd> dephasers;  // 2|i><i| - I_sites
    Eigen::MatrixXcd extractor;               // |trap><N|
    std::vector<Eigen::MatrixXcd> injectors;  // |i><trap|
    std::vector<std::size_t> injection_sites; // 1-based
};

inline LindbladOperatorSet build_operator_set(std::size_t n_sites, InjectionMode mode = {})
{
    if (n_sites < 1) throw InvalidArgument("chain needs at least one site");
    if (mode.kind == InjectionMode::Kind::SingleSite && (mode.site < 1 || mode.site > n_sites)) {
        throw InvalidArgument("injection site out of range");
    }
    const auto n = static_cast<Eigen::Index>(n_sites);
    const Eigen::Index trap = n;
    LindbladOperatorSet ops;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n + 1, n + 1);
        a.topLeftCorner(n, n) = -Eigen::MatrixXcd::Identity(n, n);
        a(i, i) = 1.0;
        ops.dephasers.push_back(std::move(a));
    }
    ops.extractor = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    ops.extractor(trap, n - 1) = 1.0;

    auto add_injector = [&](std::size_t site) {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n + 1, n + 1);
        a(static_cast<Eigen::Index>(site - 1), trap) = 1.0;
        ops.injectors.push_back(std::move(a));
        ops.injection_sites.push_back(site);
    };
    if (mode.kind == InjectionMode::Kind::SingleSite) {
        add_injector(mode.site);
    } else {
        for (std::size_t s = 1; s <= n_sites; ++s) add_injector(s);
    }
    return ops;
}

struct DensityMatrix {
    Eigen::MatrixXcd matrix;
    std::size_t n_sites = 0;
    bool has_trap = true;

    Eigen::Index levels() const { return matrix.rows(); }
    double trace() const { return matrix.trace().real(); }
    Eigen::VectorXd site_populations() const
    {
        return matrix.diagonal().head(static_cast<Eigen::Index>(n_sites)).real();
    }
    double trap_population() const
    {
        return has_trap ? matrix(matrix.rows() - 1, matrix.cols() - 1).real() : 0.0;
    }
    double hermiticity_error() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const
    {
        const Eigen::MatrixXcd h = 0.5 * (matrix + matrix.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    static DensityMatrix maximally_mixed_sites(std::size_t n_sites, bool has_trap = true)
    {
        const auto n = static_cast<Eigen::Index>(n_sites);
        const Eigen::Index d = has_trap ? n + 1 : n;
        DensityMatrix rho{Eigen::MatrixXcd::Zero(d, d), n_sites, has_trap};
        rho.matrix.topLeftCorner(n, n).diagonal().setConstant(1.0 / static_cast<double>(n_sites));
        return rho;
    }

    /// |site><site| with a 1-based site index.
    static DensityMatrix localized(std::size_t n_sites, std::size_t site, bool has_trap = true)
    {
        if (site < 1 || site > n_sites) throw InvalidArgument("site index out of range");
        const auto n = static_cast<Eigen::Index>(n_sites);
        const Eigen::Index d = has_trap ? n + 1 : n;
        DensityMatrix rho{Eigen::MatrixXcd::Zero(d, d), n_sites, has_trap};
        rho.matrix(static_cast<Eigen::Index>(site - 1), static_cast<Eigen::Index>(site - 1)) = 1.0;
        return rho;
    }
};

struct Liouvillian {
    SparseC matrix;
    std::size_t n_sites = 0;
    bool has_trap = true;

    Eigen::Index levels() const
    {
        return has_trap ? static_cast<Eigen::Index>(n_sites) + 1 : static_cast<Eigen::Index>(n_sites);
    }

    DensityMatrix apply(const DensityMatrix& rho) const
    {
        const Eigen::VectorXcd out = matrix * superop::vec(rho.matrix);
        return {superop::unvec(out, levels()), n_sites, has_trap};
    }
};

/// Generator split as fixed + Gamma * per_unit_dephasing. Shared by the
/// Lindblad and Redfield builders and by the reduced steady-state solver.
struct LiouvillianParts {
    SparseC fixed;
    SparseC per_unit_dephasing;
    std::size_t n_sites = 0;
    bool has_trap = true;

    Liouvillian at(double dephasing_rate) const
    {
        SparseC m = fixed + dephasing_rate * per_unit_dephasing;
        m.makeCompressed();
        return {std::move(m), n_sites, has_trap};
    }
};

namespace detail {

inline Eigen::MatrixXcd restrict_to_levels(const Eigen::MatrixXcd& a, Eigen::Index d)
{
    return a.topLeftCorner(d, d);
}

} // namespace detail

/// -i[H, .] plus the pump/trap dissipators (empty for a closed chain).
inline SparseC coherent_and_pump_part(const Hamiltonian& h, const TransportSpec& spec,
                                      const LindbladOperatorSet& ops)
{
    const std::size_t n = h.n_sites();
    const Eigen::Index d = spec.closed() ? static_cast<Eigen::Index>(n) : static_cast<Eigen::Index>(n) + 1;
    SparseC l = superop::commutator(detail::restrict_to_levels(h.matrix, d));
    if (!spec.closed()) {
        l += spec.trap_rate * superop::dissipator(ops.extractor);
        const double g_inj = spec.injection_rate(n);
        for (const auto& a : ops.injectors) l += g_inj * superop::dissipator(a);
    }
    superop::drop_zeros(l);
    return l;
}

inline LiouvillianParts lindblad_parts(const Hamiltonian& h, const TransportSpec& spec)
{
    const std::size_t n = h.n_sites();
    spec.validate(n);
    const auto ops = build_operator_set(n, spec.injection);
    const Eigen::Index d = spec.closed() ? static_cast<Eigen::Index>(n) : static_cast<Eigen::Index>(n) + 1;

    SparseC deph(d * d, d * d);
    for (const auto& a : ops.dephasers) deph += superop::dissipator(detail::restrict_to_levels(a, d));
    superop::drop_zeros(deph);
    return {coherent_and_pump_part(h, spec, ops), std::move(deph), n, !spec.closed()};
}

inline Liouvillian build_liouvillian(const Hamiltonian& h, const TransportSpec& spec)
{
    return lindblad_parts(h, spec).at(spec.dephasing_rate);
}

/// I_ss = gamma_trap * rho_NN.
inline double steady_current(const DensityMatrix& rho, const TransportSpec& spec)
{
    if (spec.closed()) return 0.0;
    const auto last = static_cast<Eigen::Index>(rho.n_sites) - 1;
    return spec.trap_rate * rho.matrix(last, last).real();
}

/// Variance of the N site populations (trap excluded).
inline double population_variance(const DensityMatrix& rho)
{
    const Eigen::VectorXd p = rho.site_populations();
    const double mean = p.mean();
    return (p.array() - mean).square().mean();
}

/// Sum_n n^2 p_n with n measured from the 1-based centre site (odd chains only).
inline double wavepacket_variance(const DensityMatrix& rho, std::size_t center)
{
    const std::size_t n = rho.n_sites;
    if (n % 2 == 0) throw InvalidArgument("wavepacket variance needs an odd number of sites");
    if (center != (n + 1) / 2) throw InvalidArgument("centre index must be (N+1)/2");
    const Eigen::VectorXd p = rho.site_populations();
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double offset = static_cast<double>(i + 1) - static_cast<double>(center);
        v += offset * offset * p(static_cast<Eigen::Index>(i));
    }
    return v;
}

} // namespace enaqt
