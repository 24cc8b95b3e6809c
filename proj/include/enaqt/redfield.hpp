#pragma once

// Finite-temperature nonsecular Bloch-Redfield generator. Site dephasers
// A_m = 2|m><m| - I are split into eigen-operators A_m(w) with w = E_b - E_a,
// each bath is independent, and every cross-frequency term is kept:
//
//   D(rho) = 1/2 sum_m sum_w S(w) [A_m(w) rho A_m - A_m A_m(w) rho] + h.c.
//
// The pump/trap dissipators are the temperature-independent Lindblad ones.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "enaqt/chain.hpp"
#include "enaqt/errors.hpp"
#include "enaqt/lindblad.hpp"
#include "enaqt/superoperator.hpp"

namespace enaqt {

struct FlatSpectrum {
    double magnitude = 1.0;
};

struct DrudeLorentzSpectrum {
    double coupling = 1.0;   // lambda_ph
    double linewidth = 1.0;  // 1/tau
};

using SpectralDensity = std::variant<FlatSpectrum, DrudeLorentzSpectrum>;

/// lambda * (2/pi) * w * gamma / (w^2 + gamma^2); odd in w.
inline double drude_lorentz(double omega, double coupling, double linewidth)
{
    return coupling * (2.0 / std::numbers::pi) * omega * linewidth / (omega * omega + linewidth * linewidth);
}

/// J(|w|)
inline double spectral_magnitude(const SpectralDensity& j, double omega)
{
    const double w = std::abs(omega);
    return std::visit(
        [w](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FlatSpectrum>) {
                return s.magnitude;
            } else {
                return drude_lorentz(w, s.coupling, s.linewidth);
            }
        },
        j);
}

struct BathSpec {
    double beta = 1.0;  // 1/(k_B T) in units of 1/J; +infinity is zero temperature
    SpectralDensity spectrum = FlatSpectrum{};

    void validate() const
    {
        if (!(beta > 0.0)) throw InvalidArgument("inverse temperature must be > 0");
        if (const auto* f = std::get_if<FlatSpectrum>(&spectrum); f && !(f->magnitude >= 0.0)) {
            throw InvalidArgument("flat spectral density must be >= 0");
        }
        if (const auto* dl = std::get_if<DrudeLorentzSpectrum>(&spectrum);
            dl && (!(dl->coupling >= 0.0) || !(dl->linewidth > 0.0))) {
            throw InvalidArgument("Drude-Lorentz needs coupling >= 0 and linewidth > 0");
        }
    }
};

/// 1/(exp(beta w) - 1) for w > 0.
inline double bose_einstein(double omega, double beta) { return 1.0 / std::expm1(beta * omega); }

/// Frequencies closer to zero than this are treated as the pure-dephasing channel.
inline constexpr double frequency_tolerance = 1e-9;

/// S(w) = (N_BE(|w|) + Theta(w)) J(|w|). At w = 0 a flat spectrum gives J0 and
/// Drude-Lorentz gives its finite limit 2 lambda / (pi beta gamma).
inline double noise_power(double omega, const BathSpec& bath)
{
    if (std::abs(omega) <= frequency_tolerance) {
        if (const auto* f = std::get_if<FlatSpectrum>(&bath.spectrum)) return f->magnitude;
        const auto& dl = std::get<DrudeLorentzSpectrum>(bath.spectrum);
        if (std::isinf(bath.beta)) return 0.0;
        return 2.0 * dl.coupling / (std::numbers::pi * bath.beta * dl.linewidth);
    }
    const double w = std::abs(omega);
    const double occupation = bose_einstein(w, bath.beta);
    return (omega > 0.0 ? occupation + 1.0 : occupation) * spectral_magnitude(bath.spectrum, w);
}

/// Eigen-energy splittings E_b - E_a grouped into bins of width tol.
struct FrequencyBins {
    std::vector<double> frequencies;  // ascending bin representatives
    Eigen::MatrixXi bin;              // bin(a, b) for the pair (a, b)
};

inline FrequencyBins bin_frequencies(const Eigen::VectorXd& energies, double tol = frequency_tolerance)
{
    const auto n = energies.size();
    struct Entry {
        double w;
        Eigen::Index a, b;
    };
    std::vector<Entry> all;
    all.reserve(static_cast<std::size_t>(n * n));
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) all.push_back({a == b ? 0.0 : energies(b) - energies(a), a, b});
    }
    std::sort(all.begin(), all.end(), [](const Entry& x, const Entry& y) { return x.w < y.w; });

    FrequencyBins out;
    out.bin.resize(n, n);
    double start = 0.0;
    std::vector<double> members;
    auto close_bin = [&] {
        double mean = 0.0;
        for (double m : members) mean += m;
        mean /= static_cast<double>(members.size());
        out.frequencies.push_back(mean);
        members.clear();
    };
    for (const auto& e : all) {
        if (!members.empty() && e.w - start > tol) close_bin();
        if (members.empty()) start = e.w;
        members.push_back(e.w);
        out.bin(e.a, e.b) = static_cast<int>(out.frequencies.size());
    }
    if (!members.empty()) close_bin();
    // the bin containing exact zero is represented by zero itself
    for (auto& w : out.frequencies) {
        if (std::abs(w) <= tol) w = 0.0;
    }
    return out;
}

struct EigenOperator {
    double frequency = 0.0;
    Eigen::MatrixXcd op;  // same shape as the operator it came from
};

/// channels[m] lists the nonzero A_m(w) of operator m.
struct EigenOperatorSet {
    std::vector<std::vector<EigenOperator>> channels;
    std::vector<double> frequencies;
};

/// A_m(w) = sum over E_b - E_a = w of P_a A_m P_b. Only the site block of each
/// operator is decomposed; trap rows and columns stay zero.
inline EigenOperatorSet eigenoperator_decomposition(const Hamiltonian& h, const std::vector<Eigen::MatrixXcd>& ops,
                                                    double tol = frequency_tolerance)
{
    const auto eig = eigen_decomposition(h);
    const auto n = eig.energies.size();
    const auto bins = bin_frequencies(eig.energies, tol);
    const Eigen::MatrixXcd& v = eig.vectors;

    EigenOperatorSet out;
    out.frequencies = bins.frequencies;
    for (const auto& full : ops) {
        const Eigen::MatrixXcd in_eigenbasis = v.adjoint() * full.topLeftCorner(n, n) * v;
        std::vector<Eigen::MatrixXcd> parts(bins.frequencies.size(), Eigen::MatrixXcd::Zero(n, n));
        std::vector<bool> used(bins.frequencies.size(), false);
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) {
                const auto k = static_cast<std::size_t>(bins.bin(a, b));
                parts[k](a, b) = in_eigenbasis(a, b);
                used[k] = used[k] || in_eigenbasis(a, b) != cplx(0.0);
            }
        }
        std::vector<EigenOperator> channel;
        for (std::size_t k = 0; k < parts.size(); ++k) {
            if (!used[k]) continue;
            Eigen::MatrixXcd embedded = Eigen::MatrixXcd::Zero(full.rows(), full.cols());
            embedded.topLeftCorner(n, n) = v * parts[k] * v.adjoint();
            channel.push_back({bins.frequencies[k], std::move(embedded)});
        }
        out.channels.push_back(std::move(channel));
    }
    return out;
}

/// Redfield dissipator per unit Gamma on d levels (d = N or N+1).
inline SparseC redfield_dissipator(const Hamiltonian& h, const BathSpec& bath, Eigen::Index levels)
{
    bath.validate();
    const auto eig = eigen_decomposition(h);
    const auto n = eig.energies.size();
    const auto bins = bin_frequencies(eig.energies);
    const Eigen::MatrixXcd& v = eig.vectors;

    Eigen::MatrixXcd spectrum(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            spectrum(a, b) = noise_power(bins.frequencies[static_cast<std::size_t>(bins.bin(a, b))], bath);
        }
    }

    Eigen::MatrixXcd left_sum = Eigen::MatrixXcd::Zero(levels, levels);   // sum A_m B_m
    Eigen::MatrixXcd right_sum = Eigen::MatrixXcd::Zero(levels, levels);  // sum B_m^dag A_m
    SparseC sandwich(levels * levels, levels * levels);
    for (Eigen::Index m = 0; m < n; ++m) {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(levels, levels);
        a.topLeftCorner(n, n) = -Eigen::MatrixXcd::Identity(n, n);
        a(m, m) = 1.0;

        // B_m = sum_w S(w) A_m(w), assembled pairwise in the eigenbasis
        const Eigen::MatrixXcd a_eig = v.adjoint() * a.topLeftCorner(n, n) * v;
        Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(levels, levels);
        b.topLeftCorner(n, n) = v * a_eig.cwiseProduct(spectrum) * v.adjoint();

        const SparseC as = superop::sparse(a);
        const SparseC bs = superop::sparse(b);
        sandwich += superop::pre_post(bs, as) + superop::pre_post(as, superop::sparse(b.adjoint()));
        left_sum += a * b;
        right_sum += b.adjoint() * a;
    }
    SparseC out = 0.5 * (sandwich - superop::pre(superop::sparse(left_sum)) - superop::post(superop::sparse(right_sum)));
    superop::drop_zeros(out);
    return out;
}

inline LiouvillianParts redfield_parts(const Hamiltonian& h, const BathSpec& bath, const TransportSpec& spec)
{
    const std::size_t n = h.n_sites();
    spec.validate(n);
    const auto ops = build_operator_set(n, spec.injection);
    const Eigen::Index d = spec.closed() ? static_cast<Eigen::Index>(n) : static_cast<Eigen::Index>(n) + 1;
    return {coherent_and_pump_part(h, spec, ops), redfield_dissipator(h, bath, d), n, !spec.closed()};
}

/// Generator at Gamma = spec.dephasing_rate.
inline Liouvillian build_redfield_liouvillian(const Hamiltonian& h, const BathSpec& bath, const TransportSpec& spec)
{
    return redfield_parts(h, bath, spec).at(spec.dephasing_rate);
}

} // namespace enaqt
