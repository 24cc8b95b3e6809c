#pragma once

// Fast steady states of the pure-dephasing pump/trap model for many Gamma.
//
// With rho_trap fixed to 1 the site block X obeys
//     K X + X K^dag - 4 Gamma X + 4 Gamma diag(X) = -g_inj D_inj,
//     K = -iH - (gamma_trap / 2)|N><N|.
// K is diagonalised once per chain (K = V mu V^-1). For each Gamma the
// Lyapunov part is inverted in that eigenbasis, leaving an N x N real system
// for the populations. Every solution is checked against the full equation;
// badly conditioned eigenbases fall back to sparse LU.

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "enaqt/errors.hpp"
#include "enaqt/lindblad.hpp"
#include "enaqt/steady_state.hpp"

namespace enaqt {

class DephasingSteadyState {
public:
    DephasingSteadyState(const Hamiltonian& h, const TransportSpec& spec)
        : h_(h), spec_(spec), n_(h.n_sites())
    {
        spec.validate(n_);
        if (spec.closed()) throw InvalidArgument("steady-state transport needs a pump/trap generator");
        const auto n = static_cast<Eigen::Index>(n_);

        injection_ = Eigen::VectorXd::Zero(n);
        const auto ops = build_operator_set(n_, spec.injection);
        for (auto s : ops.injection_sites) injection_(static_cast<Eigen::Index>(s - 1)) = 1.0;
        g_inj_ = spec.injection_rate(n_);

        k_ = cplx(0.0, -1.0) * h.site_block();
        k_(n - 1, n - 1) -= 0.5 * spec.trap_rate;

        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(k_, true);
        if (es.info() == Eigen::Success) {
            mu_ = es.eigenvalues();
            v_ = es.eigenvectors();
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v_);
            w_ = lu.inverse();
            spectral_ok_ = w_.allFinite();
        }
        if (spectral_ok_) precompute_pairs();
    }

    std::size_t n_sites() const { return n_; }
    const TransportSpec& transport() const { return spec_; }

    /// Steady state including the trap level, normalised to unit trace.
    DensityMatrix state(double dephasing_rate)
    {
        if (!(dephasing_rate >= 0.0)) throw InvalidArgument("dephasing rate must be >= 0");
        if (spectral_ok_) {
            if (auto x = spectral_site_block(dephasing_rate)) return assemble(*x);
        }
        ++fallbacks_;
        return fallback().solve(dephasing_rate);
    }

    double current(double dephasing_rate) { return steady_current(state(dephasing_rate), spec_); }

    /// Number of solves that needed the sparse LU path.
    std::size_t fallback_count() const { return fallbacks_; }

private:
    void precompute_pairs()
    {
        const auto n = static_cast<Eigen::Index>(n_);
        const Eigen::Index pairs = n * (n + 1) / 2;
        p_re_.resize(n, pairs);
        p_im_.resize(n, pairs);
        q_.resize(pairs, n);
        pair_a_.resize(static_cast<std::size_t>(pairs));
        pair_b_.resize(static_cast<std::size_t>(pairs));
        Eigen::Index p = 0;
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = a; b < n; ++b, ++p) {
                // term(b,a) is the conjugate of term(a,b): count off-diagonal pairs twice
                const double weight = (a == b) ? 1.0 : 2.0;
                const Eigen::VectorXcd pv = v_.col(a).cwiseProduct(v_.col(b).conjugate());
                p_re_.col(p) = weight * pv.real();
                p_im_.col(p) = weight * pv.imag();
                q_.row(p) = w_.row(a).cwiseProduct(w_.row(b).conjugate());
                pair_a_[static_cast<std::size_t>(p)] = a;
                pair_b_[static_cast<std::size_t>(p)] = b;
            }
        }
    }

    std::optional<Eigen::MatrixXcd> spectral_site_block(double gamma)
    {
        const auto n = static_cast<Eigen::Index>(n_);
        const Eigen::Index pairs = q_.rows();

        // G_jk = Re sum_ab V_ja conj(V_jb) C_ab W_ak conj(W_bk)
        Eigen::MatrixXcd scaled(pairs, n);
        for (Eigen::Index p = 0; p < pairs; ++p) {
            const cplx c = 1.0 / (mu_(pair_a_[static_cast<std::size_t>(p)]) + std::conj(mu_(pair_b_[static_cast<std::size_t>(p)])) - 4.0 * gamma);
            scaled.row(p) = c * q_.row(p);
        }
        const Eigen::MatrixXd g = p_re_ * scaled.real() - p_im_ * scaled.imag();

        const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) + 4.0 * gamma * g;
        const Eigen::VectorXd rhs = -g_inj_ * (g * injection_);
        const Eigen::VectorXd d = system.partialPivLu().solve(rhs);
        if (!d.allFinite()) return std::nullopt;

        // full site block from the populations, then a residual check
        const Eigen::VectorXd y = -g_inj_ * injection_ - 4.0 * gamma * d;
        Eigen::MatrixXcd z = w_ * y.asDiagonal() * w_.adjoint();
        for (Eigen::Index b = 0; b < n; ++b) {
            for (Eigen::Index a = 0; a < n; ++a) z(a, b) /= mu_(a) + std::conj(mu_(b)) - 4.0 * gamma;
        }
        Eigen::MatrixXcd x = v_ * z * v_.adjoint();
        x = 0.5 * (x + x.adjoint()).eval();

        Eigen::MatrixXcd r = k_ * x + x * k_.adjoint() - 4.0 * gamma * x;
        r.diagonal() += 4.0 * gamma * x.diagonal() + g_inj_ * injection_.cast<cplx>();
        const double scale = std::max(1.0, x.cwiseAbs().maxCoeff() * (k_.cwiseAbs().maxCoeff() + 4.0 * gamma + 1.0));
        if (!x.allFinite() || r.cwiseAbs().maxCoeff() > 1e-10 * scale) return std::nullopt;
        return x;
    }

    DensityMatrix assemble(const Eigen::MatrixXcd& x) const
    {
        const auto n = static_cast<Eigen::Index>(n_);
        DensityMatrix rho{Eigen::MatrixXcd::Zero(n + 1, n + 1), n_, true};
        rho.matrix.topLeftCorner(n, n) = x;
        rho.matrix(n, n) = 1.0;
        const double tr = rho.matrix.trace().real();
        if (!(tr > 0.0) || !std::isfinite(tr)) throw SolverFailure("steady state has a non-positive trace");
        rho.matrix /= tr;
        return rho;
    }

    ReducedSteadyState& fallback()
    {
        if (!reduced_) reduced_.emplace(lindblad_parts(h_, spec_));
        return *reduced_;
    }

    Hamiltonian h_;
    TransportSpec spec_;
    std::size_t n_;
    Eigen::VectorXd injection_;
    double g_inj_ = 0.0;
    Eigen::MatrixXcd k_, v_, w_;
    Eigen::VectorXcd mu_;
    bool spectral_ok_ = false;
    Eigen::MatrixXd p_re_, p_im_;
    Eigen::MatrixXcd q_;
    std::vector<Eigen::Index> pair_a_, pair_b_;
    std::optional<ReducedSteadyState> reduced_;
    std::size_t fallbacks_ = 0;
};

} // namespace enaqt
