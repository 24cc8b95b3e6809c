#include <cmath>

#include <gtest/gtest.h>

#include "enaqt/lindblad.hpp"
#include "enaqt/steady_state.hpp"

using namespace enaqt;

namespace {

Hamiltonian chain(std::size_t n, double eta, double sigma, std::uint64_t seed = 1)
{
    return build_hamiltonian(ChainSpec{n, eta, sigma, 1.0, seed});
}

// classical fixed-step RK4 on the vectorised master equation
Eigen::VectorXcd rk4(const Liouvillian& l, Eigen::VectorXcd x, double t_end, double dt)
{
    const auto steps = static_cast<long>(std::llround(t_end / dt));
    for (long s = 0; s < steps; ++s) {
        const Eigen::VectorXcd k1 = l.matrix * x;
        const Eigen::VectorXcd k2 = l.matrix * (x + 0.5 * dt * k1);
        const Eigen::VectorXcd k3 = l.matrix * (x + 0.5 * dt * k2);
        const Eigen::VectorXcd k4 = l.matrix * (x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

void expect_physical(const DensityMatrix& rho, const TransportSpec& spec)
{
    EXPECT_NEAR(rho.trace(), 1.0, 1e-10);
    EXPECT_LT(rho.hermiticity_error(), 1e-10);
    EXPECT_GT(rho.min_eigenvalue(), -1e-8);
    const double out = spec.trap_rate * rho.site_populations().tail(1)(0);
    const double in = spec.trap_rate * rho.trap_population();  // total injection rate equals trap rate
    EXPECT_NEAR(out, in, 1e-8);
}

} // namespace

TEST(SteadyState, TwoLevelPumpTrapIsHalfHalf)
{
    const auto h = chain(1, 0.0, 0.0);
    const TransportSpec spec{1.0, 3.0, {}};
    const auto rho = steady_state(build_liouvillian(h, spec));
    EXPECT_NEAR(rho.matrix(0, 0).real(), 0.5, 1e-10);
    EXPECT_NEAR(rho.matrix(1, 1).real(), 0.5, 1e-10);
    EXPECT_NEAR(steady_current(rho, spec), 1.5, 1e-10);
}

TEST(SteadyState, MatchesLongTimeRungeKutta)
{
    const auto h = chain(10, 0.0, 0.0);
    const TransportSpec spec{0.1, 3.0, {}};
    const auto l = build_liouvillian(h, spec);
    const auto rho = steady_state(l);
    const Eigen::VectorXcd x =
        rk4(l, superop::vec(DensityMatrix::maximally_mixed_sites(10).matrix), 1000.0, 0.02);
    const Eigen::MatrixXcd late = superop::unvec(x, 11);
    EXPECT_LT((late - rho.matrix).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SteadyState, IsPhysicalAndFluxBalanced)
{
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t n = 1 + seed % 9;
        const auto mode = seed % 3 == 0 ? InjectionMode::single_site(1 + seed % n) : InjectionMode::all_sites();
        const TransportSpec spec{std::pow(10.0, -3.0 + 0.15 * double(seed)), 3.0, mode};
        const auto h = chain(n, 0.1 * double(seed % 4), 0.4 * double(seed % 6), seed);
        const auto l = build_liouvillian(h, spec);
        const auto rho = steady_state(l);
        expect_physical(rho, spec);
        const double scale = std::max(1.0, l.matrix.norm());
        EXPECT_LT(superop::vec(l.apply(rho).matrix).norm(), 1e-9 * scale);
    }
}

TEST(SteadyState, UniqueWithoutDephasingWhenPumpingAllSites)
{
    const auto h = chain(6, 0.1, 0.5, 4);
    const TransportSpec spec{0.0, 3.0, {}};
    const auto rho = steady_state(build_liouvillian(h, spec));
    expect_physical(rho, spec);
}

TEST(ReducedSteadyState, AgreesWithFullSolve)
{
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const std::size_t n = 1 + seed % 7;
        const auto mode = seed % 2 ? InjectionMode::single_site(n) : InjectionMode::all_sites();
        const auto h = chain(n, 0.2 * double(seed % 3), 0.6 * double(seed % 4), seed);
        const auto parts = lindblad_parts(h, TransportSpec{0.0, 3.0, mode});
        ReducedSteadyState dense(parts);
        ReducedSteadyState sparse(parts, 0);
        for (double g : {1e-3, 0.05, 1.0, 20.0}) {
            const auto full = steady_state(parts.at(g));
            EXPECT_LT((dense.solve(g).matrix - full.matrix).cwiseAbs().maxCoeff(), 1e-10);
            EXPECT_LT((sparse.solve(g).matrix - full.matrix).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(ReducedSteadyState, RequiresTrap)
{
    const auto parts = lindblad_parts(chain(3, 0.0, 0.0), TransportSpec{0.0, 0.0, {}});
    EXPECT_THROW(ReducedSteadyState{parts}, InvalidArgument);
}

TEST(HermitianCoordinates, RoundTrip)
{
    HermitianCoordinates c(4);
    ASSERT_EQ(c.size(), 16u);
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(16, 1.0, 16.0);
    const Eigen::MatrixXcd m = c.to_matrix(x);
    EXPECT_EQ(m, m.adjoint());
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(m(Eigen::Index(i), Eigen::Index(i)).real(), x(Eigen::Index(c.population(i))));
    const auto k = c.real_part(1, 3);
    EXPECT_EQ(m(1, 3), cplx(x(Eigen::Index(k)), x(Eigen::Index(k + 1))));
}
