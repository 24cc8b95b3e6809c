#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <vector>

#include <boost/numeric/odeint.hpp>
#include <Eigen/Dense>

#include "enaqt/errors.hpp"
#include "enaqt/lindblad.hpp"

namespace enaqt {

struct PropagationOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double initial_step = 1e-3;
    std::size_t max_steps = 5'000'000;  // between consecutive output times
};

/// Integrates d rho/dt = L rho with adaptive Dormand-Prince 5(4) steps and
/// returns the state at each requested time. rho0 is the state at t = 0;
/// times must be ascending and non-negative.
inline std::vector<DensityMatrix> propagate(const Liouvillian& l, const DensityMatrix& rho0,
                                            const std::vector<double>& times,
                                            const PropagationOptions& opts = {})
{
    namespace ode = boost::numeric::odeint;
    using State = std::vector<cplx>;

    if (rho0.levels() != l.levels()) throw InvalidArgument("initial state does not match the Liouvillian");
    if (times.empty()) return {};
    if (!std::is_sorted(times.begin(), times.end())) throw InvalidArgument("output times must be ascending");
    if (times.front() < 0.0) throw InvalidArgument("output times must be non-negative");
    const bool prepend_zero = times.front() > 0.0;
    std::vector<double> grid;
    grid.reserve(times.size() + 1);
    if (prepend_zero) grid.push_back(0.0);
    grid.insert(grid.end(), times.begin(), times.end());

    const Eigen::Index d = l.levels();
    State x(static_cast<std::size_t>(d * d));
    Eigen::Map<Eigen::VectorXcd>(x.data(), d * d) = superop::vec(rho0.matrix);

    auto rhs = [&l, d](const State& in, State& out, double) {
        Eigen::Map<Eigen::VectorXcd>(out.data(), d * d) =
            l.matrix * Eigen::Map<const Eigen::VectorXcd>(in.data(), d * d);
    };

    std::vector<DensityMatrix> out;
    out.reserve(grid.size());
    auto observe = [&](const State& s, double) {
        Eigen::MatrixXcd m = Eigen::Map<const Eigen::MatrixXcd>(s.data(), d, d);
        out.push_back({0.5 * (m + m.adjoint()), rho0.n_sites, rho0.has_trap});
    };

    auto stepper = ode::make_dense_output(opts.abs_tol, opts.rel_tol, ode::runge_kutta_dopri5<State>());
    try {
        ode::integrate_times(stepper, rhs, x, grid.begin(), grid.end(), opts.initial_step, observe,
                             ode::max_step_checker(static_cast<int>(opts.max_steps)));
    } catch (const ode::step_adjustment_error& e) {
        throw StepSizeUnderflow(e.what());
    } catch (const ode::no_progress_error& e) {
        throw StepSizeUnderflow(e.what());
    }
    if (prepend_zero) out.erase(out.begin());
    else out.front().matrix = rho0.matrix;
    return out;
}

} // namespace enaqt
