#include "qbeam/coherent.hpp"
#include "qbeam/diagnostics.hpp"
#include "qbeam/errors.hpp"
#include "qbeam/qsolver.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace qbeam;
using testing::for_all;
using testing::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

GaussianBeamState beam(double x0, double p0, double sigma, double dsigma = 0.0) {
    GaussianBeamState st;
    st.x0 = x0;
    st.p0 = p0;
    st.sigma = sigma;
    st.dsigma = dsigma;
    return st;
}

Complex overlap(const WaveField& a, const WaveField& b) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < a.psi.size(); ++j) {
        acc += std::conj(a.psi[j]) * b.psi[j];
    }
    return acc * a.grid.dx();
}

OdeSettings tight() {
    OdeSettings s;
    s.abs_tol = 1e-13;
    s.rel_tol = 1e-12;
    return s;
}

} // namespace

TEST_CASE("steps preserve the norm") {
    const GridSpec grid{-1.0, 1.0, 1024};
    const SplitStepSolver solver(grid, StrengthProfile::modulated(1.0, 0.1, 1.0),
                                 EmittanceProfile::exponential(0.02, 0.01));
    WaveField f = gaussian_wave(grid, beam(0.05, 0.02, 0.12, 0.01), 0.02);
    for (int i = 0; i < 100; ++i) {
        const double before = f.norm();
        f = solver.step(f, 1e-2);
        CHECK(std::abs(f.norm() - before) < 1e-12);
    }
    CHECK(f.s == doctest::Approx(1.0));
}

TEST_CASE("step rejects bad input") {
    const GridSpec grid{-1.0, 1.0, 256};
    const SplitStepSolver solver(grid, StrengthProfile::constant(1.0), EmittanceProfile::constant(0.02));
    const auto f = gaussian_wave(grid, beam(0.0, 0.0, 0.1), 0.02);
    CHECK_THROWS_AS(solver.step(f, 0.0), InvalidParameter);
    const auto other = gaussian_wave({-1.0, 1.0, 128}, beam(0.0, 0.0, 0.1), 0.02);
    CHECK_THROWS_AS(solver.step(other, 1e-2), LengthMismatch);
}

TEST_CASE("matched coherent state returns to itself after one period") {
    const GridSpec grid{-1.0, 1.0, 2048};
    const auto spec = CoherentSpec::isothermal(1.0, 0.02, 0.05, 0.0);
    const SplitStepSolver solver(grid, spec.strength(), spec.emittance());
    const auto f0 = coherent_wave(grid, spec.initial_state(), 0.02, PhaseConvention::Full);
    const auto f1 = solver.evolve(f0, 2.0 * kPi, 5e-3, 2.0 * kPi).back();
    CHECK(f1.s == doctest::Approx(2.0 * kPi));
    CHECK(std::abs(std::norm(overlap(f0, f1)) - 1.0) < 1e-6);
}

TEST_CASE("free dispersion follows the closed form") {
    const GridSpec grid{-12.0, 12.0, 4096};
    const SplitStepSolver solver(grid, StrengthProfile::constant(0.0), EmittanceProfile::constant(0.02));
    const auto f = solver.evolve(gaussian_wave(grid, beam(0.0, 0.0, 0.1), 0.02), 10.0, 1e-2, 10.0).back();
    const auto m = moments_from_wave(f, 0.02);
    // sigma^2 = sigma0^2 + eps^2 s^2 / (4 sigma0^2)
    const double expected = std::sqrt(0.01 + 0.0004 * 100.0 / 0.04);
    CHECK(expected == doctest::Approx(0.1 * std::sqrt(101.0)));
    CHECK(std::abs(m.sigma - expected) / expected < 1e-4);
}

// The wave centroid obeys <x>'' = -K <x> + (eps'/eps) <x>': with p = -i eps
// d/dx, a varying eps rescales <p>. Fixed-step RK4 on that oscillator.
std::vector<double> damped_centroid(const StrengthProfile& k, const EmittanceProfile& e, double x0, double s_end,
                                    int steps, int every) {
    auto acc = [&](double s, double x, double v) { return -k(s) * x + emittance_log_derivative(e, s) * v; };
    const double h = s_end / steps;
    double x = x0;
    double v = 0.0;
    std::vector<double> out{x};
    for (int i = 0; i < steps; ++i) {
        const double s = i * h;
        const double k1x = v;
        const double k1v = acc(s, x, v);
        const double k2x = v + 0.5 * h * k1v;
        const double k2v = acc(s + 0.5 * h, x + 0.5 * h * k1x, v + 0.5 * h * k1v);
        const double k3x = v + 0.5 * h * k2v;
        const double k3v = acc(s + 0.5 * h, x + 0.5 * h * k2x, v + 0.5 * h * k2v);
        const double k4x = v + h * k3v;
        const double k4v = acc(s + h, x + h * k3x, v + h * k3v);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if ((i + 1) % every == 0) {
            out.push_back(x);
        }
    }
    return out;
}

TEST_CASE("moments track the envelope for modulated K and exponential eps") {
    const GridSpec grid{-1.0, 1.0, 2048};
    const auto k = StrengthProfile::modulated(1.0, 0.1, 1.0);
    const auto e = EmittanceProfile::exponential(0.02, 0.01);
    const auto st0 = beam(0.05, 0.0, 0.1);
    const SplitStepSolver solver(grid, k, e);
    const double period = 2.0 * kPi;
    const auto waves = solver.evolve(gaussian_wave(grid, st0, 0.02), period, 5e-3, period / 8.0);
    OdeSettings ode = tight();
    ode.output_cadence = period / 8.0;
    const auto traj = integrate(st0, k, e, period, ode);
    const auto centroid = damped_centroid(k, e, 0.05, period, 8000, 1000);
    REQUIRE(waves.size() == traj.size());
    REQUIRE(waves.size() == centroid.size());
    double undamped = 0.0;
    for (std::size_t i = 0; i < waves.size(); ++i) {
        const auto m = moments_from_wave(waves[i], e(waves[i].s));
        CHECK(std::abs(m.sigma - traj[i].sigma) / traj[i].sigma < 1e-4);
        CHECK(std::abs(m.mean_x - centroid[i]) / 0.05 < 1e-4);
        undamped = std::max(undamped, std::abs(m.mean_x - traj[i].x0) / 0.05);
    }
    // the fluid centroid law x0'' = -K x0 misses the damping by far more
    CHECK(undamped > 1e-2);
}

TEST_CASE("Madelung decomposition") {
    const GridSpec grid{-1.0, 1.0, 2048};
    SUBCASE("real Gaussian has no current") {
        const auto f = coherent_wave(grid, beam(0.1, 0.0, 0.1), 0.02, PhaseConvention::Full);
        const auto m = madelung_decompose(f, 0.02);
        for (std::size_t j = 0; j < m.P.size(); ++j) {
            if (m.mask[j]) {
                CHECK(std::abs(m.P[j]) < 1e-10);
            }
        }
    }
    SUBCASE("chirped Gaussian carries P = x sigma'/sigma") {
        const auto f = gaussian_wave(grid, beam(0.0, 0.0, 0.1, 0.03), 0.02);
        const auto m = madelung_decompose(f, 0.02);
        std::size_t used = 0;
        for (std::size_t j = 0; j < m.P.size(); ++j) {
            if (m.mask[j]) {
                CHECK(std::abs(m.P[j] - 0.3 * grid.x(j)) < 1e-6);
                ++used;
            } else {
                CHECK(m.P[j] == 0.0);
            }
        }
        CHECK(used > 500);
    }
    SUBCASE("quantum pressure term of the centred Gaussian is eps^2 x / (4 sigma^4)") {
        // dx = 1e-3 with a cell centre on x = 0.1
        const GridSpec shifted{-1.0245, 1.0235, 2048};
        const std::size_t j = 1124;
        REQUIRE(shifted.x(j) == doctest::Approx(0.1).epsilon(1e-12));
        const auto m = madelung_decompose(gaussian_wave(shifted, beam(0.0, 0.0, 0.1), 0.02), 0.02);
        const double oracle = 0.02 * 0.02 * 0.1 / (4.0 * 1e-4);
        CHECK(oracle == doctest::Approx(0.1));
        CHECK(std::abs(m.bohm[j] - oracle) < 1e-4);
    }
    SUBCASE("n is |psi|^2 and nonnegative") {
        const auto f = gaussian_wave(grid, beam(0.2, 0.03, 0.15, -0.01), 0.02);
        const auto m = madelung_decompose(f, 0.02);
        REQUIRE(m.n.size() == f.psi.size());
        REQUIRE(m.bohm.size() == f.psi.size());
        for (std::size_t j = 0; j < m.n.size(); ++j) {
            CHECK(m.n[j] >= 0.0);
            CHECK(m.n[j] == std::norm(f.psi[j]));
        }
    }
    SUBCASE("errors") {
        WaveField zero{grid, std::vector<Complex>(grid.n_cells), 0.0};
        CHECK_THROWS_AS(madelung_decompose(zero, 0.02), InvalidInput);
        CHECK_THROWS_AS(madelung_decompose(gaussian_wave(grid, beam(0.0, 0.0, 0.1), 0.02), 0.0), InvalidParameter);
    }
}

TEST_CASE("property: Madelung round trip reproduces the field") {
    for_all(20, 51, [](Gen& g, int) {
        const GridSpec grid{-1.5, 1.5, 1024};
        auto st = beam(g.uniform(-0.3, 0.3), g.uniform(-0.1, 0.1), g.uniform(0.08, 0.2), g.uniform(-0.05, 0.05));
        st.phi0 = g.uniform(-3.0, 3.0);
        const double eps = g.uniform(0.01, 0.04);
        const auto f = gaussian_wave(grid, st, eps);
        const auto m = madelung_decompose(f, eps);
        for (std::size_t j = 0; j < f.psi.size(); ++j) {
            if (m.mask[j]) {
                CHECK(std::abs(std::polar(std::sqrt(m.n[j]), m.phase[j]) - f.psi[j]) < 1e-10);
            }
        }
    });
}

TEST_CASE("classicality residual") {
    const GridSpec grid{-1.0, 1.0, 2048};
    SUBCASE("matched coherent state with eta0 = sigma0^2 K") {
        const auto f = coherent_wave(grid, beam(0.05, 0.0, 0.1), 0.02, PhaseConvention::Full);
        CHECK(classicality_residual(f, 0.02, 0.0, 0.01) < 1e-6);
    }
    SUBCASE("breathing Gaussian with eta0 from the envelope") {
        const double sigma = 0.12;
        const double dsigma = 0.04;
        const double eps = 0.02;
        const double deps = 0.005;
        const auto f = gaussian_wave(grid, beam(0.0, 0.0, sigma, dsigma), eps);
        const double eta0 = eta_from_envelope(sigma, dsigma, eps, deps);
        CHECK(classicality_residual(f, eps, deps, eta0) < 1e-5);
        CHECK(classicality_residual(f, eps, deps, 2.0 * eta0) > 0.4);
    }
    SUBCASE("dissipative coherent state") {
        const auto spec = CoherentSpec::dissipative(1.0, 0.01, 0.1, 0.05, 0.0);
        const auto f = gaussian_wave(grid, spec.initial_state(), spec.emittance()(0.0));
        const double eps = spec.emittance()(0.0);
        const double deps = eps * emittance_log_derivative(spec.emittance(), 0.0);
        CHECK(classicality_residual(f, eps, deps, eta_from_envelope(0.1, 0.0, eps, deps)) < 1e-5);
    }
}

TEST_CASE("property: Gaussian states are classical with the envelope pressure") {
    for_all(20, 52, [](Gen& g, int) {
        const GridSpec grid{-1.5, 1.5, 2048};
        const double sigma = g.uniform(0.08, 0.15);
        const double dsigma = g.uniform(-0.05, 0.05);
        const double eps = g.uniform(0.01, 0.03);
        const double deps = g.uniform(-0.01, 0.01);
        const auto f = gaussian_wave(grid, beam(g.uniform(-0.2, 0.2), 0.0, sigma, dsigma), eps);
        const double eta0 = eta_from_envelope(sigma, dsigma, eps, deps);
        if (eta0 > 0.0) {
            CHECK(classicality_residual(f, eps, deps, eta0) < 1e-5);
        }
    });
}

TEST_CASE("eta_from_envelope") {
    CHECK(eta_from_envelope(0.1, 0.0, 0.02, 0.3) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(eta_from_envelope(0.1, 0.4, 0.02, 0.0) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(eta_from_envelope(0.1, 0.05, 0.02, 0.01) == doctest::Approx(0.0125).epsilon(1e-14));
    // With eps'/eps = sigma'/sigma, eta0 = sigma'^2 + eps^2/(4 sigma^2) = sigma_P^2.
    for_all(100, 53, [](Gen& g, int) {
        const double sigma = g.uniform(0.01, 1.0);
        const double dsigma = g.uniform(-1.0, 1.0);
        const double eps = g.uniform(0.001, 0.1);
        const double deps = eps * dsigma / sigma;
        const double sp = sigma_p_envelope(sigma, dsigma, eps);
        CHECK(testing::rel_err(eta_from_envelope(sigma, dsigma, eps, deps), sp * sp) < 1e-13);
    });
    CHECK_THROWS_AS(eta_from_envelope(0.0, 0.0, 0.02, 0.0), InvalidParameter);
}

TEST_CASE("alpha-sigma lock") {
    SUBCASE("dissipative coherent run violates the lock by gamma") {
        const auto spec = CoherentSpec::dissipative(1.0, 0.01, 0.1, 0.05, 0.0);
        OdeSettings ode = tight();
        ode.output_cadence = 0.05;
        const auto traj = integrate(spec.initial_state(), spec.strength(), spec.emittance(), 10.0, ode);
        std::vector<double> s;
        std::vector<double> sigma;
        std::vector<double> eps;
        for (const auto& st : traj) {
            s.push_back(st.s);
            sigma.push_back(st.sigma);
            eps.push_back(spec.emittance()(st.s));
        }
        CHECK(enforce_alpha_sigma_lock(s, sigma, eps) == doctest::Approx(0.01).epsilon(1e-4));
    }
    SUBCASE("self-similar free expansion with eps slaved to sigma") {
        // sigma'' = sigma'^2/sigma + c^2/(4 sigma) when eps = c sigma and K = 0;
        // fine fixed-step RK4 on that reduced system is the oracle trajectory.
        const double c = 0.2;
        auto rhs = [c](double sg, double dsg) { return dsg * dsg / sg + c * c / (4.0 * sg); };
        double sg = 0.1;
        double dsg = 0.0;
        const double h = 1e-3;
        std::vector<double> s{0.0};
        std::vector<double> sigma{sg};
        std::vector<double> eps{c * sg};
        for (int i = 1; i <= 5000; ++i) {
            const double k1s = dsg;
            const double k1v = rhs(sg, dsg);
            const double k2s = dsg + 0.5 * h * k1v;
            const double k2v = rhs(sg + 0.5 * h * k1s, dsg + 0.5 * h * k1v);
            const double k3s = dsg + 0.5 * h * k2v;
            const double k3v = rhs(sg + 0.5 * h * k2s, dsg + 0.5 * h * k2v);
            const double k4s = dsg + h * k3v;
            const double k4v = rhs(sg + h * k3s, dsg + h * k3v);
            sg += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
            dsg += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            if (i % 10 == 0) {
                s.push_back(i * h);
                sigma.push_back(sg);
                eps.push_back(c * sg);
            }
        }
        CHECK(sigma.back() > 0.2);
        CHECK(enforce_alpha_sigma_lock(s, sigma, eps) < 1e-4);
    }
    SUBCASE("constant series") {
        const std::vector<double> s{0.0, 1.0, 2.0, 3.0};
        CHECK(enforce_alpha_sigma_lock(s, {0.1, 0.1, 0.1, 0.1}, {0.02, 0.02, 0.02, 0.02}) == 0.0);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(enforce_alpha_sigma_lock({0.0, 1.0}, {0.1, 0.1}, {0.02, 0.02}), InsufficientData);
        CHECK_THROWS_AS(enforce_alpha_sigma_lock({0.0, 1.0, 2.0}, {0.1, 0.1}, {0.02, 0.02, 0.02}), LengthMismatch);
    }
}

TEST_CASE("unitarity over 10^4 steps") {
    const GridSpec grid{-1.0, 1.0, 512};
    const SplitStepSolver solver(grid, StrengthProfile::modulated(1.0, 0.1, 1.0), EmittanceProfile::constant(0.02));
    WaveField f = gaussian_wave(grid, beam(0.05, 0.0, 0.1), 0.02);
    const double n0 = f.norm();
    for (int i = 0; i < 10000; ++i) {
        f = solver.step(f, 1e-3);
    }
    CHECK(std::abs(f.norm() - n0) < 1e-10);
}

TEST_CASE("Gaussian closure: a breathing state stays Gaussian") {
    const GridSpec grid{-1.5, 1.5, 2048};
    const SplitStepSolver solver(grid, StrengthProfile::constant(1.0), EmittanceProfile::constant(0.02));
    const double period = 2.0 * kPi;
    double worst = 0.0;
    solver.evolve(gaussian_wave(grid, beam(0.0, 0.0, 0.15), 0.02), period, 1e-2, period / 16.0,
                  [&](const WaveField& f) {
                      std::vector<double> n(f.psi.size());
                      for (std::size_t j = 0; j < n.size(); ++j) {
                          n[j] = std::norm(f.psi[j]);
                      }
                      worst = std::max(worst, std::abs(excess_kurtosis(n, f.grid)));
                  });
    CHECK(worst < 1e-3);
}

TEST_CASE("property: rms emittance of a Gaussian wave equals eps") {
    for_all(30, 54, [](Gen& g, int) {
        const GridSpec grid{-1.5, 1.5, 2048};
        const double eps = g.uniform(0.01, 0.03);
        const auto st = beam(g.uniform(-0.2, 0.2), g.uniform(-0.05, 0.05), g.uniform(0.08, 0.15),
                             g.uniform(-0.05, 0.05));
        const auto m = moments_from_wave(gaussian_wave(grid, st, eps), eps);
        CHECK(std::abs(m.emit_rms - eps) / eps < 1e-4);
    });
}

TEST_CASE("boundary leak detection") {
    const GridSpec grid{-1.0, 1.0, 512};
    SUBCASE("error") {
        const SplitStepSolver solver(grid, StrengthProfile::constant(0.0), EmittanceProfile::constant(0.02));
        const auto f = gaussian_wave(grid, beam(0.0, 0.0, 0.3), 0.02);
        try {
            solver.step(f, 1e-2);
            FAIL("expected BoundaryLeak");
        } catch (const BoundaryLeak& e) {
            CHECK(e.s() == doctest::Approx(1e-2));
        }
    }
    SUBCASE("warning") {
        QSolverSettings settings;
        int calls = 0;
        settings.on_leak_warning = [&](double, double amp) {
            ++calls;
            CHECK(amp > 1e-8);
        };
        const SplitStepSolver solver(grid, StrengthProfile::constant(0.0), EmittanceProfile::constant(0.02),
                                     settings);
        // |psi| at the edge ~ 1e-6: above the warning level, below the error level
        const auto f = gaussian_wave(grid, beam(0.0, 0.0, 0.131), 0.02);
        REQUIRE(f.boundary_amplitude() > 1e-8);
        REQUIRE(f.boundary_amplitude() < 1e-4);
        solver.step(f, 1e-3);
        CHECK(calls == 1);
    }
    SUBCASE("quiet") {
        QSolverSettings settings;
        int calls = 0;
        settings.on_leak_warning = [&](double, double) { ++calls; };
        const SplitStepSolver solver(grid, StrengthProfile::constant(1.0), EmittanceProfile::constant(0.02),
                                     settings);
        solver.step(gaussian_wave(grid, beam(0.0, 0.0, 0.1), 0.02), 1e-2);
        CHECK(calls == 0);
    }
}

TEST_CASE("only the full phase convention reproduces the centroid oscillator") {
    const GridSpec grid{-1.0, 1.0, 2048};
    const auto spec = CoherentSpec::isothermal(1.0, 0.02, 0.0, 0.05);
    const SplitStepSolver solver(grid, spec.strength(), spec.emittance());
    const double quarter = kPi / 2.0;
    // x0(s) = 0.05 sin s for the ODE
    const auto full = solver.evolve(coherent_wave(grid, spec.initial_state(), 0.02, PhaseConvention::Full), quarter,
                                    5e-3, quarter);
    const auto half = solver.evolve(coherent_wave(grid, spec.initial_state(), 0.02, PhaseConvention::Half), quarter,
                                    5e-3, quarter);
    CHECK(std::abs(moments_from_wave(full.back(), 0.02).mean_x - 0.05) < 1e-5);
    CHECK(std::abs(moments_from_wave(half.back(), 0.02).mean_x - 0.025) < 1e-5);
}

TEST_CASE("qstep matches the solver step") {
    const GridSpec grid{-1.0, 1.0, 256};
    const auto k = StrengthProfile::constant(1.0);
    const auto e = EmittanceProfile::constant(0.02);
    const auto f = gaussian_wave(grid, beam(0.05, 0.0, 0.1), 0.02);
    const auto a = qstep(f, k, e, 1e-2);
    const auto b = SplitStepSolver(grid, k, e).step(f, 1e-2);
    CHECK(a.psi == b.psi);
}
