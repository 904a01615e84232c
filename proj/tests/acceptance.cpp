// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: drives the full solver stack through the reference
// configurations and checks every headline quantity against its published
// value or closed-form bound, one line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "helmdd/decomp.hpp"
#include "helmdd/fem.hpp"
#include "helmdd/impmap.hpp"
#include "helmdd/oned.hpp"
#include "helmdd/opalgebra.hpp"
#include "helmdd/rng.hpp"
#include "helmdd/schwarz.hpp"

using namespace helmdd;

namespace {

// Mesh rule: triangle diameter k^(-5/4), so the cell side carries a 1/sqrt(2).
double cell(double k) { return std::pow(k, -1.25) / std::sqrt(2.0); }

struct Harness {
    int failures = 0;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    void record(int id, const std::string& label, bool pass, const std::string& detail) {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        t0 = std::chrono::steady_clock::now();
        std::printf("[%s] criterion %2d: %s  |  %s  (%.1fs)\n", pass ? "PASS" : "FAIL", id,
                    label.c_str(), detail.c_str(), secs);
        std::fflush(stdout);
        if (!pass) ++failures;
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

bool in_range(double v, double lo, double hi) { return v >= lo && v <= hi; }

// Canonical problems shared between criteria, keyed by (k, L).
class CanonicalCache {
public:
    CanonicalProblem& get(double k, double L) {
        const auto key = std::make_pair(k, L);
        auto it = cache_.find(key);
        if (it != cache_.end()) return *it->second;
        std::vector<double> absc;
        if (L == 1.0) absc = {1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0};
        else if (L == 2.0) absc = {1.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0};
        else if (L == 8.0) absc = {8.0 / 3.0, 16.0 / 3.0};
        auto cp = std::make_unique<CanonicalProblem>(L, 1.0, k, cell(k), absc);
        return *cache_.emplace(key, std::move(cp)).first->second;
    }

    double rho_at(double k, double L, double delta) {
        return l2_operator_norm(assemble_imp_map(get(k, L), delta, +1));
    }
    double gamma_at(double k, double L, double delta) {
        return l2_operator_norm(assemble_imp_map(get(k, L), delta, -1));
    }

private:
    std::map<std::pair<double, double>, std::unique_ptr<CanonicalProblem>> cache_;
};

struct StripSolver {
    RectMesh mesh;
    FemSpace space;
    std::unique_ptr<OrasSolver> solver;
};

StripSolver make_strip_solver(double k, double L, double delta, int N) {
    StripSolver s;
    const StripGeometry g = strip_geometry(L, delta, N);
    s.mesh = build_uniform_rect_mesh(g.global_length, 1.0, cell(k), g.abscissae);
    s.space = make_fem_space(s.mesh);
    s.solver = std::make_unique<OrasSolver>(
        oras_setup(s.space, k, strip_decomposition(s.space, N, g.r)));
    return s;
}

struct CheckerSolver {
    RectMesh mesh;
    FemSpace space;
    std::unique_ptr<OrasSolver> solver;
};

CheckerSolver make_checker_solver(double k, int n_side) {
    CheckerSolver s;
    s.mesh = build_uniform_rect_mesh(1.0, 1.0, cell(k));
    s.space = make_fem_space(s.mesh);
    const double H = 1.0 / n_side;
    s.solver = std::make_unique<OrasSolver>(
        oras_setup(s.space, k, checkerboard_decomposition(s.space, n_side, H / 4.0)));
    return s;
}

Vector random_start(const FemSpace& space, Rng& rng) {
    Vector u(space.n_dofs);
    for (int i = 0; i < space.n_dofs; ++i) u[i] = rng.unit_disc();
    return u;
}

double mean_residual_iterations(const OrasSolver& s, double tol, int maxit, int starts,
                                std::uint64_t seed) {
    Rng rng(seed);
    double sum = 0.0;
    for (int t = 0; t < starts; ++t) {
        const Vector u0 = random_start(*s.space, rng);
        const IterationHistory h = run_fixed_point(s, Vector::Zero(s.space->n_dofs), u0, tol,
                                                   maxit, StopCriterion::Residual);
        sum += h.reached ? h.iterations : maxit;
    }
    return sum / starts;
}

double richardson_identity_defect(const OrasSolver& s, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
        const Vector u = random_start(*s.space, rng);
        const Vector F = random_start(*s.space, rng);
        const Vector a = oras_iterate(s, u, F);
        const Vector b = u + apply_oras_preconditioner(s, F - s.A * u);
        worst = std::max(worst, (a - b).norm() / a.norm());
    }
    return worst;
}

}  // namespace

int main() {
    Harness hn;
    CanonicalCache maps;
    std::printf("acceptance suite: %d criteria\n", 12);

    // 1. transmitted-map norms against the published table values
    {
        const double r10 = maps.rho_at(10, 1.0, 1.0 / 3.0);
        const double r20 = maps.rho_at(20, 1.0, 1.0 / 3.0);
        const double r10L2 = maps.rho_at(10, 2.0, 2.0 / 3.0);
        const bool ok = in_range(r10, 0.155, 0.185) && in_range(r20, 0.175, 0.205) &&
                        in_range(r10L2, 0.075, 0.098);
        hn.record(1, "transmitted-map norms rho", ok,
                  "rho(10,1/3,1)=" + fmt(r10) + " rho(20,1/3,1)=" + fmt(r20) +
                      " rho(10,2/3,2)=" + fmt(r10L2));
    }

    // 2. reflected-map norms
    {
        const double g10 = maps.gamma_at(10, 1.0, 2.0 / 3.0);
        const double g20 = maps.gamma_at(20, 1.0, 2.0 / 3.0);
        const bool ok = in_range(g10, 0.94, 0.98) && in_range(g20, 0.98, 1.005);
        hn.record(2, "reflected-map norms gamma", ok,
                  "gamma(10,2/3,1)=" + fmt(g10) + " gamma(20,2/3,1)=" + fmt(g20));
    }

    // 3. reflected norm bounded by the transmitted norm
    {
        bool ok = true;
        std::string detail;
        for (double k : {10.0, 20.0})
            for (double L : {1.0, 2.0})
                for (double delta : {L / 3.0, L / 6.0}) {
                    const double r = maps.rho_at(k, L, delta);
                    const double g = maps.gamma_at(k, L, delta);
                    const bool here = g <= std::sqrt(1.0 + r * r) + 0.02;
                    ok = ok && here;
                    if (!here)
                        detail += " violated at k=" + fmt(k) + " L=" + fmt(L) + " d=" + fmt(delta);
                }
        hn.record(3, "gamma <= sqrt(1+rho^2) + 0.02 over the grid", ok,
                  ok ? "holds at 8 parameter points" : detail);
    }

    // 4. composite-map norms
    {
        const double h = cell(10);
        const double z2 = composite_zeta(10, 2, 2.0, 2.0 / 3.0, h);
        const double r = rho(10, 2.0 / 3.0, 2.0, h);
        const double z4 = composite_zeta(10, 4, 2.0, 2.0 / 3.0, h);
        const double z8 = composite_zeta(10, 8, 2.0, 2.0 / 3.0, h);
        const bool ok = std::abs(z2 - 2.0 * r) <= 1e-10 && in_range(z2, 0.15, 0.20) &&
                        in_range(z4, 0.03, 0.055) && z4 <= z2 && z8 <= z2;
        hn.record(4, "composite-map norms zeta", ok,
                  "zeta2=" + fmt(z2) + " (2rho=" + fmt(2 * r) + ") zeta4=" + fmt(z4) +
                      " zeta8=" + fmt(z8));
    }

    // 5. exact 1-d nilpotency
    {
        double worst = 0.0;
        for (int N = 2; N <= 8; ++N)
            for (double k : {1.0, 10.0, 40.0}) {
                const auto d = strip_intervals_1d(2.0 * N, N, 0.25, k);
                worst = std::max(worst, verify_nilpotency(d, 100, 9000 + N));
            }
        hn.record(5, "1-d N-step annihilation", worst <= 1e-12, "max ratio " + fmt(worst));
    }

    // 6. monomial-set cardinality and expansion identity
    {
        bool counts_ok = true;
        for (int n = 1; n <= 12 && counts_ok; ++n)
            for (int j = 0; j <= n - 1 && counts_ok; ++j)
                counts_ok = enumerate_monomials(n, j).size() ==
                            static_cast<std::size_t>(2.0 * binomial(n - 1, j) + 0.5);
        double worst = 0.0;
        for (int n = 1; n <= 8; ++n) worst = std::max(worst, expansion_defect(n, 3, 500 + n));
        const bool ok = counts_ok && worst <= 1e-10;
        hn.record(6, "monomial cardinalities and expansion defect", ok,
                  std::string("counts ") + (counts_ok ? "exact" : "WRONG") + ", max defect " +
                      fmt(worst));
    }

    // Shared solvers for criteria 7-10.
    StripSolver strip4 = make_strip_solver(20, 2.0, 2.0 / 3.0, 4);
    StripSolver strip8 = make_strip_solver(20, 2.0, 2.0 / 3.0, 8);

    // 7. strip iteration counts
    {
        const double m4 = mean_residual_iterations(*strip4.solver, 1e-6, 60, 10, 42);
        const double m8 = mean_residual_iterations(*strip8.solver, 1e-6, 60, 10, 42);
        const bool ok = in_range(m4, 4.0, 9.0) && in_range(m8, 9.0, 16.0);
        hn.record(7, "strip iteration counts (k=20)", ok,
                  "mean N=4: " + fmt(m4) + ", N=8: " + fmt(m8));
    }

    CheckerSolver check2 = make_checker_solver(40, 2);
    CheckerSolver check4 = make_checker_solver(40, 4);

    // 8. checkerboard fixed-point and preconditioned-GMRES counts
    {
        Rng rng(7);
        const Vector u2 = random_start(check2.space, rng);
        const IterationHistory h2 = run_fixed_point(
            *check2.solver, Vector::Zero(check2.space.n_dofs), u2, 1e-6, 200, StopCriterion::Residual);
        const int g2 = gmres_iterations(*check2.solver, u2, 1e-6, 200);
        const Vector u4 = random_start(check4.space, rng);
        const IterationHistory h4 = run_fixed_point(
            *check4.solver, Vector::Zero(check4.space.n_dofs), u4, 1e-6, 200, StopCriterion::Residual);
        const int g4 = gmres_iterations(*check4.solver, u4, 1e-6, 200);
        const bool ok = h2.reached && in_range(h2.iterations, 4, 7) && in_range(g2, 4, 7) &&
                        h4.reached && in_range(h4.iterations, 10, 18) && in_range(g4, 9, 17);
        hn.record(8, "checkerboard counts (k=40, delta=H/4)", ok,
                  "2x2 fp=" + std::to_string(h2.iterations) + " gmres=" + std::to_string(g2) +
                      "; 4x4 fp=" + std::to_string(h4.iterations) + " gmres=" + std::to_string(g4));
    }

    // 9. measured power contraction against the closed-form bound
    {
        StripSolver strip3 = make_strip_solver(10, 8.0, 8.0 / 3.0, 3);
        const ContractionStats st = estimate_contraction(*strip3.solver, 3, 10, 123);
        const double r = maps.rho_at(10, 8.0, 8.0 / 3.0);
        const double g = maps.gamma_at(10, 8.0, 16.0 / 3.0);
        const double bound = error_power_bound(r, g, 3);
        const bool ok = bound < 1.0 && st.max_ratio <= bound + 0.05;
        hn.record(9, "measured |T^3| within the closed-form bound", ok,
                  "measured " + fmt(st.max_ratio) + " vs bound " + fmt(bound) + " (rho=" + fmt(r) +
                      ", gamma=" + fmt(g) + ")");
    }

    // 10. sweep/preconditioner equivalence on every geometry above
    {
        double worst = 0.0;
        worst = std::max(worst, richardson_identity_defect(*strip4.solver, 31));
        worst = std::max(worst, richardson_identity_defect(*strip8.solver, 32));
        worst = std::max(worst, richardson_identity_defect(*check2.solver, 33));
        worst = std::max(worst, richardson_identity_defect(*check4.solver, 34));
        hn.record(10, "one sweep equals a preconditioned Richardson step", worst <= 1e-12,
                  "max relative defect " + fmt(worst));
    }

    // 11. finite-element validation: cubic convergence and trace isometry
    {
        const double k = 10.0;
        auto data = [k](Vec2 p, Vec2 n) {
            return (cplx(0.0, k) * n.x - cplx(0.0, k)) * std::exp(cplx(0.0, k * p.x));
        };
        auto exact = [k](Vec2 p) { return std::exp(cplx(0.0, k * p.x)); };
        double prev = 0.0;
        bool ratios_ok = true;
        std::string detail = "ratios";
        for (int level = 0; level < 3; ++level) {
            const double h = std::pow(10.0, -1.25) / (1 << level);
            const RectMesh m = build_uniform_rect_mesh(1.0, 1.0, h);
            const FemSpace s = make_fem_space(m);
            const Vector u = solve_interior_impedance(s, k, nullptr, data);
            const double err = l2_error(s, u, exact);
            if (level > 0) {
                ratios_ok = ratios_ok && prev / err >= 6.0;
                detail += " " + fmt(prev / err);
            }
            prev = err;
        }
        bool defects_ok = true;
        double last = 1e300;
        detail += ", defects";
        for (double h : {0.1, 0.05, 0.025}) {
            const RectMesh m = build_uniform_rect_mesh(1.0, 1.0, h);
            const FemSpace s = make_fem_space(m);
            const Vector u = solve_interior_impedance(s, k, nullptr, data);
            const double defect = impedance_isometry_defect(s, k, u);
            defects_ok = defects_ok && defect < last;
            last = defect;
            detail += " " + fmt(defect);
        }
        hn.record(11, "plane-wave cubic convergence and isometry defect", ratios_ok && defects_ok,
                  detail);
    }

    // 12. computed transmitted norm below the high-frequency reference
    {
        const double ref = semiclassical_bound(1.0 / 3.0);
        const double r10 = maps.rho_at(10, 1.0, 1.0 / 3.0);
        const double r20 = maps.rho_at(20, 1.0, 1.0 / 3.0);
        const double r40 = maps.rho_at(40, 1.0, 1.0 / 3.0);
        const bool ok = r10 <= ref && r20 <= ref && r40 <= ref;
        hn.record(12, "rho(k,1/3,1) below the high-frequency reference " + fmt(ref), ok,
                  "rho = " + fmt(r10) + ", " + fmt(r20) + ", " + fmt(r40) +
                      " (consistency trend; the reference addresses the fully absorbing model)");
    }

    std::printf("%s: %d of 12 criteria failed\n", hn.failures ? "FAIL" : "OK", hn.failures);
    return hn.failures ? 1 : 0;
}
