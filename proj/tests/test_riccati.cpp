#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "rhc/rhc.hpp"
#include "support.hpp"

using namespace rhc;
using testsupport::identity_cost;
using testsupport::matrix_gap;
using testsupport::study_system;
using testsupport::study_terminal;
using Catch::Approx;

TEST_CASE("riccati_map basics") {
    const LinearSystem sys = study_system();
    const CostSpec cost = identity_cost(2, 1);

    SECTION("map at zero returns Q") {
        const MatrixXd out = riccati_map(sys, cost, MatrixXd::Zero(2, 2));
        REQUIRE(matrix_gap(out, cost.Q) == 0.0);
    }

    SECTION("matches the Woodbury form on the study terminal weight") {
        const MatrixXd out = riccati_map(sys, cost, study_terminal());
        const MatrixXd oracle =
            testsupport::riccati_map_woodbury(sys.A, sys.B, cost.Q, cost.R, study_terminal());
        REQUIRE(matrix_gap(out, oracle) <= 1e-10 * oracle.norm());
    }

    SECTION("fixed point of the DARE solution") {
        const RiccatiSolution sol = solve_dare(sys, cost);
        REQUIRE(spectral_norm(riccati_map(sys, cost, sol.P) - sol.P) <= 1e-11);
    }

    SECTION("dimension mismatch is rejected") {
        REQUIRE_THROWS_AS(riccati_map(sys, cost, MatrixXd::Zero(3, 3)), DimensionError);
    }
}

TEST_CASE("riccati_map agrees with the Woodbury form on random PSD inputs") {
    Rng rng(7001);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_u64() % 3);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.next_u64() % n);
        const LinearSystem sys = testsupport::random_system(rng, n, m, rng.uniform(0.2, 1.4));
        const CostSpec cost = identity_cost(n, m);
        const MatrixXd P = testsupport::random_psd(rng, n, rng.uniform(0.1, 10.0));
        const MatrixXd lhs = riccati_map(sys, cost, P);
        const MatrixXd rhs = testsupport::riccati_map_woodbury(sys.A, sys.B, cost.Q, cost.R, P);
        REQUIRE(spectral_norm(lhs - rhs) <= 1e-10 * std::max(1.0, spectral_norm(rhs)));
    }
}

TEST_CASE("riccati_iterate") {
    const LinearSystem sys = study_system();
    const CostSpec cost = identity_cost(2, 1);

    SECTION("zero iterations is the identity") {
        const MatrixXd P = study_terminal();
        REQUIRE(matrix_gap(riccati_iterate(sys, cost, P, 0), P) == 0.0);
    }

    SECTION("the fixed point is invariant for i up to 50") {
        const RiccatiSolution sol = solve_dare(sys, cost, 1e-12);
        for (int i : {1, 5, 20, 50})
            REQUIRE(spectral_norm(riccati_iterate(sys, cost, sol.P, i) - sol.P) <= 1e-11);
    }

    SECTION("three iterations match a backward DP recursion") {
        const MatrixXd via_map = riccati_iterate(sys, cost, MatrixXd::Zero(2, 2), 3);
        const auto dp =
            testsupport::backward_dp(sys.A, sys.B, cost.Q, cost.R, MatrixXd::Zero(2, 2), 3);
        REQUIRE(matrix_gap(via_map, dp.cost_to_go.back()) <= 1e-9);
    }

    SECTION("negative iteration count is rejected") {
        REQUIRE_THROWS_AS(riccati_iterate(sys, cost, study_terminal(), -1), InvalidRange);
    }
}

TEST_CASE("solve_dare") {
    SECTION("scalar closed form") {
        MatrixXd A(1, 1), B(1, 1);
        A << 0.5;
        B << 1.0;
        const LinearSystem sys(A, B, 1.0);
        const CostSpec cost = identity_cost(1, 1);
        const RiccatiSolution sol = solve_dare(sys, cost);
        const double oracle = testsupport::scalar_dare_root(0.5, 1.0, 1.0, 1.0);
        REQUIRE(sol.P(0, 0) == Approx(oracle).epsilon(1e-10));
        REQUIRE(sol.P(0, 0) == Approx(1.1327822185373186).epsilon(1e-12));
    }

    SECTION("A = 0 makes the map constant at Q") {
        const LinearSystem sys(MatrixXd::Zero(3, 3), MatrixXd::Identity(3, 3), 1.0);
        const CostSpec cost = identity_cost(3, 3);
        const RiccatiSolution sol = solve_dare(sys, cost);
        REQUIRE(matrix_gap(sol.P, MatrixXd::Identity(3, 3)) <= 1e-14);
    }

    SECTION("study system: residual and doubling cross-check") {
        const LinearSystem sys = study_system();
        const CostSpec cost = identity_cost(2, 1);
        const RiccatiSolution sol = solve_dare(sys, cost);
        REQUIRE(sol.residual < 1e-10);
        REQUIRE(spectral_norm(sol.P - riccati_map(sys, cost, sol.P)) < 1e-10);
        const MatrixXd oracle = testsupport::solve_dare_doubling(sys.A, sys.B, cost.Q, cost.R);
        REQUIRE(spectral_norm(sol.P - oracle) <= 1e-9 * spectral_norm(oracle));
    }

    SECTION("unstabilizable system does not converge") {
        const LinearSystem sys(2.0 * MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 1), 1.0);
        const CostSpec cost = identity_cost(2, 1);
        REQUIRE_THROWS_AS(solve_dare(sys, cost, 1e-12, 2000), NonConvergence);
    }
}

TEST_CASE("gain") {
    const LinearSystem sys = study_system();
    const CostSpec cost = identity_cost(2, 1);

    SECTION("zero weight gives zero gain") {
        REQUIRE(gain(sys, cost, MatrixXd::Zero(2, 2)).norm() == 0.0);
    }

    SECTION("optimal gain stabilizes") {
        const RiccatiSolution sol = solve_dare(sys, cost);
        const MatrixXd K = gain(sys, cost, sol.P);
        REQUIRE(spectral_radius(sys.A - sys.B * K) < 1.0);
    }

    SECTION("scalar closed form") {
        MatrixXd A(1, 1), B(1, 1);
        A << 0.5;
        B << 1.0;
        const LinearSystem scalar(A, B, 1.0);
        const CostSpec cost1 = identity_cost(1, 1);
        const double p = testsupport::scalar_dare_root(0.5, 1.0, 1.0, 1.0);
        MatrixXd F(1, 1);
        F << p;
        REQUIRE(gain(scalar, cost1, F)(0, 0) == Approx(0.5 * p / (1.0 + p)).epsilon(1e-12));
    }
}

TEST_CASE("closed_loop") {
    SECTION("zero weight leaves the open loop") {
        const LinearSystem sys = study_system();
        const CostSpec cost = identity_cost(2, 1);
        REQUIRE(matrix_gap(closed_loop(sys, cost, MatrixXd::Zero(2, 2)), sys.A) == 0.0);
    }

    SECTION("agrees with A - B*gain on random instances") {
        Rng rng(7002);
        for (int trial = 0; trial < 50; ++trial) {
            const LinearSystem sys = testsupport::random_system(rng, 3, 2, rng.uniform(0.3, 1.2));
            const CostSpec cost = identity_cost(3, 2);
            const MatrixXd P = testsupport::random_psd(rng, 3, rng.uniform(0.1, 5.0));
            const MatrixXd direct = closed_loop(sys, cost, P);
            const MatrixXd via_gain = sys.A - sys.B * gain(sys, cost, P);
            REQUIRE(spectral_norm(direct - via_gain) <= 1e-10 * std::max(1.0, sys.A.norm()));
        }
    }

    SECTION("optimal weight gives the optimal closed loop") {
        const LinearSystem sys = study_system();
        const CostSpec cost = identity_cost(2, 1);
        const OptimalSolution opt = solve_optimal(sys, cost);
        REQUIRE(matrix_gap(closed_loop(sys, cost, opt.riccati.P), opt.L_star) <= 1e-9);
    }
}

TEST_CASE("mpc_gain") {
    const LinearSystem sys = study_system();
    const CostSpec cost = identity_cost(2, 1);

    SECTION("N = 1 with zero terminal weight gives the zero gain") {
        const MatrixXd K = mpc_gain(sys, cost, RhcConfig(1, MatrixXd::Zero(2, 2)));
        REQUIRE(K.norm() == 0.0);
    }

    SECTION("N = 1 with the optimal terminal weight recovers the optimal gain") {
        const OptimalSolution opt = solve_optimal(sys, cost);
        const MatrixXd K = mpc_gain(sys, cost, RhcConfig(1, opt.riccati.P));
        REQUIRE(matrix_gap(K, opt.K_star) <= 1e-10);
    }

    SECTION("N = 4 matches the backward DP first-step feedback") {
        const MatrixXd K = mpc_gain(sys, cost, RhcConfig(4, MatrixXd::Zero(2, 2)));
        const MatrixXd oracle =
            testsupport::dp_first_gain(sys.A, sys.B, cost.Q, cost.R, MatrixXd::Zero(2, 2), 4);
        REQUIRE(matrix_gap(K, oracle) <= 1e-9);
    }
}

TEST_CASE("phi") {
    const LinearSystem sys = study_system();
    const CostSpec cost = identity_cost(2, 1);

    SECTION("empty product is the identity") {
        REQUIRE(matrix_gap(phi(sys, cost, study_terminal(), 2, 2), MatrixXd::Identity(2, 2)) == 0.0);
    }

    SECTION("at the fixed point the product collapses to powers of L_star") {
        const OptimalSolution opt = solve_optimal(sys, cost);
        for (int k : {1, 3, 6}) {
            MatrixXd Lk = MatrixXd::Identity(2, 2);
            for (int i = 0; i < k; ++i) Lk = Lk * opt.L_star;
            REQUIRE(spectral_norm(phi(sys, cost, opt.riccati.P, 0, k) - Lk) <= 1e-9);
        }
    }

    SECTION("matches an unrolled product of closed-loop factors") {
        Rng rng(7003);
        const LinearSystem rnd = testsupport::random_system(rng, 3, 1, 0.8);
        const CostSpec cost3 = identity_cost(3, 1);
        const MatrixXd P = testsupport::random_psd(rng, 3, 2.0);
        const MatrixXd P1 = riccati_map(rnd, cost3, P);
        const MatrixXd P2 = riccati_map(rnd, cost3, P1);
        const MatrixXd oracle = closed_loop(rnd, cost3, P) * closed_loop(rnd, cost3, P1) *
                                closed_loop(rnd, cost3, P2);
        REQUIRE(spectral_norm(phi(rnd, cost3, P, 0, 3) - oracle) <= 1e-10);
    }

    SECTION("invalid ranges are rejected") {
        REQUIRE_THROWS_AS(phi(sys, cost, study_terminal(), 3, 2), InvalidRange);
        REQUIRE_THROWS_AS(phi(sys, cost, study_terminal(), -1, 2), InvalidRange);
    }
}

TEST_CASE("phi_bar") {
    const LinearSystem sys = study_system();
    const CostSpec cost = identity_cost(2, 1);

    SECTION("no modeling error reduces to phi") {
        const MatrixXd P = study_terminal();
        for (int i : {0, 1, 4})
            REQUIRE(spectral_norm(phi_bar(sys, sys, cost, P, 0, i) - phi(sys, cost, P, 0, i)) <=
                    1e-10);
    }

    SECTION("empty product is the identity") {
        REQUIRE(matrix_gap(phi_bar(sys, sys, cost, study_terminal(), 1, 1),
                           MatrixXd::Identity(2, 2)) == 0.0);
    }

    SECTION("two factors match a hand-unrolled product") {
        Rng rng(7004);
        const LinearSystem nominal = testsupport::perturb_system(rng, sys, 0.01);
        const MatrixXd P = study_terminal();
        const MatrixXd S_true = input_gram(sys, cost);
        const MatrixXd S_nom = input_gram(nominal, cost);
        const MatrixXd I2 = MatrixXd::Identity(2, 2);
        const auto lbar = [&](const MatrixXd& X) {
            const MatrixXd W = I2 + (S_true - S_nom) * X;
            const MatrixXd H = (I2 + S_true * X).inverse() * (nominal.A - sys.A);
            const MatrixXd L = (I2 + S_true * X).inverse() * sys.A;
            return (W * (H + L)).eval();
        };
        const MatrixXd oracle = lbar(P) * lbar(riccati_map(sys, cost, P));
        REQUIRE(spectral_norm(phi_bar(sys, nominal, cost, P, 0, 2) - oracle) <= 1e-10);
    }
}

TEST_CASE("riccati_difference_terms") {
    Rng rng(7005);

    SECTION("i = 0 splits into the raw difference and zero") {
        const LinearSystem sys = study_system();
        const CostSpec cost = identity_cost(2, 1);
        const MatrixXd P1 = testsupport::random_psd(rng, 2, 1.0);
        const MatrixXd P2 = testsupport::random_psd(rng, 2, 1.0);
        const auto terms = riccati_difference_terms(sys, sys, cost, P1, P2, 0);
        REQUIRE(matrix_gap(terms.term_a, P1 - P2) == 0.0);
        REQUIRE(terms.term_b.norm() == 0.0);
    }

    SECTION("same model and same weight vanish") {
        const LinearSystem sys = study_system();
        const CostSpec cost = identity_cost(2, 1);
        const MatrixXd P = study_terminal();
        const auto terms = riccati_difference_terms(sys, sys, cost, P, P, 4);
        REQUIRE(terms.term_a.norm() <= 1e-12);
        REQUIRE(terms.term_b.norm() <= 1e-12);
    }

    SECTION("sums to the direct difference on a random 3x3 instance") {
        const LinearSystem sys = testsupport::random_system(rng, 3, 2, 0.9);
        const CostSpec cost = identity_cost(3, 2);
        const LinearSystem nominal = testsupport::perturb_system(rng, sys, 0.05);
        const MatrixXd P1 = testsupport::random_psd(rng, 3, 2.0);
        const MatrixXd P2 = testsupport::random_psd(rng, 3, 2.0);
        const int i = 4;
        const auto terms = riccati_difference_terms(sys, nominal, cost, P1, P2, i);
        const MatrixXd direct =
            riccati_iterate(nominal, cost, P1, i) - riccati_iterate(sys, cost, P2, i);
        REQUIRE(spectral_norm(terms.term_a + terms.term_b - direct) <= 1e-8);
    }
}

TEST_CASE("one-step difference identity") {
    Rng rng(7006);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_u64() % 3);
        const LinearSystem sys = testsupport::random_system(rng, n, 1, rng.uniform(0.3, 1.2));
        const CostSpec cost = identity_cost(n, 1);
        const MatrixXd P1 = testsupport::random_psd(rng, n, rng.uniform(0.2, 4.0));
        const MatrixXd P2 = testsupport::random_psd(rng, n, rng.uniform(0.2, 4.0));
        const MatrixXd lhs = riccati_map(sys, cost, P1) - riccati_map(sys, cost, P2);
        const MatrixXd left = sys.A - sys.B * gain(sys, cost, P1);
        const MatrixXd right = sys.A - sys.B * gain(sys, cost, P2);
        const MatrixXd rhs = left.transpose() * (P1 - P2) * right;
        REQUIRE(spectral_norm(lhs - rhs) <= 1e-9 * std::max(1.0, spectral_norm(lhs)));
    }
}

TEST_CASE("multi-step difference identity") {
    Rng rng(7007);
    for (int trial = 0; trial < 20; ++trial) {
        const LinearSystem sys = testsupport::random_system(rng, 3, 1, rng.uniform(0.3, 1.1));
        const CostSpec cost = identity_cost(3, 1);
        const MatrixXd P1 = testsupport::random_psd(rng, 3, 2.0);
        const MatrixXd P2 = testsupport::random_psd(rng, 3, 2.0);
        const int i = 1 + static_cast<int>(rng.next_u64() % 10);
        const MatrixXd lhs = riccati_iterate(sys, cost, P1, i) - riccati_iterate(sys, cost, P2, i);
        const MatrixXd rhs = phi(sys, cost, P1, 0, i).transpose() * (P1 - P2) *
                             phi(sys, cost, P2, 0, i);
        REQUIRE(spectral_norm(lhs - rhs) <= 1e-8 * std::max(1.0, spectral_norm(lhs)));
    }
}

TEST_CASE("cross-model decomposition reproduces the direct difference") {
    Rng rng(7008);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_u64() % 3);
        const LinearSystem sys = testsupport::random_system(rng, n, 1, rng.uniform(0.3, 1.1));
        const CostSpec cost = identity_cost(n, 1);
        const LinearSystem nominal =
            testsupport::perturb_system(rng, sys, rng.uniform(0.0, 0.1));
        const MatrixXd P1 = testsupport::random_psd(rng, n, rng.uniform(0.2, 3.0));
        const MatrixXd P2 = testsupport::random_psd(rng, n, rng.uniform(0.2, 3.0));
        const int i = static_cast<int>(rng.next_u64() % 9);
        const auto terms = riccati_difference_terms(sys, nominal, cost, P1, P2, i);
        const MatrixXd direct =
            riccati_iterate(nominal, cost, P1, i) - riccati_iterate(sys, cost, P2, i);
        REQUIRE(spectral_norm(terms.term_a + terms.term_b - direct) <=
                1e-8 * std::max(1.0, spectral_norm(direct)));
    }
}

TEST_CASE("state-transition decay bound") {
    Rng rng(7009);
    for (int trial = 0; trial < 10; ++trial) {
        const LinearSystem sys = testsupport::random_system(rng, 3, 2, rng.uniform(0.3, 0.95));
        const CostSpec cost = identity_cost(3, 2);
        const RiccatiSolution sol = solve_dare(sys, cost);
        const double beta = beta_star(sol.P, cost.Q);
        const MatrixXd P = testsupport::random_psd(rng, 3, rng.uniform(0.2, 5.0));
        for (int i = 0; i <= 30; i += 5) {
            const double bound =
                std::sqrt(beta) * std::pow(std::sqrt(1.0 - 1.0 / beta), i) + 1e-9;
            REQUIRE(spectral_norm(phi(sys, cost, P, 0, i)) <= bound);
        }
    }
}

TEST_CASE("domain type validation") {
    SECTION("CostSpec rejects asymmetric or indefinite weights") {
        MatrixXd Q(2, 2);
        Q << 1.0, 0.5, 0.0, 1.0;  // asymmetric beyond 1e-12
        REQUIRE_THROWS_AS(CostSpec(Q, MatrixXd::Identity(1, 1)), std::invalid_argument);
        REQUIRE_THROWS_AS(CostSpec(MatrixXd::Identity(2, 2), MatrixXd::Zero(1, 1)),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(CostSpec(-MatrixXd::Identity(2, 2), MatrixXd::Identity(1, 1)),
                          std::invalid_argument);
    }

    SECTION("strong assumption flag") {
        REQUIRE(identity_cost(2, 1).strong_assumption());
        REQUIRE_FALSE(CostSpec(0.5 * MatrixXd::Identity(2, 2), MatrixXd::Identity(1, 1))
                          .strong_assumption());
    }

    SECTION("LinearSystem shape checks") {
        REQUIRE_THROWS_AS(LinearSystem(MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 1)),
                          DimensionError);
        REQUIRE_THROWS_AS(LinearSystem(MatrixXd::Zero(2, 2), MatrixXd::Zero(3, 1)),
                          DimensionError);
        REQUIRE_THROWS_AS(LinearSystem(MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 1), -1.0),
                          std::invalid_argument);
    }
}

TEST_CASE("optimal solution norm relations under the strong assumption") {
    Rng rng(7011);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_u64() % 3);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.next_u64() % n);
        const LinearSystem sys = testsupport::random_system(rng, n, m, rng.uniform(0.3, 1.2));
        const CostSpec cost = identity_cost(n, m);
        const OptimalSolution opt = solve_optimal(sys, cost);
        REQUIRE(min_eigenvalue(opt.riccati.P) >= 1.0 - 1e-9);  // P_star dominates Q = I
        const double p_norm = spectral_norm(opt.riccati.P);
        REQUIRE(spectral_norm(opt.K_star) * spectral_norm(opt.K_star) <= p_norm + 1e-9);
        REQUIRE(spectral_norm(opt.L_star) * spectral_norm(opt.L_star) <= p_norm + 1e-9);
        REQUIRE(spectral_radius(opt.L_star) < 1.0);
    }
}

TEST_CASE("returned weights are symmetric") {
    Rng rng(7010);
    const LinearSystem sys = testsupport::random_system(rng, 4, 2, 0.9);
    const CostSpec cost = identity_cost(4, 2);
    const MatrixXd P = testsupport::random_psd(rng, 4, 3.0);
    const MatrixXd mapped = riccati_map(sys, cost, P);
    REQUIRE((mapped - mapped.transpose()).norm() <= 1e-12);
    const MatrixXd iterated = riccati_iterate(sys, cost, P, 7);
    REQUIRE((iterated - iterated.transpose()).norm() <= 1e-12);
    const RiccatiSolution sol = solve_dare(sys, cost);
    REQUIRE((sol.P - sol.P.transpose()).norm() <= 1e-12);
}
