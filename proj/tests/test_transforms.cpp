#include <gtest/gtest.h>

#include <sstream>

#include "qhecke/transforms.hpp"

using namespace qhecke;

namespace {

const TransformTables& tables() {
    static auto T = TransformTables::shared(make_gaussian_weight());
    return *T;
}

// φ(x) = 2 ∫_0^σ φ̂(u) cos(2πux) du by adaptive quadrature, independent of the evaluators.
double phi_by_quadrature(const TestFunction& f, double x) {
    auto g = [&](double u) { return f.hat(u) * std::cos(2 * pi * u * x); };
    return 2 * integrate(g, 0.0, f.sigma(), 1e-13, 20000).value;
}

}  // namespace

TEST(BesselJ0, AgainstStd) {
    double worst = 0;
    for (double x = 0; x < 80; x += 0.0173) worst = std::max(worst, std::abs(bessel_j0(x) - std::cyl_bessel_j(0.0, x)));
    EXPECT_LT(worst, 1e-12);
    EXPECT_EQ(bessel_j0(-3.0), bessel_j0(3.0));
}

TEST(Fejer, Examples) {
    auto f = TestFunction::fejer(1.5);
    EXPECT_EQ(f.hat(0), 1.0);
    EXPECT_EQ(f.phi(0.0), 1.5);
    EXPECT_NEAR(f.hat_integral(1, 10), 1.0 / 12, 1e-15);
    EXPECT_NEAR(f.hat(1), 1.0 / 3, 1e-15);
    EXPECT_EQ(f.hat(1.5), 0.0);
    EXPECT_EQ(f.hat(-1.7), 0.0);
    EXPECT_EQ(f.hat_deriv(1, 0), -1 / 1.5);
    EXPECT_EQ(f.hat_deriv(2, 0), 0.0);
    EXPECT_EQ(f.hat_deriv(1, 1), -1 / 1.5);
    EXPECT_EQ(TestFunction::fejer(0.8).hat_deriv(1, 1), 0.0);
    EXPECT_THROW(TestFunction::fejer(2.0), domain_error);
    EXPECT_THROW(TestFunction::fejer(0.0), domain_error);
}

TEST(Fejer, FourierConsistencyAndPositivity) {
    auto f = TestFunction::fejer(1.5);
    for (double x : {0.0, 0.1, 0.37, 1.0, 2.5, 7.9}) {
        EXPECT_NEAR(f.phi(x), phi_by_quadrature(f, x), 1e-11) << x;
        EXPECT_GE(f.phi(x), 0.0);
        EXPECT_EQ(f.phi(x), f.phi(-x));
    }
    for (cplx z : {cplx(0.3, -0.2), cplx(5.0, -0.01)}) {
        auto g = [&](double u) -> cplx { return f.hat(u) * std::cos(2 * pi * u * z); };
        cplx q = 2.0 * integrate_complex(g, 0.0, 1.5, 1e-13, 20000).value;
        EXPECT_LT(std::abs(f.phi(z) - q), 1e-11);
    }
}

TEST(Bump, Examples) {
    auto f = TestFunction::bump(1.2);
    EXPECT_EQ(f.hat(0), 1.0);
    EXPECT_EQ(f.hat(1.2), 0.0);
    EXPECT_EQ(f.hat(-1.2), 0.0);
    for (double d : {2e-2, 1e-2, 5e-3}) {
        double u = 1.2 - d;
        EXPECT_LT(f.hat(u) / d, 1e-3) << d;  // one-sided difference quotient at σ
    }
    for (double x : {0.0, 0.4, 1.3, 6.0}) {
        EXPECT_NEAR(f.phi(x), f.phi(-x), 1e-10);
        EXPECT_LT(std::abs(f.phi(cplx(x)).imag()), 1e-10);
        EXPECT_NEAR(f.phi(x), phi_by_quadrature(f, x), 1e-10) << x;
    }
}

TEST(Bump, DerivativesByCauchy) {
    auto f = TestFunction::bump(1.2);
    // φ̂(u) = exp(-v²/(1-v²)) = 1 - v² + O(v⁴), v = u/σ
    EXPECT_NEAR(f.hat_deriv(1, 0), 0.0, 1e-12);
    EXPECT_NEAR(f.hat_deriv(2, 0), -2 / (1.2 * 1.2), 1e-10);
    double h = 1e-4, h1 = 1e-5;
    for (double u : {0.3, 1.0}) {
        double fd1 = (f.hat(u + h1) - f.hat(u - h1)) / (2 * h1);
        double fd2 = (f.hat(u + h) - 2 * f.hat(u) + f.hat(u - h)) / (h * h);
        EXPECT_NEAR(f.hat_deriv(1, u), fd1, 1e-7);
        EXPECT_NEAR(f.hat_deriv(2, u), fd2, 1e-5);
    }
    EXPECT_EQ(f.hat_deriv(3, 1.2), 0.0);
}

TEST(TestFunctionSpec, ParseAndPrint) {
    EXPECT_EQ(TestFunction::parse("fejer:1.5").spec(), "fejer:1.5");
    EXPECT_EQ(TestFunction::parse("bump:1.2").kind(), TestFunction::Kind::bump);
    EXPECT_THROW(TestFunction::parse("fejer"), domain_error);
    EXPECT_THROW(TestFunction::parse("fejer:abc"), domain_error);
    EXPECT_THROW(TestFunction::parse("cosine:1.0"), domain_error);
    EXPECT_THROW(TestFunction::parse("bump:2.5"), domain_error);
}

TEST(Parseval, BothKinds) {
    for (auto f : {TestFunction::fejer(1.5), TestFunction::bump(1.2)}) {
        auto [phi2, hat2] = parseval_pair(f);
        EXPECT_NEAR(phi2, hat2, 1e-8) << f.spec();
    }
    EXPECT_NEAR(parseval_pair(TestFunction::fejer(1.5)).second, 1.0, 1e-13);  // 2σ/3
}

TEST(GaussianWeight, MellinAndMoments) {
    auto W = make_gaussian_weight();
    EXPECT_NEAR(W.M(1.0).real(), 0.5, 1e-14);
    EXPECT_NEAR(W.M(1.0).real(), W.w_hat0 / 2, 1e-14);
    EXPECT_NEAR(W.M(2.0).real(), 1 / (2 * pi), 1e-14);
    EXPECT_NEAR(W.M_log_deriv_1(), gaussian_M_log_deriv_1(), 1e-8);
    // ∫_0^∞ e^{-πx²} log x dx = Mw'(1) = -(γ + log 4π)/4
    EXPECT_NEAR(W.log_moment(), -0.25 * (euler_gamma + std::log(4 * pi)), 1e-12);
    EXPECT_NEAR(W.log_moment(), -0.777059977967702, 1e-12);
    // ŵ(0) by quadrature
    EXPECT_NEAR(2 * integrate(W.w, 0.0, W.x_max, 1e-14).value, W.w_hat0, 1e-13);
}

TEST(MellinNum, Examples) {
    auto W = make_gaussian_weight();
    auto f = [&](double t) { return W(t); };
    auto m2 = mellin_num(f, 2.0);
    EXPECT_NEAR(m2.value.real(), 1 / (2 * pi), 1e-12);
    EXPECT_LT(m2.error, 1e-9);
    EXPECT_NEAR(mellin_num(f, 1.0).value.real(), W.w_hat0 / 2, 1e-12);
    cplx s(1.5, 0.3);
    EXPECT_LT(std::abs(mellin_num(f, s).value - W.M(s)), 1e-11);
    // Cauchy-Riemann: ∂/∂x = -i ∂/∂y
    double h = 1e-4;
    cplx dx = (mellin_num(f, 1.5 + h).value - mellin_num(f, 1.5 - h).value) / (2 * h);
    cplx dy = (mellin_num(f, cplx(1.5, h)).value - mellin_num(f, cplx(1.5, -h)).value) / (2 * h);
    EXPECT_LT(std::abs(dx + cplx(0, 1) * dy), 1e-6);
    const auto& T = tables();
    double direct = integrate([&](double t) { return T.g(t); }, 0.0, T.g_max_arg(), 1e-12, 20000).value;
    auto g = [&](double t) { return t > T.g_max_arg() ? 0.0 : T.g(t); };
    EXPECT_NEAR(mellin_num(g, 1.0).value.real(), direct, 1e-8);
}

TEST(WTilde, Values) {
    auto W = make_gaussian_weight();
    EXPECT_NEAR(w_tilde(W, 0), pi / 2, 1e-13);
    EXPECT_NEAR(w_tilde(W, 0), pi / 2 * W.w_hat0, 1e-13);
    for (double t : {0.5, 1.0, 2.0}) {
        auto q = w_tilde_quad(W, t);
        EXPECT_LT(q.error, 1e-8);
        EXPECT_EQ(w_tilde(W, -t), w_tilde(W, t));
    }
    const auto& T = tables();
    EXPECT_LT(std::abs(w_tilde(W, T.options().t_max)), 1e-13);
    EXPECT_EQ(T.w_tilde(T.options().t_max + 1), 0.0);
    EXPECT_NEAR(T.w_tilde(0.77), w_tilde(W, 0.77), 1e-10);
}

TEST(GKernels, Values) {
    const auto& T = tables();
    EXPECT_NEAR(T.g(0), pi / 2, 1e-13);
    for (double y : {0.1, 0.5, 2.0}) EXPECT_TRUE(std::isfinite(T.g(y)));
    EXPECT_THROW(T.g(-1), domain_error);
    // g₁(0) = g̃(0) = π ∫_0^∞ g(u) du
    double ig = integrate([&](double u) { return T.g(u); }, 0.0, T.g_max_arg(), 1e-13, 20000).value;
    EXPECT_NEAR(T.g1(0), pi * ig, 1e-9);
    for (double y : {0.5, 8.0, 48.0}) EXPECT_NEAR(T.g1(y), T.g_tilde_direct(std::sqrt(y)), 1e-10);
}

TEST(MellinIdentity, HoldsAtSamplePoints) {
    const auto& T = tables();
    auto a = mellin_identity_check(T, 0.5);
    EXPECT_LT(a.residual, 1e-4);
    auto b = mellin_identity_check(T, cplx(0.5, 1.0));
    EXPECT_LT(b.residual, 1e-4);
    auto c = mellin_identity_check(T, cplx(0.5, -1.0));
    EXPECT_LT(std::abs(c.lhs - std::conj(b.lhs)), 1e-10);
    EXPECT_LT(std::abs(c.rhs - std::conj(b.rhs)), 1e-10);
    EXPECT_NEAR(c.residual, b.residual, 1e-10);
    EXPECT_LT(mellin_identity_check(T, cplx(-0.5, 0.3)).residual, 1e-4);
    EXPECT_THROW(mellin_identity_check(T, 0.0), domain_error);
}

TEST(Decay, FittedConstants) {
    const auto& T = tables();
    double tc = T.options().t_max;
    double C = decay_constant([&](double t) { return T.w_tilde(t); }, tc / 2, tc);
    EXPECT_LT(C, 1e-6);
    for (double t = tc / 2; t <= tc; t += 0.37) EXPECT_LE(std::abs(T.w_tilde(t)), C / (t * t * t) + 1e-300);
    double C1 = decay_constant([&](double y) { return T.g1(y); }, T.g1_max_arg() / 2, T.g1_max_arg());
    EXPECT_LT(C1, 1e-4);
    EXPECT_LT(std::abs(T.g1(T.g1_max_arg())), 1e-12);
}

TEST(Tables, CsvExport) {
    std::ostringstream os;
    write_table_csv(tables().w_tilde_table(), os);
    std::string s = os.str();
    EXPECT_EQ(s.substr(0, 8), "t,value\n");
    EXPECT_NE(s.find("0,1.5707963267949"), std::string::npos);
}
