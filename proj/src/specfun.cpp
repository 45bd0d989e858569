#include "hypereis/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "hypereis/errors.hpp"

namespace hypereis::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos approximation, g = 607/128, 15 terms (Godfrey).
constexpr double kLanczosG = 607.0 / 128.0;
constexpr std::array<double, 15> kLanczos = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,   .33994649984811888699e-4,
    .46523628927048575665e-4,   -.98374475304879564677e-4, .15808870322491248884e-3,
    -.21026444172410488319e-3,  .21743961811521264320e-3,  -.16431810653676389022e-3,
    .84418223983852743293e-4,   -.26190838401581408670e-4, .36899182659531622704e-5};

// Gamma(s) for Re s >= 1/2.
cplx lanczos_gamma(cplx s) {
    const cplx z = s - 1.0;
    cplx sum = kLanczos[0];
    for (std::size_t k = 1; k < kLanczos.size(); ++k) sum += kLanczos[k] / (z + double(k));
    const cplx t = z + kLanczosG + 0.5;
    return std::sqrt(2.0 * kPi) * std::exp((z + 0.5) * std::log(t) - t) * sum;
}

bool is_nonpositive_integer(cplx s, double tol) {
    if (std::abs(s.imag()) > tol) return false;
    const double n = std::round(s.real());
    return n <= 0.0 && std::abs(s.real() - n) <= tol;
}

bool is_nonpositive_integer_exact(cplx s) {
    return s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::round(s.real());
}

std::string str(cplx s) {
    std::ostringstream os;
    os.precision(17);
    os << s.real() << (s.imag() < 0 ? "-" : "+") << std::abs(s.imag()) << "i";
    return os.str();
}

}  // namespace

cplx sinpi(cplx s) {
    const double n = std::round(s.real());
    const cplx r = std::sin(kPi * (s - n));
    return (std::fmod(std::abs(n), 2.0) == 1.0) ? -r : r;
}

cplx complex_gamma(cplx s) {
    if (is_nonpositive_integer(s, 1e-12)) throw PoleError("Gamma pole at s = " + str(s));
    if (s.real() < 0.5) return kPi / (sinpi(s) * lanczos_gamma(1.0 - s));
    return lanczos_gamma(s);
}

cplx rgamma(cplx s) {
    if (is_nonpositive_integer_exact(s)) return 0.0;
    if (s.real() < 0.5) return sinpi(s) * lanczos_gamma(1.0 - s) / kPi;
    return 1.0 / lanczos_gamma(s);
}

cplx digamma(cplx s) {
    if (is_nonpositive_integer(s, 1e-12)) throw PoleError("digamma pole at s = " + str(s));
    if (s.real() < 0.5) {
        // psi(s) = psi(1-s) - pi cot(pi s)
        const cplx cot = std::cos(kPi * s) / sinpi(s);
        return digamma(1.0 - s) - kPi * cot;
    }
    cplx acc = 0.0;
    cplx z = s;
    while (std::abs(z) < 12.0) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    // Asymptotic series with Bernoulli numbers B_2..B_14
    static constexpr std::array<double, 7> b2k = {1.0 / 6,  -1.0 / 30, 1.0 / 42,     -1.0 / 30,
                                                   5.0 / 66, -691.0 / 2730, 7.0 / 6};
    const cplx iz2 = 1.0 / (z * z);
    cplx p = iz2;
    cplx series = 0.0;
    for (std::size_t k = 0; k < b2k.size(); ++k) {
        series += b2k[k] / (2.0 * double(k + 1)) * p;
        p *= iz2;
    }
    return acc + std::log(z) - 0.5 / z - series;
}

cplx k_factor(cplx s) {
    return std::sqrt(kPi) * complex_gamma(0.5 + 0.5 * s) * rgamma(1.0 + 0.5 * s);
}

namespace {

// (x)_n
cplx pochhammer(cplx x, int n) {
    cplx p = 1.0;
    for (int j = 0; j < n; ++j) p *= x + double(j);
    return p;
}

}  // namespace

cplx b_factor(int q, cplx s) {
    if (q < 0) throw DomainError("b_factor needs q >= 0");
    // b_q(s) = sqrt(pi) Gamma((s-1)/2) Gamma(s/2) / (Gamma((s+q)/2) Gamma((s-q)/2)),
    // with the integer-spaced gamma ratio written as a Pochhammer product.
    const int m = q / 2;
    const cplx lo = 0.5 * (s - double(q));
    const cplx hi = 0.5 * (s + double(q));
    if (q % 2 == 0)
        return std::sqrt(kPi) * pochhammer(lo, m) * complex_gamma(0.5 * (s - 1.0)) * rgamma(hi);
    return std::sqrt(kPi) * pochhammer(lo, m) * complex_gamma(0.5 * s) * rgamma(hi);
}

cplx b_factor_quadrature(int q, cplx s) {
    if (q < 0) throw DomainError("b_factor needs q >= 0");
    if (!(s.real() > 1.0)) throw DomainError("integral definition of b_q needs Re s > 1");
    boost::math::quadrature::tanh_sinh<double> ts(15);
    auto integrand = [&](double u, double uc) {
        const double su = (u < kPi / 2) ? std::sin(u) : std::sin(std::abs(uc));
        return std::exp((s - 2.0) * std::log(su)) * std::exp(cplx{0.0, -double(q) * u});
    };
    const double re = ts.integrate([&](double u, double uc) { return integrand(u, uc).real(); },
                                   0.0, kPi, 1e-14);
    const double im = ts.integrate([&](double u, double uc) { return integrand(u, uc).imag(); },
                                   0.0, kPi, 1e-14);
    const cplx phase = std::exp(cplx{0.0, kPi * q / 2.0});
    return phase * cplx{re, im};
}

namespace {

constexpr int kSeriesCap = 20000;

cplx series_2f1(cplx a, cplx b, cplx c, cplx x) {
    cplx term = 1.0, sum = 1.0;
    const double ax = std::abs(x);
    int small = 0;
    for (int n = 0; n < kSeriesCap; ++n) {
        term *= (a + double(n)) * (b + double(n)) / ((c + double(n)) * double(n + 1)) * x;
        sum += term;
        if (term == 0.0) return sum;
        const double tail = std::abs(term) * ax / std::max(1e-3, 1.0 - ax);
        if (tail <= 1e-16 * std::abs(sum) && n > 2) {
            if (++small >= 2) return sum;
        } else {
            small = 0;
        }
    }
    throw ConvergenceError("2F1 power series did not converge within the term cap");
}

// c = a + b + m with integer m >= 0; expansion in powers of 1 - x with logarithms.
cplx log_case_2f1(cplx a, cplx b, int m, cplx x) {
    const cplx c = a + b + double(m);
    const cplx w = 1.0 - x;
    const cplx lw = std::log(w);
    cplx finite = 0.0;
    if (m > 0) {
        cplx t = 1.0;
        for (int n = 0; n < m; ++n) {
            finite += t;
            t *= (a + double(n)) * (b + double(n)) / (double(n + 1) * (1.0 - double(m) + double(n))) * w;
        }
        finite *= complex_gamma(double(m)) * complex_gamma(c) * rgamma(a + double(m)) *
                  rgamma(b + double(m));
    }
    const cplx pre = complex_gamma(c) * rgamma(a) * rgamma(b);
    if (pre == 0.0) return finite;

    // psi values advanced by recurrence
    cplx psi1 = digamma(1.0);                    // psi(n+1)
    cplx psim = digamma(double(m) + 1.0);        // psi(n+m+1)
    cplx psia = digamma(a + double(m));          // psi(a+n+m)
    cplx psib = digamma(b + double(m));          // psi(b+n+m)
    cplx coef = 1.0 / complex_gamma(double(m) + 1.0);  // (a+m)_n (b+m)_n / (n! (n+m)!)
    cplx wp = std::pow(w, double(m));
    cplx sum = 0.0;
    int small = 0;
    for (int n = 0; n < kSeriesCap; ++n) {
        const cplx term = coef * wp * (lw - psi1 - psim + psia + psib);
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum) && n > 2) {
            if (++small >= 2) break;
        } else {
            small = 0;
        }
        if (n + 1 == kSeriesCap) throw ConvergenceError("2F1 log-case series did not converge");
        coef *= (a + double(m + n)) * (b + double(m + n)) / (double(n + 1) * double(n + m + 1));
        wp *= w;
        psi1 += 1.0 / double(n + 1);
        psim += 1.0 / double(n + m + 1);
        psia += 1.0 / (a + double(n + m));
        psib += 1.0 / (b + double(n + m));
    }
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return finite - sign * pre * sum;
}

cplx transformed_2f1(cplx a, cplx b, cplx c, cplx x) {
    const cplx m = c - a - b;
    const double mr = std::round(m.real());
    if (std::abs(m.imag()) < 1e-9 && std::abs(m.real() - mr) < 1e-9) {
        const int mi = int(mr);
        if (mi >= 0) return log_case_2f1(a, b, mi, x);
        // Euler: F(a,b;c;x) = (1-x)^{c-a-b} F(c-a, c-b; c; x)
        return std::pow(1.0 - x, m) * log_case_2f1(c - a, c - b, -mi, x);
    }
    const cplx w = 1.0 - x;
    const cplx t1 = complex_gamma(c) * complex_gamma(m) * rgamma(c - a) * rgamma(c - b) *
                    series_2f1(a, b, 1.0 - m, w);
    const cplx t2 = std::pow(w, m) * complex_gamma(c) * complex_gamma(-m) * rgamma(a) * rgamma(b) *
                    series_2f1(c - a, c - b, 1.0 + m, w);
    return t1 + t2;
}

}  // namespace

cplx gauss_2f1(cplx a, cplx b, cplx c, cplx x, Hyp2f1Path path) {
    if (is_nonpositive_integer(c, 1e-12)) throw PoleError("2F1 with c a non-positive integer");
    if (!(std::abs(x) < 1.0)) throw DomainError("2F1 argument outside the unit disc");
    if (x == 0.0) return 1.0;
    // terminating series
    if (is_nonpositive_integer_exact(a) || is_nonpositive_integer_exact(b)) return series_2f1(a, b, c, x);
    switch (path) {
        case Hyp2f1Path::Series:
            return series_2f1(a, b, c, x);
        case Hyp2f1Path::Transformed:
            if (!(std::abs(1.0 - x) < 1.0))
                throw DomainError("transformed 2F1 path needs |1 - x| < 1");
            return transformed_2f1(a, b, c, x);
        case Hyp2f1Path::Auto:
            break;
    }
    if (std::abs(x) <= 0.8) return series_2f1(a, b, c, x);
    if (x.real() < 0.0) {
        // Pfaff: F(a,b;c;x) = (1-x)^{-a} F(a, c-b; c; x/(x-1))
        return std::pow(1.0 - x, -a) * gauss_2f1(a, c - b, c, x / (x - 1.0));
    }
    if (std::abs(1.0 - x) < 0.75) return transformed_2f1(a, b, c, x);
    return series_2f1(a, b, c, x);
}

}  // namespace hypereis::specfun
