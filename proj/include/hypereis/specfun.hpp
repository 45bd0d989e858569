#pragma once

#include <complex>

namespace hypereis {

using cplx = std::complex<double>;

namespace specfun {

// Gamma function; PoleError within 1e-12 of a non-positive integer.
cplx complex_gamma(cplx s);
// 1/Gamma, entire; exactly zero at the poles of Gamma.
cplx rgamma(cplx s);
cplx digamma(cplx s);
// sin(pi s) with exact integer reduction.
cplx sinpi(cplx s);

// Gamma(1/2)Gamma(1/2 + s/2)/Gamma(1 + s/2)
cplx k_factor(cplx s);

// e^{i pi q/2} int_0^pi sin^{s-2}u e^{-iqu} du, continued by its closed form.
cplx b_factor(int q, cplx s);
// Tanh-sinh quadrature of the defining integral; requires Re s > 1.
cplx b_factor_quadrature(int q, cplx s);

enum class Hyp2f1Path { Auto, Series, Transformed };

// Gauss 2F1(a, b; c; x) for |x| < 1, with the linear transformation near x = 1.
cplx gauss_2f1(cplx a, cplx b, cplx c, cplx x, Hyp2f1Path path = Hyp2f1Path::Auto);

}  // namespace specfun
}  // namespace hypereis
