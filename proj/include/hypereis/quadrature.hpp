#pragma once

#include <vector>

namespace hypereis::quad {

struct Rule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule; cached per n, safe to call concurrently.
const Rule& gauss_legendre(int n);

}  // namespace hypereis::quad
