#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace ellgeo {

template <int K>
struct BandResult {
    Eigen::Matrix<double, K, 1> value;
    int nodes = 0;
    bool converged = false;
};

// Integrals of f over [a, b] against dz/sqrt((z-a)(b-z)).  With z = a + (b-a)
// cos^2(theta/2) this is the midpoint rule in theta, spectrally accurate for
// smooth f.  f receives (s, c) = (sin^2(theta/2), cos^2(theta/2)) so callers
// can form distances to both ends without cancellation: z - a = (b-a) c and
// b - z = (b-a) s.  Node count doubles from n0 until the componentwise change
// is below rtol|I| + atol.
template <int K, class F>
BandResult<K> chebyshev_band(F&& f, int n0 = 256, double rtol = 1e-11, double atol = 1e-15, int nmax = 1 << 16) {
    using V = Eigen::Matrix<double, K, 1>;
    auto rule = [&](int n) {
        V acc = V::Zero();
        for (int k = 0; k < n; ++k) {
            double half = 0.5 * std::numbers::pi * (k + 0.5) / n;
            double s = std::sin(half), c = std::cos(half);
            acc += f(s * s, c * c);
        }
        return V(acc * (std::numbers::pi / n));
    };
    BandResult<K> r;
    int n = n0;
    V prev = rule(n);
    while (n < nmax) {
        n *= 2;
        V cur = rule(n);
        bool ok = ((cur - prev).array().abs() <= rtol * cur.array().abs() + atol).all();
        prev = cur;
        if (ok) {
            r.converged = true;
            break;
        }
    }
    r.value = prev;
    r.nodes = n;
    return r;
}

}  // namespace ellgeo
