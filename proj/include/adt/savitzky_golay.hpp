#pragma once

#include <adt/errors.hpp>

#include <cmath>
#include <span>
#include <vector>

namespace adt {

/// Savitzky-Golay convolution kernel: least-squares fit of a degree-`order`
/// polynomial over 2*half_width+1 equally spaced samples, evaluated (or
/// differentiated `derivative` times) at the window center.
struct SGKernel {
    int half_width = 0;
    int order = 0;
    int derivative = 0;
    double dt = 1.0;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
};

/// Builds the kernel in closed form from the normal equations of the fit.
///
/// Offsets are scaled to u = k / m before forming the normal matrix, which
/// keeps it well conditioned for every supported (m, n); the derivative
/// weights are rescaled by r! / (m * dt)^r afterwards.
inline SGKernel sg_kernel(int m, int n, int r, double dt) {
    if (m < 0 || n < 0 || r < 0) throw ParameterError("sg_kernel: negative parameter");
    if (n > 2 * m) throw ParameterError("sg_kernel: polynomial order exceeds 2m");
    if (r > n) throw ParameterError("sg_kernel: derivative order exceeds polynomial order");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("sg_kernel: dt must be positive");

    const int cols = n + 1;
    const long double scale = m > 0 ? static_cast<long double>(m) : 1.0L;

    // Normal matrix G[i][j] = sum_k u_k^(i+j); solve G y = e_r.
    std::vector<long double> power_sums(2 * n + 1, 0.0L);
    for (int k = -m; k <= m; ++k) {
        const long double u = static_cast<long double>(k) / scale;
        long double p = 1.0L;
        for (int e = 0; e <= 2 * n; ++e) {
            power_sums[e] += p;
            p *= u;
        }
    }
    std::vector<std::vector<long double>> aug(cols, std::vector<long double>(cols + 1, 0.0L));
    for (int i = 0; i < cols; ++i) {
        for (int j = 0; j < cols; ++j) aug[i][j] = power_sums[i + j];
        aug[i][cols] = (i == r) ? 1.0L : 0.0L;
    }
    for (int c = 0; c < cols; ++c) {
        int pivot = c;
        for (int i = c + 1; i < cols; ++i)
            if (std::fabs(aug[i][c]) > std::fabs(aug[pivot][c])) pivot = i;
        if (std::fabs(aug[pivot][c]) < 1e-30L) throw ParameterError("sg_kernel: singular normal equations");
        std::swap(aug[c], aug[pivot]);
        for (int i = 0; i < cols; ++i) {
            if (i == c) continue;
            const long double f = aug[i][c] / aug[c][c];
            for (int j = c; j <= cols; ++j) aug[i][j] -= f * aug[c][j];
        }
    }
    std::vector<long double> y(cols);
    for (int i = 0; i < cols; ++i) y[i] = aug[i][cols] / aug[i][i];

    long double factor = 1.0L;
    for (int i = 2; i <= r; ++i) factor *= i;
    factor /= std::pow(scale * static_cast<long double>(dt), static_cast<long double>(r));

    SGKernel kernel{m, n, r, dt, {}};
    kernel.weights.reserve(2 * m + 1);
    for (int k = -m; k <= m; ++k) {
        const long double u = static_cast<long double>(k) / scale;
        long double w = 0.0L, p = 1.0L;
        for (int j = 0; j < cols; ++j) {
            w += y[j] * p;
            p *= u;
        }
        kernel.weights.push_back(static_cast<double>(w * factor));
    }
    return kernel;
}

/// Valid-region convolution: output[j] is the kernel applied to the input
/// window centred on index j + m. Output length is len - 2m.
inline std::vector<double> apply_kernel(std::span<const double> signal, const SGKernel& kernel) {
    const std::size_t width = kernel.size();
    if (signal.size() < width) throw LengthError("apply_kernel: signal shorter than kernel");
    std::vector<double> out(signal.size() - width + 1);
    for (std::size_t j = 0; j < out.size(); ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < width; ++i) acc += kernel.weights[i] * signal[j + i];
        out[j] = acc;
    }
    return out;
}

}  // namespace adt
