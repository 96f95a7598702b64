#pragma once

// Sine-spectral representation of H = L^2((0,1)) and the Dirichlet Laplacian:
// diagonal semigroup, fractional powers, interpolation-space norms, spectral
// projections, and pointwise evaluation.  Everything here is a pure function
// of its inputs; fields are plain value types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "stburgers/transforms.hpp"

namespace stburgers {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;

// Eigenstructure of the shifted Dirichlet Laplacian: eigenvalue(k) = c0 pi^2 k^2,
// interpolation norms are weighted by (kappa + eigenvalue(k))^r.
struct OperatorSpec {
    double c0 = 1.0;
    double kappa = 0.0;

    void validate() const {
        if (!(c0 > 0.0) || !std::isfinite(c0))
            throw std::invalid_argument("OperatorSpec: c0 must be positive and finite");
        if (!(kappa >= 0.0) || !std::isfinite(kappa))
            throw std::invalid_argument("OperatorSpec: kappa must be nonnegative and finite");
    }
};

// Coefficients of an element of P_N(H); coeffs[i] multiplies e_{i+1} where
// e_k(x) = sqrt(2) sin(k pi x).  The H-norm is the Euclidean norm (Parseval).
struct SpectralField {
    std::vector<double> coeffs;

    SpectralField() = default;
    explicit SpectralField(std::size_t n) : coeffs(n, 0.0) {}
    explicit SpectralField(std::vector<double> c) : coeffs(std::move(c)) {}

    std::size_t dim() const { return coeffs.size(); }
    double& operator[](std::size_t i) { return coeffs[i]; }
    double operator[](std::size_t i) const { return coeffs[i]; }

    static SpectralField basis(std::size_t k, std::size_t n) {
        if (k < 1 || k > n) throw std::invalid_argument("basis: need 1 <= k <= n");
        SpectralField v(n);
        v.coeffs[k - 1] = 1.0;
        return v;
    }
};

inline double eigenvalue(std::size_t k, const OperatorSpec& spec) {
    spec.validate();
    if (k < 1) throw std::invalid_argument("eigenvalue: k must be >= 1");
    return spec.c0 * kPi * kPi * static_cast<double>(k) * static_cast<double>(k);
}

// e^{tA} v: coefficient k scaled by exp(-lambda_k t).
inline SpectralField apply_semigroup(const SpectralField& v, double t, const OperatorSpec& spec) {
    spec.validate();
    if (!(t >= 0.0)) throw std::invalid_argument("apply_semigroup: t must be >= 0");
    SpectralField out(v.dim());
    for (std::size_t k = 1; k <= v.dim(); ++k)
        out[k - 1] = v[k - 1] * std::exp(-eigenvalue(k, spec) * t);
    return out;
}

// (kappa - A)^r v: coefficient k scaled by (kappa + lambda_k)^r.
inline SpectralField apply_fractional_power(const SpectralField& v, double r,
                                            const OperatorSpec& spec) {
    spec.validate();
    SpectralField out(v.dim());
    for (std::size_t k = 1; k <= v.dim(); ++k)
        out[k - 1] = v[k - 1] * std::pow(spec.kappa + eigenvalue(k, spec), r);
    return out;
}

// || (kappa - A)^r v ||_H
inline double hr_norm(const SpectralField& v, double r, const OperatorSpec& spec) {
    spec.validate();
    double s = 0.0;
    for (std::size_t k = 1; k <= v.dim(); ++k) {
        const double w = std::pow(spec.kappa + eigenvalue(k, spec), r) * v[k - 1];
        s += w * w;
    }
    return std::sqrt(s);
}

inline double h_norm(const SpectralField& v) {
    double s = 0.0;
    for (double c : v.coeffs) s += c * c;
    return std::sqrt(s);
}

// P_n v: keep the first min(n, dim) coefficients, zero-pad to dimension n.
inline SpectralField project(const SpectralField& v, std::size_t n) {
    if (n < 1) throw std::invalid_argument("project: n must be >= 1");
    SpectralField out(n);
    const std::size_t m = std::min(n, v.dim());
    std::copy(v.coeffs.begin(), v.coeffs.begin() + static_cast<std::ptrdiff_t>(m),
              out.coeffs.begin());
    return out;
}

// <u, v>_H over the shared modes (implicit zero-padding of the shorter field).
inline double inner_product(const SpectralField& u, const SpectralField& v) {
    const std::size_t m = std::min(u.dim(), v.dim());
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += u[i] * v[i];
    return s;
}

inline SpectralField add(const SpectralField& u, const SpectralField& v) {
    if (u.dim() != v.dim()) throw std::invalid_argument("add: dimension mismatch");
    SpectralField out(u.dim());
    for (std::size_t i = 0; i < u.dim(); ++i) out[i] = u[i] + v[i];
    return out;
}

inline SpectralField sub(const SpectralField& u, const SpectralField& v) {
    if (u.dim() != v.dim()) throw std::invalid_argument("sub: dimension mismatch");
    SpectralField out(u.dim());
    for (std::size_t i = 0; i < u.dim(); ++i) out[i] = u[i] - v[i];
    return out;
}

inline SpectralField scale(const SpectralField& v, double a) {
    SpectralField out(v.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) out[i] = a * v[i];
    return out;
}

inline double point_eval(const SpectralField& v, double x) {
    if (!(x > 0.0 && x < 1.0)) throw std::invalid_argument("point_eval: x must be in (0,1)");
    double s = 0.0;
    for (std::size_t k = 1; k <= v.dim(); ++k)
        s += v[k - 1] * kSqrt2 * std::sin(static_cast<double>(k) * kPi * x);
    return s;
}

// Default sup-norm grid: 8 points per oscillation of the highest mode, at
// least 4096 points overall.
inline std::size_t default_sup_grid(std::size_t dim) {
    return std::max<std::size_t>(4096, 8 * dim);
}

// max_j |v(x_j)| over x_j = j/(grid_size+1), j = 1..grid_size, via DST.
inline double sup_norm(const SpectralField& v, std::size_t grid_size) {
    if (grid_size < v.dim())
        throw std::invalid_argument("sup_norm: grid too coarse for field dimension");
    if (v.dim() == 0) return 0.0;
    const auto vals = transforms::sine_values(v.coeffs, grid_size + 1);
    double m = 0.0;
    for (double y : vals) m = std::max(m, std::abs(y));
    return m;
}

inline double sup_norm(const SpectralField& v) { return sup_norm(v, default_sup_grid(v.dim())); }

// Per-mode weight of int_0^h e^{sA} ds:  (1 - e^{-lambda_k h}) / lambda_k,
// expm1-based so that lambda_k h << 1 does not cancel.
inline double drift_weight(std::size_t k, double h, const OperatorSpec& spec) {
    if (!(h > 0.0)) throw std::invalid_argument("drift_weight: h must be > 0");
    const double lam = eigenvalue(k, spec);
    return -std::expm1(-lam * h) / lam;
}

} // namespace stburgers
