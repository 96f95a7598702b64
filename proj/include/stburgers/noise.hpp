#pragma once

// Exact-in-distribution sampling of the stochastic convolution driven by a
// cylindrical Wiener process, with common-random-number coupling across
// dyadic refinement levels.
//
// Per mode, the convolution is an Ornstein-Uhlenbeck recursion advanced at
// the finest grid; coarser levels are obtained by restriction (subsampling in
// time, truncation in modes), never by re-simulation, so all levels share the
// same driving path bit-for-bit.

#include <cmath>
#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "stburgers/spectral.hpp"

namespace stburgers {

namespace rng_detail {

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline double to_unit_open(std::uint64_t u) {
    // (0,1), never exactly 0 or 1
    return (static_cast<double>(u >> 11) + 0.5) * 0x1.0p-53;
}

} // namespace rng_detail

// Counter-based per-mode-per-step standard normals: any cell (mode k, step j)
// is addressable directly, so outputs do not depend on evaluation order or
// worker scheduling.
struct NoiseHierarchy {
    std::uint64_t seed = 0;
    int n_max = 1;      // finest dyadic level: 2^n_max modes, 2^n_max steps
    double T = 1.0;

    void validate() const {
        if (n_max < 1 || n_max > 30) throw std::invalid_argument("NoiseHierarchy: bad n_max");
        if (!(T > 0.0)) throw std::invalid_argument("NoiseHierarchy: T must be > 0");
    }

    std::size_t modes() const { return std::size_t{1} << n_max; }
    std::size_t steps() const { return std::size_t{1} << n_max; }
    double fine_step() const { return T / static_cast<double>(steps()); }

    // zeta[k][j], k = 1..2^n_max, j = 0..2^n_max - 1 (Box-Muller on hashed counters)
    double variate(std::size_t mode, std::size_t step) const {
        using namespace rng_detail;
        std::uint64_t h = mix64(seed ^ 0x5bf03635f0935ad1ull);
        h = mix64(h ^ (mode * 0xd1342543de82ef95ull));
        h = mix64(h ^ (step * 0xaf251af3b0f025b5ull));
        const double u1 = to_unit_open(mix64(h ^ 0x9e6c63d0a8bf8a13ull));
        const double u2 = to_unit_open(mix64(h ^ 0x3c6ef372fe94f82bull));
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }
};

// Conditional std of the per-mode OU increment over a step of length h:
// sigma_k(h) = sqrt((1 - e^{-2 lambda_k h}) / (2 lambda_k)).
inline double ou_increment_std(std::size_t k, double h, const OperatorSpec& spec) {
    if (!(h > 0.0)) throw std::invalid_argument("ou_increment_std: h must be > 0");
    const double lam = eigenvalue(k, spec);
    return std::sqrt(-std::expm1(-2.0 * lam * h) / (2.0 * lam));
}

// Stochastic convolution at the level-l grid times t_m = m T 2^-l,
// m = 0..2^l, each field truncated to the first 2^l modes.  The per-mode
// recursion always runs at the finest step, which is what makes levels
// bit-identical on shared (mode, time) cells.
inline std::vector<SpectralField> stochastic_convolution(const NoiseHierarchy& noise, int level,
                                                         const OperatorSpec& spec) {
    noise.validate();
    spec.validate();
    if (level < 1 || level > noise.n_max)
        throw std::invalid_argument("stochastic_convolution: need 1 <= level <= n_max");
    const std::size_t dim = std::size_t{1} << level;
    const std::size_t steps = std::size_t{1} << level;
    const std::size_t fine_steps = noise.steps();
    const std::size_t stride = fine_steps / steps;
    const double hf = noise.fine_step();

    std::vector<SpectralField> out(steps + 1, SpectralField(dim));
    for (std::size_t k = 1; k <= dim; ++k) {
        const double a = std::exp(-eigenvalue(k, spec) * hf);
        const double s = ou_increment_std(k, hf, spec);
        double o = 0.0;
        for (std::size_t j = 1; j <= fine_steps; ++j) {
            o = a * o + s * noise.variate(k, j - 1);
            if (j % stride == 0) out[j / stride][k - 1] = o;
        }
    }
    return out;
}

// Psi_m = P_n e^{t_m A} xi + O_m
inline std::vector<SpectralField> psi_process(const std::vector<SpectralField>& O,
                                              const SpectralField& xi, int level,
                                              const OperatorSpec& spec, double T) {
    const std::size_t dim = std::size_t{1} << level;
    const std::size_t steps = O.size() - 1;
    const double h = T / static_cast<double>(steps);
    const SpectralField xin = project(xi, dim);
    std::vector<SpectralField> psi(O.size(), SpectralField(dim));
    for (std::size_t m = 0; m < O.size(); ++m)
        psi[m] = add(apply_semigroup(xin, static_cast<double>(m) * h, spec), O[m]);
    return psi;
}

// BbO_t = O_t - int_0^t e^{(t-s)(A - eta)} eta O_s ds, with the integral
// discretized by the left-endpoint rule matching the floor convention of the
// scheme.  D = BbO - O satisfies the per-mode recursion
//   D_{m+1} = e^{-(lambda + eta) h} D_m - eta (1 - e^{-(lambda + eta) h}) / (lambda + eta) O_m.
inline std::vector<SpectralField> bbO_process(const std::vector<SpectralField>& O, double eta,
                                              int level, const OperatorSpec& spec, double T) {
    if (!(eta >= 0.0)) throw std::invalid_argument("bbO_process: eta must be >= 0");
    if (eta == 0.0) return O;  // defining integral vanishes
    const std::size_t dim = std::size_t{1} << level;
    const std::size_t steps = O.size() - 1;
    const double h = T / static_cast<double>(steps);
    std::vector<SpectralField> bb(O.size(), SpectralField(dim));
    bb[0] = O[0];
    SpectralField D(dim);
    for (std::size_t m = 0; m < steps; ++m) {
        SpectralField Dn(dim);
        for (std::size_t k = 1; k <= dim; ++k) {
            const double mu = eigenvalue(k, spec) + eta;
            const double e = std::exp(-mu * h);
            Dn[k - 1] = e * D[k - 1] - eta * (-std::expm1(-mu * h) / mu) * O[m][k - 1];
        }
        D = Dn;
        bb[m + 1] = add(O[m + 1], D);
    }
    return bb;
}

// Convolution O, shifted process Psi = P_n e^{tA} xi + O, and damped process
// BbO, all on one level's grid.
struct ProcessSet {
    int level = 1;
    double T = 1.0;
    std::vector<double> times;
    std::vector<SpectralField> O;
    std::vector<SpectralField> Psi;
    std::vector<SpectralField> BbO;
};

inline ProcessSet make_process_set(const NoiseHierarchy& noise, int level, const OperatorSpec& spec,
                                   const SpectralField& xi, double eta = 0.0) {
    ProcessSet ps;
    ps.level = level;
    ps.T = noise.T;
    ps.O = stochastic_convolution(noise, level, spec);
    ps.Psi = psi_process(ps.O, xi, level, spec, noise.T);
    ps.BbO = bbO_process(ps.O, eta, level, spec, noise.T);
    const std::size_t steps = ps.O.size() - 1;
    const double h = noise.T / static_cast<double>(steps);
    ps.times.resize(steps + 1);
    for (std::size_t m = 0; m <= steps; ++m) ps.times[m] = static_cast<double>(m) * h;
    return ps;
}

} // namespace stburgers
