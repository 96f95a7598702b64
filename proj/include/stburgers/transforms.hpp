#pragma once

// FFTW-backed real trigonometric transforms on (0,1).
//
// Conventions: the field is v(x) = sum_k c_k * sqrt(2) * sin(k pi x), x in (0,1).
// Grids are uniform, x_j = j/M.  Plans are cached globally (FFTW planning is
// not thread-safe); execution uses the new-array interface on per-call buffers,
// so concurrent callers never share scratch memory.

#include <fftw3.h>

#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace stburgers::transforms {

namespace detail {

inline fftw_plan cached_plan(fftw_r2r_kind kind, std::size_t n) {
    static std::mutex mtx;
    static std::map<std::pair<int, std::size_t>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(static_cast<int>(kind), n);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<double> in(n), out(n);
    fftw_plan p = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), out.data(),
                                   kind, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (p == nullptr) throw std::runtime_error("fftw plan creation failed");
    cache.emplace(key, p);
    return p;
}

} // namespace detail

// Values of v at the interior grid points x_j = j/M, j = 1..M-1, given the
// sine coefficients c_1..c_N (requires N <= M-1).  Uses DST-I.
inline std::vector<double> sine_values(const std::vector<double>& coeffs, std::size_t M) {
    if (M < 2) throw std::invalid_argument("sine_values: grid too small");
    if (coeffs.size() > M - 1)
        throw std::invalid_argument("sine_values: grid cannot resolve all modes");
    const std::size_t n = M - 1;
    std::vector<double> in(n, 0.0), out(n);
    // DST-I computes out_j = 2 sum_k in_k sin(pi (j+1)(k+1)/M); with
    // in_{k-1} = c_k / sqrt(2) this yields v(x_{j+1}) exactly.
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    for (std::size_t k = 0; k < coeffs.size(); ++k) in[k] = coeffs[k] * inv_sqrt2;
    fftw_execute_r2r(detail::cached_plan(FFTW_RODFT00, n), in.data(), out.data());
    return out;
}

// Cosine-series coefficients A_0..A_M of a function w(x) = sum_m A_m cos(m pi x)
// that vanishes at x=0 and x=1, given its interior samples w(x_j), j = 1..M-1.
// Exact (up to round-off) whenever the true cosine bandwidth is <= M-1.
inline std::vector<double> cosine_coeffs_zero_ends(const std::vector<double>& interior,
                                                   std::size_t M) {
    if (interior.size() != M - 1)
        throw std::invalid_argument("cosine_coeffs_zero_ends: expected M-1 interior samples");
    const std::size_t n = M + 1;
    std::vector<double> in(n, 0.0), out(n);
    for (std::size_t j = 0; j < M - 1; ++j) in[j + 1] = interior[j];
    fftw_execute_r2r(detail::cached_plan(FFTW_REDFT00, n), in.data(), out.data());
    std::vector<double> A(M + 1);
    const double invM = 1.0 / static_cast<double>(M);
    A[0] = 0.5 * out[0] * invM;
    for (std::size_t m = 1; m < M; ++m) A[m] = out[m] * invM;
    A[M] = 0.5 * out[M] * invM;
    return A;
}

} // namespace stburgers::transforms
