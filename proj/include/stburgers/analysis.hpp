#pragma once

// Monte Carlo estimation of strong and pathwise errors across coupled
// refinement levels, the trajectory-wise a priori bound checker, and
// log-log convergence-rate fitting.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stburgers/nonlinearity.hpp"
#include "stburgers/noise.hpp"
#include "stburgers/scheme.hpp"
#include "stburgers/spectral.hpp"

namespace stburgers {

// ---------------------------------------------------------------------------
// deterministic helpers

// Fixed-tree pairwise summation: the result depends only on the array
// contents and length, never on worker scheduling.
inline double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    const std::size_t n = hi - lo;
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + n / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v, 0, v.size()); }

// Dispatch items to a small worker pool; each item writes to its own slot.
inline void run_parallel(std::size_t n_items, unsigned threads,
                         const std::function<void(std::size_t)>& work) {
    if (threads <= 1 || n_items <= 1) {
        for (std::size_t i = 0; i < n_items; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const unsigned nw = std::min<unsigned>(threads, static_cast<unsigned>(n_items));
    pool.reserve(nw);
    for (unsigned w = 0; w < nw; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_items) return;
                work(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// a priori bound checker

struct BoundConstants {
    double eta = 0.0;
    double beta = 1.0;
    double theta = 0.0;        // 0 => assembled default (see default_bound_constants)
    double epsilon = 0.0;
    double c_neg = 0.0;        // 0 => computed from negative_norm_constant
    double varphi = 0.75;
    double slack = 1e-6;
    double l4_embedding = 2.0; // H^{1/4}((0,1)) -> L^4 embedding constant, configurable
    double tail_tol = 1e-10;
};

// Assembled default for theta: the quadratic-growth constant of the
// nonlinearity combined with the diagonal-realization embedding constants
//   sup ||u||_{H_rho} / ||u||_{H_varrho} = (kappa + lambda_1)^{rho - varrho}
// and the operator-norm factor max(1, (kappa + lambda_1)/(eta + lambda_1)).
// Not claimed sharp; overridable via BoundConstants::theta.
inline double default_theta(const ModelParams& p, double eta, double l4_embedding) {
    const double lam1 = p.c0 * kPi * kPi;
    const double theta_f = std::abs(p.c1) / std::sqrt(p.c0) * l4_embedding + 1.0;
    const double emb = std::pow(p.kappa + lam1, ModelParams::rho - p.varrho);
    const double term1 = 8.0 * theta_f * theta_f * std::max(1.0, std::pow(emb, 4.0));
    const double term2 =
        3.0 * theta_f * theta_f * (1.0 + std::max(1.0, emb * emb)) * (1.0 + 2.0);
    const double front = std::max(1.0, (p.kappa + lam1) / (eta + lam1));
    return front * std::max(term1, term2);
}

inline BoundConstants default_bound_constants(const ModelParams& p, double eta = 0.0) {
    BoundConstants bc;
    bc.eta = eta;
    bc.theta = default_theta(p, eta, bc.l4_embedding);
    bc.c_neg = negative_norm_constant(p.gamma, p.burgers(), bc.tail_tol);
    return bc;
}

struct AprioriResult {
    double lhs_max = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs / lhs_max (inf when lhs_max == 0)
    bool holds = false;
    bool overflow = false;  // rhs hit +inf (Phi blow-up); holds vacuously, flagged
};

// Mapping used by the checker: the generic offset process of the bound is the
// scheme's Psi (initial-condition flow plus convolution); its damped variant
// is bbO applied to Psi.  The bound is applied to the projected (level) system
// with the coercivity functionals doubled and the growth exponent doubled, as
// the projected nonlinearity estimates require.
inline std::string apriori_mapping_note() {
    return "lhs = max_t ||X_t - Psi_t||_{H_varrho}; offset process O := Psi, "
           "damped process := bbO(Psi); phi,Phi doubled and vartheta doubled for "
           "the projected system; all time integrals left-endpoint on the "
           "trajectory grid";
}

inline AprioriResult apriori_check(const TrajectoryRecord& traj, const BoundConstants& bc_in,
                                   const ModelParams& p) {
    BoundConstants bc = bc_in;
    if (bc.theta <= 0.0) bc.theta = default_theta(p, bc.eta, bc.l4_embedding);
    if (bc.c_neg <= 0.0) bc.c_neg = negative_norm_constant(p.gamma, p.burgers(), bc.tail_tol);
    if (!(bc.beta > 0.0)) throw std::invalid_argument("apriori_check: beta must be > 0");
    if (!(bc.varphi >= 0.0 && bc.varphi < 1.0))
        throw std::invalid_argument("apriori_check: varphi must be in [0,1)");

    const OperatorSpec op = p.op();
    const double T = p.T;
    const std::size_t M = traj.times.size() - 1;  // steps
    const double h = T / static_cast<double>(M);
    const double vartheta_l = 2.0 * ModelParams::vartheta;  // projected-system exponent
    const CoercivityFunctionals cf = CoercivityFunctionals::from(p.burgers());

    // damped offset process from Psi
    const auto bbo = bbO_process(traj.procs.Psi, bc.eta, traj.level, op, T);

    // grid functionals of the damped process (doubled for the projected system)
    std::vector<double> phi_l(M + 1), Phi_l(M + 1), bbo_h2(M + 1);
    for (std::size_t m = 0; m <= M; ++m) {
        const double s = sup_norm(bbo[m]);
        phi_l[m] = 2.0 * cf.phi_const * (1.0 + s * s);
        Phi_l[m] = 2.0 * cf.phi_const * (1.0 + std::pow(s, cf.phi_const));
        const double n = h_norm(bbo[m]);
        bbo_h2[m] = n * n;
    }
    const double sup_bbo_h2 = *std::max_element(bbo_h2.begin(), bbo_h2.end());

    // int_0^T ||sqrt(eta) Psi_u||_{H_varrho}^{4 + 2 vartheta_l} du (left endpoint)
    double i_eta = 0.0;
    if (bc.eta > 0.0) {
        for (std::size_t m = 0; m < M; ++m)
            i_eta += h * std::pow(hr_norm(traj.procs.Psi[m], p.varrho, op), 4.0 + 2.0 * vartheta_l);
        i_eta *= std::pow(bc.eta, (4.0 + 2.0 * vartheta_l) / 2.0);
    }

    // suffix exponent E_m = int_{t_m}^T phi(bbO_floor(u)) + 2 eta (1 + beta) du
    std::vector<double> suffix(M + 1, 0.0);
    for (std::size_t m = M; m-- > 0;)
        suffix[m] = suffix[m + 1] + h * (phi_l[m] + 2.0 * bc.eta * (1.0 + bc.beta));

    const double max_het = std::pow(std::max({1.0, bc.eta, T}), 4.0 + 3.0 * vartheta_l);
    double integral = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        const double bracket = Phi_l[m] + (bc.eta / (2.0 * bc.beta)) * bbo_h2[m] +
                               max_het * std::max(1.0, i_eta);
        integral += h * std::exp(suffix[m]) * bracket;
    }

    const double lam1 = eigenvalue(1, op);
    const double emb_norm = std::pow(p.kappa + lam1, ModelParams::rho - p.varrho);
    const double se = std::sqrt(bc.eta);
    const double inner = 1.0 +
                         (p.kappa + se + se * std::abs(p.kappa - bc.eta) * std::exp(bc.eta)) *
                             emb_norm +
                         std::sqrt(bc.theta) + se;
    const double pre2 =
        1.0 + bc.theta * std::exp(p.kappa * (2.0 + vartheta_l)) *
                  std::pow(inner, 2.0 + vartheta_l) /
                  ((1.0 - bc.varphi) *
                   std::pow(1.0 - ModelParams::alpha - ModelParams::rho, 2.0 + vartheta_l));

    const double front = 2.0 * bc.c_neg * std::exp(T * p.kappa) *
                         std::pow(T, 1.0 - p.varrho - p.gamma) / (1.0 - p.varrho - p.gamma);

    AprioriResult r;
    r.rhs = front * (bc.epsilon + sup_bbo_h2 + pre2 * integral);
    for (std::size_t m = 0; m <= M; ++m)
        r.lhs_max =
            std::max(r.lhs_max, hr_norm(sub(traj.X[m], traj.procs.Psi[m]), p.varrho, op));
    r.overflow = !std::isfinite(r.rhs);
    r.holds = r.overflow || r.lhs_max <= r.rhs * (1.0 + bc.slack);
    r.margin = r.lhs_max > 0.0 ? r.rhs / r.lhs_max
                               : std::numeric_limits<double>::infinity();
    return r;
}

// ---------------------------------------------------------------------------
// coupled convergence experiments

struct LevelError {
    int level = 0;
    std::size_t N = 0;
    double h = 0.0;
    double strong_error = 0.0;  // max over grid times of mean ||X_ref - X_l||_H^q
    double std_err = 0.0;       // standard error of the mean at the maximizing time
    double pathwise_p50 = 0.0;  // quantiles of sup_t ||X_ref - X_l||_{H_varrho}
    double pathwise_p90 = 0.0;
    double pathwise_max = 0.0;
};

struct ErrorReport {
    std::vector<LevelError> levels;
    double q = 2.0;
    std::size_t paths = 0;
    std::vector<std::uint64_t> seeds;
    int ref_level = 0;
    // fraction of paths whose sup-grid H_varrho error strictly decreases
    // across every successive level pair
    double monotone_fraction = 0.0;
    // per-path pathwise errors, [level index][path index] (kept for diagnostics)
    std::vector<std::vector<double>> pathwise_errors;
};

struct RateFit {
    double rate = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Least-squares slope of log(strong_error) against log(h).
inline RateFit rate_fit(const ErrorReport& report) {
    if (report.levels.size() < 3) throw std::invalid_argument("rate_fit: need >= 3 levels");
    std::vector<double> xs, ys;
    for (const auto& le : report.levels) {
        if (!(le.strong_error > 0.0))
            throw std::domain_error("rate_fit: undefined rate (nonpositive error)");
        xs.push_back(std::log(le.h));
        ys.push_back(std::log(le.strong_error));
    }
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i]; sy += ys[i];
        sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i]; syy += ys[i] * ys[i];
    }
    RateFit f;
    const double denom = n * sxx - sx * sx;
    f.rate = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.rate * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ymean = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = f.rate * xs[i] + f.intercept;
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
    }
    f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

namespace detail {

inline double quantile_sorted(const std::vector<double>& sorted, double prob) {
    if (sorted.empty()) return 0.0;
    const double pos = prob * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace detail

// Coupled Monte Carlo run: for each seed, one reference trajectory at
// ref_level plus one trajectory per compared level, all driven by the same
// noise hierarchy.  Produces strong (moment) and pathwise (sup-norm)
// error statistics per level.  Deterministic for fixed seeds at any thread
// count (per-seed slots, fixed-tree reductions).
inline ErrorReport convergence_study(const ModelParams& p, const std::vector<std::uint64_t>& seeds,
                                     const std::vector<int>& levels, int ref_level, double q,
                                     unsigned threads = 1, int headroom = 2) {
    if (seeds.empty()) throw std::invalid_argument("convergence_study: empty seed list");
    if (levels.empty()) throw std::invalid_argument("convergence_study: empty level list");
    if (!(q >= 1.0)) throw std::invalid_argument("convergence_study: q must be >= 1");
    for (int l : levels)
        if (ref_level < l + headroom)
            throw std::invalid_argument("convergence_study: reference headroom violated");
    {
        const auto errs = validate_params(p);
        if (!errs.empty()) throw std::invalid_argument("convergence_study: " + errs.front());
    }

    const OperatorSpec op = p.op();
    const std::size_t nl = levels.size();
    const std::size_t ns = seeds.size();

    // per-seed results: errq[seed][lvl][time], sup_err[seed][lvl]
    std::vector<std::vector<std::vector<double>>> errq(ns);
    std::vector<std::vector<double>> sup_err(ns, std::vector<double>(nl, 0.0));

    run_parallel(ns, threads, [&](std::size_t si) {
        NoiseHierarchy noise{seeds[si], ref_level, p.T};
        const TrajectoryRecord ref = simulate_path(p, noise, ref_level);
        errq[si].resize(nl);
        for (std::size_t li = 0; li < nl; ++li) {
            const int lvl = levels[li];
            const TrajectoryRecord tr = simulate_path(p, noise, lvl);
            const std::size_t steps = std::size_t{1} << lvl;
            const std::size_t stride = std::size_t{1} << (ref_level - lvl);
            errq[si][li].resize(steps + 1);
            double sup = 0.0;
            for (std::size_t m = 0; m <= steps; ++m) {
                const SpectralField diff =
                    sub(ref.X[m * stride], project(tr.X[m], ref.X[m * stride].dim()));
                errq[si][li][m] = std::pow(h_norm(diff), q);
                sup = std::max(sup, hr_norm(diff, p.varrho, op));
            }
            sup_err[si][li] = sup;
        }
    });

    ErrorReport rep;
    rep.q = q;
    rep.paths = ns;
    rep.seeds = seeds;
    rep.ref_level = ref_level;
    rep.pathwise_errors.resize(nl);

    for (std::size_t li = 0; li < nl; ++li) {
        const int lvl = levels[li];
        const std::size_t steps = std::size_t{1} << lvl;
        LevelError le;
        le.level = lvl;
        le.N = std::size_t{1} << lvl;
        le.h = p.T / static_cast<double>(steps);

        // strong error: sup over grid times of the sample mean of ||.||^q
        double best_mean = 0.0, best_se = 0.0;
        std::vector<double> col(ns);
        for (std::size_t m = 0; m <= steps; ++m) {
            for (std::size_t si = 0; si < ns; ++si) col[si] = errq[si][li][m];
            const double mean = pairwise_sum(col) / static_cast<double>(ns);
            if (mean >= best_mean) {
                std::vector<double> dev(ns);
                for (std::size_t si = 0; si < ns; ++si)
                    dev[si] = (col[si] - mean) * (col[si] - mean);
                const double var =
                    ns > 1 ? pairwise_sum(dev) / static_cast<double>(ns - 1) : 0.0;
                best_mean = mean;
                best_se = std::sqrt(var / static_cast<double>(ns));
            }
        }
        le.strong_error = best_mean;
        le.std_err = best_se;

        std::vector<double> sups(ns);
        for (std::size_t si = 0; si < ns; ++si) sups[si] = sup_err[si][li];
        rep.pathwise_errors[li] = sups;
        std::sort(sups.begin(), sups.end());
        le.pathwise_p50 = detail::quantile_sorted(sups, 0.50);
        le.pathwise_p90 = detail::quantile_sorted(sups, 0.90);
        le.pathwise_max = sups.back();
        rep.levels.push_back(le);
    }

    // per-path monotone decrease across successive levels (levels assumed
    // given in increasing order)
    std::size_t monotone = 0;
    for (std::size_t si = 0; si < ns; ++si) {
        bool ok = true;
        for (std::size_t li = 0; li + 1 < nl; ++li)
            if (!(sup_err[si][li + 1] < sup_err[si][li])) { ok = false; break; }
        if (ok) ++monotone;
    }
    rep.monotone_fraction = static_cast<double>(monotone) / static_cast<double>(ns);
    return rep;
}

// Strong (moment) error report; see convergence_study for the coupling.
inline ErrorReport strong_error(const ModelParams& p, const std::vector<std::uint64_t>& seeds,
                                const std::vector<int>& levels, int ref_level, double q,
                                unsigned threads = 1) {
    return convergence_study(p, seeds, levels, ref_level, q, threads);
}

// Pathwise sup-norm error quantiles per level.
inline ErrorReport pathwise_error(const ModelParams& p, const std::vector<std::uint64_t>& seeds,
                                  const std::vector<int>& levels, int ref_level,
                                  unsigned threads = 1) {
    return convergence_study(p, seeds, levels, ref_level, std::max(1.0, p.q_moment), threads);
}

} // namespace stburgers
