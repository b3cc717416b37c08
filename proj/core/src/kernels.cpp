#include "sublinopt/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

#include "sublinopt/learners.hpp"

namespace sublinopt {

namespace {

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

void validate_spec(const KernelSpec& spec) {
    if (spec.family == KernelSpec::Family::polynomial && spec.q < 1)
        throw std::invalid_argument("KernelSpec: polynomial degree q must be >= 1");
    if (spec.family == KernelSpec::Family::gaussian && !(spec.kappa > 0.0))
        throw std::invalid_argument("KernelSpec: gaussian kappa must be > 0");
    if (spec.averaging < 1)
        throw std::invalid_argument("KernelSpec: averaging count must be >= 1");
}

double dot(const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) s += u[j] * v[j];
    return s;
}

double sq_norm(const std::vector<double>& u) { return dot(u, u); }

double int_pow(double base, int q) {
    double r = 1.0;
    for (int i = 0; i < q; ++i) r *= base;
    return r;
}

void check_gaussian_norms(const KernelSpec& spec, double u2, double v2,
                          const char* who) {
    const double cap = spec.kappa / 2.0 + 1e-9;
    if (std::sqrt(u2) > cap || std::sqrt(v2) > cap)
        throw std::invalid_argument(
            std::string(who) + ": gaussian kernel requires norms <= kappa/2");
}

// Row with its l2-sampler prebuilt; all repeated estimates against the same
// left argument reuse it.  RowView is the non-owning handle the estimators
// take, so the hot paths never copy a vector or a sampler.
struct CachedRow {
    std::vector<double> v;
    L2Sampler sampler;
    double sq_norm = 0.0;
};

struct RowView {
    const std::vector<double>* v = nullptr;
    const L2Sampler* sampler = nullptr;
    double sq_norm = 0.0;
};

RowView view_of(const CachedRow& r) { return {&r.v, &r.sampler, r.sq_norm}; }

CachedRow cache_vector(const std::vector<double>& u) {
    CachedRow r;
    r.v = u;
    r.sampler.assign(u);
    r.sq_norm = sq_norm(u);
    return r;
}

CachedRow cache_row(const DataMatrix& m, std::size_t i) {
    CachedRow r;
    r.v.assign(m.n_cols(), 0.0);
    m.for_each_in_row(i, [&](std::size_t j, double val) { r.v[j] = val; });
    r.sampler.assign(r.v);
    r.sq_norm = m.row_sq_norm(i);
    return r;
}

// One l2-sample estimate of u . v: draw j ~ u(j)^2/||u||^2, return
// v(j) ||u||^2 / u(j); exact 0 for u = 0.
double ell2_est(const RowView& u, const RowView& v, Rng& rng) {
    const auto s = u.sampler->sample(rng);
    if (!s) return 0.0;
    return (*v.v)[s->j] * s->inv_coord;
}

// Inverse-transform Poisson(gamma) walk; the tail beyond the truncation index
// (mass < 1e-80 for gamma <= 4) folds into 0.
int poisson_draw(double gamma, Rng& rng) {
    const double u = rng.uniform01();
    double pmf = std::exp(-gamma);
    double cum = pmf;
    int i = 0;
    while (u >= cum && i < kPoissonTruncation) {
        ++i;
        pmf *= gamma / i;
        cum += pmf;
    }
    return u < cum ? i : 0;
}

double kernel_estimate_cached(const KernelSpec& spec, const RowView& u,
                              const RowView& v, Rng& rng) {
    if (spec.family == KernelSpec::Family::polynomial) {
        double prod = 1.0;
        for (int l = 0; l < spec.q; ++l) prod *= ell2_est(u, v, rng);
        return prod;
    }
    // gaussian: prefactor * e^gamma * prod of Poisson-many X factors, X the
    // mean of c l2-samples; averaged `averaging` times to push Var below 1.
    const double gamma = spec.gamma();
    const double pref = std::exp(-(u.sq_norm + v.sq_norm) / (2.0 * spec.kappa * spec.kappa));
    const int c = spec.samples_per_factor();
    double acc = 0.0;
    for (int a = 0; a < spec.averaging; ++a) {
        const int idx = poisson_draw(gamma, rng);
        double prod = 1.0;
        for (int l = 0; l < idx; ++l) {
            double x = 0.0;
            for (int s = 0; s < c; ++s) x += ell2_est(u, v, rng);
            prod *= x / c;
        }
        acc += pref * std::exp(gamma) * prod;
    }
    return acc / spec.averaging;
}

// Solver-side helpers for the kernel-form reports. ---------------------------

// Collapse the (row, per-occurrence coefficient) sequence into distinct rows
// with summed coefficients, dropping exact zeros.
void consolidate_support(const std::vector<std::uint32_t>& seq,
                         const std::vector<double>& coeff,
                         SolutionReport& report) {
    std::map<std::uint32_t, double> acc;
    for (std::size_t k = 0; k < seq.size(); ++k) acc[seq[k]] += coeff[k];
    for (const auto& [row, c] : acc) {
        if (c == 0.0) continue;
        report.support.push_back(row);
        report.coeffs.push_back(c);
    }
}

// Exact <x_bar, Psi(A_i)> for every row, x_bar given by support/coeffs.
std::vector<double> exact_cross_products(const KernelSpec& spec,
                                         const std::vector<CachedRow>& rows,
                                         const SolutionReport& report) {
    std::vector<double> cross(rows.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t r = 0; r < report.support.size(); ++r)
            cross[i] += report.coeffs[r] *
                        kernel_exact(spec, rows[report.support[r]].v, rows[i].v);
    return cross;
}

// Exact ||x_bar||^2 in feature space.
double exact_self_product(const KernelSpec& spec,
                          const std::vector<CachedRow>& rows,
                          const SolutionReport& report) {
    double s = 0.0;
    for (std::size_t r = 0; r < report.support.size(); ++r)
        for (std::size_t r2 = 0; r2 < report.support.size(); ++r2)
            s += report.coeffs[r] * report.coeffs[r2] *
                 kernel_exact(spec, rows[report.support[r]].v,
                              rows[report.support[r2]].v);
    return s;
}

// Exact p^T K p over the dual support.
double exact_dual_quadratic(const KernelSpec& spec,
                            const std::vector<CachedRow>& rows,
                            const std::vector<double>& pbar) {
    double s = 0.0;
    for (std::size_t i = 0; i < pbar.size(); ++i) {
        if (pbar[i] == 0.0) continue;
        for (std::size_t i2 = 0; i2 < pbar.size(); ++i2) {
            if (pbar[i2] == 0.0) continue;
            s += pbar[i] * pbar[i2] * kernel_exact(spec, rows[i].v, rows[i2].v);
        }
    }
    return s;
}

void check_instance(const DataMatrix& m, const KernelSpec& spec, const char* who) {
    validate_spec(spec);
    if (m.n_rows() == 0)
        throw std::invalid_argument(std::string(who) + ": empty instance");
    if (!m.finalized())
        throw std::invalid_argument(std::string(who) + ": matrix not finalized");
    if (spec.family == KernelSpec::Family::gaussian)
        for (std::size_t i = 0; i < m.n_rows(); ++i)
            check_gaussian_norms(spec, m.row_sq_norm(i), 0.0, who);
}

}  // namespace

int KernelSpec::samples_per_factor() const {
    return std::max(1, static_cast<int>(std::ceil(gamma())));
}

double kernel_exact(const KernelSpec& spec, const std::vector<double>& u,
                    const std::vector<double>& v) {
    validate_spec(spec);
    if (u.size() != v.size())
        throw std::invalid_argument("kernel_exact: dimension mismatch");
    if (spec.family == KernelSpec::Family::polynomial)
        return int_pow(dot(u, v), spec.q);
    check_gaussian_norms(spec, sq_norm(u), sq_norm(v), "kernel_exact");
    double diff2 = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        double dlt = u[j] - v[j];
        diff2 += dlt * dlt;
    }
    return std::exp(-diff2 / (2.0 * spec.kappa * spec.kappa));
}

double kernel_estimate(const KernelSpec& spec, const std::vector<double>& u,
                       const std::vector<double>& v, Rng& rng) {
    validate_spec(spec);
    if (u.size() != v.size())
        throw std::invalid_argument("kernel_estimate: dimension mismatch");
    CachedRow cu = cache_vector(u), cv = cache_vector(v);
    if (spec.family == KernelSpec::Family::polynomial) {
        if (cu.sq_norm > 1.0 + 1e-7 || cv.sq_norm > 1.0 + 1e-7)
            throw std::invalid_argument(
                "kernel_estimate: polynomial estimator requires norms <= 1");
    } else {
        check_gaussian_norms(spec, cu.sq_norm, cv.sq_norm, "kernel_estimate");
    }
    return kernel_estimate_cached(spec, view_of(cu), view_of(cv), rng);
}

NormEstimator::NormEstimator(const KernelSpec& spec, std::uint64_t T, double eps,
                             double delta)
    : spec_(spec), T_(T) {
    validate_spec(spec);
    if (T == 0) throw std::invalid_argument("NormEstimator: T must be >= 1");
    if (!(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("NormEstimator: need eps, delta in (0,1)");
    const double Td = static_cast<double>(T);
    N_Y_ = static_cast<std::uint64_t>(
        std::ceil((8.0 / 3.0) * std::log(1.0 / delta) * Td * Td / (eps * eps)));
    clip_level_ = Td / eps;
}

void NormEstimator::extend(const DataMatrix& m,
                           const std::vector<std::uint32_t>& support, Rng& rng) {
    if (support.size() != y_hat_.size() + 1)
        throw std::logic_error("NormEstimator::extend: support must grow by one");
    const std::uint64_t t = support.size();
    rows_.reserve(t);
    {
        CachedRow r = cache_row(m, support.back());
        rows_.push_back(std::move(r.v));
        samplers_.push_back(std::move(r.sampler));
        sq_norms_.push_back(r.sq_norm);
    }
    auto cached = [&](std::size_t idx) {
        return RowView{&rows_[idx], &samplers_[idx], sq_norms_[idx]};
    };
    // One k~ draw per (new ordered pair, m): the diagonal (t,t) plus both
    // orientations (t,tau), (tau,t) for tau < t, n_t rounds each.  This is
    // the stepwise scheme with each new ordered pair contributing its kernel
    // value once in expectation -- 2t-1 pairs, (2t-1) n_t calls.
    const std::uint64_t t2 = t * t;
    const std::uint64_t n_t = (N_Y_ + t2 - 1) / t2;
    const RowView self = cached(t - 1);
    double sum = 0.0;
    for (std::uint64_t mm = 0; mm < n_t; ++mm)
        sum += clip(kernel_estimate_cached(spec_, self, self, rng), clip_level_);
    for (std::uint64_t tau = 0; tau + 1 < t; ++tau) {
        const RowView other = cached(tau);
        for (std::uint64_t mm = 0; mm < n_t; ++mm) {
            sum += clip(kernel_estimate_cached(spec_, self, other, rng), clip_level_);
            sum += clip(kernel_estimate_cached(spec_, other, self, rng), clip_level_);
        }
    }
    calls_ += n_t * (2 * t - 1);
    y_hat_.push_back(sum / static_cast<double>(n_t));
}

double NormEstimator::y_norm_estimate() const {
    if (y_hat_.empty()) return 0.0;
    // Y~_t = sum Yhat / t^2 and ||y_t|| = sqrt(Y~_t t^2 / 2T): the t^2 cancels.
    double s = 0.0;
    for (double v : y_hat_) s += v;
    return std::sqrt(std::max(0.0, s) / (2.0 * static_cast<double>(T_)));
}

KernelEllTwo::KernelEllTwo(const KernelSpec& spec, const DataMatrix& m,
                           std::uint64_t T, double eps, double delta)
    : spec_(spec), m_(m), T_(T), norm_est_(spec, T, eps, delta) {
    check_instance(m, spec, "KernelEllTwo");
    const std::size_t n = m.n_rows();
    row_sums_.assign(n, 0.0);
    row_cache_.reserve(n);
    samplers_.reserve(n);
    sq_norms_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        CachedRow r = cache_row(m, i);
        row_cache_.push_back(std::move(r.v));
        samplers_.push_back(std::move(r.sampler));
        sq_norms_.push_back(r.sq_norm);
    }
}

void KernelEllTwo::extend_support(std::uint32_t i_t, Rng& rng) {
    if (i_t >= m_.n_rows())
        throw std::invalid_argument("KernelEllTwo::extend_support: row out of range");
    support_.push_back(i_t);
    // Draw order per extension is fixed: the n running-sum updates in row
    // order, then the norm estimator's pair shell.
    const RowView newrow{&row_cache_[i_t], &samplers_[i_t], sq_norms_[i_t]};
    for (std::size_t i = 0; i < row_sums_.size(); ++i) {
        const RowView other{&row_cache_[i], &samplers_[i], sq_norms_[i]};
        row_sums_[i] += kernel_estimate_cached(spec_, newrow, other, rng);
    }
    norm_est_.extend(m_, support_, rng);
}

double KernelEllTwo::scale() const {
    return std::max(1.0, norm_est_.y_norm_estimate());
}

double KernelEllTwo::estimate(std::size_t i) const {
    return row_sums_[i] / (scale() * std::sqrt(2.0 * static_cast<double>(T_)));
}

SolutionReport sublinear_kernel_perceptron(const DataMatrix& m,
                                           const KernelSpec& spec,
                                           const SolverConfig& cfg) {
    check_instance(m, spec, "sublinear_kernel_perceptron");
    const std::size_t n = m.n_rows();
    const Schedule sched = cfg.perceptron_schedule(n);
    const std::uint64_t T = sched.T;
    const double eta = sched.eta, V = 1.0 / eta;

    Timer timer;
    AccessCounter counter;
    counter.add(m.nnz());  // row caches: the kernel analogue of loading
    Rng rng(cfg.seed);

    KernelEllTwo state(spec, m, T, cfg.eps, cfg.delta);
    MWState mw = mw_init(n, eta);
    std::vector<double>& w = mw.w;
    std::vector<std::uint64_t> counts(n, 0);
    std::vector<double> inv_s(T + 1, 0.0);

    SolutionReport report;
    if (cfg.retain_trace) report.trace.reserve(std::min<std::uint64_t>(T, 1u << 20));

    for (std::uint64_t t = 1; t <= T; ++t) {
        // x_t = y_t / s_t with support [t-1]: estimates lag the support by
        // one iteration exactly as in the algorithm (t = 1 sees x = 0).
        inv_s[t] = 1.0 / state.scale();

        const std::size_t i_t = mw_sample(mw, rng);
        ++counts[i_t];
        if (cfg.retain_trace)
            report.trace.push_back({static_cast<std::uint32_t>(i_t), -1});

        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double v = clip(state.estimate(i), V);
            double z = eta * v;
            w[i] *= 1.0 - z + z * z;
            total += w[i];
        }
        mw.sum_w = total;
        ++mw.updates;
        if (mw.sum_w < 1e-150 || mw.sum_w > 1e150) {
            double inv = 1.0 / mw.sum_w;
            for (double& v : w) v *= inv;
            mw.sum_w = 1.0;
        }

        state.extend_support(static_cast<std::uint32_t>(i_t), rng);
    }

    // x_bar = (1/T) sum_t y_t/s_t; the support point added at iteration tau
    // appears in every later x_t, so its coefficient is the suffix sum of
    // 1/s_t past tau, scaled by the 1/sqrt(2T) step and the 1/T average.
    const double base = 1.0 / (static_cast<double>(T) *
                               std::sqrt(2.0 * static_cast<double>(T)));
    std::vector<double> coeff(T, 0.0);
    double suffix = 0.0;
    for (std::uint64_t tau = T; tau >= 1; --tau) {
        coeff[tau - 1] = suffix * base;
        suffix += inv_s[tau];
    }
    std::vector<std::uint32_t> seq(state.support().begin(), state.support().end());
    consolidate_support(seq, coeff, report);

    // Exact final scans over the kernel itself, never the estimates.
    std::vector<CachedRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rows.push_back(cache_row(m, i));
    std::vector<double> cross = exact_cross_products(spec, rows, report);
    double achieved = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) achieved = std::min(achieved, cross[i]);
    report.achieved_value = achieved;
    for (std::uint32_t i = 0; i < n; ++i)
        if (counts[i] > 0) report.p_bar_counts.emplace_back(i, counts[i]);
    report.dual_bound =
        std::sqrt(std::max(0.0, exact_dual_quadratic(spec, rows, report.p_bar(n))));
    report.iterations = T;
    report.entries_read = counter.entries_read;
    report.inconclusive = false;
    report.wall_time = timer.seconds();
    return report;
}

SolutionReport kernelized_meb(const DataMatrix& m, const KernelSpec& spec,
                              const SolverConfig& cfg) {
    check_instance(m, spec, "kernelized_meb");
    const std::size_t n = m.n_rows();
    const Schedule sched = cfg.meb_schedule(n);
    const std::uint64_t T = sched.T;
    const double eta = sched.eta, V = 1.0 / eta, alpha = sched.alpha;

    Timer timer;
    AccessCounter counter;
    counter.add(m.nnz());
    Rng rng(cfg.seed);

    std::vector<CachedRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rows.push_back(cache_row(m, i));
    std::vector<double> kii(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        kii[i] = kernel_exact(spec, rows[i].v, rows[i].v);

    MWState mw = mw_init(n, eta);
    std::vector<double>& w = mw.w;
    std::vector<std::uint64_t> counts(n, 0);

    // Running estimate sums over the fired support: S[i] ~ sum_tau
    // k(A_tau, A_i), and G ~ sum over all support pairs, extended at each
    // fire with the exact new diagonal plus twice the pre-fire S of the fired
    // row (the cross terms, reused rather than re-drawn).
    std::vector<double> S(n, 0.0);
    double G = 0.0;
    std::uint64_t k = 0;
    std::vector<std::uint32_t> fired_rows;
    std::vector<std::uint64_t> fire_iters;
    std::vector<std::uint32_t> k_at(T + 1, 0);

    SolutionReport report;
    if (cfg.retain_trace) report.trace.reserve(std::min<std::uint64_t>(T, 1u << 20));

    for (std::uint64_t t = 1; t <= T; ++t) {
        k_at[t] = static_cast<std::uint32_t>(k);

        // Draw order: i_t, the alpha coin, then (on fires) the n running-sum
        // estimates in row order.
        const std::size_t i_t = mw_sample(mw, rng);
        ++counts[i_t];
        if (cfg.retain_trace)
            report.trace.push_back({static_cast<std::uint32_t>(i_t), -1});
        const bool fire = rng.uniform01() < alpha;

        // Cost ||Psi(A_i) - x_t||^2 = k_ii - 2 S_i/k + G/k^2 at the pre-fire
        // state; empty support means x_t = 0 and the cost is exactly k_ii.
        const double inv_k = k > 0 ? 1.0 / static_cast<double>(k) : 0.0;
        const double x2 = G * inv_k * inv_k;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double v = clip(kii[i] - 2.0 * S[i] * inv_k + x2, V);
            double z = eta * v;
            w[i] *= 1.0 + z + z * z;
            total += w[i];
        }
        mw.sum_w = total;
        ++mw.updates;
        if (mw.sum_w < 1e-150 || mw.sum_w > 1e150) {
            double inv = 1.0 / mw.sum_w;
            for (double& v : w) v *= inv;
            mw.sum_w = 1.0;
        }

        if (fire) {
            G += kii[i_t] + 2.0 * S[i_t];
            const RowView fired = view_of(rows[i_t]);
            for (std::size_t i = 0; i < n; ++i)
                S[i] += kernel_estimate_cached(spec, fired, view_of(rows[i]), rng);
            counter.add(m.row_nnz(i_t));
            fired_rows.push_back(static_cast<std::uint32_t>(i_t));
            fire_iters.push_back(t);
            ++k;
        }
    }

    // x_bar = (1/T) sum_t y_t/k_t: the m-th fired point joins x_t for every
    // t past its fire iteration, each contributing 1/(T k_t).
    std::vector<double> coeff(fired_rows.size(), 0.0);
    {
        double suffix = 0.0;
        std::size_t mi = fired_rows.size();
        for (std::uint64_t t = T; t >= 1; --t) {
            if (mi > 0 && fire_iters[mi - 1] == t) {
                --mi;
                coeff[mi] = suffix;
            }
            if (k_at[t] > 0)
                suffix += 1.0 / (static_cast<double>(T) * k_at[t]);
        }
    }
    consolidate_support(fired_rows, coeff, report);

    // Exact feature-space scans for the radius and the dual lower bound
    // g(p_bar) = sum p k_ii - p^T K p.
    std::vector<double> cross = exact_cross_products(spec, rows, report);
    const double x2 = exact_self_product(spec, rows, report);
    double achieved = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        achieved = std::max(achieved, x2 - 2.0 * cross[i] + kii[i]);
    report.achieved_value = achieved;
    for (std::uint32_t i = 0; i < n; ++i)
        if (counts[i] > 0) report.p_bar_counts.emplace_back(i, counts[i]);
    std::vector<double> pbar = report.p_bar(n);
    double plin = 0.0;
    for (std::size_t i = 0; i < n; ++i) plin += pbar[i] * kii[i];
    report.dual_bound = plin - exact_dual_quadratic(spec, rows, pbar);
    report.iterations = T;
    report.entries_read = counter.entries_read;
    report.wall_time = timer.seconds();
    return report;
}

std::vector<std::vector<double>> gram_matrix(const KernelSpec& spec,
                                             const DataMatrix& m) {
    validate_spec(spec);
    if (!m.finalized())
        throw std::invalid_argument("gram_matrix: matrix not finalized");
    const std::size_t n = m.n_rows();
    std::vector<CachedRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) rows.push_back(cache_row(m, i));
    std::vector<std::vector<double>> K(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double v = kernel_exact(spec, rows[i].v, rows[j].v);
            K[i][j] = v;
            K[j][i] = v;
        }
    return K;
}

}  // namespace sublinopt
