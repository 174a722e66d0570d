#include "beamsched/model_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace beamsched {
namespace {

constexpr double kBandLowMs = 1500.0;
constexpr double kBandHighMs = 10000.0;
constexpr double kMinPeakCorrelation = 0.2;
constexpr int kParams = 10; // 1, t, cos/sin x 4 harmonics

// Solves A x = y for a small symmetric system, Gaussian elimination with
// partial pivoting. A and y are overwritten.
std::vector<double> solve_dense(std::vector<double>& A, std::vector<double>& y,
                                int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::fabs(A[static_cast<std::size_t>(col * n + col)]);
        for (int row = col + 1; row < n; ++row) {
            const double v = std::fabs(A[static_cast<std::size_t>(row * n + col)]);
            if (v > best) {
                best = v;
                pivot = row;
            }
        }
        if (best < 1e-300)
            throw std::invalid_argument("fit: singular normal equations");
        if (pivot != col) {
            for (int k = 0; k < n; ++k)
                std::swap(A[static_cast<std::size_t>(col * n + k)],
                          A[static_cast<std::size_t>(pivot * n + k)]);
            std::swap(y[static_cast<std::size_t>(col)],
                      y[static_cast<std::size_t>(pivot)]);
        }
        const double d = A[static_cast<std::size_t>(col * n + col)];
        for (int row = col + 1; row < n; ++row) {
            const double f = A[static_cast<std::size_t>(row * n + col)] / d;
            if (f == 0.0) continue;
            for (int k = col; k < n; ++k)
                A[static_cast<std::size_t>(row * n + k)] -=
                    f * A[static_cast<std::size_t>(col * n + k)];
            y[static_cast<std::size_t>(row)] -= f * y[static_cast<std::size_t>(col)];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int row = n - 1; row >= 0; --row) {
        double s = y[static_cast<std::size_t>(row)];
        for (int k = row + 1; k < n; ++k)
            s -= A[static_cast<std::size_t>(row * n + k)] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(row)] = s / A[static_cast<std::size_t>(row * n + row)];
    }
    return x;
}

struct LinearFit {
    // coefficients relative to the centered time axis
    double base_c = 0.0;
    double drift = 0.0;
    std::array<double, 4> a{};
    std::array<double, 4> b{};
    double sse = 0.0;
};

// Least-squares fit of base + drift*t + harmonics at a fixed period, with
// time centered on the window midpoint for conditioning.
LinearFit solve_at_period(const SampleWindow& w, double period_ms, double t_center) {
    const std::size_t n = w.size();
    const double freq = 2.0 * M_PI / period_ms;

    std::vector<double> ata(kParams * kParams, 0.0);
    std::vector<double> aty(kParams, 0.0);
    double row[kParams];
    for (std::size_t i = 0; i < n; ++i) {
        const double tc = w.t_ms[i] - t_center;
        row[0] = 1.0;
        row[1] = tc;
        for (int k = 0; k < 4; ++k) {
            const double wk = static_cast<double>(k + 1) * freq * tc;
            row[2 + 2 * k] = std::cos(wk);
            row[3 + 2 * k] = std::sin(wk);
        }
        const double y = w.x_mm[i];
        for (int r = 0; r < kParams; ++r) {
            for (int c = r; c < kParams; ++c)
                ata[static_cast<std::size_t>(r * kParams + c)] += row[r] * row[c];
            aty[static_cast<std::size_t>(r)] += row[r] * y;
        }
    }
    for (int r = 0; r < kParams; ++r)
        for (int c = 0; c < r; ++c)
            ata[static_cast<std::size_t>(r * kParams + c)] =
                ata[static_cast<std::size_t>(c * kParams + r)];

    std::vector<double> coef = solve_dense(ata, aty, kParams);

    LinearFit out;
    out.base_c = coef[0];
    out.drift = coef[1];
    for (int k = 0; k < 4; ++k) {
        out.a[static_cast<std::size_t>(k)] = coef[static_cast<std::size_t>(2 + 2 * k)];
        out.b[static_cast<std::size_t>(k)] = coef[static_cast<std::size_t>(3 + 2 * k)];
    }

    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double tc = w.t_ms[i] - t_center;
        double pred = out.base_c + out.drift * tc;
        for (int k = 0; k < 4; ++k) {
            const double wk = static_cast<double>(k + 1) * freq * tc;
            pred += out.a[static_cast<std::size_t>(k)] * std::cos(wk) +
                    out.b[static_cast<std::size_t>(k)] * std::sin(wk);
        }
        const double r = w.x_mm[i] - pred;
        sse += r * r;
    }
    out.sse = sse;
    return out;
}

// Brent's method on [lo, hi]; f must be unimodal near the minimum.
template <typename F>
double brent_min(F&& f, double lo, double hi, double rel_tol, int max_iter) {
    const double gold = 0.3819660112501051;
    double a = lo, b = hi;
    double x = a + gold * (b - a);
    double w = x, v = x;
    double fx = f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int iter = 0; iter < max_iter; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol = rel_tol * std::fabs(x) + 1e-12;
        if (std::fabs(x - m) <= 2.0 * tol - 0.5 * (b - a)) break;
        double p = 0.0, q = 0.0, r = 0.0;
        bool parabola = false;
        if (std::fabs(e) > tol) {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::fabs(q);
            const double e_old = e;
            e = d;
            if (std::fabs(p) < std::fabs(0.5 * q * e_old) && p > q * (a - x) &&
                p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < 2.0 * tol || b - u < 2.0 * tol)
                    d = (m > x) ? tol : -tol;
                parabola = true;
            }
        }
        if (!parabola) {
            e = (x < m) ? b - x : a - x;
            d = gold * e;
        }
        const double u = (std::fabs(d) >= tol) ? x + d : x + ((d > 0.0) ? tol : -tol);
        const double fu = f(u);
        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return x;
}

} // namespace

std::optional<double> estimate_period(const SampleWindow& window) {
    const std::size_t n = window.size();
    if (n < 16 || window.span_ms() < 4000.0) return std::nullopt;

    const double step = window.span_ms() / static_cast<double>(n - 1);

    // Detrend: remove the least-squares line so drift does not masquerade
    // as low-frequency correlation.
    double st = 0.0, sx = 0.0, stt = 0.0, stx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = window.t_ms[i] - window.t_ms.front();
        st += t;
        sx += window.x_mm[i];
        stt += t * t;
        stx += t * window.x_mm[i];
    }
    const double dn = static_cast<double>(n);
    const double denom = dn * stt - st * st;
    const double slope = denom != 0.0 ? (dn * stx - st * sx) / denom : 0.0;
    const double icept = (sx - slope * st) / dn;

    std::vector<double> y(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = window.t_ms[i] - window.t_ms.front();
        y[i] = window.x_mm[i] - (icept + slope * t);
        var += y[i] * y[i];
    }
    var /= dn;
    if (var < 1e-12) return std::nullopt; // flat signal

    const std::size_t lag_lo =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(kBandLowMs / step)));
    std::size_t lag_hi = static_cast<std::size_t>(std::floor(kBandHighMs / step));
    lag_hi = std::min(lag_hi, n - std::max<std::size_t>(16, n / 4));
    if (lag_lo + 1 >= lag_hi) return std::nullopt;

    std::vector<double> corr(lag_hi + 1, 0.0);
    for (std::size_t lag = lag_lo > 0 ? lag_lo - 1 : 0; lag <= lag_hi; ++lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += y[i] * y[i + lag];
        corr[lag] = s / (static_cast<double>(n - lag) * var);
    }

    // Local maxima within the band. Integer multiples of the fundamental
    // correlate just as well, so take the smallest lag whose peak comes
    // close to the strongest one.
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t lag = std::max<std::size_t>(lag_lo, 1); lag + 1 <= lag_hi; ++lag)
        if (corr[lag] >= corr[lag - 1] && corr[lag] >= corr[lag + 1])
            best_val = std::max(best_val, corr[lag]);
    if (best_val < kMinPeakCorrelation) return std::nullopt;

    std::size_t best = 0;
    const double accept = std::max(kMinPeakCorrelation, 0.85 * best_val);
    for (std::size_t lag = std::max<std::size_t>(lag_lo, 1); lag + 1 <= lag_hi; ++lag) {
        if (corr[lag] >= corr[lag - 1] && corr[lag] >= corr[lag + 1] &&
            corr[lag] >= accept) {
            best = lag;
            break;
        }
    }
    if (best == 0) return std::nullopt;

    // parabolic refinement around the peak
    const double r0 = corr[best - 1], r1 = corr[best], r2 = corr[best + 1];
    const double curv = r0 - 2.0 * r1 + r2;
    double offset = 0.0;
    if (curv < 0.0) offset = 0.5 * (r0 - r2) / curv;
    offset = std::clamp(offset, -1.0, 1.0);
    return (static_cast<double>(best) + offset) * step;
}

FitResult fit(const SampleWindow& window, double period_hint_ms, double origin_ms) {
    const std::size_t n = window.size();
    if (!(period_hint_ms > 0.0))
        throw std::invalid_argument("fit: period must be > 0");
    if (n < 2 || window.span_ms() < 2.0 * period_hint_ms)
        throw std::invalid_argument("fit: window shorter than two periods");
    for (std::size_t i = 1; i < n; ++i)
        if (!(window.t_ms[i] > window.t_ms[i - 1]))
            throw std::invalid_argument("fit: timestamps must be strictly increasing");
    const double samples_per_period =
        static_cast<double>(n - 1) / (window.span_ms() / period_hint_ms);
    if (samples_per_period < 8.0)
        throw std::invalid_argument("fit: fewer than 8 samples per period");

    const double t_center = 0.5 * (window.t_ms.front() + window.t_ms.back());

    // Refine the period by minimizing the least-squares residual around the
    // hint; the autocorrelation estimate is only good to a few lags.
    const double lo = period_hint_ms * 0.92;
    const double hi = period_hint_ms * 1.08;
    const double period = brent_min(
        [&](double p) { return solve_at_period(window, p, t_center).sse; }, lo, hi,
        1e-11, 120);

    const LinearFit lf = solve_at_period(window, period, t_center);

    MotionModel1D model;
    model.period_ms = period;
    model.drift = lf.drift;
    const double freq = 2.0 * M_PI / period;

    // Rotate harmonic phases from the centered axis to the requested origin
    // and shift the baseline along the drift line.
    const double shift = origin_ms - t_center; // origin on the centered axis
    for (int k = 0; k < 4; ++k) {
        const double phi = static_cast<double>(k + 1) * freq * shift;
        const double c = std::cos(phi), s = std::sin(phi);
        const double ak = lf.a[static_cast<std::size_t>(k)];
        const double bk = lf.b[static_cast<std::size_t>(k)];
        model.a[static_cast<std::size_t>(k)] = ak * c + bk * s;
        model.b[static_cast<std::size_t>(k)] = bk * c - ak * s;
    }
    model.base = lf.base_c + lf.drift * shift;

    FitResult out;
    out.model = model;
    out.residual_rms = std::sqrt(lf.sse / static_cast<double>(n));
    return out;
}

FitResult fit(const SampleWindow& window, double period_hint_ms) {
    if (window.t_ms.empty())
        throw std::invalid_argument("fit: empty window");
    return fit(window, period_hint_ms, window.t_ms.back());
}

} // namespace beamsched
