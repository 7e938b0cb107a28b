#include "rstab/solver.hpp"

#include <algorithm>
#include <chrono>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "rstab/errors.hpp"
#include "rstab/golden.hpp"

namespace rstab {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kPeakFraction = 0.95;
constexpr std::size_t kMaxPeaks = 12;
// pencil eigenvalues with |beta| below this (relative) are infinite
constexpr double kInfiniteBeta = 1e-13;
// relative distance from the imaginary axis accepted for a crossing candidate
constexpr double kOnAxis = 1e-6;
// relative |Im H| accepted as a real crossing after polishing
constexpr double kCrossingResidual = 1e-10;
// polished roots closer than this (relative) are one crossing
constexpr double kSameRoot = 1e-9;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double reciprocal(double mu)
{
    return mu > 0.0 ? 1.0 / mu : std::numeric_limits<double>::infinity();
}

// Bisection on the sign of mu' inside [lo, hi] where mu'(lo) > 0 > mu'(hi).
// Gives up (nullopt) as soon as a probe has no analytic slope.
std::optional<OuterMaximum> slope_bisection(const MuObjective& f, double lo, double hi, double tol)
{
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const auto pt = f(mid);
        if (!pt || !pt->slope) {
            return std::nullopt;
        }
        if (*pt->slope > 0.0) {
            lo = mid;
        } else if (*pt->slope < 0.0) {
            hi = mid;
        } else {
            return OuterMaximum{mid, pt->mu};
        }
    }
    const double mid = 0.5 * (lo + hi);
    const auto pt = f(mid);
    if (!pt) {
        return std::nullopt;
    }
    return OuterMaximum{mid, pt->mu};
}

OuterMaximum refine_peak(const MuObjective& f, double lo, double hi,
                         const std::optional<MuPoint>& at_lo, const std::optional<MuPoint>& at_hi,
                         double tol)
{
    if (at_lo && at_hi && at_lo->slope && at_hi->slope && *at_lo->slope > 0.0
        && *at_hi->slope < 0.0) {
        if (auto r = slope_bisection(f, lo, hi, tol)) {
            return *r;
        }
    }
    const auto g = golden_section_maximize(
        [&](double w) {
            const auto pt = f(w);
            return pt ? pt->mu : -std::numeric_limits<double>::infinity();
        },
        lo, hi, tol);
    return {g.x, g.fx};
}

struct Evaluated {
    MuEvaluation ev;
    TransferSample sample;
};

// mu of the reduced problem at w, falling back to the full system when the
// reduced resolvent degenerates (the two agree at absorbed points).
Evaluated mu_at_absorbed(const StateSpaceSystem& sys, const ReducedSystem& red, double omega,
                         const MuOptions& opt)
{
    TransferSample s;
    try {
        s = eval_reduced_transfer(red, omega, 1);
    } catch (const DegenerateReductionError&) {
        s = eval_transfer(sys, omega, 1);
    }
    return {mu_of(s, opt), s};
}

} // namespace

void SolverConfig::validate() const
{
    const bool ok = eps_rel > 0.0 && gamma_floor > 0.0 && gamma_floor < 1.0 && golden_tol > 0.0
                    && refine_tol > 0.0 && gap_tol > 0.0 && rank_tol > 0.0 && k_max >= 0
                    && coarse_samples >= 8 && (!omega_max || *omega_max > 0.0);
    if (!ok) {
        throw ParameterError("invalid solver configuration (tolerances must be positive, "
                             "coarse_samples >= 8, k_max >= 0)");
    }
}

Termination check_termination(double r_k, double r_prev, int k, const SolverConfig& cfg)
{
    if (!(r_k > 0.0) || !(r_prev > 0.0)) {
        throw ContractError("termination test needs positive radii");
    }
    if (std::abs(r_k - r_prev) < cfg.eps_rel * 0.5 * std::abs(r_k + r_prev)) {
        return Termination::converged;
    }
    if (k > cfg.k_max) {
        return Termination::iteration_cap;
    }
    return Termination::proceed;
}

double resolve_omega_max(const StateSpaceSystem& sys, const std::optional<double>& omega_max)
{
    if (omega_max) {
        return *omega_max;
    }
    const double w = 10.0 * sys.A_norm1();
    return w > 0.0 ? w : 1.0;
}

OuterMaximum maximize_mu(const MuObjective& evaluate, double omega_max, const SolverConfig& cfg)
{
    const int N = cfg.coarse_samples;
    std::vector<double> grid(N);
    std::vector<std::optional<MuPoint>> vals(N);
    for (int i = 0; i < N; ++i) {
        grid[i] = omega_max * static_cast<double>(i) / (N - 1);
        vals[i] = evaluate(grid[i]);
    }

    int best = -1;
    for (int i = 0; i < N; ++i) {
        if (vals[i] && (best < 0 || vals[i]->mu > vals[best]->mu)) {
            best = i;
        }
    }
    if (best < 0) {
        throw OptimizerStarvedError("every frequency sample was degenerate");
    }
    const double top = vals[best]->mu;

    // sampled local maxima within 5% of the best sample, strongest first
    auto value = [&](int i) {
        return (i >= 0 && i < N && vals[i]) ? vals[i]->mu : -std::numeric_limits<double>::infinity();
    };
    std::vector<int> peaks;
    for (int i = 0; i < N; ++i) {
        if (!vals[i] || vals[i]->mu < kPeakFraction * top) {
            continue;
        }
        const double v = vals[i]->mu;
        const double l = value(i - 1);
        const double r = value(i + 1);
        if (v >= l && v >= r && (v > l || v > r || i == best)) {
            peaks.push_back(i);
        }
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [&](int a, int b) { return vals[a]->mu > vals[b]->mu; });
    if (peaks.size() > kMaxPeaks) {
        peaks.resize(kMaxPeaks);
    }

    OuterMaximum out{grid[best], top};
    for (int i : peaks) {
        const int il = std::max(i - 1, 0);
        const int ir = std::min(i + 1, N - 1);
        auto cand = refine_peak(evaluate, grid[il], grid[ir], vals[il], vals[ir], cfg.refine_tol);
        if (vals[i]->mu > cand.mu) {
            cand = {grid[i], vals[i]->mu};
        }
        if (cand.mu > out.mu) {
            out = cand;
        }
    }
    return out;
}

std::optional<double> refine_real_crossing(const ScalarObjective& f, double lo, double hi)
{
    const auto flo = f(lo);
    const auto fhi = f(hi);
    if (!flo || !fhi) {
        return std::nullopt;
    }
    double ylo = flo->h.imag();
    const double yhi = fhi->h.imag();
    if (ylo == 0.0) {
        return lo;
    }
    if (yhi == 0.0) {
        return hi;
    }
    if ((ylo > 0.0) == (yhi > 0.0)) {
        return std::nullopt;
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double x = lo - ylo * (hi - lo) / (yhi - ylo);
    for (int it = 0; it < 200; ++it) {
        const auto fx = f(x);
        if (!fx) {
            return std::nullopt;
        }
        const double y = fx->h.imag();
        if (y == 0.0) {
            return x;
        }
        if ((y > 0.0) == (ylo > 0.0)) {
            lo = x;
            ylo = y;
        } else {
            hi = x;
        }
        const double dy = fx->dh.imag();
        double next = dy != 0.0 ? x - y / dy : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        const double scale = 4.0 * eps * std::max(1.0, std::abs(x));
        if (std::abs(next - x) <= scale || hi - lo <= scale) {
            return next;
        }
        x = next;
    }
    return x;
}

namespace {

// Left end of a crossing bracket. Inside the first cell the sign at w = 0 comes
// from the slope, so step towards 0 until Im h shows that sign.
double first_cell_start(const ScalarObjective& f, double lo, double hi, double sign)
{
    if (lo != 0.0) {
        return lo;
    }
    for (double t = 1e-2; t >= 1e-12; t *= 1e-2) {
        const auto v = f(t * hi);
        if (v && v->h.imag() != 0.0 && (v->h.imag() > 0.0) == (sign > 0.0)) {
            return t * hi;
        }
    }
    return lo;
}

} // namespace

std::vector<OuterMaximum> grid_real_crossings(const ScalarObjective& f, double omega_max,
                                              int samples)
{
    std::vector<OuterMaximum> out;
    std::optional<std::pair<double, double>> last; // (w, Im h) of the last usable sample
    // Im h vanishes at w = 0 and starts with the sign of Im h'
    if (const auto at0 = f(0.0); at0 && at0->dh.imag() != 0.0) {
        last = {0.0, at0->dh.imag()};
    }
    for (int i = 1; i < samples; ++i) {
        const double w = omega_max * static_cast<double>(i) / (samples - 1);
        const auto v = f(w);
        if (!v) {
            continue;
        }
        const double y = v->h.imag();
        std::optional<double> root;
        if (y == 0.0) {
            root = w;
        } else if (last && (last->second > 0.0) != (y > 0.0) && last->second != 0.0) {
            root = refine_real_crossing(f, first_cell_start(f, last->first, w, last->second), w);
        }
        last = {w, y};
        if (!root) {
            continue;
        }
        if (const auto at = f(*root)) {
            out.push_back({*root, std::abs(at->h.real())});
        }
    }
    return out;
}

std::vector<double> reduced_real_crossings(const ReducedSystem& red, double omega_max)
{
    if (red.B_V.cols() != 1 || red.C_V.rows() != 1) {
        throw DimensionError("real crossings need a single-input single-output system");
    }
    const auto r = red.r();
    // F(s) = H(s) + conj(c) (sI + conj(A))^{-1} conj(b) equals 2i Im H(iw) on the
    // axis; its zeros are the finite eigenvalues of the Rosenbrock pencil
    // [[Ah, bh], [ch, 0]] - s diag(I, 0), solved through the real embedding
    // (which adds the conjugate eigenvalues; candidates are verified below).
    const auto k = 2 * r + 1;
    ComplexMatrix M = ComplexMatrix::Zero(k, k);
    M.topLeftCorner(r, r) = red.A_V;
    M.block(r, r, r, r) = -red.A_V.conjugate();
    M.block(0, 2 * r, r, 1) = red.B_V;
    M.block(r, 2 * r, r, 1) = red.B_V.conjugate();
    M.block(2 * r, 0, 1, r) = red.C_V;
    M.block(2 * r, r, 1, r) = red.C_V.conjugate();
    DenseMatrix Mr(2 * k, 2 * k);
    Mr << M.real(), -M.imag(), M.imag(), M.real();
    DenseMatrix Nr = DenseMatrix::Zero(2 * k, 2 * k);
    Nr.topLeftCorner(2 * r, 2 * r).setIdentity();
    Nr.block(k, k, 2 * r, 2 * r).setIdentity();
    Eigen::GeneralizedEigenSolver<DenseMatrix> qz(Mr, Nr, false);
    if (qz.info() != Eigen::Success) {
        return {};
    }
    const double scale = std::max(1.0, Mr.cwiseAbs().maxCoeff());
    std::vector<double> seeds;
    for (Eigen::Index i = 0; i < 2 * k; ++i) {
        const double beta = qz.betas()(i);
        if (std::abs(beta) <= kInfiniteBeta * scale) {
            continue;
        }
        const Complex z = qz.alphas()(i) / beta;
        const double w = std::abs(z.imag());
        if (std::abs(z.real()) <= kOnAxis * std::max(1.0, std::abs(z)) && w > 0.0
            && w <= omega_max) {
            seeds.push_back(w);
        }
    }

    // polish each candidate with Newton steps on Im H and keep verified roots
    std::vector<double> out;
    for (double w : seeds) {
        bool ok = false;
        for (int it = 0; it < 50; ++it) {
            TransferSample s;
            try {
                s = eval_reduced_transfer(red, w, 2);
            } catch (const DegenerateReductionError&) {
                break;
            }
            const Complex h = s.H0(0, 0);
            const double dh = (*s.H1)(0, 0).imag();
            if (std::abs(h.imag()) <= kCrossingResidual * std::abs(h)) {
                ok = true;
            }
            if (dh == 0.0) {
                break;
            }
            const double step = h.imag() / dh;
            w -= step;
            if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) {
                break;
            }
        }
        if (ok && w > 0.0 && w <= omega_max) {
            out.push_back(w);
        }
    }
    // the embedding doubles every eigenvalue, and seeds may polish to one root
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return b - a <= kSameRoot * b; }),
              out.end());
    return out;
}

OuterMaximum maximize_real_crossing(const ScalarObjective& f, double omega_max,
                                    const SolverConfig& cfg)
{
    std::optional<OuterMaximum> out;
    // the full system is real at w = 0
    if (const auto at0 = f(0.0)) {
        out = OuterMaximum{0.0, std::abs(at0->h.real())};
    }
    for (const auto& c : grid_real_crossings(f, omega_max, cfg.coarse_samples)) {
        if (!out || c.mu > out->mu) {
            out = c;
        }
    }
    if (!out) {
        throw OptimizerStarvedError("every frequency sample was degenerate");
    }
    return *out;
}

namespace {

// One accepted iterate: where mu was attained and its value there.
struct Iterate {
    double omega = 0.0;
    double mu = 0.0;
    double gamma = 1.0;
    MuCase mu_case = MuCase::interior;
};

// Everything that differs between the general mu iteration and the
// real-crossing iteration of single-input single-output systems.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual double initial_omega() const = 0;
    virtual OuterMaximum search(const ReducedSystem& red) const = 0;
    virtual Iterate at_absorbed(const ReducedSystem& red, double omega) const = 0;
};

class MuStrategy : public Strategy {
public:
    MuStrategy(const StateSpaceSystem& sys, const SolverConfig& cfg, double omega_max)
        : sys_(sys), cfg_(cfg), opt_(cfg.mu_options()), omega_max_(omega_max)
    {
    }

    double initial_omega() const override
    {
        const int N = std::max(cfg_.coarse_samples / 10, 2);
        double best = -1.0;
        double omega = 0.0;
        // w = 0 is left to the anchor: H(0) is real, mu jumps there, and
        // Hermite data at that isolated point says nothing about the smooth
        // branch nearby.
        const int first = cfg_.anchor_zero ? 1 : 0;
        for (int i = first; i < N; ++i) {
            const double w = omega_max_ * static_cast<double>(i) / (N - 1);
            const double mu = mu_of(eval_transfer(sys_, w, 1), opt_).mu;
            if (mu > best) {
                best = mu;
                omega = w;
            }
        }
        return omega;
    }

    OuterMaximum search(const ReducedSystem& red) const override
    {
        auto objective = [&](double w) -> std::optional<MuPoint> {
            TransferSample s;
            try {
                s = eval_reduced_transfer(red, w, 2);
            } catch (const DegenerateReductionError&) {
                return std::nullopt;
            }
            const auto ev = mu_of(s, opt_);
            MuPoint pt{ev.mu, std::nullopt};
            try {
                pt.slope = mu_derivative(s, ev, opt_);
            } catch (const NonsmoothPointError&) {
            }
            return pt;
        };
        return maximize_mu(objective, omega_max_, cfg_);
    }

    Iterate at_absorbed(const ReducedSystem& red, double omega) const override
    {
        const auto e = mu_at_absorbed(sys_, red, omega, opt_);
        return {omega, e.ev.mu, e.ev.gamma_star, e.ev.mu_case};
    }

private:
    const StateSpaceSystem& sys_;
    const SolverConfig& cfg_;
    MuOptions opt_;
    double omega_max_;
};

class CrossingStrategy : public Strategy {
public:
    CrossingStrategy(const StateSpaceSystem& sys, const SolverConfig& cfg, double omega_max)
        : sys_(sys), cfg_(cfg), opt_(cfg.mu_options()), omega_max_(omega_max)
    {
    }

    double initial_omega() const override
    {
        // best crossing of the full response off w = 0 (the anchor covers 0);
        // when the grid sees none, the peak of |H|, which bounds every crossing
        const int N = cfg_.coarse_samples;
        const ScalarObjective full = [&](double w) -> std::optional<ScalarResponse> {
            const auto s = eval_transfer(sys_, w, 2);
            return ScalarResponse{s.H0(0, 0), (*s.H1)(0, 0)};
        };
        const auto crossings = grid_real_crossings(full, omega_max_, N);
        if (!crossings.empty()) {
            return std::max_element(crossings.begin(), crossings.end(),
                                    [](const auto& a, const auto& b) { return a.mu < b.mu; })
                ->omega;
        }
        double best = -1.0, omega = omega_max_;
        for (int i = 1; i < N; ++i) {
            const double w = omega_max_ * static_cast<double>(i) / (N - 1);
            const double h = std::abs(eval_transfer(sys_, w, 1).H0(0, 0));
            if (h > best) {
                best = h;
                omega = w;
            }
        }
        return omega;
    }

    OuterMaximum search(const ReducedSystem& red) const override
    {
        const auto f = response(red);
        OuterMaximum best = maximize_real_crossing(f, omega_max_, cfg_);
        for (double w : reduced_real_crossings(red, omega_max_)) {
            if (const auto at = f(w); at && std::abs(at->h.real()) > best.mu) {
                best = {w, std::abs(at->h.real())};
            }
        }
        return best;
    }

    Iterate at_absorbed(const ReducedSystem& red, double omega) const override
    {
        if (omega == 0.0) {
            const auto e = mu_at_absorbed(sys_, red, 0.0, opt_);
            return {0.0, e.ev.mu, e.ev.gamma_star, e.ev.mu_case};
        }
        // the expanded model interpolates H at w; re-solve its crossing next to w
        const auto f = response(red);
        const double h = omega_max_ / (cfg_.coarse_samples - 1);
        std::optional<double> root;
        for (double width = 1e-6 * h; width <= h && !root; width *= 10.0) {
            root = refine_real_crossing(f, std::max(0.0, omega - width), omega + width);
        }
        if (root) {
            if (const auto at = f(*root)) {
                return {*root, std::abs(at->h.real()), 1.0, MuCase::real_part_only};
            }
        }
        const auto e = mu_at_absorbed(sys_, red, omega, opt_);
        return {omega, e.ev.mu, e.ev.gamma_star, e.ev.mu_case};
    }

private:
    ScalarObjective response(const ReducedSystem& red) const
    {
        return [&red](double w) -> std::optional<ScalarResponse> {
            try {
                const auto s = eval_reduced_transfer(red, w, 2);
                return ScalarResponse{s.H0(0, 0), (*s.H1)(0, 0)};
            } catch (const DegenerateReductionError&) {
                return std::nullopt;
            }
        };
    }

    const StateSpaceSystem& sys_;
    const SolverConfig& cfg_;
    MuOptions opt_;
    double omega_max_;
};

} // namespace

SolverTrace compute_radius_traced(const StateSpaceSystem& sys, const SolverConfig& cfg)
{
    cfg.validate();
    const double omega_max = resolve_omega_max(sys, cfg.omega_max);
    std::unique_ptr<Strategy> strategy;
    if (sys.m() == 1 && sys.p() == 1) {
        strategy = std::make_unique<CrossingStrategy>(sys, cfg, omega_max);
    } else {
        strategy = std::make_unique<MuStrategy>(sys, cfg, omega_max);
    }

    SolverTrace trace;
    RadiusResult& res = trace.result;
    auto t0 = Clock::now();

    const double omega = cfg.init_strategy == InitStrategy::coarse_grid_argmax
                             ? strategy->initial_omega()
                             : cfg.user_omega;

    SubspaceBasis basis = empty_basis(sys.n(), cfg.rank_tol);
    std::vector<double> seeds;
    if (cfg.anchor_zero && omega != 0.0) {
        seeds.push_back(0.0);
    }
    seeds.push_back(omega);
    for (double w : seeds) {
        basis = extend_orthonormal(std::move(basis), expansion_block(sys, w), w);
    }
    ReducedSystem red = project(sys, basis);

    auto record = [&](int k, double w, const Iterate& it) {
        IterationRecord rec;
        rec.k = k;
        rec.omega_next = w;
        rec.gamma_at_opt = it.gamma;
        rec.mu_k = it.mu;
        rec.r_k = reciprocal(it.mu);
        rec.basis_dim = basis.dim();
        rec.mu_case = it.mu_case;
        return rec;
    };

    // k = 0 reports the best absorbed point
    std::optional<Iterate> current;
    double first_w = omega;
    for (double w : seeds) {
        const auto it = strategy->at_absorbed(red, w);
        if (!current || it.mu > current->mu) {
            current = it;
            first_w = w;
        }
    }
    {
        IterationRecord rec = record(0, first_w, *current);
        rec.wall_time = seconds_since(t0);
        rec.deflated = basis.last_dropped > 0;
        res.history.push_back(rec);
    }

    for (int k = 1;; ++k) {
        if (k > cfg.k_max) {
            res.converged = false;
            break;
        }
        t0 = Clock::now();
        const double w = strategy->search(red).omega;
        const IterationRecord& prev = res.history.back();

        if (basis.contains_point(w, cfg.refine_tol)) {
            // repeated maximizer: the subspace cannot change any more
            current = strategy->at_absorbed(red, w);
            IterationRecord rec = record(k, w, *current);
            rec.deflated = true;
            rec.wall_time = seconds_since(t0);
            const bool done = std::isfinite(rec.r_k) && std::isfinite(prev.r_k)
                              && check_termination(rec.r_k, prev.r_k, k, cfg)
                                     == Termination::converged;
            rec.note = done ? "repeated maximizer" : "stagnation: repeated maximizer";
            res.history.push_back(rec);
            res.converged = done;
            break;
        }

        const auto block = expansion_block(sys, w);
        basis = extend_orthonormal(std::move(basis), block, w);
        red = project(sys, basis);
        current = strategy->at_absorbed(red, w);
        IterationRecord rec = record(k, w, *current);
        rec.deflated = basis.last_dropped == block.cols();
        rec.wall_time = seconds_since(t0);
        if (rec.deflated) {
            rec.note = "expansion fully deflated";
        }
        res.history.push_back(rec);

        if (std::isfinite(rec.r_k) && std::isfinite(prev.r_k)
            && check_termination(rec.r_k, prev.r_k, k, cfg) == Termination::converged) {
            res.converged = true;
            break;
        }
    }

    res.omega_star = current->omega;
    res.gamma_star = current->gamma;
    res.mu_star = current->mu;
    res.radius = reciprocal(current->mu);
    if (res.omega_star >= 0.99 * omega_max) {
        std::ostringstream os;
        os << "maximizer w = " << res.omega_star << " lies within 1% of omega_max = " << omega_max
           << "; consider a larger --omega-max";
        res.notes.push_back(os.str());
    }
    trace.basis = std::move(basis);
    return trace;
}

RadiusResult compute_radius(const StateSpaceSystem& sys, const SolverConfig& cfg)
{
    return compute_radius_traced(sys, cfg).result;
}

} // namespace rstab
