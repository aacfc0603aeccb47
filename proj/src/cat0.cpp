#include "kflow/cat0.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "kflow/geometry.hpp"
#include "kflow/metric.hpp"

namespace kflow {
namespace cat0 {
namespace {

using Vec = std::vector<double>;

double dist_h(const PeriodicGrid& g, const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s * g.spacing);
}

double dot_h(const PeriodicGrid& g, const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * g.spacing;
}

// Smallest enclosing ball of finitely many points in the flat dual chart.
// Core-set iterations locate the support, an equidistance solve polishes the
// center to machine precision.
struct Ball {
    Vec center;
    double radius = 0.0;
};

Ball min_enclosing_ball(const PeriodicGrid& grid, const std::vector<const Vec*>& pts) {
    const int N = int(pts.size());
    const int m = int(pts.front()->size());
    Vec z = *pts.front();

    auto radius_at = [&](const Vec& c) {
        double r = 0.0;
        for (const Vec* p : pts) r = std::max(r, dist_h(grid, c, *p));
        return r;
    };
    auto farthest = [&](const Vec& c) {
        int best = 0;
        double r = -1.0;
        for (int k = 0; k < N; ++k) {
            const double d = dist_h(grid, c, *pts[k]);
            if (d > r) {
                r = d;
                best = k;
            }
        }
        return best;
    };

    for (int k = 1; k <= 1500; ++k) {
        const Vec& f = *pts[farthest(z)];
        const double w = 1.0 / (k + 1.0);
        for (int i = 0; i < m; ++i) z[i] = (1.0 - w) * z[i] + w * f[i];
    }

    // polish: equidistant center over the near-support set
    double best_r = radius_at(z);
    for (int pass = 0; pass < 25; ++pass) {
        const double band = std::max(1e-12, 1e-4 * best_r);
        std::vector<int> support;
        for (int k = 0; k < N; ++k)
            if (dist_h(grid, z, *pts[k]) >= best_r - band) support.push_back(k);
        // dedupe identical points
        std::vector<int> uniq;
        for (int k : support) {
            bool dup = false;
            for (int j : uniq)
                if (dist_h(grid, *pts[k], *pts[j]) < 1e-14) dup = true;
            if (!dup) uniq.push_back(k);
        }
        if (uniq.size() <= 1) break;

        const int s = int(uniq.size());
        Eigen::MatrixXd M(s, s);
        Eigen::VectorXd b(s);
        for (int c = 0; c < s; ++c) M(0, c) = 1.0;
        b(0) = 1.0;
        const Vec& p0 = *pts[uniq[0]];
        for (int r = 1; r < s; ++r) {
            const Vec& pr = *pts[uniq[r]];
            for (int c = 0; c < s; ++c) {
                const Vec& pc = *pts[uniq[c]];
                Vec diff(pr.size());
                for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = pr[i] - p0[i];
                M(r, c) = 2.0 * dot_h(grid, pc, diff);
            }
            b(r) = dot_h(grid, pr, pr) - dot_h(grid, p0, p0);
        }
        Eigen::VectorXd lam = M.colPivHouseholderQr().solve(b);
        if (!lam.allFinite()) break;
        if (lam.minCoeff() < -1e-8) break; // center left the support face; keep iterate
        Vec cand(m, 0.0);
        for (int c = 0; c < s; ++c) {
            const Vec& pc = *pts[uniq[c]];
            for (int i = 0; i < m; ++i) cand[i] += lam(c) * pc[i];
        }
        const double r_cand = radius_at(cand);
        if (r_cand <= best_r + 1e-13) {
            const double moved = dist_h(grid, cand, z);
            z = cand;
            best_r = r_cand;
            if (moved < 1e-14) break;
        } else {
            break;
        }
    }
    return {std::move(z), radius_at(z)};
}

std::vector<SymplecticPotential> to_dual(const PotentialSequence& seq) {
    std::vector<SymplecticPotential> g;
    g.reserve(seq.items.size());
    for (const auto& u : seq.items) g.push_back(geometry::legendre(u));
    return g;
}

} // namespace

PotentialSequence::PotentialSequence(std::vector<KahlerPotential> xs, std::string tag)
    : items(std::move(xs)), metadata(std::move(tag)) {
    if (items.empty()) throw PreconditionViolated("PotentialSequence: empty");
    for (const auto& u : items) require_same_grid(items.front().grid, u.grid, "PotentialSequence");
}

double cat0_comparison_check(const KahlerPotential& p, const KahlerPotential& q,
                             const KahlerPotential& r, double lambda) {
    if (lambda < 0.0 || lambda > 1.0)
        throw PreconditionViolated("cat0_comparison_check: lambda outside [0,1]");
    const auto gp = geometry::legendre(p);
    const auto gq = geometry::legendre(q);
    const auto gr = geometry::legendre(r);
    std::vector<double> gs(gp.values.size());
    for (std::size_t i = 0; i < gs.size(); ++i)
        gs[i] = (1.0 - lambda) * gq.values[i] + lambda * gr.values[i];
    const auto& grid = p.grid;
    const double dps = dist_h(grid, gp.values, gs);
    const double dpr = dist_h(grid, gp.values, gr.values);
    const double dpq = dist_h(grid, gp.values, gq.values);
    const double dqr = dist_h(grid, gq.values, gr.values);
    return dps * dps -
           (lambda * dpr * dpr + (1.0 - lambda) * dpq * dpq - lambda * (1.0 - lambda) * dqr * dqr);
}

AsymptoticCenter asymptotic_center(const PotentialSequence& seq, int tail_window,
                                   double unbounded_threshold) {
    const auto g = to_dual(seq);
    const int N = int(g.size());
    for (int k = 0; k < N; ++k)
        if (dist_h(seq.items[0].grid, g[0].values, g[k].values) > unbounded_threshold)
            throw UnboundedSequence("asymptotic_center: tail distance exceeds " +
                                    std::to_string(unbounded_threshold));

    int window = tail_window > 0 ? std::min(tail_window, N) : (N + 1) / 2;
    std::vector<const std::vector<double>*> pts;
    for (int k = N - window; k < N; ++k) pts.push_back(&g[k].values);

    auto ball = min_enclosing_ball(seq.items[0].grid, pts);
    SymplecticPotential gc(seq.items[0].grid, std::move(ball.center));
    return {geometry::inverse_legendre(gc), ball.radius};
}

bool weak_d2_limit_check(const PotentialSequence& seq, const KahlerPotential& candidate,
                         int n_subseq, double weak_tol) {
    require_same_grid(seq.items[0].grid, candidate.grid, "weak_d2_limit_check");
    const int N = int(seq.items.size());
    struct Rule {
        int stride, offset, drop;
    };
    const Rule rules[] = {{1, 0, 0}, {2, 0, 0}, {2, 1, 0}, {3, 0, 0}, {1, 0, N / 2}, {1, 0, N / 4}};
    const int n_rules = std::min<int>(n_subseq, 6);

    for (int r = 0; r < n_rules; ++r) {
        std::vector<KahlerPotential> sub;
        for (int k = rules[r].drop + rules[r].offset; k < N; k += rules[r].stride)
            sub.push_back(seq.items[k]);
        if (sub.size() < 2) continue;
        PotentialSequence s(std::move(sub), seq.metadata + "/sub" + std::to_string(r));
        const auto ac = asymptotic_center(s);
        if (metric::dp(ac.center, candidate, 2.0) > weak_tol) return false;
    }
    return true;
}

bool d1_ball_convexity_check(const KahlerPotential& center, double rho, const KahlerPotential& v0,
                             const KahlerPotential& v1, const std::vector<double>& t_samples) {
    const auto gc = geometry::legendre(center);
    const auto g0 = geometry::legendre(v0);
    const auto g1 = geometry::legendre(v1);
    if (metric::dp_symplectic(g0, gc, 1.0) > rho + 1e-12 ||
        metric::dp_symplectic(g1, gc, 1.0) > rho + 1e-12)
        throw PreconditionViolated("d1_ball_convexity_check: endpoints outside the ball");
    const double slack = 10.0 * center.grid.spacing;
    for (double t : t_samples) {
        std::vector<double> gt(g0.values.size());
        for (std::size_t i = 0; i < gt.size(); ++i)
            gt[i] = (1.0 - t) * g0.values[i] + t * g1.values[i];
        if (metric::dp_symplectic(SymplecticPotential(center.grid, std::move(gt)), gc, 1.0) >
            rho + slack)
            return false;
    }
    return true;
}

Thm53Report thm53_check(const PotentialSequence& seq, const KahlerPotential& u, double conv_tol) {
    require_same_grid(seq.items[0].grid, u.grid, "thm53_check");
    const int N = int(seq.items.size());
    const int tail = std::max(1, N / 4);

    Thm53Report rep;
    rep.d1_tail = 0.0;
    rep.l1_tail = 0.0;
    for (int k = N - tail; k < N; ++k) {
        rep.d1_tail = std::max(rep.d1_tail, metric::dp(seq.items[k], u, 1.0));
        std::vector<double> diff(u.values.size());
        for (std::size_t i = 0; i < diff.size(); ++i)
            diff[i] = std::abs(seq.items[k].values[i] - u.values[i]);
        rep.l1_tail = std::max(rep.l1_tail, integrate(u.grid, diff));
    }
    rep.d1_converges = rep.d1_tail <= conv_tol;
    rep.l1_converges = rep.l1_tail <= conv_tol;
    rep.weak_converges = weak_d2_limit_check(seq, u);
    rep.biconditional_holds = rep.d1_converges == (rep.l1_converges && rep.weak_converges);
    return rep;
}

} // namespace cat0
} // namespace kflow
