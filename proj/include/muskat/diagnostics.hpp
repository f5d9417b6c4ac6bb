#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "muskat/integrator.hpp"
#include "muskat/model.hpp"

namespace muskat {

/// Weighted energy of a state: instantaneous part
/// |d(1/Z)|_2^2 + |D^2(1/Z)|_2^2 with D = (1/Z_{,a'}) d/da', plus the
/// dissipation integrand 2 |(1/Z) D^2(1/Z)|_{H^{1/2}}^2 that the caller
/// accumulates in time with the trapezoid rule.
struct EnergyM {
    double instantaneous = 0.0;
    double dissipation_integrand = 0.0;
};

inline EnergyM energy_M(const ZFormState& z) {
    if (z.min_abs_zap() < 1e-8)
        throw std::runtime_error("energy_M: |Z_{,a'}| too close to zero");
    const SpectralField& u = z.inv_zap;
    SpectralField du = derivative(u);
    SpectralField d2u = multiply(u, derivative(multiply(u, du)));
    const double inst =
        norm_l2(du) * norm_l2(du) + norm_l2(d2u) * norm_l2(d2u);
    const double diss = norm_hhalf(multiply(u, d2u));
    return {inst, 2.0 * diss * diss};
}

/// Boundary form of the first-tier energy; identical to the instantaneous
/// part of energy_M by construction.
inline double energy_M1(const ZFormState& z) {
    return energy_M(z).instantaneous;
}

/// The same form evaluated on the harmonic extension at Im z' = depth < 0;
/// the boundary value should dominate the interior samples.
inline double energy_M1_interior(const ZFormState& z, double depth) {
    SpectralField u = poisson_extend(z.inv_zap, depth);
    ZFormState zd{u, pointwise_reciprocal(u), z.z_minus_id, z.time};
    return energy_M1(zd);
}

/// One row of the per-snapshot diagnostics series.
struct DiagnosticsRecord {
    double time = 0.0;
    double M_instantaneous = 0.0;
    double M_dissipation_accum = 0.0;
    double M_total = 0.0;
    double M1 = 0.0;
    std::vector<double> E_n; // H^n norms of g, one per requested order
    double hhalf_g = 0.0;
    double cons_residual = 0.0; // zero at the series endpoints
    double g_min = 0.0, g_max = 0.0, f_max = 0.0;
    double B1_min = 0.0;
    double min_inv_zap = 0.0;
};

namespace detail {

inline ZFormState to_zform(const GFormState& s) { return g_to_z(s); }
inline const ZFormState& to_zform(const ZFormState& z) { return z; }
inline SpectralField to_gfield(const GFormState& s) { return s.g; }
inline SpectralField to_gfield(const ZFormState& z) { return z_to_g(z).g; }

} // namespace detail

/// Quantity conserved up to the identity terms: int |Z_{,a'}|^2 g^2 da'.
inline double weighted_g_square(const GFormState& s) {
    SpectralField c = compute_c(s);
    SpectralField zap_abs2 =
        c.map_values([](Complex v) { return 1.0 / (v * v); }, true);
    return integral_real(multiply(zap_abs2, multiply(s.g, s.g)));
}

/// Signed residual of the exact law
/// d/dt int |Z_{,a'}|^2 g^2 + int |Z_{,a'}|^2 g^2 B1 + 2 |g|_{H^{1/2}}^2 = 0
/// at the middle snapshot, with a three-point difference for d/dt and
/// normalization by max(1, 2 |g|_{H^{1/2}}^2). Valid for eps = delta = 0 runs.
inline double conservation_residual(const GFormState& prev,
                                    const GFormState& mid,
                                    const GFormState& next) {
    const double t0 = prev.time, t1 = mid.time, t2 = next.time;
    const double q0 = weighted_g_square(prev);
    const double q1 = weighted_g_square(mid);
    const double q2 = weighted_g_square(next);
    const double dqdt = q0 * (t1 - t2) / ((t0 - t1) * (t0 - t2)) +
                        q1 * (2.0 * t1 - t0 - t2) / ((t1 - t0) * (t1 - t2)) +
                        q2 * (t1 - t0) / ((t2 - t0) * (t2 - t1));
    ZFormState z = g_to_z(mid);
    SpectralField c = compute_c(mid);
    SpectralField zap_abs2 =
        c.map_values([](Complex v) { return 1.0 / (v * v); }, true);
    SpectralField b1 = compute_B1(z.inv_zap);
    const double middle =
        integral_real(multiply(zap_abs2, multiply(multiply(mid.g, mid.g), b1)));
    const double hh = norm_hhalf(mid.g);
    const double twin = 2.0 * hh * hh;
    return (dqdt + middle + twin) / std::max(1.0, twin);
}

/// Full per-snapshot series. For z trajectories g is recovered through the
/// log branch; sobolev_orders selects which H^n norms of g to record.
template <typename State>
inline std::vector<DiagnosticsRecord>
diagnostics_series(const Trajectory<State>& traj,
                   const std::vector<double>& sobolev_orders = {1.0, 2.0}) {
    std::vector<DiagnosticsRecord> out;
    out.reserve(traj.states.size());
    double diss_accum = 0.0;
    double prev_integrand = 0.0;
    std::vector<GFormState> gstates;
    gstates.reserve(traj.states.size());
    for (size_t i = 0; i < traj.states.size(); ++i) {
        const State& s = traj.states[i];
        ZFormState z = detail::to_zform(s);
        GFormState gs{detail::to_gfield(s), z.time};
        gstates.push_back(gs);
        EnergyM em = energy_M(z);
        if (i > 0) {
            const double dt = z.time - out.back().time;
            diss_accum +=
                0.5 * dt * (prev_integrand + em.dissipation_integrand);
        }
        prev_integrand = em.dissipation_integrand;

        DiagnosticsRecord rec;
        rec.time = z.time;
        rec.M_instantaneous = em.instantaneous;
        rec.M_dissipation_accum = diss_accum;
        rec.M_total = em.instantaneous + diss_accum;
        rec.M1 = em.instantaneous;
        for (double nu : sobolev_orders)
            rec.E_n.push_back(norm_hs(gs.g, nu));
        rec.hhalf_g = norm_hhalf(gs.g);
        rec.g_min = gs.g.min_real();
        rec.g_max = gs.g.max_real();
        rec.f_max = gs.f().max_real();
        SpectralField b1 = compute_B1(z.inv_zap);
        rec.B1_min = b1.min_real();
        rec.min_inv_zap = 1e300;
        for (const auto& v : z.inv_zap.values())
            rec.min_inv_zap = std::min(rec.min_inv_zap, std::abs(v));
        out.push_back(std::move(rec));
    }
    for (size_t i = 1; i + 1 < out.size(); ++i)
        out[i].cons_residual =
            conservation_residual(gstates[i - 1], gstates[i], gstates[i + 1]);
    return out;
}

/// One detected breach of the pointwise monotonicity of min g, max g, max f.
struct MaxPrincipleViolation {
    size_t step = 0;         // index of the later snapshot
    std::string kind;        // "g_min", "g_max" or "f_max"
    double magnitude = 0.0;  // breach beyond the slack
};

/// Slack-tolerant monotonicity scan; scheme_order sets the per-step slack
/// 10 (machine eps + dt^{order+1}). Meaningful only for eps = delta = 0.
template <typename State>
inline std::vector<MaxPrincipleViolation>
max_principle_monitor(const Trajectory<State>& traj, int scheme_order = 4) {
    std::vector<MaxPrincipleViolation> out;
    const size_t m = traj.states.size();
    if (m < 2) return out;
    double gmin = 0, gmax = 0, fmax = 0;
    for (size_t i = 0; i < m; ++i) {
        SpectralField g = detail::to_gfield(traj.states[i]);
        GFormState gs{g, 0.0};
        const double cur_min = g.min_real();
        const double cur_max = g.max_real();
        const double cur_f = gs.f().max_real();
        if (i > 0) {
            const double dt = traj.states[i].time - traj.states[i - 1].time;
            const double slack =
                10.0 * (std::numeric_limits<double>::epsilon() +
                        std::pow(dt, scheme_order + 1));
            if (cur_min < gmin - slack)
                out.push_back({i, "g_min", gmin - slack - cur_min});
            if (cur_max > gmax + slack)
                out.push_back({i, "g_max", cur_max - gmax - slack});
            if (cur_f > fmax + slack)
                out.push_back({i, "f_max", cur_f - fmax - slack});
        }
        gmin = cur_min;
        gmax = cur_max;
        fmax = cur_f;
    }
    return out;
}

/// Pointwise rotation diagnostics along tracked characteristics.
struct RigidityReport {
    std::vector<double> times;
    std::vector<double> tip_location;       // h(a0, t)
    std::vector<Complex> tip_velocity;      // Z_t at the tracked tip
    std::vector<double> tip_dinv;           // |(1/Z')d(1/Z')| at the tip
    std::vector<double> angle_jump;         // g across comoving offsets
    std::vector<double> identity_residual;  // max over tracked points
    std::vector<double> min_inv_zap;
};

namespace detail {

// Cumulative integral of samples q at uniform times, fourth order:
// per-interval increments from the cubic through four neighbouring nodes.
inline std::vector<double> cumulative_integral(const std::vector<double>& t,
                                               const std::vector<double>& q) {
    const size_t m = t.size();
    std::vector<double> acc(m, 0.0);
    for (size_t i = 0; i + 1 < m; ++i) {
        const double dt = t[i + 1] - t[i];
        double inc;
        if (m < 4) {
            inc = 0.5 * dt * (q[i] + q[i + 1]);
        } else if (i == 0) {
            inc = dt * (9.0 * q[0] + 19.0 * q[1] - 5.0 * q[2] + q[3]) / 24.0;
        } else if (i + 2 == m) {
            inc = dt *
                  (9.0 * q[m - 1] + 19.0 * q[m - 2] - 5.0 * q[m - 3] +
                   q[m - 4]) /
                  24.0;
        } else {
            inc = dt *
                  (-q[i - 1] + 13.0 * q[i] + 13.0 * q[i + 1] - q[i + 2]) /
                  24.0;
        }
        acc[i + 1] = acc[i] + inc;
    }
    return acc;
}

} // namespace detail

/// Verify the rotation identity
///   omega(h(a,t), t) = omega(a, 0) exp{i int_0^t Re(u conj(du))(h(a,s),s) ds}
/// with u = 1/Z_{,a'}. The exponent integrand equals Im(Z_{t,a'}/Z_{,a'})
/// and, pointwise, -c^2 |d/da'| g, the material derivative of the tangent
/// angle. Tracked along the characteristics seeded at tip_alpha and at
/// tip_alpha +- each offset, plus any extra seeds. Also tracks tip velocity,
/// |u du| at the tip and the angle jump of g across the comoving offsets.
template <typename State>
inline RigidityReport rigidity_check(const Trajectory<State>& traj,
                                     double tip_alpha,
                                     const std::vector<double>& offsets,
                                     const std::vector<double>& extra_seeds =
                                         {}) {
    std::vector<double> seeds{tip_alpha};
    for (double s : offsets) {
        seeds.push_back(tip_alpha - s);
        seeds.push_back(tip_alpha + s);
    }
    for (double s : extra_seeds) seeds.push_back(s);
    std::vector<double> sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    ParticleFlow flow = particle_flow(traj, sorted);
    // index of each requested seed within the sorted flow
    std::vector<size_t> where(seeds.size());
    for (size_t p = 0; p < seeds.size(); ++p)
        where[p] = std::lower_bound(sorted.begin(), sorted.end(), seeds[p]) -
                   sorted.begin();

    const size_t m = traj.states.size();
    std::vector<ZFormState> zs;
    std::vector<SpectralField> du;
    std::vector<SpectralField> gf;
    zs.reserve(m);
    du.reserve(m);
    gf.reserve(m);
    for (const auto& s : traj.states) {
        zs.push_back(detail::to_zform(s));
        du.push_back(derivative(zs.back().inv_zap));
        gf.push_back(detail::to_gfield(s));
    }

    auto omega_at = [&](size_t i, double x) {
        Complex z = zs[i].zap.evaluate(x);
        return z / std::abs(z);
    };

    RigidityReport rep;
    rep.times = flow.times;
    std::vector<std::vector<double>> resid(seeds.size());
    for (size_t p = 0; p < seeds.size(); ++p) {
        std::vector<double> q(m);
        for (size_t i = 0; i < m; ++i) {
            const double x = flow.positions[i][where[p]];
            const Complex u = zs[i].inv_zap.evaluate(x);
            const Complex d = du[i].evaluate(x);
            q[i] = (u * std::conj(d)).real();
        }
        std::vector<double> I = detail::cumulative_integral(flow.times, q);
        const Complex w0 = omega_at(0, seeds[p]);
        resid[p].resize(m);
        for (size_t i = 0; i < m; ++i) {
            const double x = flow.positions[i][where[p]];
            const Complex pred = w0 * std::exp(Complex(0.0, I[i]));
            resid[p][i] = std::abs(omega_at(i, x) - pred);
        }
    }

    const double sig = offsets.empty() ? 0.0 : offsets.back();
    for (size_t i = 0; i < m; ++i) {
        const double tip = flow.positions[i][where[0]];
        rep.tip_location.push_back(tip);
        SpectralField zt = darcy_velocity(zs[i]);
        rep.tip_velocity.push_back(zt.evaluate(tip));
        const Complex u = zs[i].inv_zap.evaluate(tip);
        rep.tip_dinv.push_back(std::abs(u * du[i].evaluate(tip)));
        if (sig > 0.0) {
            const double xm = flow.positions[i][where[1]];
            const double xp = flow.positions[i][where[2]];
            rep.angle_jump.push_back(gf[i].evaluate(xp).real() -
                                     gf[i].evaluate(xm).real());
        } else {
            rep.angle_jump.push_back(0.0);
        }
        double r = 0.0;
        for (size_t p = 0; p < seeds.size(); ++p)
            r = std::max(r, resid[p][i]);
        rep.identity_residual.push_back(r);
        double mi = 1e300;
        for (const auto& v : zs[i].inv_zap.values())
            mi = std::min(mi, std::abs(v));
        rep.min_inv_zap.push_back(mi);
    }
    return rep;
}

/// Difference-of-runs energy machinery. Run b is compared to run a after
/// the reparametrization htilde = h_b o h_a^{-1}.
struct DifferencePair {
    std::vector<double> times;
    std::vector<std::vector<double>> htilde; // per time, at the grid nodes
    std::vector<double> E;                   // full energy series
    std::vector<double> hhalf_term;          // first term of E
    std::vector<double> integral_accum;      // running integral term
    double initial_term = 0.0;               // frozen t = 0 contribution
    std::vector<double> F;                   // running sup of E
    double ratio_F = 0.0;                    // F(end) / max(F(0), floor)
};

namespace detail {

/// Monotone cubic (Fritsch-Carlson) interpolant through (x_k, y_k),
/// x strictly increasing; used to invert the flow map.
class MonotoneCubic {
  public:
    MonotoneCubic(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
        const size_t n = x_.size();
        std::vector<double> d(n - 1);
        for (size_t k = 0; k + 1 < n; ++k)
            d[k] = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (size_t k = 1; k + 1 < n; ++k) {
            if (d[k - 1] * d[k] <= 0.0)
                m_[k] = 0.0;
            else
                m_[k] = 2.0 * d[k - 1] * d[k] / (d[k - 1] + d[k]);
        }
    }

    double operator()(double x) const {
        size_t k = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
        k = std::min(std::max<size_t>(k, 1), x_.size() - 1) - 1;
        const double h = x_[k + 1] - x_[k];
        const double t = (x - x_[k]) / h;
        const double t2 = t * t, t3 = t2 * t;
        return y_[k] * (2 * t3 - 3 * t2 + 1) + h * m_[k] * (t3 - 2 * t2 + t) +
               y_[k + 1] * (-2 * t3 + 3 * t2) + h * m_[k + 1] * (t3 - t2);
    }

  private:
    std::vector<double> x_, y_, m_;
};

/// Periodic deviation field h - id from flow samples at the grid nodes.
inline SpectralField flow_deviation(const Grid& grid,
                                    const std::vector<double>& h) {
    std::vector<double> v(grid.size());
    for (int j = 0; j < grid.size(); ++j) v[j] = h[j] - grid.node(j);
    return SpectralField::from_real_values(grid, v);
}

/// Invert a monotone flow map given at the grid nodes: returns alpha with
/// h(alpha) = x for each grid node x. Monotone cubic initial guess, then
/// Newton on the trigonometric interpolant of h - id.
inline std::vector<double> invert_flow(const Grid& grid,
                                       const std::vector<double>& h) {
    const int n = grid.size();
    SpectralField dev = flow_deviation(grid, h);
    SpectralField ddev = derivative(dev);
    // wrapped node/value table covering one full period plus guards
    std::vector<double> xs, ys;
    xs.reserve(n + 3);
    ys.reserve(n + 3);
    xs.push_back(h[n - 1] - two_pi);
    ys.push_back(grid.node(n - 1) - two_pi);
    for (int j = 0; j < n; ++j) {
        xs.push_back(h[j]);
        ys.push_back(grid.node(j));
    }
    xs.push_back(h[0] + two_pi);
    ys.push_back(grid.node(0) + two_pi);
    xs.push_back(h[1] + two_pi);
    ys.push_back(grid.node(1) + two_pi);
    for (size_t k = 0; k + 1 < xs.size(); ++k)
        if (!(xs[k + 1] > xs[k]))
            throw std::runtime_error("invert_flow: map is not increasing");
    MonotoneCubic guess(xs, ys);
    std::vector<double> out(n);
    for (int j = 0; j < n; ++j) {
        const double x = grid.node(j);
        // bring x into the covered range by periodic shifts
        double shift = 0.0;
        while (x + shift < xs.front()) shift += two_pi;
        while (x + shift > xs.back()) shift -= two_pi;
        double a = guess(x + shift) - shift;
        for (int it = 0; it < 50; ++it) {
            const double r = a + dev.evaluate(a).real() - x;
            if (std::abs(r) < 1e-14) break;
            const double dr = 1.0 + ddev.evaluate(a).real();
            a -= r / dr;
        }
        out[j] = a;
    }
    return out;
}

} // namespace detail

/// Build the reparametrized difference f_a - f_b o htilde on the grid of a.
inline SpectralField reparametrized_difference(
    const SpectralField& fa, const SpectralField& fb,
    const std::vector<double>& htilde) {
    const int n = fa.size();
    std::vector<Complex> v(n);
    for (int j = 0; j < n; ++j)
        v[j] = fa.value(j) - fb.evaluate(htilde[j]);
    return SpectralField::from_values(fa.grid(), std::move(v),
                                      fa.is_real() && fb.is_real());
}

/// Difference energy between two runs sharing grid and time stamps:
/// E(t) = |Delta(1/Z')|_{H^{1/2}}^2 (t)
///      + |Delta(1/Z')(., 0)|_{Linf cap H^{1/2}}^2
///      + int_0^t |Delta((1/Z') d(1/Z'))|_2^2 ds,
/// with Delta(f) = f_a - f_b o htilde, htilde = h_b o h_a^{-1}.
/// The intersection norm is taken as the sum of the two norms. F is the
/// running sup of E and ratio_F = F(end)/max(F(0), 1e-30).
template <typename StateA, typename StateB>
inline DifferencePair difference_energy(const Trajectory<StateA>& run_a,
                                        const Trajectory<StateB>& run_b) {
    const size_t m = run_a.states.size();
    if (run_b.states.size() != m)
        throw std::invalid_argument("difference_energy: length mismatch");
    DifferencePair out;
    std::vector<ZFormState> za, zb;
    za.reserve(m);
    zb.reserve(m);
    for (size_t i = 0; i < m; ++i) {
        za.push_back(detail::to_zform(run_a.states[i]));
        zb.push_back(detail::to_zform(run_b.states[i]));
        if (std::abs(za.back().time - zb.back().time) > 1e-10)
            throw std::invalid_argument("difference_energy: time mismatch");
        za.back().inv_zap.check_same_grid(zb.back().inv_zap);
    }
    const Grid& grid = za.front().inv_zap.grid();
    std::vector<double> nodes(grid.size());
    for (int j = 0; j < grid.size(); ++j) nodes[j] = grid.node(j);
    ParticleFlow fa = particle_flow(run_a, nodes);
    ParticleFlow fb = particle_flow(run_b, nodes);

    double accum = 0.0;
    double prev_integrand = 0.0;
    double prev_time = 0.0;
    double Fsup = 0.0;
    for (size_t i = 0; i < m; ++i) {
        std::vector<double> inv = detail::invert_flow(grid, fa.positions[i]);
        SpectralField devb = detail::flow_deviation(grid, fb.positions[i]);
        std::vector<double> ht(grid.size());
        for (int j = 0; j < grid.size(); ++j)
            ht[j] = inv[j] + devb.evaluate(inv[j]).real();
        for (int j = 0; j + 1 < grid.size(); ++j)
            if (!(ht[j + 1] > ht[j]))
                throw std::runtime_error(
                    "difference_energy: htilde is not increasing");
        SpectralField dzu = reparametrized_difference(za[i].inv_zap,
                                                      zb[i].inv_zap, ht);
        SpectralField Da =
            multiply(za[i].inv_zap, derivative(za[i].inv_zap));
        SpectralField Db =
            multiply(zb[i].inv_zap, derivative(zb[i].inv_zap));
        SpectralField dzD = reparametrized_difference(Da, Db, ht);
        const double integrand = norm_l2(dzD) * norm_l2(dzD);
        if (i == 0) {
            const double hh = norm_hhalf(dzu);
            out.initial_term = (dzu.max_abs() + hh) * (dzu.max_abs() + hh);
        } else {
            accum += 0.5 * (za[i].time - prev_time) *
                     (prev_integrand + integrand);
        }
        prev_integrand = integrand;
        prev_time = za[i].time;

        const double hh = norm_hhalf(dzu);
        const double E = hh * hh + out.initial_term + accum;
        Fsup = std::max(Fsup, E);
        out.times.push_back(za[i].time);
        out.htilde.push_back(std::move(ht));
        out.hhalf_term.push_back(hh * hh);
        out.integral_accum.push_back(accum);
        out.E.push_back(E);
        out.F.push_back(Fsup);
    }
    out.ratio_F = out.F.back() / std::max(out.F.front(), 1e-30);
    return out;
}

} // namespace muskat
