#include "halfwave/evolution.hpp"

#include <cmath>
#include <complex>
#include <string>

#include "halfwave/spectral.hpp"

namespace halfwave {

namespace {

bool all_finite(const ComplexField& u) {
    for (const cplx& z : u.values)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

double peak_intensity(const ComplexField& u) {
    double m = 0.0;
    for (const cplx& z : u.values) m = std::max(m, std::norm(z));
    return m;
}

// Mass-weighted mean position, used to keep the concentrating bulk centered
// across regrids.
double mass_center(const ComplexField& u) {
    double m = 0.0, mx = 0.0;
    for (std::size_t j = 0; j < u.grid.n; ++j) {
        const double w = std::norm(u.values[j]);
        m += w;
        mx += w * u.grid.node(j);
    }
    return m > 0.0 ? mx / m : 0.0;
}

void validate(const EvolutionConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw ConfigError("evolution: dt must be positive");
    if (cfg.t_end == cfg.t_begin) throw ConfigError("evolution: empty time interval");
    if (!(cfg.cfl_safety > 0.0)) throw ConfigError("evolution: cfl_safety must be positive");
    if (cfg.snapshot_stride == 0) throw ConfigError("evolution: snapshot_stride must be >= 1");
    if (!(cfg.dt_min > 0.0)) throw ConfigError("evolution: dt_min must be positive");
    if (!(cfg.halt_ceiling > 1.0)) throw ConfigError("evolution: halt ceiling must exceed 1");
}

}  // namespace

ComplexField step(const ComplexField& u, double dt, double cfl_safety, bool linear_only) {
    const Grid& g = u.grid;
    const double peak2 = peak_intensity(u);
    if (!linear_only && std::abs(dt) * peak2 > cfl_safety * (1.0 + 1e-12))
        throw CflError("step: nonlinear phase rotation unresolved at dt = " +
                           std::to_string(dt) + ", admissible " +
                           std::to_string(cfl_safety / peak2),
                       cfl_safety / peak2);

    ComplexField w = u;
    auto half_rotation = [&](ComplexField& f) {
        if (linear_only) return;
        const std::vector<double> rho = dealiased_abs2(f);
        for (std::size_t j = 0; j < g.n; ++j)
            f.values[j] *= std::polar(1.0, 0.5 * dt * rho[j]);
    };

    half_rotation(w);
    std::vector<cplx> c = fft(w.values);
    for (std::size_t k = 0; k < g.n; ++k)
        c[k] *= std::polar(1.0, -dt * std::abs(g.wavenumber(k)));
    w.values = ifft(c);
    half_rotation(w);
    return w;
}

double concentration_scale(const ComplexField& u) {
    const double mass = norm_l2(u);
    const double hom = homogeneous_sobolev_norm(u, 0.5);
    if (hom == 0.0) return u.grid.box_length;
    return (mass * mass) / (hom * hom);
}

Trajectory evolve(const ComplexField& u0, const EvolutionConfig& cfg, const Observer& observer) {
    validate(cfg);
    if (!all_finite(u0)) throw NumericsError("evolve: initial state is not finite");

    const Grid& g = u0.grid;
    const double direction = cfg.t_end > cfg.t_begin ? 1.0 : -1.0;
    const double span = std::abs(cfg.t_end - cfg.t_begin);
    const double h_half_0 = sobolev_norm(u0, 0.5);

    Trajectory traj;
    ComplexField u = u0;
    double t = cfg.t_begin;
    double scale = 1.0;
    double shift = 0.0;

    auto record = [&] {
        traj.snapshots.emplace_back(t, u);
        traj.conserved_series.emplace_back(t, conserved(u));
        traj.frame_scales.push_back(scale);
        traj.frame_shifts.push_back(shift);
        if (observer) observer(t, u);
    };
    record();

    std::size_t since_snapshot = 0;
    while (direction * (cfg.t_end - t) > 1e-12 * span) {
        // blowup proxies: the physical H^(1/2) ceiling (frame homogeneous part
        // amplified by the accumulated zoom) or a collapsed admissible step
        const double mass2 = norm_l2(u);
        const double hom = homogeneous_sobolev_norm(u, 0.5);
        const double physical_h_half = std::sqrt(mass2 * mass2 + hom * hom / scale);
        if (physical_h_half > cfg.halt_ceiling * h_half_0) {
            traj.events.push_back({EvolutionEvent::Kind::blowup_halt, t, scale,
                                   "H^(1/2) ceiling exceeded"});
            traj.halted = true;
            break;
        }
        const double peak2 = peak_intensity(u);
        const double admissible = peak2 > 0.0 ? cfg.cfl_safety / peak2 : cfg.dt;
        if (admissible < cfg.dt_min) {
            traj.events.push_back({EvolutionEvent::Kind::blowup_halt, t, scale,
                                   "admissible time step below dt_min"});
            traj.halted = true;
            break;
        }

        if (cfg.rescale_trigger > 0.0) {
            const double lam_hat = concentration_scale(u);
            if (lam_hat < cfg.rescale_trigger * g.spacing()) {
                // magnify so the concentration length doubles its budget
                const double lambda0 = lam_hat / (2.0 * cfg.rescale_trigger * g.spacing());
                const double xc = mass_center(u);
                u = zoom(u, lambda0, xc, 0.0);
                // old frame coordinate = lambda0 * new + xc, so the physical
                // map composes as x = (scale*lambda0) * y + (scale*xc + shift)
                shift += scale * xc;
                scale *= lambda0;
                traj.events.push_back({EvolutionEvent::Kind::regrid, t, lambda0,
                                       "recentered at x = " + std::to_string(xc)});
                continue;  // re-evaluate halts on the new frame
            }
        }

        // frame step: base dt, CFL clamp, and no overshoot of t_end
        double dt_frame = std::min(cfg.dt, admissible);
        dt_frame = std::min(dt_frame, direction * (cfg.t_end - t) / scale);
        u = step(u, direction * dt_frame, cfg.cfl_safety, cfg.linear_only);
        t += direction * scale * dt_frame;

        if (!all_finite(u))
            throw CorruptStateError("evolve: state became non-finite at t = " + std::to_string(t),
                                    t, traj.snapshots.back().second);

        if (++since_snapshot == cfg.snapshot_stride) {
            since_snapshot = 0;
            record();
        }
    }

    traj.accumulated_scale = scale;
    traj.accumulated_shift = shift;
    if (since_snapshot != 0 || traj.snapshots.back().first != t) record();
    return traj;
}

}  // namespace halfwave
