#include "uslam/sim/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace uslam {
namespace {

// Quintic smoothstep and derivatives; zero first and second derivatives at
// both ends.
double qs(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
double qs_d(double x) {
    const double u = x * (1.0 - x);
    return 30.0 * u * u;
}
double qs_dd(double x) { return 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x); }
// \int_0^x qs; qs_i(1) = 1/2.
double qs_i(double x) { return x * x * x * x * (2.5 + x * (-3.0 + x)); }

double wrap_pi(double a) { return std::remainder(a, 2.0 * M_PI); }

Rotation yaw_rotation(double psi) {
    return Rotation(std::cos(0.5 * psi), 0.0, 0.0, std::sin(0.5 * psi));
}

struct Seg {
    double t0 = 0.0;
    double T = 0.0;
    double c0 = 0.0, c1 = 0.0;  // heading rate at start / end; equal when constant
    double psi0 = 0.0;
    Eigen::Vector2d p0 = Eigen::Vector2d::Zero();
};

double seg_heading(const Seg& s, double tau) {
    if (s.c0 == s.c1) return s.psi0 + s.c0 * tau;
    const double x = tau / s.T;
    return s.psi0 + s.c0 * tau + (s.c1 - s.c0) * s.T * qs_i(x);
}

double seg_rate(const Seg& s, double tau) {
    if (s.c0 == s.c1) return s.c0;
    return s.c0 + (s.c1 - s.c0) * qs(tau / s.T);
}

// Horizontal displacement tau into the segment at unit speed. Constant-rate
// segments are closed-form (straight line or circular arc); ramps use a fixed
// 512-interval composite Simpson rule, deterministic and accurate to ~1e-10
// over the few-second ramps used here.
Eigen::Vector2d seg_displacement_unit(const Seg& s, double tau) {
    if (tau <= 0.0) return Eigen::Vector2d::Zero();
    if (s.c0 == s.c1) {
        const double c = s.c0;
        if (c == 0.0) {
            return tau * Eigen::Vector2d(std::cos(s.psi0), std::sin(s.psi0));
        }
        const double psi1 = s.psi0 + c * tau;
        return Eigen::Vector2d(std::sin(psi1) - std::sin(s.psi0),
                               std::cos(s.psi0) - std::cos(psi1)) /
               c;
    }
    constexpr int kIntervals = 512;
    const double h = tau / kIntervals;
    auto f = [&s](double u) {
        const double psi = seg_heading(s, u);
        return Eigen::Vector2d(std::cos(psi), std::sin(psi));
    };
    Eigen::Vector2d acc = f(0.0) + f(tau);
    for (int i = 1; i < kIntervals; ++i) {
        acc += f(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return acc * (h / 3.0);
}

struct PathBuilder {
    std::vector<Seg> segs;
    double t = 0.0;
    double psi = 0.0;
    double rate = 0.0;
    Eigen::Vector2d p = Eigen::Vector2d::Zero();
    double speed = 1.0;

    void const_seg(double c, double T) {
        if (T <= 0.0) return;
        Seg s{t, T, c, c, psi, p};
        segs.push_back(s);
        p += speed * seg_displacement_unit(s, T);
        psi = seg_heading(s, T);
        rate = c;
        t += T;
    }

    // Heading rate ramps from the current rate to c1 over T.
    void ramp_seg(double c1, double T) {
        if (T <= 0.0) return;
        Seg s{t, T, rate, c1, psi, p};
        segs.push_back(s);
        p += speed * seg_displacement_unit(s, T);
        psi = seg_heading(s, T);
        rate = c1;
        t += T;
    }
};

// Lateral displacement of a ramp/const/ramp 180-degree turn entered at
// heading 0 with rate 0.
double turn_lateral(double speed, double c, double ramp_T) {
    PathBuilder b;
    b.speed = speed;
    b.ramp_seg(c, ramp_T);
    b.const_seg(c, M_PI / std::abs(c) - ramp_T);
    b.ramp_seg(0.0, ramp_T);
    return b.p.y() * (c > 0.0 ? 1.0 : -1.0);
}

// Rate magnitude whose 180-degree turn displaces the path laterally by
// exactly `spacing`, from a secant iteration on the quadrature-evaluated
// displacement.
double solve_turn_rate(double speed, double spacing, double ramp_T) {
    const double nominal = 2.0 * speed / spacing;  // semicircle of radius spacing/2
    double a = nominal;
    double b = 1.3 * nominal;
    double fa = turn_lateral(speed, a, ramp_T) - spacing;
    double fb = turn_lateral(speed, b, ramp_T) - spacing;
    for (int it = 0; it < 60 && std::abs(fb) > 1e-13 * spacing; ++it) {
        if (fb == fa) break;
        const double next = b - fb * (b - a) / (fb - fa);
        a = b;
        fa = fb;
        b = std::clamp(next, 0.5 * nominal, 2.0 * nominal);
        fb = turn_lateral(speed, b, ramp_T) - spacing;
    }
    return b;
}

void build_circles(const ConcentricCirclesSpec& c, double speed, double end, PathBuilder* b) {
    if (c.radii.empty()) throw InvalidSpec("concentric circles need at least one radius");
    for (double r : c.radii) {
        if (r <= 0.0) throw InvalidSpec("circle radius must be positive");
    }
    if (c.transition_s <= 0.0) throw InvalidSpec("transition time must be positive");
    b->p = c.center + Eigen::Vector2d(c.radii.front(), 0.0);
    b->psi = 0.5 * M_PI;
    for (std::size_t i = 0; b->t < end; ++i) {
        const std::size_t idx = std::min(i, c.radii.size() - 1);
        b->const_seg(speed / c.radii[idx], 2.0 * M_PI * c.radii[idx] / speed);
        if (b->t < end && i + 1 < c.radii.size()) {
            b->ramp_seg(speed / c.radii[i + 1], c.transition_s);
        }
    }
}

void build_lawnmower(const LawnmowerSpec& m, double speed, double end, PathBuilder* b) {
    if (m.lane_length <= 0.0 || m.spacing <= 0.0) {
        throw InvalidSpec("lawnmower lane length and spacing must be positive");
    }
    if (m.lanes < 2) throw InvalidSpec("lawnmower needs at least 2 lanes");
    const double ramp_T = 0.3 * M_PI * (0.5 * m.spacing) / speed;
    const double c_mag = solve_turn_rate(speed, m.spacing, ramp_T);
    b->p = m.origin;
    b->psi = 0.0;
    int row = 0;
    int march = 1;
    bool along_x = true;  // heading +x on outbound lanes
    while (b->t < end) {
        b->const_seg(0.0, m.lane_length / speed);
        if (b->t >= end) break;
        if (row + march < 0 || row + march > m.lanes - 1) march = -march;
        // A +y lane step needs a CCW turn from +x and a CW turn from -x.
        const double c = (along_x ? 1.0 : -1.0) * march * c_mag;
        b->ramp_seg(c, ramp_T);
        b->const_seg(c, M_PI / c_mag - ramp_T);
        b->ramp_seg(0.0, ramp_T);
        row += march;
        along_x = !along_x;
    }
}

void build_return_loop(const ReturnLoopSpec& rl, double speed, double end, PathBuilder* b) {
    const std::size_t n = rl.waypoints.size();
    if (rl.turn_radius <= 0.0) throw InvalidSpec("turn radius must be positive");
    // Corner fillet cut at each waypoint, from the polygon's interior angles.
    std::vector<double> cut(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d prev = rl.waypoints[(i + n - 1) % n];
        const Eigen::Vector2d next = rl.waypoints[(i + 1) % n];
        const Eigen::Vector2d in = rl.waypoints[i] - prev;
        const Eigen::Vector2d out = next - rl.waypoints[i];
        if (in.norm() < 1e-9 || out.norm() < 1e-9) {
            throw InvalidSpec("return loop has coincident neighboring waypoints");
        }
        const double dpsi = wrap_pi(std::atan2(out.y(), out.x()) - std::atan2(in.y(), in.x()));
        const double leg = std::min(in.norm(), out.norm());
        cut[i] = std::min(rl.turn_radius * std::tan(0.5 * std::abs(dpsi)), 0.4 * leg);
    }
    b->p = rl.waypoints[0];
    const Eigen::Vector2d first = rl.waypoints[1] - rl.waypoints[0];
    b->psi = std::atan2(first.y(), first.x());
    std::size_t j = 1;
    while (b->t < end) {
        const Eigen::Vector2d target = rl.waypoints[j];
        Eigen::Vector2d d = target - b->p;
        const double dpsi = wrap_pi(std::atan2(d.y(), d.x()) - b->psi);
        if (std::abs(dpsi) > 1e-6) {
            // Exact-heading turn; the fillet geometry is approximate, so the
            // following straight re-aims at the waypoint every cycle.
            const double c = (dpsi > 0.0 ? 1.0 : -1.0) * speed / rl.turn_radius;
            const double t_nom = std::abs(dpsi) * rl.turn_radius / speed;
            const double ramp_T = 0.3 * t_nom;
            b->ramp_seg(c, ramp_T);
            b->const_seg(c, t_nom - ramp_T);
            b->ramp_seg(0.0, ramp_T);
        }
        d = target - b->p;
        const double straight = std::max(d.norm() - cut[j], 0.2 * d.norm());
        b->const_seg(0.0, straight / speed);
        j = (j + 1) % n;
    }
}

}  // namespace

TrajectorySample SurveyTrajectory::at(Timestamp t) const {
    TrajectorySample s = at_seconds(to_seconds(t));
    s.t = t;
    return s;
}

TrajectorySample SurveyTrajectory::at_seconds(double t) const {
    TrajectorySample out;
    out.t = to_nanoseconds(t);
    if (static_) {
        out.pose = static_pose_;
        return out;
    }
    t = std::clamp(t, 0.0, built_end_);

    // Last segment starting at or before t.
    std::size_t lo = 0, hi = segments_.size();
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (segments_[mid].t0 <= t) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const Segment& raw = segments_[lo];
    const Seg seg{raw.t0, raw.T, raw.c0, raw.c1, raw.psi0, raw.p0};
    const double tau = std::clamp(t - seg.t0, 0.0, seg.T);

    const double psi = seg_heading(seg, tau);
    const double rate = seg_rate(seg, tau);
    const Eigen::Vector2d xy = seg.p0 + speed_ * seg_displacement_unit(seg, tau);

    // Depth follows one smoothstep across the whole survey.
    const double x = std::clamp(t / duration_, 0.0, 1.0);
    const double dz = z_end_ - z_start_;
    const double z = z_start_ + dz * qs(x);
    const double z_dot = dz * qs_d(x) / duration_;
    const double z_ddot = dz * qs_dd(x) / (duration_ * duration_);

    Rotation R = yaw_rotation(psi);
    Eigen::Vector3d omega(0.0, 0.0, rate);
    if (sigma_rp_ > 0.0) {
        // Slow sinusoidal sway about level; attitude only, the path is
        // unchanged. Body rates follow the z-y-x Euler rate map.
        const double w1 = 2.0 * M_PI * 0.11;
        const double w2 = 2.0 * M_PI * 0.07;
        const double roll = sigma_rp_ * std::sin(w1 * t);
        const double pitch = sigma_rp_ * std::sin(w2 * t + 1.0);
        const double roll_d = sigma_rp_ * w1 * std::cos(w1 * t);
        const double pitch_d = sigma_rp_ * w2 * std::cos(w2 * t + 1.0);
        R = R * Rotation::exp(Eigen::Vector3d(0.0, pitch, 0.0)) *
            Rotation::exp(Eigen::Vector3d(roll, 0.0, 0.0));
        omega = Eigen::Vector3d(
            roll_d - rate * std::sin(pitch),
            pitch_d * std::cos(roll) + rate * std::cos(pitch) * std::sin(roll),
            rate * std::cos(pitch) * std::cos(roll) - pitch_d * std::sin(roll));
    }
    out.pose = Pose(R, Eigen::Vector3d(xy.x(), xy.y(), z));
    out.velocity_world =
        Eigen::Vector3d(speed_ * std::cos(psi), speed_ * std::sin(psi), z_dot);
    out.accel_world = Eigen::Vector3d(-speed_ * rate * std::sin(psi),
                                      speed_ * rate * std::cos(psi), z_ddot);
    out.omega_body = omega;
    return out;
}

std::vector<Timestamp> SurveyTrajectory::sample_times(double rate_hz) const {
    if (rate_hz <= 0.0) throw InvalidRates("sample rate must be positive");
    const Timestamp end = duration_ns();
    if (end == 0) return {0};
    std::vector<Timestamp> out;
    for (std::int64_t k = 0;; ++k) {
        const Timestamp t = std::llround(static_cast<double>(k) * 1e9 / rate_hz);
        if (t >= end) break;
        out.push_back(t);
    }
    return out;
}

std::vector<TrajectorySample> SurveyTrajectory::sample_grid(double rate_hz) const {
    std::vector<TrajectorySample> out;
    for (Timestamp t : sample_times(rate_hz)) out.push_back(at(t));
    return out;
}

SurveyTrajectory generate_trajectory(const SurveySpec& spec) {
    SurveyTrajectory traj;
    traj.duration_ = spec.duration;
    if (spec.duration < 0.0) throw InvalidSpec("duration must be nonnegative");

    if (const auto* rl = std::get_if<ReturnLoopSpec>(&spec.pattern)) {
        if (rl->waypoints.empty()) throw InvalidSpec("return loop needs waypoints");
        if (rl->waypoints.size() == 1) {
            traj.static_ = true;
            traj.static_pose_ = Pose(
                Rotation::identity(),
                Eigen::Vector3d(rl->waypoints[0].x(), rl->waypoints[0].y(), rl->depth));
            return traj;
        }
    }
    if (spec.duration == 0.0) {
        throw InvalidSpec("zero duration is only valid for a single-waypoint loop");
    }
    if (spec.speed <= 0.0) throw InvalidSpec("speed must be positive");

    PathBuilder b;
    b.speed = spec.speed;
    const double end = spec.duration + 2.0;
    if (const auto* c = std::get_if<ConcentricCirclesSpec>(&spec.pattern)) {
        build_circles(*c, spec.speed, end, &b);
        traj.z_start_ = c->depth_start;
        traj.z_end_ = c->depth_end;
    } else if (const auto* m = std::get_if<LawnmowerSpec>(&spec.pattern)) {
        build_lawnmower(*m, spec.speed, end, &b);
        traj.z_start_ = traj.z_end_ = m->depth;
    } else {
        const auto& rl = std::get<ReturnLoopSpec>(spec.pattern);
        build_return_loop(rl, spec.speed, end, &b);
        traj.z_start_ = traj.z_end_ = rl.depth;
    }

    traj.speed_ = spec.speed;
    traj.sigma_rp_ = spec.sigma_roll_pitch;
    traj.built_end_ = b.t;
    traj.segments_.reserve(b.segs.size());
    for (const auto& s : b.segs) {
        traj.segments_.push_back({s.t0, s.T, s.c0, s.c1, s.psi0, s.p0});
    }
    return traj;
}

}  // namespace uslam
