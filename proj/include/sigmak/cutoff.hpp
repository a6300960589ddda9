#pragma once

namespace sigmak {

/// Value and first two derivatives of a one-variable profile.
struct Profile3 {
    double f = 0, f1 = 0, f2 = 0;
};

/// Quintic smoothstep 6s^5 - 15s^4 + 10s^3 clamped to [0,1]; C^2 at both ends.
inline Profile3 smoothstep5(double s) {
    if (s <= 0.0) return {0.0, 0.0, 0.0};
    if (s >= 1.0) return {1.0, 0.0, 0.0};
    const double s2 = s * s, s3 = s2 * s;
    return {s3 * (10 - 15 * s + 6 * s2), 30 * s2 * (1 - s) * (1 - s), 60 * s * (1 - s) * (1 - 2 * s)};
}

/// Non-decreasing cutoff: 0 for t <= lo, 1 for t >= hi.
inline Profile3 ramp_up(double t, double lo, double hi) {
    const double w = hi - lo;
    const Profile3 p = smoothstep5((t - lo) / w);
    return {p.f, p.f1 / w, p.f2 / (w * w)};
}

/// Non-increasing cutoff: 1 for t <= lo, 0 for t >= hi.
inline Profile3 ramp_down(double t, double lo, double hi) {
    const Profile3 p = ramp_up(t, lo, hi);
    return {1.0 - p.f, -p.f1, -p.f2};
}

}  // namespace sigmak
