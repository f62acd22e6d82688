//! Classical RK4 for the nonlinear pendulum `θ' = ω, ω' = -k sin θ`.

use alloc::vec::Vec;

pub const RK4_STEP: f64 = 0.01;

fn rhs(state: [f64; 2], k: f64) -> [f64; 2] {
    [state[1], -k * libm::sin(state[0])]
}

fn rk4_step(s: [f64; 2], k: f64, h: f64) -> [f64; 2] {
    let k1 = rhs(s, k);
    let k2 = rhs([s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]], k);
    let k3 = rhs([s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]], k);
    let k4 = rhs([s[0] + h * k3[0], s[1] + h * k3[1]], k);
    [
        s[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        s[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// `(θ, ω)` at each of the ascending `times`, starting from `(θ0, ω0)` at
/// `t = 0`. Gaps are covered with equal substeps no longer than
/// [`RK4_STEP`].
pub fn pendulum_reference(theta0: f64, omega0: f64, k: f64, times: &[f64]) -> Vec<[f64; 2]> {
    let mut state = [theta0, omega0];
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let gap = target - t;
        if gap > 0.0 {
            let n = libm::ceil(gap / RK4_STEP - 1e-9).max(1.0) as usize;
            let h = gap / n as f64;
            for _ in 0..n {
                state = rk4_step(state, k, h);
            }
            t = target;
        }
        out.push(state);
    }
    out
}

/// `ω²/2 + k (1 - cos θ)`.
pub fn pendulum_energy(theta: f64, omega: f64, k: f64) -> f64 {
    0.5 * omega * omega + k * (1.0 - libm::cos(theta))
}
