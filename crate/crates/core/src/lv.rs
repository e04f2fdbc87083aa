//! Lotka-Volterra reference model, integrated with classical RK4.
//!
//! `dx/dt = α·x − β·x·y`, `dy/dt = δ·x·y − γ·y` with prey `x` and predators `y`.

use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LvParams {
    /// Prey reproduction rate.
    pub alpha: f64,
    /// Predation rate.
    pub beta: f64,
    /// Predator reproduction rate.
    pub delta: f64,
    /// Predator mortality rate.
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LvError(pub &'static str);

impl fmt::Display for LvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.0)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LvError {}

impl LvParams {
    pub fn validate(&self) -> Result<(), LvError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(self.alpha) && ok(self.beta) && ok(self.delta) && ok(self.gamma) {
            Ok(())
        } else {
            Err(LvError("all Lotka-Volterra rates must be positive and finite"))
        }
    }

    /// Nontrivial fixed point `(γ/δ, α/β)`.
    pub fn equilibrium(&self) -> (f64, f64) {
        (self.gamma / self.delta, self.alpha / self.beta)
    }

    pub fn derivative(&self, x: f64, y: f64) -> (f64, f64) {
        (self.alpha * x - self.beta * x * y, self.delta * x * y - self.gamma * y)
    }

    /// First integral `δx − γ ln x + βy − α ln y`, constant along exact
    /// trajectories with `x, y > 0`.
    pub fn invariant(&self, x: f64, y: f64) -> f64 {
        self.delta * x - self.gamma * libm::log(x) + self.beta * y - self.alpha * libm::log(y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LvSample {
    pub t: f64,
    pub prey: f64,
    pub predators: f64,
}

/// RK4 trajectory with `steps + 1` samples starting at `t = 0`.
pub fn lv_integrate(params: &LvParams, x0: f64, y0: f64, dt: f64, steps: usize) -> Result<Vec<LvSample>, LvError> {
    params.validate()?;
    if !(x0 >= 0.0 && y0 >= 0.0) {
        return Err(LvError("initial populations must be non-negative"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LvError("dt must be positive"));
    }
    let mut out = Vec::with_capacity(steps + 1);
    let (mut x, mut y) = (x0, y0);
    out.push(LvSample { t: 0.0, prey: x, predators: y });
    for i in 1..=steps {
        let (k1x, k1y) = params.derivative(x, y);
        let (k2x, k2y) = params.derivative(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y);
        let (k3x, k3y) = params.derivative(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y);
        let (k4x, k4y) = params.derivative(x + dt * k3x, y + dt * k3y);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        out.push(LvSample {
            t: i as f64 * dt,
            prey: x,
            predators: y,
        });
    }
    Ok(out)
}
