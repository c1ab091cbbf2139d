//! Scalar proximal subproblem used by the implicit conductivity update.
//!
//! Each edge decouples into
//! `min_{c ≥ 0} f(c) = (c − c̄)²/(2t) − a c + b c^γ` with `t > 0`, `a ≥ 0`,
//! `b > 0`. For `γ ≥ 1` the objective is convex. For `γ < 1`, `f'` decreases
//! up to the inflection point `c_infl = (t b γ (1 − γ))^{1/(2−γ)}` and
//! increases afterwards, so there is at most one interior local minimum and
//! the answer is either that minimum or the boundary `c = 0`.

/// Relative stationarity tolerance on `f'`.
const STATIONARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarProx {
    pub cbar: f64,
    pub t: f64,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
}

impl ScalarProx {
    pub fn value(&self, c: f64) -> f64 {
        let d = c - self.cbar;
        d * d / (2.0 * self.t) - self.a * c + self.b * c.powf(self.gamma)
    }

    pub fn derivative(&self, c: f64) -> f64 {
        (c - self.cbar) / self.t - self.a + self.b * self.gamma * c.powf(self.gamma - 1.0)
    }

    fn second_derivative(&self, c: f64) -> f64 {
        1.0 / self.t + self.b * self.gamma * (self.gamma - 1.0) * c.powf(self.gamma - 2.0)
    }

    /// Global minimizer over `c ≥ 0`.
    pub fn solve(&self) -> f64 {
        let ScalarProx {
            cbar,
            t,
            a,
            b,
            gamma,
        } = *self;
        if gamma == 1.0 {
            return (cbar + t * (a - b)).max(0.0);
        }
        if gamma < 1.0 {
            let c_infl = (t * b * gamma * (1.0 - gamma)).powf(1.0 / (2.0 - gamma));
            if self.derivative(c_infl) >= 0.0 {
                return 0.0;
            }
            let root = self.root_above(c_infl);
            if self.value(0.0) < self.value(root) {
                0.0
            } else {
                root
            }
        } else {
            if self.derivative(0.0) >= 0.0 {
                return 0.0;
            }
            self.root_above(0.0)
        }
    }

    // Root of f' on (lo, ∞) given f'(lo) < 0 and f' increasing there.
    fn root_above(&self, mut lo: f64) -> f64 {
        let mut hi = (self.cbar + self.t * self.a).max(lo);
        let mut grow = 0;
        while self.derivative(hi) < 0.0 && grow < 200 {
            hi = 2.0 * hi + f64::MIN_POSITIVE;
            grow += 1;
        }
        let scale = (self.cbar / self.t).abs() + self.a + f64::MIN_POSITIVE;
        let mut x = if self.cbar > lo && self.cbar < hi {
            self.cbar
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..200 {
            let fx = self.derivative(x);
            if fx.abs() <= STATIONARITY_TOL * scale {
                return x;
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return x;
            }
            let newton = x - fx / self.second_derivative(x);
            x = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }
}

/// Convenience wrapper around [`ScalarProx::solve`].
pub fn scalar_prox(cbar: f64, t: f64, a: f64, b: f64, gamma: f64) -> f64 {
    ScalarProx {
        cbar,
        t,
        a,
        b,
        gamma,
    }
    .solve()
}
