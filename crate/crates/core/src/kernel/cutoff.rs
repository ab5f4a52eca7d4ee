//! The smoothed Fermi function `chi(x) = 1_{x < E_F} phi(x + b)`.

/// Canonical `C^infinity` step: `0` for `s <= 0`, `1` for `s >= 1`,
/// `f(s) / (f(s) + f(1 - s))` with `f(s) = exp(-1/s)` in between.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    // f(s) / (f(s) + f(1-s)) = 1 / (1 + exp(1/s - 1/(1-s)))
    1.0 / (1.0 + (1.0 / s - 1.0 / (1.0 - s)).exp())
}

/// Monotone cut-off `phi` with `phi = 1` on `[-|E_F|, inf)` and `phi = 0`
/// on `(-inf, -|E_F| - 1]`, combined with the Fermi step and the
/// ultraviolet shift `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffFunction {
    pub fermi_energy: f64,
    pub cutoff: f64,
}

impl CutoffFunction {
    pub fn new(fermi_energy: f64, cutoff: f64) -> Self {
        Self { fermi_energy, cutoff }
    }

    /// `phi(x)`.
    pub fn phi(&self, x: f64) -> f64 {
        smooth_step(x + self.fermi_energy.abs() + 1.0)
    }

    /// `chi(x) = 1_{x < E_F} phi(x + b)`, values in `[0, 1]`.
    pub fn chi(&self, x: f64) -> f64 {
        if x < self.fermi_energy {
            self.phi(x + self.cutoff)
        } else {
            0.0
        }
    }

    /// Lower edge `-|E_F| - b` of the plateau where `chi = 1`.
    pub fn plateau_edge(&self) -> f64 {
        -self.fermi_energy.abs() - self.cutoff
    }

    /// Lower edge `-|E_F| - b - 1` of the support of `chi`.
    pub fn support_edge(&self) -> f64 {
        self.plateau_edge() - 1.0
    }
}
