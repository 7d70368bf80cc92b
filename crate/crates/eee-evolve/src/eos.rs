//! Two-parameter equations of state and derived thermodynamic coefficients.
//!
//! The fluid is described by the energy density as a function of rest-mass
//! density `r` and specific entropy `s`,
//!
//! ```text
//! rho = P(r, s) ,
//! p   = r dP/dr - P            (pressure)
//! K   = (1/r) dP/ds            (temperature-like coefficient)
//! nu^2 = r/(p + rho) dp/dr = r^2 P_rr / (r P_r)   (adiabatic sound speed^2)
//! ```
//!
//! which encodes the first law in the form
//!
//! ```text
//! dP/dr = (p + rho)/r ,     dP/ds = r K .
//! ```
//!
//! The evolution equations also need `d(nu^2)/dr`, `d(nu^2)/ds` and the
//! adiabatic second derivative `(d^2 p / d rho^2)_s = (dnu^2/dr) r/(p+rho)`,
//! so implementors provide partials of `P` up to third order in `r` (mixed
//! once in `s`). All coefficients are bundled per point in [`ThermoPoint`].

/// A two-parameter equation of state `rho = P(r, s)`.
///
/// Implementors supply `P` and its partial derivatives; everything else
/// (pressure, sound speed, their derivatives) is derived generically in
/// [`ThermoPoint::new`].
pub trait EquationOfState: Sync {
    /// Energy density `P(r, s)`.
    fn p_of(&self, r: f64, s: f64) -> f64;
    /// `dP/dr`.
    fn p_r(&self, r: f64, s: f64) -> f64;
    /// `dP/ds`.
    fn p_s(&self, r: f64, s: f64) -> f64;
    /// `d2P/dr2`.
    fn p_rr(&self, r: f64, s: f64) -> f64;
    /// `d2P/drds`.
    fn p_rs(&self, r: f64, s: f64) -> f64;
    /// `d3P/dr3`.
    fn p_rrr(&self, r: f64, s: f64) -> f64;
    /// `d3P/dr2ds`.
    fn p_rrs(&self, r: f64, s: f64) -> f64;

    /// Human-readable name, recorded in run manifests.
    fn name(&self) -> String;

    /// Evaluate all derived coefficients at `(r, s)`.
    fn at(&self, r: f64, s: f64) -> ThermoPoint
    where
        Self: Sized,
    {
        ThermoPoint::new(self, r, s)
    }

    /// Invert `P(r, s) = rho` for `r` at fixed `s` (Newton iteration with
    /// bisection fallback). Used when constructing initial data from an
    /// energy-density profile.
    fn invert_density(&self, rho: f64, s: f64, guess: f64) -> Option<f64>
    where
        Self: Sized,
    {
        let mut r = if guess > 0.0 { guess } else { 1.0 };
        for _ in 0..100 {
            let f = self.p_of(r, s) - rho;
            let fp = self.p_r(r, s);
            if fp <= 0.0 {
                return None;
            }
            let step = f / fp;
            let mut rn = r - step;
            if rn <= 0.0 {
                rn = 0.5 * r;
            }
            if (rn - r).abs() <= 1e-15 * rn.max(1.0) {
                return Some(rn);
            }
            r = rn;
        }
        // Accept if the residual is tiny even without step convergence.
        if (self.p_of(r, s) - rho).abs() <= 1e-12 * rho.abs().max(1.0) {
            Some(r)
        } else {
            None
        }
    }
}

/// All thermodynamic coefficients of an EOS evaluated at one `(r, s)`.
#[derive(Debug, Clone, Copy)]
pub struct ThermoPoint {
    pub r: f64,
    pub s: f64,
    /// Energy density `P(r, s)`.
    pub rho: f64,
    /// Pressure `p = r P_r - P`.
    pub p: f64,
    /// `dp/dr = r P_rr`.
    pub dp_dr: f64,
    /// `dp/ds = r P_rs - P_s`.
    pub dp_ds: f64,
    /// `dP/dr` (equals `(p + rho)/r` by the first law).
    pub drho_dr: f64,
    /// `dP/ds` (equals `r K` by the first law).
    pub drho_ds: f64,
    /// Temperature-like coefficient `K = P_s / r`.
    pub temp_k: f64,
    /// Sound speed squared `nu^2 = r^2 P_rr / (r P_r)`.
    pub nu2: f64,
    /// `d(nu^2)/dr` at fixed `s`.
    pub dnu2_dr: f64,
    /// `d(nu^2)/ds` at fixed `r`.
    pub dnu2_ds: f64,
    /// Adiabatic `(d^2 p / d rho^2)_s = dnu2_dr * r / (p + rho)`.
    pub d2p_drho2: f64,
}

impl ThermoPoint {
    pub fn new<E: EquationOfState + ?Sized>(eos: &E, r: f64, s: f64) -> Self {
        let rho = eos.p_of(r, s);
        let pr = eos.p_r(r, s);
        let ps = eos.p_s(r, s);
        let prr = eos.p_rr(r, s);
        let prs = eos.p_rs(r, s);
        let prrr = eos.p_rrr(r, s);
        let prrs = eos.p_rrs(r, s);

        let p = r * pr - rho;
        let dp_dr = r * prr;
        let dp_ds = r * prs - ps;
        // nu^2 = r P_rr / P_r
        let nu2 = r * prr / pr;
        let dnu2_dr = (prr + r * prrr) / pr - r * prr * prr / (pr * pr);
        let dnu2_ds = (r * prrs * pr - r * prr * prs) / (pr * pr);
        let d2p_drho2 = dnu2_dr * r / (p + rho);

        ThermoPoint {
            r,
            s,
            rho,
            p,
            dp_dr,
            dp_ds,
            drho_dr: pr,
            drho_ds: ps,
            temp_k: ps / r,
            nu2,
            dnu2_dr,
            dnu2_ds,
            d2p_drho2,
        }
    }

    /// Hard admissibility: positive rest-mass density, positive enthalpy,
    /// strictly positive sound speed (symmetric hyperbolicity needs all
    /// three). Returns a reason string on failure.
    pub fn check_admissible(&self) -> Result<(), String> {
        if !(self.r > 0.0) {
            return Err(format!("rest-mass density r = {} not positive", self.r));
        }
        if !(self.p + self.rho > 0.0) {
            return Err(format!("enthalpy p + rho = {} not positive", self.p + self.rho));
        }
        if !(self.nu2 > 0.0) {
            return Err(format!("sound speed squared nu^2 = {} not positive", self.nu2));
        }
        Ok(())
    }

    /// Soft causality flag: `nu^2 <= 1` is expected physically but not
    /// required for well-posedness; callers may warn when this is false.
    pub fn is_causal(&self) -> bool {
        self.nu2 <= 1.0 + 1e-14
    }
}

/// Entropic polytrope
///
/// ```text
/// P(r, s) = r + exp(s) r^gamma / (gamma - 1) ,
/// p       = exp(s) r^gamma ,
/// K       = exp(s) r^(gamma-1) / (gamma - 1) ,
/// nu^2    = gamma p / (p + rho) .
/// ```
#[derive(Debug, Clone, Copy)]
pub struct EntropicPolytrope {
    pub gamma: f64,
}

impl EntropicPolytrope {
    pub fn new(gamma: f64) -> Self {
        assert!(gamma > 1.0, "polytrope exponent must exceed 1, got {gamma}");
        EntropicPolytrope { gamma }
    }

    /// Closed-form sound speed, used as a cross-check of the generic path.
    pub fn nu2_closed_form(&self, r: f64, s: f64) -> f64 {
        let p = s.exp() * r.powf(self.gamma);
        let rho = r + p / (self.gamma - 1.0);
        self.gamma * p / (p + rho)
    }
}

impl EquationOfState for EntropicPolytrope {
    fn p_of(&self, r: f64, s: f64) -> f64 {
        r + s.exp() * r.powf(self.gamma) / (self.gamma - 1.0)
    }
    fn p_r(&self, r: f64, s: f64) -> f64 {
        1.0 + s.exp() * self.gamma * r.powf(self.gamma - 1.0) / (self.gamma - 1.0)
    }
    fn p_s(&self, r: f64, s: f64) -> f64 {
        s.exp() * r.powf(self.gamma) / (self.gamma - 1.0)
    }
    fn p_rr(&self, r: f64, s: f64) -> f64 {
        s.exp() * self.gamma * r.powf(self.gamma - 2.0)
    }
    fn p_rs(&self, r: f64, s: f64) -> f64 {
        s.exp() * self.gamma * r.powf(self.gamma - 1.0) / (self.gamma - 1.0)
    }
    fn p_rrr(&self, r: f64, s: f64) -> f64 {
        s.exp() * self.gamma * (self.gamma - 2.0) * r.powf(self.gamma - 3.0)
    }
    fn p_rrs(&self, r: f64, s: f64) -> f64 {
        s.exp() * self.gamma * r.powf(self.gamma - 2.0)
    }
    fn name(&self) -> String {
        format!("entropic-polytrope(gamma={})", self.gamma)
    }
}

/// Barotropic (entropy-independent) polytrope, `P(r, s) = r + k r^gamma /
/// (gamma - 1)`. All `s`-partials vanish; the entropy sector of the
/// evolution then decouples exactly.
#[derive(Debug, Clone, Copy)]
pub struct BarotropicFluid {
    pub k: f64,
    pub gamma: f64,
}

impl BarotropicFluid {
    pub fn new(k: f64, gamma: f64) -> Self {
        assert!(k > 0.0 && gamma > 1.0);
        BarotropicFluid { k, gamma }
    }
}

impl EquationOfState for BarotropicFluid {
    fn p_of(&self, r: f64, _s: f64) -> f64 {
        r + self.k * r.powf(self.gamma) / (self.gamma - 1.0)
    }
    fn p_r(&self, r: f64, _s: f64) -> f64 {
        1.0 + self.k * self.gamma * r.powf(self.gamma - 1.0) / (self.gamma - 1.0)
    }
    fn p_s(&self, _r: f64, _s: f64) -> f64 {
        0.0
    }
    fn p_rr(&self, r: f64, _s: f64) -> f64 {
        self.k * self.gamma * r.powf(self.gamma - 2.0)
    }
    fn p_rs(&self, _r: f64, _s: f64) -> f64 {
        0.0
    }
    fn p_rrr(&self, r: f64, _s: f64) -> f64 {
        self.k * self.gamma * (self.gamma - 2.0) * r.powf(self.gamma - 3.0)
    }
    fn p_rrs(&self, _r: f64, _s: f64) -> f64 {
        0.0
    }
    fn name(&self) -> String {
        format!("barotropic-polytrope(k={},gamma={})", self.k, self.gamma)
    }
}
