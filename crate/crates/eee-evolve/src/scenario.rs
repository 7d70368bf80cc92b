//! Built-in initial-data scenarios.
//!
//! Each scenario produces raw Cauchy data on the periodic box which is then
//! passed through the generic constructor in [`crate::initial`]:
//!
//! * `minkowski` - flat quiescent fluid (gravity off by default);
//! * `flrw` - homogeneous isotropic expansion with the Hubble rate fixed by
//!   the Friedmann relation `H^2 = kappa rho / 3`;
//! * `perturbed_flrw` - conformally flat slice `g0 = -psi^4 delta`,
//!   `psi = 1 + A sin(2 pi x / L)`, with the energy density solved from the
//!   Hamiltonian constraint so the data is constraint-satisfying in the
//!   continuum (plus an optional entropy wave riding on top);
//! * `boosted_uniform` - flat slice, uniform fluid moving along `x` with
//!   coordinate speed `beta` (gravity off by default), a pure
//!   special-relativity check of the comoving-frame construction.

use crate::eos::EquationOfState;
use crate::grid::{FieldSet, Grid};
use crate::initial::{build_state, CauchyData};
use crate::state::State;
use crate::{Error, Result};
use std::f64::consts::TAU;
use std::str::FromStr;

/// Selectable initial-data family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Minkowski,
    Flrw,
    PerturbedFlrw,
    BoostedUniform,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Minkowski,
        Scenario::Flrw,
        Scenario::PerturbedFlrw,
        Scenario::BoostedUniform,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Minkowski => "minkowski",
            Scenario::Flrw => "flrw",
            Scenario::PerturbedFlrw => "perturbed_flrw",
            Scenario::BoostedUniform => "boosted_uniform",
        }
    }

    /// Default gravitational coupling: the flat-background scenarios are
    /// exact only with gravity switched off (a uniform fluid at rest
    /// gravitates and would start contracting), so they default to
    /// `kappa = 0`; the cosmological ones default to `kappa = 1`.
    pub fn default_kappa(&self) -> f64 {
        match self {
            Scenario::Minkowski | Scenario::BoostedUniform => 0.0,
            Scenario::Flrw | Scenario::PerturbedFlrw => 1.0,
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .iter()
            .copied()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
                Error::Config(format!(
                    "unknown scenario '{s}' (available: {})",
                    names.join(", ")
                ))
            })
    }
}

/// Tunable scenario parameters (all have sensible defaults).
#[derive(Debug, Clone, Copy)]
pub struct ScenarioParams {
    /// Background mass density.
    pub rmass: f64,
    /// Background specific entropy.
    pub entropy: f64,
    /// Conformal perturbation amplitude (`perturbed_flrw`).
    pub amplitude: f64,
    /// Entropy-wave amplitude (`perturbed_flrw`); set to 0 for an
    /// isentropic perturbation.
    pub entropy_amplitude: f64,
    /// Coordinate boost speed (`boosted_uniform`), `|beta| < 1`.
    pub beta: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            rmass: 1.0,
            entropy: 0.0,
            amplitude: 1e-3,
            entropy_amplitude: 5e-4,
            beta: 0.3,
        }
    }
}

/// Produce the raw Cauchy data of a scenario on a grid.
pub fn cauchy_data<E: EquationOfState>(
    scenario: Scenario,
    grid: Grid,
    eos: &E,
    kappa: f64,
    params: &ScenarioParams,
) -> Result<CauchyData> {
    let n = grid.len();
    match scenario {
        Scenario::Minkowski => Ok(CauchyData::flat(grid, params.rmass, params.entropy)),
        Scenario::Flrw => {
            let rho = eos.at(params.rmass, params.entropy).rho;
            let hub = (kappa * rho / 3.0).sqrt();
            let mut data = CauchyData::flat(grid, params.rmass, params.entropy);
            for i in 0..n {
                for d in 0..3 {
                    data.kext[i][d][d] = hub * data.g0[i][d][d];
                }
            }
            Ok(data)
        }
        Scenario::PerturbedFlrw => {
            if kappa <= 0.0 {
                return Err(Error::Config(
                    "perturbed_flrw solves the Hamiltonian constraint for the density \
                     and needs kappa > 0"
                        .into(),
                ));
            }
            let rho_bg = eos.at(params.rmass, params.entropy).rho;
            let hub = (kappa * rho_bg / 3.0).sqrt();
            let ll = grid.extent();
            let mut data = CauchyData::flat(grid, params.rmass, params.entropy);
            for i in 0..n {
                let x = grid.position(i)[0];
                let phase = (TAU * x / ll).sin();
                let psi = 1.0 + params.amplitude * phase;
                let lap_psi = -params.amplitude * (TAU / ll).powi(2) * phase;
                let p4 = psi.powi(4);
                for d in 0..3 {
                    data.g0[i][d][d] = -p4;
                    data.kext[i][d][d] = hub * data.g0[i][d][d];
                }
                // Hamiltonian constraint for zero velocity:
                //   (tr k)^2 - |k|^2 - R(g0) = 2 kappa rho,
                // with tr k = 3 H, |k|^2 = 3 H^2 and the closed-form scalar
                // curvature R = 8 psi^-5 lap(psi) of the conformal slice.
                let r_scal = 8.0 * psi.powi(-5) * lap_psi;
                let rho = (3.0 * hub * hub - 0.5 * r_scal) / kappa;
                let s = params.entropy + params.entropy_amplitude * phase;
                let r = eos.invert_density(rho, s, params.rmass).ok_or_else(|| {
                    Error::Config(format!(
                        "cannot invert the equation of state for rho = {rho} at s = {s}"
                    ))
                })?;
                data.rmass[i] = r;
                data.entropy[i] = s;
            }
            Ok(data)
        }
        Scenario::BoostedUniform => {
            if !(params.beta.abs() < 1.0) {
                return Err(Error::Config(format!(
                    "boost speed must satisfy |beta| < 1, got {}",
                    params.beta
                )));
            }
            let w = params.beta / (1.0 - params.beta * params.beta).sqrt();
            let mut data = CauchyData::flat(grid, params.rmass, params.entropy);
            for v in data.vel.iter_mut() {
                v[0] = w;
            }
            Ok(data)
        }
    }
}

/// Build the packed evolution state of a scenario.
pub fn build<E: EquationOfState>(
    scenario: Scenario,
    grid: Grid,
    eos: &E,
    kappa: f64,
    order: usize,
    params: &ScenarioParams,
) -> Result<FieldSet> {
    let data = cauchy_data(scenario, grid, eos, kappa, params)?;
    build_state(grid, &data, eos, kappa, order)
}

/// Independent reference solution for the homogeneous isotropic scenario:
/// the PDE system collapses to the ODEs
///
/// ```text
/// H'   = -H^2 - kappa (rho + 3p)/6
/// rho' = -3 H (p + rho)
/// r'   = -3 H r
/// e'   = -H e          (inverse scale factor carried by the triad)
/// ```
///
/// integrated here with classic RK4 from the Friedmann initial condition
/// `H(0) = sqrt(kappa rho(0) / 3)`, `e(0) = 1`. Returns the packed state
/// after `steps` steps of size `dt`.
pub fn flrw_reference_state<E: EquationOfState>(
    eos: &E,
    kappa: f64,
    r0: f64,
    s0: f64,
    dt: f64,
    steps: usize,
) -> State {
    let rho0 = eos.at(r0, s0).rho;
    let mut y = [(kappa * rho0 / 3.0).sqrt(), rho0, r0, 1.0];
    let deriv = |y: &[f64; 4]| -> [f64; 4] {
        let [h, rho, r, e] = *y;
        let p = eos.at(r, s0).p;
        [
            -h * h - kappa * (rho + 3.0 * p) / 6.0,
            -3.0 * h * (p + rho),
            -3.0 * h * r,
            -h * e,
        ]
    };
    for _ in 0..steps {
        let k1 = deriv(&y);
        let mut y2 = y;
        for j in 0..4 {
            y2[j] = y[j] + 0.5 * dt * k1[j];
        }
        let k2 = deriv(&y2);
        let mut y3 = y;
        for j in 0..4 {
            y3[j] = y[j] + 0.5 * dt * k2[j];
        }
        let k3 = deriv(&y3);
        let mut y4 = y;
        for j in 0..4 {
            y4[j] = y[j] + dt * k3[j];
        }
        let k4 = deriv(&y4);
        for j in 0..4 {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    State::flrw(y[0], y[3], y[1], y[2], s0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::EntropicPolytrope;
    use crate::initial::constraint_residuals;
    use crate::state::{State, NFIELDS};

    #[test]
    fn scenario_names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert!("nope".parse::<Scenario>().is_err());
    }

    #[test]
    fn reference_solution_degenerates_correctly() {
        let eos = EntropicPolytrope::new(2.0);
        // no steps: exact Friedmann initial condition
        let z = flrw_reference_state(&eos, 1.0, 1.0, 0.0, 1e-3, 0);
        let rho = eos.at(1.0, 0.0).rho;
        assert_eq!(z.rho(), rho);
        assert_eq!(z.extr(0, 0), (rho / 3.0f64).sqrt());
        // gravity off: nothing moves
        let z = flrw_reference_state(&eos, 0.0, 1.0, 0.0, 1e-2, 100);
        let still = State::flrw(0.0, 1.0, rho, 1.0, 0.0);
        for c in 0..NFIELDS {
            assert!((z.0[c] - still.0[c]).abs() <= 1e-15);
        }
        // expansion dilutes matter monotonically
        let z = flrw_reference_state(&eos, 1.0, 1.0, 0.0, 1e-3, 200);
        assert!(z.rho() < rho && z.rmass() < 1.0 && z.extr(0, 0) > 0.0);
    }

    #[test]
    fn flrw_scenario_builds_the_closed_form_state() {
        let eos = EntropicPolytrope::new(2.0);
        let grid = Grid::unit_box(8);
        let kappa = 1.0;
        let built = build(
            Scenario::Flrw,
            grid,
            &eos,
            kappa,
            4,
            &ScenarioParams::default(),
        )
        .unwrap();
        let expect = flrw_reference_state(&eos, kappa, 1.0, 0.0, 1e-3, 0);
        let mut err: f64 = 0.0;
        for z in &built.data {
            for c in 0..NFIELDS {
                err = err.max((z[c] - expect.0[c]).abs());
            }
        }
        assert!(err <= 1e-12, "scenario vs closed form: {err}");
    }

    #[test]
    fn perturbed_cosmology_is_constraint_satisfying() {
        // The density profile is solved from the Hamiltonian constraint in
        // the continuum; the discrete residual must be pure truncation
        // error, i.e. fourth-order small and converging at fourth order.
        let eos = EntropicPolytrope::new(2.0);
        let kappa = 1.0;
        let params = ScenarioParams::default();
        let mut resids = Vec::new();
        for nn in [16usize, 32] {
            let grid = Grid::unit_box(nn);
            let data = cauchy_data(Scenario::PerturbedFlrw, grid, &eos, kappa, &params).unwrap();
            let rep = constraint_residuals(&grid, &data, &eos, kappa, 4);
            assert!(rep.mom <= 1e-12, "momentum residual {:?}", rep);
            resids.push(rep.ham);
        }
        assert!(resids[1] <= 1e-4, "Hamiltonian residual {resids:?}");
        let order = (resids[0] / resids[1]).log2();
        assert!(
            order > 3.5,
            "Hamiltonian residual converges at order {order} ({resids:?})"
        );
    }

    #[test]
    fn perturbed_cosmology_state_has_inhomogeneous_matter_and_entropy() {
        let eos = EntropicPolytrope::new(2.0);
        let grid = Grid::unit_box(16);
        let built = build(
            Scenario::PerturbedFlrw,
            grid,
            &eos,
            1.0,
            4,
            &ScenarioParams::default(),
        )
        .unwrap();
        let rho: Vec<f64> = built.data.iter().map(|z| State(*z).rho()).collect();
        let smax = built
            .data
            .iter()
            .map(|z| State(*z).sgrad(1).abs())
            .fold(0.0f64, f64::max);
        let spread = rho.iter().cloned().fold(f64::MIN, f64::max)
            - rho.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread > 1e-4, "density wave missing (spread {spread})");
        assert!(smax > 1e-4, "entropy gradient missing (max {smax})");
    }
}
