//! Classic RK4 time integration of the reduced system on the periodic grid.
//!
//! The step size is tied to the grid by the CFL condition `dt = cfl * h /
//! lambda_max` with `lambda_max = 1`: the characteristic speeds of the
//! system in Minkowski-normalized frames are `{0, +-1/2, +-nu, +-1}`, all
//! bounded by the light speed 1 for causal equations of state.
//!
//! Each right-hand-side evaluation is pointwise independent (centered
//! stencils read neighbor data, writes are per-point), so stages are
//! parallelized over grid points; all reductions elsewhere in the crate are
//! serial and fixed-order, keeping runs bit-reproducible regardless of
//! thread count.

use crate::eos::EquationOfState;
use crate::grid::FieldSet;
use crate::rhs;
use crate::state::{NFIELDS, SLOT_ENTROPY, SLOT_RMASS};
use crate::{Error, Result};
use rayon::prelude::*;

/// Integrator parameters.
#[derive(Debug, Clone, Copy)]
pub struct EvolveParams {
    /// Centered-difference order (2 or 4).
    pub fd_order: usize,
    /// CFL number; `dt = cfl * h`.
    pub cfl: f64,
    /// Kreiss-Oliger dissipation strength (0 disables).
    pub ko_eps: f64,
    /// Gravitational coupling.
    pub kappa: f64,
}

impl Default for EvolveParams {
    fn default() -> Self {
        EvolveParams {
            fd_order: 4,
            cfl: 0.25,
            ko_eps: 0.0,
            kappa: 1.0,
        }
    }
}

/// Scratch buffers for one grid, reused across steps.
pub struct Workspace {
    k: FieldSet,
    ytmp: FieldSet,
    acc: FieldSet,
}

impl Workspace {
    pub fn new(template: &FieldSet) -> Self {
        Workspace {
            k: template.clone(),
            ytmp: template.clone(),
            acc: template.clone(),
        }
    }
}

/// Evaluate `dz/dt` for every grid point into `out`.
///
/// Fails with [`Error::Inadmissible`] when any point leaves the admissible
/// region (non-positive sound speed or enthalpy, indefinite principal
/// block), identifying the first offending point.
pub fn rhs_fields<E: EquationOfState>(
    fs: &FieldSet,
    eos: &E,
    params: &EvolveParams,
    out: &mut FieldSet,
) -> Result<()> {
    debug_assert_eq!(fs.grid, out.grid);
    out.data
        .par_iter_mut()
        .enumerate()
        .try_for_each(|(i, o)| -> Result<()> {
            let z = &fs.data[i];
            let th = eos.at(z[SLOT_RMASS], z[SLOT_ENTROPY]);
            th.check_admissible()
                .map_err(|reason| Error::Inadmissible { index: i, reason })?;
            let e0sq: f64 = (0..3).map(|a| z[a].powi(2)).sum();
            if 1.0 - th.nu2 * e0sq <= 0.0 {
                return Err(Error::Inadmissible {
                    index: i,
                    reason: format!(
                        "principal block indefinite: nu^2 |e^0|^2 = {}",
                        th.nu2 * e0sq
                    ),
                });
            }
            let dz = fs.derivatives_at(i, params.fd_order);
            let mut zd = rhs::time_derivative(z, &dz, &th, params.kappa);
            if params.ko_eps != 0.0 {
                let ko = fs.ko_at(i, params.fd_order, params.ko_eps);
                for k in 0..NFIELDS {
                    zd[k] += ko[k];
                }
            }
            *o = zd;
            Ok(())
        })
}

/// CFL time step for a grid.
pub fn cfl_dt(h: f64, params: &EvolveParams) -> f64 {
    params.cfl * h // lambda_max = 1
}

/// Advance `fs` by one classic RK4 step of size `dt`.
pub fn step<E: EquationOfState>(
    fs: &mut FieldSet,
    eos: &E,
    params: &EvolveParams,
    dt: f64,
    ws: &mut Workspace,
) -> Result<()> {
    let Workspace { k, ytmp, acc } = ws;
    assert_eq!(k.data.len(), fs.data.len(), "workspace built for a different grid");

    // acc starts as y and accumulates the weighted stage sum.
    acc.data.copy_from_slice(&fs.data);

    // helper: acc += w * k;  ytmp = y + c * k
    fn accumulate(
        acc: &mut FieldSet,
        ytmp: &mut FieldSet,
        y: &FieldSet,
        k: &FieldSet,
        w: f64,
        c: Option<f64>,
    ) {
        acc.data
            .par_iter_mut()
            .zip(&k.data)
            .for_each(|(a, kv)| {
                for j in 0..NFIELDS {
                    a[j] += w * kv[j];
                }
            });
        if let Some(c) = c {
            ytmp
                .data
                .par_iter_mut()
                .zip(y.data.par_iter().zip(&k.data))
                .for_each(|(t, (yv, kv))| {
                    for j in 0..NFIELDS {
                        t[j] = yv[j] + c * kv[j];
                    }
                });
        }
    }

    rhs_fields(fs, eos, params, k)?;
    accumulate(acc, ytmp, fs, k, dt / 6.0, Some(0.5 * dt));

    rhs_fields(ytmp, eos, params, k)?;
    accumulate(acc, ytmp, fs, k, dt / 3.0, Some(0.5 * dt));

    rhs_fields(ytmp, eos, params, k)?;
    accumulate(acc, ytmp, fs, k, dt / 3.0, Some(dt));

    rhs_fields(ytmp, eos, params, k)?;
    accumulate(acc, ytmp, fs, k, dt / 6.0, None);

    std::mem::swap(&mut fs.data, &mut acc.data);
    if !fs.all_finite() {
        return Err(Error::Other("non-finite value after RK4 step".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::EntropicPolytrope;
    use crate::grid::Grid;
    use crate::scenario::flrw_reference_state;
    use crate::state::State;

    #[test]
    fn rest_state_is_an_exact_rk4_fixed_point() {
        // Uniform quiescent fluid, matter decoupled: every stage derivative
        // is identically zero, so the state must be bit-unchanged.
        let eos = EntropicPolytrope::new(2.0);
        let th = eos.at(1.0, 0.0);
        let z = State::minkowski_rest(th.rho, 1.0, 0.0);
        let grid = Grid::unit_box(8);
        let mut fs = FieldSet::uniform(grid, z.0);
        let reference = fs.clone();
        let params = EvolveParams {
            kappa: 0.0,
            ..Default::default()
        };
        let mut ws = Workspace::new(&fs);
        let dt = cfl_dt(grid.h, &params);
        for _ in 0..20 {
            step(&mut fs, &eos, &params, dt, &mut ws).unwrap();
        }
        assert!(fs.max_abs_diff(&reference) <= 1e-14);
    }

    #[test]
    fn homogeneous_evolution_tracks_the_cosmological_oracle() {
        // On homogeneous data the stencil terms vanish identically and the
        // PDE solver must agree with the independently hand-derived
        // (H, rho, r, e) ODE system integrated by the same RK4 scheme.
        let eos = EntropicPolytrope::new(2.0);
        let kappa = 1.0;
        let (r0, s0) = (1.0, 0.0);
        let th0 = eos.at(r0, s0);
        let hub = (kappa * th0.rho / 3.0).sqrt();
        let z0 = State::flrw(hub, 1.0, th0.rho, r0, s0);
        let grid = Grid::unit_box(8);
        let mut fs = FieldSet::uniform(grid, z0.0);
        let params = EvolveParams {
            kappa,
            ..Default::default()
        };
        let mut ws = Workspace::new(&fs);
        let dt = 1e-3;
        let steps = 50;
        for _ in 0..steps {
            step(&mut fs, &eos, &params, dt, &mut ws).unwrap();
        }
        let oracle = flrw_reference_state(&eos, kappa, r0, s0, dt, steps);
        let mut err: f64 = 0.0;
        for k in 0..crate::state::NFIELDS {
            err = err.max((fs.data[0][k] - oracle.0[k]).abs());
        }
        assert!(err <= 1e-12, "PDE vs ODE oracle deviation {err}");
        // and the field stays exactly homogeneous
        let uniform = FieldSet::uniform(grid, fs.data[0]);
        assert!(fs.max_abs_diff(&uniform) <= 1e-13);
    }

    #[test]
    fn time_integration_is_fourth_order() {
        // Richardson: halving dt on homogeneous gravitating data must cut
        // the error against a fine-dt reference by about 2^4.
        let eos = EntropicPolytrope::new(2.0);
        let kappa = 1.0;
        let th0 = eos.at(1.0, 0.0);
        let hub = (kappa * th0.rho / 3.0).sqrt();
        let z0 = State::flrw(hub, 1.0, th0.rho, 1.0, 0.0);
        let grid = Grid::unit_box(4);
        let params = EvolveParams {
            kappa,
            ..Default::default()
        };
        let t_final = 0.4;
        let run = |nsteps: usize| -> [f64; crate::state::NFIELDS] {
            let mut fs = FieldSet::uniform(grid, z0.0);
            let mut ws = Workspace::new(&fs);
            let dt = t_final / nsteps as f64;
            for _ in 0..nsteps {
                step(&mut fs, &eos, &params, dt, &mut ws).unwrap();
            }
            fs.data[0]
        };
        let fine = run(1024);
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let got = run(n);
                (0..crate::state::NFIELDS)
                    .map(|k| (got[k] - fine[k]).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                order > 3.5,
                "RK4 convergence order {order} (errors {errs:?})"
            );
        }
    }
}
