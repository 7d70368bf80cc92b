//! Runtime diagnostics: constraint residuals, characteristic speeds,
//! trace/equation-of-state monitors, and uniformly local Sobolev norms.
//!
//! The reduced evolution only advances a subset of the full first-order
//! system; the remaining equations are *constraints* that propagate. We
//! monitor them as pointwise residual fields:
//!
//! * torsion `T_a^m_b e_m = -[e_a, e_b] + (G_a^m_b - G_b^m_a) e_m`;
//! * the Riemann decomposition residual
//!   `d^a_bcd = R^a_bcd - W^a_bcd - g^a_[c S_d]b + g_b[c S_d]^a`
//!   with `R` rebuilt from the connection, `W` rebuilt from the stored
//!   electric/magnetic parts, and the Schouten tensor `S` from matter;
//! * the divergence of the Friedrich tensor
//!   `F_abc = div_m (W^m_abc - g^m_[b S_c]a)`;
//! * the Euler residual
//!   `q_a = (p+rho) u^m grad_m u_a - nu^2 (p+rho) u_a div u - grad_a p`,
//!   whose time component vanishes identically in the comoving gauge as
//!   long as the evolved energy density tracks the equation of state;
//! * the entropy-gradient consistency `s_a - e_a(s)`.
//!
//! Time derivatives entering these residuals are evaluated through the
//! evolution right-hand side itself (without dissipation), spatial ones by
//! the same centered stencils as the integrator, so on exact solutions all
//! residuals are pure truncation error and shrink at the stencil order.
//!
//! All norms and reductions run in a fixed serial order so that repeated
//! runs are bit-identical.

use crate::eos::EquationOfState;
use crate::evolve::EvolveParams;
use crate::frame::eps3;
use crate::grid::{fd_stencil, FieldSet, Grid};
use crate::rhs::{self, Mat52};
use crate::state::{full_gamma, State, NFIELDS, SLOT_ENTROPY, SLOT_RHO, SLOT_RMASS};
use crate::{Error, Result};
use nalgebra::Matrix3;

type Ten4 = [[[[f64; 4]; 4]; 4]; 4];

/// Lowered fully-projected volume form `eps_abc` in the comoving frame:
/// nonzero only for spatial indices.
#[inline]
fn eps_l(a: usize, b: usize, c: usize) -> f64 {
    if a == 0 || b == 0 || c == 0 {
        0.0
    } else {
        eps3(a - 1, b - 1, c - 1)
    }
}

/// `eps^m_ab` with the first index raised by the frame metric.
#[inline]
fn eps_u1(m: usize, a: usize, b: usize) -> f64 {
    -eps_l(m, a, b)
}

/// Lowered projector `pi_ab = g_ab - u_a u_b` in the comoving frame.
#[inline]
fn pi_l(a: usize, b: usize) -> f64 {
    if a == b && a != 0 {
        -1.0
    } else {
        0.0
    }
}

/// Rebuild the lowered Weyl tensor from its electric and magnetic parts in
/// the comoving frame (where `u = e_0`):
///
/// ```text
/// W_abcd = 2 ( pi_b[c E_d]a - u_b u_[c E_d]a - pi_a[c E_d]b + u_a u_[c E_d]b )
///        - 2 ( u_[c B_d]m eps^m_ab + u_[a B_b]m eps^m_cd ) .
/// ```
///
/// Exact (an identity) when `E` and `B` are symmetric and trace-free.
pub fn weyl_from_eb(em: &[[f64; 3]; 3], bm: &[[f64; 3]; 3]) -> Ten4 {
    // lowered frame components with vanishing time row/column
    let e = |a: usize, b: usize| -> f64 {
        if a == 0 || b == 0 {
            0.0
        } else {
            em[a - 1][b - 1]
        }
    };
    let bb = |a: usize, b: usize| -> f64 {
        if a == 0 || b == 0 {
            0.0
        } else {
            bm[a - 1][b - 1]
        }
    };
    let u = |a: usize| -> f64 {
        if a == 0 {
            1.0
        } else {
            0.0
        }
    };
    let beps = |d: usize, a: usize, b: usize| -> f64 {
        let mut v = 0.0;
        for m in 1..4 {
            v += bb(d, m) * eps_u1(m, a, b);
        }
        v
    };
    let mut w = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let electric = pi_l(b, c) * e(d, a) - pi_l(b, d) * e(c, a)
                        - (u(b) * u(c) * e(d, a) - u(b) * u(d) * e(c, a))
                        - (pi_l(a, c) * e(d, b) - pi_l(a, d) * e(c, b))
                        + (u(a) * u(c) * e(d, b) - u(a) * u(d) * e(c, b));
                    let magnetic = (u(c) * beps(d, a, b) - u(d) * beps(c, a, b))
                        + (u(a) * beps(b, c, d) - u(b) * beps(a, c, d));
                    w[a][b][c][d] = electric - magnetic;
                }
            }
        }
    }
    w
}

/// Rebuild the lowered *dual* Weyl tensor from `E` and `B` in the comoving
/// frame:
///
/// ```text
/// W*_abcd = 2 u_[a E_b]m eps^m_cd - 4 E_m[a eps_b]^m_[c u_d]
///         - 4 u_[a B_b][c u_d] - B_mn eps^m_ab eps^n_cd .
/// ```
pub fn weyl_dual_from_eb(em: &[[f64; 3]; 3], bm: &[[f64; 3]; 3]) -> Ten4 {
    let e = |a: usize, b: usize| -> f64 {
        if a == 0 || b == 0 {
            0.0
        } else {
            em[a - 1][b - 1]
        }
    };
    let bb = |a: usize, b: usize| -> f64 {
        if a == 0 || b == 0 {
            0.0
        } else {
            bm[a - 1][b - 1]
        }
    };
    let u = |a: usize| -> f64 {
        if a == 0 {
            1.0
        } else {
            0.0
        }
    };
    // eps_b^m_c: middle index raised
    let eps_m2 = |b: usize, m: usize, c: usize| -> f64 { -eps_l(b, m, c) };
    let eeps = |a: usize, c: usize, d: usize| -> f64 {
        let mut v = 0.0;
        for m in 1..4 {
            v += e(a, m) * eps_u1(m, c, d);
        }
        v
    };
    let mut w = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let t1 = u(a) * eeps(b, c, d) - u(b) * eeps(a, c, d);
                    let mut t2 = 0.0;
                    for m in 1..4 {
                        t2 += e(m, a) * eps_m2(b, m, c) * u(d)
                            - e(m, b) * eps_m2(a, m, c) * u(d)
                            - e(m, a) * eps_m2(b, m, d) * u(c)
                            + e(m, b) * eps_m2(a, m, d) * u(c);
                    }
                    let t3 = u(a) * bb(b, c) * u(d) - u(b) * bb(a, c) * u(d)
                        - u(a) * bb(b, d) * u(c)
                        + u(b) * bb(a, d) * u(c);
                    let mut t4 = 0.0;
                    for m in 1..4 {
                        for nn in 1..4 {
                            t4 += bb(m, nn) * eps_u1(m, a, b) * eps_u1(nn, c, d);
                        }
                    }
                    w[a][b][c][d] = t1 - t2 - t3 - t4;
                }
            }
        }
    }
    w
}

/// Dualize a lowered 4-tensor on its *second* index pair,
/// `T*_abcd = 1/2 eps_cd^mn T_abmn` (the convention used throughout).
pub fn dual_second_pair(t: &Ten4) -> Ten4 {
    use crate::frame::{eps4, eta};
    let mut out = [[[[0.0; 4]; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let mut v = 0.0;
                    for m in 0..4 {
                        for nn in 0..4 {
                            let ep = eps4(c, d, m, nn);
                            if ep != 0.0 {
                                v += 0.5 * ep * eta(m, m) * eta(nn, nn) * t[a][b][m][nn];
                            }
                        }
                    }
                    out[a][b][c][d] = v;
                }
            }
        }
    }
    out
}

/// Schouten tensor (lowered, comoving frame) from the matter variables,
/// using the trace-reversed field equations:
/// `S_00 = K (2/3 rho + p)`, `S_ab = K rho/3 delta_ab`. Linear in
/// `(rho, p)`, so also valid on their derivatives.
fn schouten(kappa: f64, rho: f64, p: f64) -> [[f64; 4]; 4] {
    let mut s = [[0.0; 4]; 4];
    s[0][0] = kappa * (2.0 / 3.0 * rho + p);
    for a in 1..4 {
        s[a][a] = kappa * rho / 3.0;
    }
    s
}

/// Friedrich tensor `F^m_abc = W^m_abc - 1/2 (delta^m_b S_ca - delta^m_c S_ba)`
/// with `W` rebuilt from `(E, B)`; linear in all three inputs.
fn friedrich(em: &[[f64; 3]; 3], bm: &[[f64; 3]; 3], s: &[[f64; 4]; 4]) -> Ten4 {
    use crate::frame::eta;
    let w = weyl_from_eb(em, bm);
    let mut f = [[[[0.0; 4]; 4]; 4]; 4];
    for m in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let mut v = eta(m, m) * w[m][a][b][c];
                    if m == b {
                        v -= 0.5 * s[c][a];
                    }
                    if m == c {
                        v += 0.5 * s[b][a];
                    }
                    f[m][a][b][c] = v;
                }
            }
        }
    }
    f
}

/// Pointwise sup-magnitude residual fields of all monitored constraint
/// quantities.
#[derive(Debug, Clone)]
pub struct ResidualFields {
    pub grid: Grid,
    /// Torsion `T_a^m_b` (all components).
    pub torsion: Vec<f64>,
    /// Riemann decomposition residual `d_abcd`.
    pub riemann_decomp: Vec<f64>,
    /// Divergence of the Friedrich tensor, `F_abc`.
    pub friedrich: Vec<f64>,
    /// Spatial Euler residual `q_a` (a = 1..3).
    pub euler: Vec<f64>,
    /// Time component `q_0` (an algebraic identity in the comoving gauge;
    /// measures drift of the evolved density off the equation of state).
    pub euler_time: Vec<f64>,
    /// Entropy-gradient consistency `s_a - e_a(s)`.
    pub entropy_grad: Vec<f64>,
}

/// Sup norms of the residual fields, in the same order.
#[derive(Debug, Clone, Copy)]
pub struct ResidualNorms {
    pub torsion: f64,
    pub riemann_decomp: f64,
    pub friedrich: f64,
    pub euler: f64,
    pub euler_time: f64,
    pub entropy_grad: f64,
}

impl ResidualFields {
    pub fn norms(&self) -> ResidualNorms {
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, &x| m.max(x));
        ResidualNorms {
            torsion: sup(&self.torsion),
            riemann_decomp: sup(&self.riemann_decomp),
            friedrich: sup(&self.friedrich),
            euler: sup(&self.euler),
            euler_time: sup(&self.euler_time),
            entropy_grad: sup(&self.entropy_grad),
        }
    }
}

/// Evaluate all constraint residual fields on a snapshot.
///
/// Dissipation is deliberately excluded from the time derivatives here:
/// the residuals measure distance to the continuum system.
pub fn residual_fields<E: EquationOfState>(
    fs: &FieldSet,
    eos: &E,
    params: &EvolveParams,
) -> Result<ResidualFields> {
    use crate::frame::eta;
    use rayon::prelude::*;
    let grid = fs.grid;
    let n = grid.len();
    // per-point category maxima, computed in parallel (each value depends
    // only on the frozen snapshot)
    let vals: Vec<[f64; 6]> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<[f64; 6]> {
        let z = &fs.data[i];
        let st = State(*z);
        let th = st.check_admissible(eos, i)?;
        let dz = fs.derivatives_at(i, params.fd_order);
        let zt = rhs::time_derivative(z, &dz, &th, params.kappa);

        // coordinate components of the frame: ecomp[A][mu]; e_0 = d_t in
        // the comoving gauge
        let mut ecomp = [[0.0; 4]; 4];
        ecomp[0][0] = 1.0;
        for coord in 0..4 {
            for leg in 0..3 {
                ecomp[coord][leg + 1] = st.frame(coord, leg);
            }
        }
        // directional derivative of a packed component: e_mu(z[k])
        let dir = |mu: usize, k: usize| -> f64 {
            let mut v = ecomp[0][mu] * zt[k];
            for cc in 0..3 {
                v += ecomp[cc + 1][mu] * dz[cc][k];
            }
            v
        };

        let gam = full_gamma(z);
        let gam_t = full_gamma(&zt);
        let gam_d = [full_gamma(&dz[0]), full_gamma(&dz[1]), full_gamma(&dz[2])];
        // e_c(G_d^a_b)
        let dgam = |c: usize, d: usize, a: usize, b: usize| -> f64 {
            let mut v = ecomp[0][c] * gam_t[d][a][b];
            for cc in 0..3 {
                v += ecomp[cc + 1][c] * gam_d[cc][d][a][b];
            }
            v
        };

        // --- torsion ---
        let mut tmax: f64 = 0.0;
        for al in 0..4 {
            for be in (al + 1)..4 {
                for coord in 0..4 {
                    // e_al(e^A_be) - e_be(e^A_al): frame coordinate
                    // components are state entries for the spatial legs and
                    // constants for e_0
                    let comp_slot = |leg: usize| coord * 3 + leg; // packed frame slot
                    let e_of = |mu: usize, target: usize| -> f64 {
                        // e_mu applied to the coordinate component e^coord_target
                        if target == 0 {
                            0.0 // e_0 components are gauge constants
                        } else {
                            dir(mu, comp_slot(target - 1))
                        }
                    };
                    let mut t = e_of(al, be) - e_of(be, al);
                    for m in 0..4 {
                        t -= (gam[al][m][be] - gam[be][m][al]) * ecomp[coord][m];
                    }
                    tmax = tmax.max(t.abs());
                }
            }
        }
        let torsion_i = tmax;

        // --- Riemann decomposition residual ---
        let riem = |a: usize, b: usize, c: usize, d: usize| -> f64 {
            let mut v = dgam(c, d, a, b) - dgam(d, c, a, b);
            for m in 0..4 {
                v -= gam[m][a][b] * (gam[c][m][d] - gam[d][m][c]);
                v += gam[c][a][m] * gam[d][m][b] - gam[d][a][m] * gam[c][m][b];
            }
            v
        };
        let p = th.p;
        let rho = st.rho();
        let w4 = weyl_from_eb(&st.weyl_e_mat(), &st.weyl_b_mat());
        let s4 = schouten(params.kappa, rho, p);
        let mut dmax: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let rl = eta(a, a) * riem(a, b, c, d);
                        let gs = 0.5 * (eta(a, c) * s4[d][b] - eta(a, d) * s4[c][b])
                            - 0.5 * (eta(b, c) * s4[d][a] - eta(b, d) * s4[c][a]);
                        dmax = dmax.max((rl - w4[a][b][c][d] - gs).abs());
                    }
                }
            }
        }
        let riemann_i = dmax;

        // --- Friedrich divergence ---
        // time and space derivatives of (E, B, Schouten) by linearity
        let (et, btm) = crate::state::full_weyl(&zt);
        let p_t = th.dp_dr * zt[SLOT_RMASS] + th.dp_ds * zt[SLOT_ENTROPY];
        let s4_t = schouten(params.kappa, zt[SLOT_RHO], p_t);
        let f_t = friedrich(&et, &btm, &s4_t);
        let f_0 = friedrich(&st.weyl_e_mat(), &st.weyl_b_mat(), &s4);
        let mut f_d = [[[[[0.0; 4]; 4]; 4]; 4]; 3];
        for cc in 0..3 {
            let (ed, bd) = crate::state::full_weyl(&dz[cc]);
            let p_d = th.dp_dr * dz[cc][SLOT_RMASS] + th.dp_ds * dz[cc][SLOT_ENTROPY];
            let s4_d = schouten(params.kappa, dz[cc][SLOT_RHO], p_d);
            f_d[cc] = friedrich(&ed, &bd, &s4_d);
        }
        let mut fmax: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let mut v = 0.0;
                    for m in 0..4 {
                        // e_m(F^m_abc)
                        let mut d = ecomp[0][m] * f_t[m][a][b][c];
                        for cc in 0..3 {
                            d += ecomp[cc + 1][m] * f_d[cc][m][a][b][c];
                        }
                        v += d;
                        for nn in 0..4 {
                            v += gam[m][m][nn] * f_0[nn][a][b][c]
                                - gam[m][nn][a] * f_0[m][nn][b][c]
                                - gam[m][nn][b] * f_0[m][a][nn][c]
                                - gam[m][nn][c] * f_0[m][a][b][nn];
                        }
                    }
                    fmax = fmax.max(v.abs());
                }
            }
        }
        let friedrich_i = fmax;

        // --- Euler residual ---
        // q_a = (p+rho) u^m grad_m u_a - nu^2 (p+rho) u_a div u - e_a(p);
        // in the comoving frame u^m grad_m u_a = -G_0^0_a and
        // div u = G_m^m_0 (spatial trace).
        let en = p + rho;
        let trg: f64 = (0..3).map(|a| gam[a + 1][a + 1][0]).sum();
        let e_p = |mu: usize| -> f64 {
            let mut v = ecomp[0][mu] * p_t;
            for cc in 0..3 {
                let p_c = th.dp_dr * dz[cc][SLOT_RMASS] + th.dp_ds * dz[cc][SLOT_ENTROPY];
                v += ecomp[cc + 1][mu] * p_c;
            }
            v
        };
        let euler_time_i = (-th.nu2 * en * trg - e_p(0)).abs();
        let mut qmax: f64 = 0.0;
        for a in 0..3 {
            let q = -en * st.accel(a) - e_p(a + 1);
            qmax = qmax.max(q.abs());
        }
        let euler_i = qmax;

        // --- entropy gradient ---
        let mut smax: f64 = (zt[SLOT_ENTROPY] - st.sgrad(0)).abs();
        for a in 0..3 {
            smax = smax.max((dir(a + 1, SLOT_ENTROPY) - st.sgrad(a + 1)).abs());
        }
        Ok([torsion_i, riemann_i, friedrich_i, euler_i, euler_time_i, smax])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = ResidualFields {
        grid,
        torsion: vec![0.0; n],
        riemann_decomp: vec![0.0; n],
        friedrich: vec![0.0; n],
        euler: vec![0.0; n],
        euler_time: vec![0.0; n],
        entropy_grad: vec![0.0; n],
    };
    for (i, v) in vals.iter().enumerate() {
        out.torsion[i] = v[0];
        out.riemann_decomp[i] = v[1];
        out.friedrich[i] = v[2];
        out.euler[i] = v[3];
        out.euler_time[i] = v[4];
        out.entropy_grad[i] = v[5];
    }
    Ok(out)
}

/// Trace and equation-of-state drift monitors (sup norms).
#[derive(Debug, Clone, Copy)]
pub struct TraceMonitors {
    /// `|tr E|` sup.
    pub weyl_e_trace: f64,
    /// `|tr B|` sup.
    pub weyl_b_trace: f64,
    /// `|rho - P(r, s)|` sup: drift of the evolved energy density off the
    /// equation of state.
    pub eos_drift: f64,
}

pub fn trace_monitors<E: EquationOfState>(fs: &FieldSet, eos: &E) -> TraceMonitors {
    let mut te: f64 = 0.0;
    let mut tb: f64 = 0.0;
    let mut dr: f64 = 0.0;
    for z in &fs.data {
        let st = State(*z);
        let em = st.weyl_e_mat();
        let bm = st.weyl_b_mat();
        te = te.max((em[0][0] + em[1][1] + em[2][2]).abs());
        tb = tb.max((bm[0][0] + bm[1][1] + bm[2][2]).abs());
        dr = dr.max((st.rho() - eos.at(st.rmass(), st.entropy()).rho).abs());
    }
    TraceMonitors {
        weyl_e_trace: te,
        weyl_b_trace: tb,
        eos_drift: dr,
    }
}

/// Characteristic speeds of the system at one state in the unit spatial
/// direction `xi`: the generalized eigenvalues of the symmetric pencil
/// `(xi_A M^A, M^0)`, computed by Cholesky whitening of the positive
/// definite `M^0`. Returns the sorted spectrum.
///
/// On the Minkowski rest state the speed multiset is contained in
/// `{0, +-1/2, +-nu, +-1}`.
pub fn characteristic_speeds<E: EquationOfState>(
    z: &[f64; NFIELDS],
    eos: &E,
    kappa: f64,
    xi: [f64; 3],
) -> Result<Vec<f64>> {
    let norm = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
    if !(norm > 0.0) {
        return Err(Error::Config("characteristic direction must be nonzero".into()));
    }
    let xin = [xi[0] / norm, xi[1] / norm, xi[2] / norm];
    let st = State(*z);
    let th = st.check_admissible(eos, 0)?;
    let m0 = rhs::m0_matrix(z, &th, kappa);
    let a = rhs::principal(z, &th, kappa, xin);
    let chol = nalgebra::Cholesky::new(m0).ok_or(Error::Inadmissible {
        index: 0,
        reason: "time principal matrix not positive definite".into(),
    })?;
    let l = chol.l();
    // B = L^-1 A L^-T (symmetric, same generalized eigenvalues)
    let y = l.solve_lower_triangular(&a).ok_or(Error::Inadmissible {
        index: 0,
        reason: "singular Cholesky factor".into(),
    })?;
    let bt = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::Inadmissible {
            index: 0,
            reason: "singular Cholesky factor".into(),
        })?;
    let b: Mat52 = 0.5 * (bt + bt.transpose());
    let mut ev: Vec<f64> = b.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ev)
}

/// Smallest eigenvalue of the time principal matrix `M^0` (positive on
/// admissible states).
pub fn m0_min_eigenvalue<E: EquationOfState>(
    z: &[f64; NFIELDS],
    eos: &E,
    kappa: f64,
) -> Result<f64> {
    let st = State(*z);
    let th = st.check_admissible(eos, 0)?;
    let m0 = rhs::m0_matrix(z, &th, kappa);
    let sym: Mat52 = 0.5 * (m0 + m0.transpose());
    Ok(sym
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |m, &x| m.min(x)))
}

/// Largest eigenvalue of the induced slice metric `g_t` (negative when the
/// slice stays spacelike).
pub fn induced_metric_max_eigenvalue(z: &[f64; NFIELDS]) -> Result<f64> {
    let g = State(*z).induced_metric()?;
    let m = Matrix3::from_fn(|i, j| 0.5 * (g[i][j] + g[j][i]));
    Ok(m
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::NEG_INFINITY, |mx, &x| mx.max(x)))
}

/// Discrete uniformly local Sobolev norm of a scalar grid function:
/// the sup over an overlapping cover by periodic cubic patches of side
/// `patch` points (anchored at strides of `patch/2`) of
///
/// ```text
/// ( h^3 * sum over patch points, derivative strings of length <= order
///         of (FD derivative)^2 )^(1/2) .
/// ```
///
/// Mixed derivatives are taken as iterated one-dimensional centered
/// stencils (each ordering counted, a fixed multiplicity-weighted variant
/// of the usual multi-index sum). Monotone non-decreasing in `order`; with
/// `patch = n` every patch covers the grid and the value equals the global
/// norm.
pub fn ul_sobolev_norm(
    grid: &Grid,
    field: &[f64],
    order: usize,
    patch: usize,
    fd_order: usize,
) -> Result<f64> {
    assert_eq!(field.len(), grid.len());
    let (offsets, _) = fd_stencil(fd_order);
    let width = (offsets.iter().map(|o| o.abs()).max().unwrap() * 2 + 1) as usize;
    if patch < width {
        return Err(Error::Config(format!(
            "patch side {patch} smaller than the stencil width {width}"
        )));
    }
    if patch > grid.n {
        return Err(Error::Config(format!(
            "patch side {patch} exceeds the grid size {}",
            grid.n
        )));
    }
    // derivative levels: level k holds all length-k derivative strings
    let mut levels: Vec<Vec<Vec<f64>>> = vec![vec![field.to_vec()]];
    for _ in 0..order {
        let prev = levels.last().unwrap();
        let mut next = Vec::with_capacity(prev.len() * 3);
        for f in prev {
            for dim in 0..3 {
                let mut d = vec![0.0; grid.len()];
                for (i, di) in d.iter_mut().enumerate() {
                    *di = crate::grid::scalar_derivative(grid, f, i, dim, fd_order);
                }
                next.push(d);
            }
        }
        levels.push(next);
    }
    let stride = (patch / 2).max(1);
    let cell = grid.h * grid.h * grid.h;
    let mut sup: f64 = 0.0;
    let mut anchor = [0usize; 3];
    let anchors: Vec<usize> = (0..grid.n).step_by(stride).collect();
    for &ax in &anchors {
        for &ay in &anchors {
            for &az in &anchors {
                anchor = [ax, ay, az];
                let mut acc = 0.0;
                for dx in 0..patch {
                    for dy in 0..patch {
                        for dz in 0..patch {
                            let i = grid.idx(
                                (anchor[0] + dx) % grid.n,
                                (anchor[1] + dy) % grid.n,
                                (anchor[2] + dz) % grid.n,
                            );
                            for lv in &levels {
                                for f in lv {
                                    acc += f[i] * f[i];
                                }
                            }
                        }
                    }
                }
                sup = sup.max((cell * acc).sqrt());
            }
        }
    }
    let _ = anchor;
    Ok(sup)
}
