//! Coordinate-space curvature helpers.
//!
//! Curvature conventions (used consistently for the 3d slice metric and the
//! 4d oracle):
//!
//! ```text
//! C^i_jk  = (1/2) g^il (d_j g_lk + d_k g_lj - d_l g_jk)
//! R^i_jkl = d_k C^i_lj - d_l C^i_kj + C^i_km C^m_lj - C^i_lm C^m_kj
//! R_jl    = R^i_jil ,   R = g^jl R_jl .
//! ```
//!
//! The first lower index of the Christoffel symbol is the differentiation
//! direction, matching the frame-connection convention `nabla_a e_b =
//! G_a^c_b e_c` used everywhere else in the crate.
//!
//! The induced slice metric is *negative definite* in our signature
//! (+,-,-,-); all formulas here are sign-convention agnostic in the metric
//! (Christoffels and `R^i_jkl` are invariant under `g -> -g`, the scalar
//! curvature flips).

use crate::grid::{scalar_derivative, Grid};
use nalgebra::Matrix3;

pub type Mat3 = [[f64; 3]; 3];
pub type Chris3 = [[[f64; 3]; 3]; 3];
pub type Riem3 = [[[[f64; 3]; 3]; 3]; 3];

/// Inverse of a 3x3 metric; panics on singular input.
pub fn inv3(g: &Mat3) -> Mat3 {
    let m = Matrix3::from_fn(|i, j| g[i][j]);
    let inv = m.try_inverse().expect("singular 3-metric");
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = inv[(i, j)];
        }
    }
    out
}

/// Christoffel symbols `C^i_{jk}` of a 3-metric field on the grid
/// (`out[i][j][k]`, symmetric in `j, k`), via centered differences.
pub fn christoffel_field(grid: &Grid, g: &[Mat3], order: usize) -> Vec<Chris3> {
    let n = grid.len();
    // component-wise scalar views for differentiation
    let comp = |i: usize, j: usize| -> Vec<f64> { g.iter().map(|m| m[i][j]).collect() };
    let mut dg = vec![[[[0.0; 3]; 3]; 3]; n]; // dg[A][i][j] = d_A g_ij
    for i in 0..3 {
        for j in i..3 {
            let f = comp(i, j);
            for pt in 0..n {
                for a in 0..3 {
                    let d = scalar_derivative(grid, &f, pt, a, order);
                    dg[pt][a][i][j] = d;
                    dg[pt][a][j][i] = d;
                }
            }
        }
    }
    let mut out = vec![[[[0.0; 3]; 3]; 3]; n];
    for pt in 0..n {
        let ginv = inv3(&g[pt]);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let mut v = 0.0;
                    for l in 0..3 {
                        v += 0.5
                            * ginv[i][l]
                            * (dg[pt][j][l][k] + dg[pt][k][l][j] - dg[pt][l][j][k]);
                    }
                    out[pt][i][j][k] = v;
                }
            }
        }
    }
    out
}

/// Riemann tensor `R^i_{jkl}` of a 3-metric field, from finite differences
/// of the Christoffel field.
pub fn riemann_field(grid: &Grid, chris: &[Chris3], order: usize) -> Vec<Riem3> {
    let n = grid.len();
    let comp = |i: usize, j: usize, k: usize| -> Vec<f64> {
        chris.iter().map(|c| c[i][j][k]).collect()
    };
    // dc[A][i][j][k] = d_A C^i_jk
    let mut dc = vec![[[[[0.0; 3]; 3]; 3]; 3]; n];
    for i in 0..3 {
        for j in 0..3 {
            for k in j..3 {
                let f = comp(i, j, k);
                for pt in 0..n {
                    for a in 0..3 {
                        let d = scalar_derivative(grid, &f, pt, a, order);
                        dc[pt][a][i][j][k] = d;
                        dc[pt][a][i][k][j] = d;
                    }
                }
            }
        }
    }
    let mut out = vec![[[[[0.0; 3]; 3]; 3]; 3]; n];
    for pt in 0..n {
        let c = &chris[pt];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        let mut v = dc[pt][k][i][l][j] - dc[pt][l][i][k][j];
                        for m in 0..3 {
                            v += c[i][k][m] * c[m][l][j] - c[i][l][m] * c[m][k][j];
                        }
                        out[pt][i][j][k][l] = v;
                    }
                }
            }
        }
    }
    out
}

/// Scalar curvature from a Riemann field at one point.
pub fn scalar_curvature(g: &Mat3, riem: &Riem3) -> f64 {
    let ginv = inv3(g);
    let mut r = 0.0;
    for j in 0..3 {
        for l in 0..3 {
            let mut ric = 0.0;
            for i in 0..3 {
                ric += riem[i][j][i][l];
            }
            r += ginv[j][l] * ric;
        }
    }
    r
}

/// Fully lowered 3d Riemann `R_{ijkl} = g_im R^m_jkl` at one point.
pub fn lower_riemann(g: &Mat3, riem: &Riem3) -> Riem3 {
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    let mut v = 0.0;
                    for m in 0..3 {
                        v += g[i][m] * riem[m][j][k][l];
                    }
                    out[i][j][k][l] = v;
                }
            }
        }
    }
    out
}

/// Fully lowered 4d Riemann tensor `R_{abcd}` of an analytic spacetime
/// metric at a point, computed by nested central differences of the
/// Christoffel symbols. Test oracle: slow but independent of every other
/// curvature path in the crate.
pub fn riemann4_fd<F: Fn(&[f64; 4]) -> [[f64; 4]; 4]>(
    metric: &F,
    x: &[f64; 4],
    h: f64,
) -> [[[[f64; 4]; 4]; 4]; 4] {
    let inv4 = |g: &[[f64; 4]; 4]| -> [[f64; 4]; 4] {
        let m = nalgebra::Matrix4::from_fn(|i, j| g[i][j]);
        let inv = m.try_inverse().expect("singular 4-metric");
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = inv[(i, j)];
            }
        }
        out
    };
    let chris = |x: &[f64; 4]| -> [[[f64; 4]; 4]; 4] {
        let mut dg = [[[0.0; 4]; 4]; 4]; // dg[a][i][j]
        for a in 0..4 {
            let mut xp = *x;
            let mut xm = *x;
            xp[a] += h;
            xm[a] -= h;
            let gp = metric(&xp);
            let gm = metric(&xm);
            for i in 0..4 {
                for j in 0..4 {
                    dg[a][i][j] = (gp[i][j] - gm[i][j]) / (2.0 * h);
                }
            }
        }
        let ginv = inv4(&metric(x));
        let mut c = [[[0.0; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let mut v = 0.0;
                    for l in 0..4 {
                        v += 0.5 * ginv[i][l] * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k]);
                    }
                    c[i][j][k] = v;
                }
            }
        }
        c
    };
    let c0 = chris(x);
    let mut dc = [[[[0.0; 4]; 4]; 4]; 4]; // dc[a][i][j][k]
    for a in 0..4 {
        let mut xp = *x;
        let mut xm = *x;
        xp[a] += h;
        xm[a] -= h;
        let cp = chris(&xp);
        let cm = chris(&xm);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    dc[a][i][j][k] = (cp[i][j][k] - cm[i][j][k]) / (2.0 * h);
                }
            }
        }
    }
    let g = metric(x);
    let mut up = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let mut v = dc[k][i][l][j] - dc[l][i][k][j];
                    for m in 0..4 {
                        v += c0[i][k][m] * c0[m][l][j] - c0[i][l][m] * c0[m][k][j];
                    }
                    up[i][j][k][l] = v;
                }
            }
        }
    }
    let mut low = [[[[0.0; 4]; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let mut v = 0.0;
                    for m in 0..4 {
                        v += g[i][m] * up[m][j][k][l];
                    }
                    low[i][j][k][l] = v;
                }
            }
        }
    }
    low
}
