//! The 52-component per-point evolution state and its index layout.
//!
//! The unknowns of the first-order system, in storage order:
//!
//! ```text
//! slot  0..12   e^A_a        coordinate components of the spatial triad
//!                            (A = 0..3 coordinate index, a = 1..3 frame leg;
//!                            e^A_0 = delta^A_0 is gauge-fixed, not stored)
//! slot 12..21   G_d^a_b      purely spatial connection, antisymmetric in
//!                            (a, b); stored per differentiation leg d as the
//!                            three pairs (1,2) (1,3) (2,3)
//! slot 21..24   G_0^0_a      acceleration of the fluid frame
//! slot 24..33   G_a^0_b      frame extrinsic-curvature block (row-major)
//! slot 33..39   E_ab         electric Weyl part, symmetric storage
//! slot 39..45   B_ab         magnetic Weyl part, symmetric storage
//! slot 45       rho          energy density
//! slot 46       r            rest-mass density
//! slot 47       s            specific entropy
//! slot 48..52   s_alpha      entropy gradient covector (alpha = 0..3)
//! ```
//!
//! The remaining connection components follow from the gauge and the metric
//! compatibility of the frame connection:
//!
//! ```text
//! G_0^a_b = 0 (Fermi propagation),    G_0^a_0 = G_0^0_a,
//! G_a^b_0 = G_a^0_b,                  G_a^0_0 = 0,  G_0^0_0 = 0,
//! G_d^a_b = -G_d^b_a  (spatial legs).
//! ```
//!
//! [`full_gamma`] materializes all 64 components from a packed 52-vector;
//! since the map is linear it applies equally to the state and to any of its
//! derivative arrays.

use crate::eos::{EquationOfState, ThermoPoint};
use crate::frame::{pair3_index, sym6_index, sym6_to_mat};
use crate::{Error, Result};
use nalgebra::Matrix3;

/// Number of stored unknowns per grid point.
pub const NFIELDS: usize = 52;

pub const SLOT_FRAME: usize = 0;
pub const SLOT_CONN_SPATIAL: usize = 12;
pub const SLOT_ACCEL: usize = 21;
pub const SLOT_EXTR: usize = 24;
pub const SLOT_WEYL_E: usize = 33;
pub const SLOT_WEYL_B: usize = 39;
pub const SLOT_RHO: usize = 45;
pub const SLOT_RMASS: usize = 46;
pub const SLOT_ENTROPY: usize = 47;
pub const SLOT_SGRAD: usize = 48;

/// Human-readable component names, index-aligned with the packed vector.
pub fn field_names() -> Vec<String> {
    let mut names = Vec::with_capacity(NFIELDS);
    for a in 0..4 {
        for i in 1..4 {
            names.push(format!("frame_e{a}_{i}"));
        }
    }
    for d in 1..4 {
        for (i, j) in [(1, 2), (1, 3), (2, 3)] {
            names.push(format!("conn_{d}_{i}{j}"));
        }
    }
    for i in 1..4 {
        names.push(format!("accel_{i}"));
    }
    for i in 1..4 {
        for j in 1..4 {
            names.push(format!("extr_{i}{j}"));
        }
    }
    for (i, j) in [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)] {
        names.push(format!("weyl_e_{i}{j}"));
    }
    for (i, j) in [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)] {
        names.push(format!("weyl_b_{i}{j}"));
    }
    names.push("rho".into());
    names.push("rmass".into());
    names.push("entropy".into());
    for a in 0..4 {
        names.push(format!("sgrad_{a}"));
    }
    assert_eq!(names.len(), NFIELDS);
    names
}

/// Packed per-point state. A thin newtype over the raw 52-vector with typed
/// accessors; frame legs are indexed 0..=2 (naming frame directions 1..=3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State(pub [f64; NFIELDS]);

impl Default for State {
    fn default() -> Self {
        State([0.0; NFIELDS])
    }
}

impl State {
    /// Coordinate component `e^A_a` of spatial frame leg `a` (A = 0..3,
    /// a = 0..2 for legs 1..3).
    #[inline]
    pub fn frame(&self, coord_a: usize, leg: usize) -> f64 {
        self.0[SLOT_FRAME + coord_a * 3 + leg]
    }
    #[inline]
    pub fn set_frame(&mut self, coord_a: usize, leg: usize, v: f64) {
        self.0[SLOT_FRAME + coord_a * 3 + leg] = v;
    }

    /// Spatial connection `G_d^a_b` (all arguments 0..2 naming legs 1..3).
    #[inline]
    pub fn gamma_spatial(&self, d: usize, a: usize, b: usize) -> f64 {
        match pair3_index(a, b) {
            Some((slot, sign)) => sign * self.0[SLOT_CONN_SPATIAL + d * 3 + slot],
            None => 0.0,
        }
    }
    /// Set `G_d^a_b` for `a < b` (the antisymmetric partner is implied).
    #[inline]
    pub fn set_gamma_spatial(&mut self, d: usize, a: usize, b: usize, v: f64) {
        let (slot, sign) = pair3_index(a, b).expect("diagonal spatial connection slot");
        self.0[SLOT_CONN_SPATIAL + d * 3 + slot] = sign * v;
    }

    /// Acceleration `G_0^0_a`.
    #[inline]
    pub fn accel(&self, a: usize) -> f64 {
        self.0[SLOT_ACCEL + a]
    }
    #[inline]
    pub fn set_accel(&mut self, a: usize, v: f64) {
        self.0[SLOT_ACCEL + a] = v;
    }

    /// Extrinsic block `G_a^0_b`.
    #[inline]
    pub fn extr(&self, a: usize, b: usize) -> f64 {
        self.0[SLOT_EXTR + a * 3 + b]
    }
    #[inline]
    pub fn set_extr(&mut self, a: usize, b: usize, v: f64) {
        self.0[SLOT_EXTR + a * 3 + b] = v;
    }

    #[inline]
    pub fn weyl_e(&self, i: usize, j: usize) -> f64 {
        self.0[SLOT_WEYL_E + sym6_index(i, j)]
    }
    #[inline]
    pub fn set_weyl_e(&mut self, i: usize, j: usize, v: f64) {
        self.0[SLOT_WEYL_E + sym6_index(i, j)] = v;
    }
    #[inline]
    pub fn weyl_b(&self, i: usize, j: usize) -> f64 {
        self.0[SLOT_WEYL_B + sym6_index(i, j)]
    }
    #[inline]
    pub fn set_weyl_b(&mut self, i: usize, j: usize, v: f64) {
        self.0[SLOT_WEYL_B + sym6_index(i, j)] = v;
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.0[SLOT_RHO]
    }
    #[inline]
    pub fn rmass(&self) -> f64 {
        self.0[SLOT_RMASS]
    }
    #[inline]
    pub fn entropy(&self) -> f64 {
        self.0[SLOT_ENTROPY]
    }
    /// Entropy-gradient covector component `s_alpha`, alpha = 0..3.
    #[inline]
    pub fn sgrad(&self, alpha: usize) -> f64 {
        self.0[SLOT_SGRAD + alpha]
    }

    /// Electric Weyl part as a 3x3 matrix.
    pub fn weyl_e_mat(&self) -> [[f64; 3]; 3] {
        sym6_to_mat(self.0[SLOT_WEYL_E..SLOT_WEYL_E + 6].try_into().unwrap())
    }
    /// Magnetic Weyl part as a 3x3 matrix.
    pub fn weyl_b_mat(&self) -> [[f64; 3]; 3] {
        sym6_to_mat(self.0[SLOT_WEYL_B..SLOT_WEYL_B + 6].try_into().unwrap())
    }

    /// Uniform fluid at rest on an exact Minkowski background.
    pub fn minkowski_rest(rho: f64, rmass: f64, entropy: f64) -> Self {
        let mut z = State::default();
        for i in 0..3 {
            z.set_frame(i + 1, i, 1.0);
        }
        z.0[SLOT_RHO] = rho;
        z.0[SLOT_RMASS] = rmass;
        z.0[SLOT_ENTROPY] = entropy;
        z
    }

    /// Homogeneous isotropic state: triad `e^A_a = inv_scale * delta`,
    /// extrinsic block `G_a^0_b = hubble * delta` (expanding for positive
    /// `hubble`), everything else as at rest.
    pub fn flrw(hubble: f64, inv_scale: f64, rho: f64, rmass: f64, entropy: f64) -> Self {
        let mut z = State::minkowski_rest(rho, rmass, entropy);
        for i in 0..3 {
            z.set_frame(i + 1, i, inv_scale);
            z.set_extr(i, i, hubble);
        }
        z
    }

    /// Thermodynamic coefficients at this point's `(r, s)`.
    pub fn thermo<E: EquationOfState>(&self, eos: &E) -> ThermoPoint {
        eos.at(self.rmass(), self.entropy())
    }

    /// Spatial part of the triad as a matrix `M[A][a] = e^A_a` (A, a = 0..2
    /// labelling coordinates/legs 1..3).
    pub fn triad_spatial(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for coord_a in 0..3 {
            for leg in 0..3 {
                m[coord_a][leg] = self.frame(coord_a + 1, leg);
            }
        }
        m
    }

    /// Hard admissibility for symmetric hyperbolicity: thermodynamic
    /// positivity, invertible spatial triad, and positivity of the
    /// acceleration/extrinsic principal block `1 - nu^2 |e^0|^2 > 0`.
    pub fn check_admissible<E: EquationOfState>(&self, eos: &E, index: usize) -> Result<ThermoPoint> {
        let t = self.thermo(eos);
        t.check_admissible()
            .map_err(|reason| Error::Inadmissible { index, reason })?;
        let m = Matrix3::from_fn(|a, b| self.triad_spatial()[a][b]);
        let det = m.determinant();
        if det.abs() < 1e-12 {
            return Err(Error::Inadmissible {
                index,
                reason: format!("spatial triad singular (det = {det})"),
            });
        }
        let e0sq: f64 = (0..3).map(|a| self.frame(0, a).powi(2)).sum();
        if 1.0 - t.nu2 * e0sq <= 0.0 {
            return Err(Error::Inadmissible {
                index,
                reason: format!("principal block indefinite: nu^2 |e^0|^2 = {}", t.nu2 * e0sq),
            });
        }
        Ok(t)
    }

    /// Induced coordinate metric `g_t` on a constant-time slice,
    ///
    /// ```text
    /// (g_t)_AB = f^0_A f^0_B - sum_a f^a_A f^a_B ,
    /// ```
    ///
    /// where `d/dx^A = f^a_A e_a + f^0_A d/dt` inverts the frame relation.
    /// Errors when the spatial triad is singular.
    pub fn induced_metric(&self) -> Result<[[f64; 3]; 3]> {
        let m = Matrix3::from_fn(|coord_a, leg| self.frame(coord_a + 1, leg));
        let minv = m
            .try_inverse()
            .ok_or_else(|| Error::DegenerateFrame("spatial triad not invertible".into()))?;
        // f^a_A = (M^-1)[a][A]; f^0_A = -sum_a f^a_A e^0_a
        let mut f0 = [0.0; 3];
        for coord_a in 0..3 {
            for leg in 0..3 {
                f0[coord_a] -= minv[(leg, coord_a)] * self.frame(0, leg);
            }
        }
        let mut g = [[0.0; 3]; 3];
        for ca in 0..3 {
            for cb in 0..3 {
                let mut v = f0[ca] * f0[cb];
                for leg in 0..3 {
                    v -= minv[(leg, ca)] * minv[(leg, cb)];
                }
                g[ca][cb] = v;
            }
        }
        Ok(g)
    }
}

/// Expand the packed connection components of `z` (state *or* any linear
/// derivative of it) into the full symbol `G[a][b][c] = G_a^b_c`.
pub fn full_gamma(z: &[f64; NFIELDS]) -> [[[f64; 4]; 4]; 4] {
    let s = State(*z);
    let mut g = [[[0.0; 4]; 4]; 4];
    for a in 0..3 {
        // G_0^0_a = G_0^a_0
        g[0][0][a + 1] = s.accel(a);
        g[0][a + 1][0] = s.accel(a);
        for b in 0..3 {
            // G_a^0_b = G_a^b_0
            g[a + 1][0][b + 1] = s.extr(a, b);
            g[a + 1][b + 1][0] = s.extr(a, b);
            for c in 0..3 {
                g[a + 1][b + 1][c + 1] = s.gamma_spatial(a, b, c);
            }
        }
    }
    g
}

/// Expand the packed symmetric Weyl parts of `z` into 3x3 matrices
/// `(E, B)`; linear, so valid on derivative arrays as well.
pub fn full_weyl(z: &[f64; NFIELDS]) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let s = State(*z);
    (s.weyl_e_mat(), s.weyl_b_mat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eos::EntropicPolytrope;
    use crate::frame::eta;
    use rand::Rng;
    use rand::SeedableRng;

    fn random_state(rng: &mut impl Rng) -> State {
        let mut z = State::default();
        for (k, v) in z.0.iter_mut().enumerate() {
            *v = rng.gen_range(-1.0..1.0);
            // keep the triad near identity and the matter sector admissible
            if (SLOT_RHO..=SLOT_ENTROPY).contains(&k) {
                *v = rng.gen_range(0.5..2.0);
            }
        }
        for i in 0..3 {
            for a in 0..3 {
                let bump = if i == a { 1.0 } else { 0.0 };
                z.set_frame(i + 1, a, bump + 0.2 * rng.gen_range(-1.0..1.0));
            }
            z.set_frame(0, i, 0.3 * rng.gen_range(-1.0..1.0));
        }
        z
    }

    #[test]
    fn packed_round_trip_through_accessors() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let z = random_state(&mut rng);
        let g = full_gamma(&z.0);
        for a in 0..3 {
            assert_eq!(g[0][0][a + 1], z.accel(a));
            assert_eq!(g[0][a + 1][0], z.accel(a));
            for b in 0..3 {
                assert_eq!(g[a + 1][0][b + 1], z.extr(a, b));
                assert_eq!(g[a + 1][b + 1][0], z.extr(a, b));
            }
        }
        // symmetric storage returns the same value for both orders
        assert_eq!(z.weyl_e(0, 2), z.weyl_e(2, 0));
        assert_eq!(z.weyl_b(1, 2), z.weyl_b(2, 1));
    }

    #[test]
    fn expanded_connection_is_metric_compatible() {
        // G_al^mu_be eta_{mu ga} + G_al^mu_ga eta_{mu be} = 0 for every
        // component of the expansion, for random packed input.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let z = random_state(&mut rng);
            let g = full_gamma(&z.0);
            for al in 0..4 {
                for be in 0..4 {
                    for ga in 0..4 {
                        let mut s = 0.0;
                        for mu in 0..4 {
                            s += g[al][mu][be] * eta(mu, ga) + g[al][mu][ga] * eta(mu, be);
                        }
                        assert!(
                            s.abs() < 1e-15,
                            "metric compatibility violated at ({al},{be},{ga}): {s}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gauge_components_of_expansion_vanish() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let z = random_state(&mut rng);
        let g = full_gamma(&z.0);
        // Fermi propagation: G_0^a_b = 0 on spatial legs; G_0^0_0 = 0;
        // no-sum diagonal zero G_a^b_b.
        for a in 1..4 {
            for b in 1..4 {
                assert_eq!(g[0][a][b], 0.0);
            }
            assert_eq!(g[a][0][0], 0.0);
        }
        assert_eq!(g[0][0][0], 0.0);
        for a in 0..4 {
            for b in 0..4 {
                if b != 0 {
                    // lowered antisymmetry kills the spatial diagonal
                    assert_eq!(g[a][b][b], 0.0);
                }
            }
        }
    }

    #[test]
    fn induced_metric_identity_and_flrw() {
        let z = State::minkowski_rest(2.0, 1.0, 0.0);
        let g = z.induced_metric().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { -1.0 } else { 0.0 };
                assert!((g[i][j] - expect).abs() < 1e-15);
            }
        }
        // FLRW at scale factor a: triad e = (1/a) delta -> g_t = -a^2 delta.
        let a = 1.7;
        let z = State::flrw(0.3, 1.0 / a, 2.0, 1.0, 0.0);
        let g = z.induced_metric().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { -a * a } else { 0.0 };
                assert!((g[i][j] - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn induced_metric_with_boosted_frame_stays_negative_definite() {
        // A frame with nonzero e^0_a still yields a negative-definite g_t.
        let mut z = State::minkowski_rest(2.0, 1.0, 0.0);
        z.set_frame(0, 0, 0.4);
        z.set_frame(0, 1, -0.2);
        let g = z.induced_metric().unwrap();
        let m = Matrix3::from_fn(|i, j| g[i][j]);
        let eig = m.symmetric_eigenvalues();
        for k in 0..3 {
            assert!(eig[k] < 0.0, "induced metric not negative definite: {eig}");
        }
    }

    #[test]
    fn degenerate_triad_is_an_error() {
        let mut z = State::minkowski_rest(2.0, 1.0, 0.0);
        z.set_frame(2, 1, 0.0); // kill leg 2's only component
        assert!(z.induced_metric().is_err());
        let eos = EntropicPolytrope::new(2.0);
        assert!(z.check_admissible(&eos, 0).is_err());
    }

    #[test]
    fn admissibility_accepts_reference_state() {
        let eos = EntropicPolytrope::new(2.0);
        let z = State::minkowski_rest(2.0, 1.0, 0.0);
        let t = z.check_admissible(&eos, 0).unwrap();
        assert!((t.nu2 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn field_names_align_with_slots() {
        let names = field_names();
        assert_eq!(names.len(), NFIELDS);
        assert_eq!(names[SLOT_RHO], "rho");
        assert_eq!(names[SLOT_RMASS], "rmass");
        assert_eq!(names[SLOT_ENTROPY], "entropy");
        assert_eq!(names[SLOT_FRAME], "frame_e0_1");
        assert_eq!(names[SLOT_WEYL_E], "weyl_e_11");
        assert_eq!(names[SLOT_SGRAD + 3], "sgrad_3");
    }
}
