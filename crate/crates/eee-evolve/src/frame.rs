//! Frame metric, Levi-Civita symbols, and index bookkeeping.
//!
//! Conventions used throughout the crate:
//!
//! ```text
//! signature        (+,-,-,-);  frame metric  eta = diag(1,-1,-1,-1)
//! frame indices    0..=3, with 0 the fluid-comoving time axis
//! spatial indices  stored 0..=2 (they name the frame legs 1..=3)
//! eps4             totally antisymmetric, eps4(0,1,2,3) = +1 (all lowered)
//! eps3             spatial symbol, eps3(0,1,2) = +1
//! ```
//!
//! The spatial Levi-Civita tensor of the formulation is the projection of
//! the 4d one along the fluid velocity,
//!
//! ```text
//! eps_abc = eps4_{mnst} u^m pi_a^n pi_b^s pi_c^t ,
//! ```
//!
//! which in the comoving gauge (`u^a = delta^a_0`) has purely spatial
//! components equal to `eps3`. Raising any one spatial index with the frame
//! metric flips the sign, so e.g. `eps_b^{mn} = +eps3(b,m,n)` (two raises)
//! while `eps^{mnl} = -eps3(m,n,l)` (three raises). The evolution equations
//! in [`crate::rhs`] only ever need the even-raise combinations, which are
//! numerically `+eps3`.

/// Frame metric component `eta_ab = eta^ab` (diagonal, signature +---).
#[inline]
pub fn eta(a: usize, b: usize) -> f64 {
    if a != b {
        0.0
    } else if a == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Totally antisymmetric symbol on four indices, `eps4(0,1,2,3) = +1`.
pub fn eps4(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let idx = [a, b, c, d];
    for v in idx {
        debug_assert!(v < 4);
    }
    // Sign of the permutation by counting inversions; zero on repeats.
    let mut sign = 1.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx[i] == idx[j] {
                return 0.0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Spatial antisymmetric symbol, `eps3(0,1,2) = +1` (indices 0..=2).
#[inline]
pub fn eps3(a: usize, b: usize, c: usize) -> f64 {
    debug_assert!(a < 3 && b < 3 && c < 3);
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Mixed projector orthogonal to the fluid velocity, `pi_a^b = diag(0,1,1,1)`
/// in the comoving frame.
#[inline]
pub fn proj(a: usize, b: usize) -> f64 {
    if a == b && a != 0 {
        1.0
    } else {
        0.0
    }
}

/// Index map for symmetric 3x3 tensors stored as 6 components in the order
/// `(0,0) (0,1) (0,2) (1,1) (1,2) (2,2)`.
pub const SYM6: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Storage slot of component `(i, j)` of a symmetric 3x3 tensor.
#[inline]
pub fn sym6_index(i: usize, j: usize) -> usize {
    debug_assert!(i < 3 && j < 3);
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    match (i, j) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        (2, 2) => 5,
        _ => unreachable!(),
    }
}

/// Unpack a 6-component symmetric storage into a full 3x3 matrix.
pub fn sym6_to_mat(v: &[f64; 6]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for (k, &(i, j)) in SYM6.iter().enumerate() {
        m[i][j] = v[k];
        m[j][i] = v[k];
    }
    m
}

/// Pack a (symmetric) 3x3 matrix into 6 components, averaging the
/// off-diagonal pair so that a slightly asymmetric input is symmetrized.
pub fn mat_to_sym6(m: &[[f64; 3]; 3]) -> [f64; 6] {
    let mut v = [0.0; 6];
    for (k, &(i, j)) in SYM6.iter().enumerate() {
        v[k] = 0.5 * (m[i][j] + m[j][i]);
    }
    v
}

/// Antisymmetric index pairs `(0,1) (0,2) (1,2)` for 3x3 storage.
pub const PAIR3: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Storage slot and sign of component `(i, j)` of an antisymmetric pair:
/// returns `None` for `i == j`, otherwise `(slot, +1)` for `i < j` and
/// `(slot, -1)` for `i > j`.
#[inline]
pub fn pair3_index(i: usize, j: usize) -> Option<(usize, f64)> {
    debug_assert!(i < 3 && j < 3);
    match (i, j) {
        (0, 1) => Some((0, 1.0)),
        (1, 0) => Some((0, -1.0)),
        (0, 2) => Some((1, 1.0)),
        (2, 0) => Some((1, -1.0)),
        (1, 2) => Some((2, 1.0)),
        (2, 1) => Some((2, -1.0)),
        _ => None,
    }
}

/// Maximum absolute entry of a rank-4 frame tensor stored as nested arrays.
pub fn max_abs4(t: &[[[[f64; 4]; 4]; 4]; 4]) -> f64 {
    let mut m: f64 = 0.0;
    for a in t.iter().flatten().flatten().flatten() {
        m = m.max(a.abs());
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps4_matches_inversion_count_on_all_permutations() {
        // Exact antisymmetry: swapping any two slots flips the sign.
        let mut nonzero = 0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let e = eps4(a, b, c, d);
                        assert_eq!(e, -eps4(b, a, c, d));
                        assert_eq!(e, -eps4(a, b, d, c));
                        assert_eq!(e, -eps4(d, b, c, a));
                        if e != 0.0 {
                            nonzero += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(nonzero, 24);
        assert_eq!(eps4(0, 1, 2, 3), 1.0);
    }

    #[test]
    fn eps3_is_the_spatial_part_of_eps4_contracted_with_u() {
        // eps_abc = eps4_{mnst} u^m pi_a^n pi_b^s pi_c^t with u^m = delta^m_0
        // reduces to eps4(0, a, b, c) on spatial legs.
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    assert_eq!(eps3(a, b, c), eps4(0, a + 1, b + 1, c + 1));
                }
            }
        }
    }

    #[test]
    fn eps3_double_contraction_identities() {
        // sum_m eps3(m,a,b) eps3(m,c,d) = delta_ac delta_bd - delta_ad delta_bc
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let lhs: f64 = (0..3).map(|m| eps3(m, a, b) * eps3(m, c, d)).sum();
                        let del = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
                        let rhs = del(a, c) * del(b, d) - del(a, d) * del(b, c);
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
        // sum_{mn} eps3(m,n,a) eps3(m,n,b) = 2 delta_ab
        for a in 0..3 {
            for b in 0..3 {
                let lhs: f64 = (0..3)
                    .flat_map(|m| (0..3).map(move |n| (m, n)))
                    .map(|(m, n)| eps3(m, n, a) * eps3(m, n, b))
                    .sum();
                assert_eq!(lhs, if a == b { 2.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn raised_spatial_epsilon_identities_in_four_dimensions() {
        // Embed the projected epsilon in 4d (zero when any index is 0),
        // raise indices with eta, and check
        //   eps^{mna} eps_{mnb} = -2 pi^a_b,
        //   eps^{mab} eps_{mcd} = -(pi^a_c pi^b_d - pi^a_d pi^b_c).
        let eps_low = |a: usize, b: usize, c: usize| -> f64 {
            if a == 0 || b == 0 || c == 0 {
                0.0
            } else {
                eps3(a - 1, b - 1, c - 1)
            }
        };
        // One raised index flips the sign on spatial values.
        let raise = |f: f64| -f;
        for a in 0..4 {
            for b in 0..4 {
                let mut lhs = 0.0;
                for m in 0..4 {
                    for n in 0..4 {
                        // all three indices of the first factor raised
                        lhs += raise(raise(raise(eps_low(m, n, a)))) * eps_low(m, n, b);
                    }
                }
                // pi^a_b: raise the first slot of pi_ab = diag(0,-1,-1,-1)
                let pi_mixed = proj(a, b);
                assert_eq!(lhs, -2.0 * pi_mixed);
            }
        }
        for a in 1..4 {
            for b in 1..4 {
                for c in 1..4 {
                    for d in 1..4 {
                        let mut lhs = 0.0;
                        for m in 0..4 {
                            lhs += raise(raise(raise(eps_low(m, a, b)))) * eps_low(m, c, d);
                        }
                        let rhs = -(proj(a, c) * proj(b, d) - proj(a, d) * proj(b, c));
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn sym6_round_trip_and_pair3_signs() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let m = sym6_to_mat(&v);
        assert_eq!(mat_to_sym6(&m), v);
        for (k, &(i, j)) in SYM6.iter().enumerate() {
            assert_eq!(sym6_index(i, j), k);
            assert_eq!(sym6_index(j, i), k);
        }
        for (k, &(i, j)) in PAIR3.iter().enumerate() {
            assert_eq!(pair3_index(i, j), Some((k, 1.0)));
            assert_eq!(pair3_index(j, i), Some((k, -1.0)));
        }
        for i in 0..3 {
            assert_eq!(pair3_index(i, i), None);
        }
    }
}
