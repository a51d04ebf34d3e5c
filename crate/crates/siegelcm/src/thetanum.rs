//! Floating-point oracle: direct lattice-sum evaluation of genus-2 theta
//! constants, their Hilbert-modular pullbacks, Rosenhain quotients, and the
//! normalized Petersson metric.

use crate::geometry::{basis_e2, phi_char, C64, SiegelPoint};
use crate::nfield::QuadElem;
use crate::weilrep::EvenChar;
use std::f64::consts::PI;

/// Euler-Mascheroni constant (not yet stable in `std`).
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Smallest eigenvalue of a symmetric 2x2 matrix `[[a, b], [b, c]]`.
fn eig_min_2x2(a: f64, b: f64, c: f64) -> f64 {
    let t = 0.5 * (a + c);
    let d = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    t - d
}

/// Box radius guaranteeing that all dropped terms of a Gaussian lattice sum
/// with exponent `-pi * lambda_min * |m|^2` total below `1e-16`.
fn tail_radius(lambda_min: f64) -> i64 {
    assert!(lambda_min > 0.0, "imaginary part must be positive definite");
    // Terms at radius k number O(8k) and are bounded by exp(-pi lam (k-1)^2);
    // exp(-44) * sum_k 8k e^{-pi lam ((k-1)^2 - (n-1)^2)} < 1e-16 for n below.
    let n = (46.0 / (PI * lambda_min)).sqrt().ceil() as i64 + 2;
    n.max(3)
}

/// Genus-2 theta constant with half-integral characteristic
/// `(x1, x2, y1, y2)`:
/// `sum_m exp(pi i (m + x/2) tau (m + x/2)^t + 2 pi i (m + x/2) (y/2)^t)`.
pub fn siegel_theta(chr: &EvenChar, tau: &SiegelPoint) -> C64 {
    let (x1, x2, y1, y2) = (chr.0 as f64, chr.1 as f64, chr.2 as f64, chr.3 as f64);
    let lam = eig_min_2x2(tau.t1.im, tau.t12.im, tau.t2.im);
    let n = tail_radius(lam);
    let mut acc = C64::new(0.0, 0.0);
    for m1 in -n..=n {
        let u1 = m1 as f64 + 0.5 * x1;
        for m2 in -n..=n {
            let u2 = m2 as f64 + 0.5 * x2;
            // Pair (m) with (-m - x); keep the representative with positive
            // leading coordinate so each pair is accumulated once, as a
            // single real-weighted term (suppresses cancellation noise).
            if u1 < 0.0 || (u1 == 0.0 && u2 < 0.0) {
                continue;
            }
            let quad = tau.t1 * u1 * u1 + 2.0 * tau.t12 * u1 * u2 + tau.t2 * u2 * u2;
            let lin = PI * (u1 * y1 + u2 * y2);
            let e_quad = (C64::new(0.0, PI) * quad).exp();
            if u1 == 0.0 && u2 == 0.0 {
                acc += e_quad * lin.cos();
            } else {
                acc += 2.0 * e_quad * lin.cos();
            }
        }
    }
    acc
}

/// One-variable Jacobi theta constant with characteristic `(x, y)`:
/// `sum_n exp(pi i (n + x/2)^2 t + pi i (n + x/2) y)`.
pub fn jacobi_theta(x: u8, y: u8, t: C64) -> C64 {
    let n = tail_radius(t.im);
    let mut acc = C64::new(0.0, 0.0);
    for m in -n..=n {
        let u = m as f64 + 0.5 * x as f64;
        if u < 0.0 {
            continue;
        }
        let e_quad = (C64::new(0.0, PI) * t * u * u).exp();
        let lin = PI * u * y as f64;
        if u == 0.0 {
            acc += e_quad * lin.cos();
        } else {
            acc += 2.0 * e_quad * lin.cos();
        }
    }
    acc
}

/// Hilbert theta constant over the real quadratic order of discriminant `d`
/// with characteristics `a, b` in `O_F`:
/// `sum_{u in O_F} exp(pi i sum_i s_i(u + a/2)^2 z_i
///                     + pi i tr((u + a/2) b / sqrtD))`.
pub fn hilbert_theta(a: &QuadElem, b: &QuadElem, z1: C64, z2: C64, d: i64) -> C64 {
    let e2 = basis_e2(d);
    let (e2p, e2m) = (e2.embed(1.0), e2.embed(-1.0));
    let (y1, y2) = (z1.im, z2.im);
    // Gram of the Gaussian decay in (m, n) coordinates u = m + n e2.
    let lam = eig_min_2x2(
        y1 + y2,
        y1 * e2p + y2 * e2m,
        y1 * e2p * e2p + y2 * e2m * e2m,
    );
    let n_box = tail_radius(lam);
    // Embeddings of a/2 and of b/sqrtD.
    let (a1, a2) = (0.5 * a.embed(1.0), 0.5 * a.embed(-1.0));
    let sd = d as f64;
    let sqd = sd.sqrt();
    let (bq1, bq2) = (b.embed(1.0) / sqd, -b.embed(-1.0) / sqd);
    let mut acc = C64::new(0.0, 0.0);
    for m in -n_box..=n_box {
        for nn in -n_box..=n_box {
            let u1 = m as f64 + nn as f64 * e2p + a1;
            let u2 = m as f64 + nn as f64 * e2m + a2;
            // Pair u with -u - a (same quadratic part, negated linear part).
            if u1 < 0.0 || (u1 == 0.0 && u2 < 0.0) {
                continue;
            }
            let quad = z1 * u1 * u1 + z2 * u2 * u2;
            let lin = PI * (u1 * bq1 + u2 * bq2);
            let e_quad = (C64::new(0.0, PI) * quad).exp();
            if u1 == 0.0 && u2 == 0.0 {
                acc += e_quad * lin.cos();
            } else {
                acc += 2.0 * e_quad * lin.cos();
            }
        }
    }
    acc
}

/// Pullback comparison `theta^S(phi(z)) = +- theta^H(z)` for the Hilbert
/// characteristic pair `(a, b)`. Returns `(siegel_value, hilbert_value)`;
/// they agree up to sign (squares agree exactly).
pub fn pullback_pair(a: &QuadElem, b: &QuadElem, z1: C64, z2: C64, d: i64) -> (C64, C64) {
    let q = phi_char(a, b, d);
    let chr = EvenChar(q[0], q[1], q[2], q[3]);
    let tau = crate::geometry::phi_point(z1, z2, d);
    (siegel_theta(&chr, &tau), hilbert_theta(a, b, z1, z2, d))
}

/// Squared theta constants of the six characteristics entering the Rosenhain
/// invariants, in the order used by the invariant formulas.
pub fn rosenhain_theta_squares(tau: &SiegelPoint) -> [C64; 6] {
    let chars = [
        EvenChar(0, 0, 1, 0),
        EvenChar(1, 0, 0, 0),
        EvenChar(0, 1, 1, 0),
        EvenChar(0, 0, 1, 1),
        EvenChar(1, 1, 0, 0),
        EvenChar(1, 0, 0, 1),
    ];
    let mut out = [C64::new(0.0, 0.0); 6];
    for (i, c) in chars.iter().enumerate() {
        let t = siegel_theta(c, tau);
        out[i] = t * t;
    }
    out
}

/// The three Rosenhain invariants at a genus-2 period matrix:
/// `l1 = -t1 t3 / (t4 t6)`, `l2 = -t2 t3 / (t5 t6)`, `l3 = -t1 t2 / (t4 t5)`
/// in terms of the squared constants from [`rosenhain_theta_squares`].
pub fn rosenhain_numeric(tau: &SiegelPoint) -> [C64; 3] {
    let t = rosenhain_theta_squares(tau);
    [
        -t[0] * t[2] / (t[3] * t[5]),
        -t[1] * t[2] / (t[4] * t[5]),
        -t[0] * t[1] / (t[3] * t[4]),
    ]
}

/// Normalized Petersson metric of a weight-`w` value at `tau`:
/// `|v|^2 (4 pi e^{-gamma} det Im tau)^{2w}`.
pub fn pet_norm(v: C64, tau: &SiegelPoint, weight: f64) -> f64 {
    let scale = 4.0 * PI * (-EULER_GAMMA).exp() * tau.im_det();
    v.norm_sqr() * scale.powf(2.0 * weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cm_point, hilbert_even};
    use crate::lattices::CmCore;
    use crate::nfield::rint;

    fn tau_i2() -> SiegelPoint {
        SiegelPoint {
            t1: C64::new(0.0, 1.0),
            t2: C64::new(0.0, 1.0),
            t12: C64::new(0.0, 0.0),
        }
    }

    #[test]
    fn theta_reference_values() {
        // theta_3(i) = pi^{1/4} / Gamma(3/4).
        let theta3_i = 1.086_434_811_213_308_0_f64;
        let j = jacobi_theta(0, 0, C64::new(0.0, 1.0));
        assert!((j.re - theta3_i).abs() < 1e-13 && j.im.abs() < 1e-13);
        // At diag(i, i) the genus-2 constant factorizes.
        let s = siegel_theta(&EvenChar(0, 0, 0, 0), &tau_i2());
        assert!((s.re - theta3_i * theta3_i).abs() < 1e-12 && s.im.abs() < 1e-13);
        // theta_4(i) = theta_2(i): the Jacobi identity t3^4 = t2^4 + t4^4.
        let t2 = jacobi_theta(1, 0, C64::new(0.0, 1.0));
        let t4 = jacobi_theta(0, 1, C64::new(0.0, 1.0));
        let t3 = j;
        assert!(
            (t3.norm().powi(4) - t2.norm().powi(4) - t4.norm().powi(4)).abs() < 1e-12
        );
    }

    #[test]
    fn odd_characteristics_vanish() {
        let tau = SiegelPoint {
            t1: C64::new(0.13, 0.9),
            t2: C64::new(-0.21, 1.2),
            t12: C64::new(0.05, 0.1),
        };
        let mut even = 0;
        for x1 in 0..2u8 {
            for x2 in 0..2u8 {
                for y1 in 0..2u8 {
                    for y2 in 0..2u8 {
                        let c = EvenChar(x1, x2, y1, y2);
                        let v = siegel_theta(&c, &tau).norm();
                        if (x1 * y1 + x2 * y2) % 2 == 1 {
                            assert!(v < 1e-12, "odd char must vanish, got {v}");
                        } else {
                            assert!(v > 1e-3, "even char should not vanish here");
                            even += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(even, 10);
    }

    #[test]
    fn diagonal_factorization_and_translation() {
        let t1 = C64::new(0.37, 1.1);
        let t2c = C64::new(-0.4, 0.8);
        let tau = SiegelPoint { t1, t2: t2c, t12: C64::new(0.0, 0.0) };
        for c in EvenChar::all() {
            let s = siegel_theta(&c, &tau);
            let f = jacobi_theta(c.0, c.2, t1) * jacobi_theta(c.1, c.3, t2c);
            assert!((s - f).norm() < 1e-12, "factorization for {c:?}");
        }
        // tau -> tau + 2I multiplies by e((x1^2 + x2^2)/4).
        let tau2 = SiegelPoint { t1: t1 + 2.0, t2: t2c + 2.0, t12: tau.t12 };
        for c in EvenChar::all() {
            let phase =
                (C64::new(0.0, PI / 2.0) * ((c.0 * c.0 + c.1 * c.1) as f64)).exp();
            let lhs = siegel_theta(&c, &tau2);
            let rhs = phase * siegel_theta(&c, &tau);
            assert!((lhs - rhs).norm() < 1e-12, "translation law for {c:?}");
        }
    }

    #[test]
    fn pullback_matches_up_to_sign() {
        let d = 5i64;
        let disc = rint(d);
        let e2 = basis_e2(d);
        let reps = [
            QuadElem::zero(&disc),
            QuadElem::one(&disc),
            e2.clone(),
            QuadElem::one(&disc).add(&e2),
        ];
        let pts = [
            (C64::new(0.1, 0.8), C64::new(-0.3, 1.3)),
            (C64::new(0.0, 1.0), C64::new(0.0, 1.0)),
        ];
        for (z1, z2) in pts {
            for a in &reps {
                for b in &reps {
                    let (s, h) = pullback_pair(a, b, z1, z2, d);
                    let diff = (s - h).norm().min((s + h).norm());
                    assert!(diff < 1e-10, "pullback mismatch {diff} for {a:?},{b:?}");
                    if !hilbert_even(a, b, d) {
                        assert!(h.norm() < 1e-12, "odd Hilbert char must vanish");
                    } else {
                        assert!((s * s - h * h).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn cm_point_rosenhain_finite() {
        let core = CmCore::reference_d5();
        let p = cm_point(&core).unwrap();
        let lams = rosenhain_numeric(&p.tau);
        for (i, l) in lams.iter().enumerate() {
            assert!(l.norm() > 1e-8, "lambda_{} vanishes", i + 1);
            assert!((l - C64::new(1.0, 0.0)).norm() > 1e-8, "lambda_{} = 1", i + 1);
            assert!(l.norm() < 1e8);
        }
        // The three invariants are pairwise distinct (smooth curve).
        assert!((lams[0] - lams[1]).norm() > 1e-8);
        assert!((lams[0] - lams[2]).norm() > 1e-8);
        assert!((lams[1] - lams[2]).norm() > 1e-8);
    }

    #[test]
    fn pet_norm_scaling() {
        let tau = tau_i2();
        let v = C64::new(0.7, -0.2);
        let w = 0.5;
        let base = pet_norm(v, &tau, w);
        assert!((pet_norm(2.0 * v, &tau, w) / base - 4.0).abs() < 1e-12);
        // det Im tau = 1 at i*I: closed form |v|^2 (4 pi e^{-gamma})^{2w}.
        let expect = v.norm_sqr() * (4.0 * PI * (-EULER_GAMMA).exp()).powf(1.0);
        assert!((base - expect).abs() < 1e-12);
    }
}
