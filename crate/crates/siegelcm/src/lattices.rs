//! The three concrete lattices of the construction — the rank-5 lattice `L`
//! inside the space of trace-zero 2x2 matrix data, the rank-4 middle lattice
//! `M`, and the rank-1 lattice `L0` — together with their discriminant-group
//! cosets, quadratic-form values mod 1, the fiber decomposition of
//! `L'/(L0 + M) -> L'/L`, and the CM isometry `kappa` identifying `M` with a
//! module in the CM field.

use crate::nfield::{
    rat, rint, sqrt_in_quad, CMElem, CyclicGalois, QuadElem, Rat,
};
use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};

/// Reduces a rational into `[0, 1)`.
pub fn mod1(x: &Rat) -> Rat {
    x - x.floor()
}

/// A coset of `L'/L`, coordinates `(a, b, c, d, r)` with `a..d` of denominator
/// 2 and `r` of denominator 4, all stored in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CosetL {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub d: Rat,
    pub r: Rat,
}

impl CosetL {
    pub fn new(a: Rat, b: Rat, c: Rat, d: Rat, r: Rat) -> Self {
        let c = CosetL { a: mod1(&a), b: mod1(&b), c: mod1(&c), d: mod1(&d), r: mod1(&r) };
        assert!((&c.a * rint(2)).is_integer() && (&c.b * rint(2)).is_integer());
        assert!((&c.c * rint(2)).is_integer() && (&c.d * rint(2)).is_integer());
        assert!((&c.r * rint(4)).is_integer());
        c
    }

    /// All 64 cosets in lexicographic order of `(a, b, c, d, r)`.
    pub fn all() -> Vec<CosetL> {
        let mut v = Vec::with_capacity(64);
        for a in 0..2i64 {
            for b in 0..2i64 {
                for c in 0..2i64 {
                    for d in 0..2i64 {
                        for r in 0..4i64 {
                            v.push(CosetL::new(
                                rat(a, 2),
                                rat(b, 2),
                                rat(c, 2),
                                rat(d, 2),
                                rat(r, 4),
                            ));
                        }
                    }
                }
            }
        }
        v
    }

    pub fn neg(&self) -> Self {
        CosetL::new(
            -self.a.clone(),
            -self.b.clone(),
            -self.c.clone(),
            -self.d.clone(),
            -self.r.clone(),
        )
    }

    /// `Q_L(mu) = 2r^2 - 2ab - 2cd` mod 1.
    pub fn qval(&self) -> Rat {
        mod1(&(rint(2) * (&self.r * &self.r - &self.a * &self.b - &self.c * &self.d)))
    }

    /// Bilinear pairing `B(mu, nu) = Q(mu + nu) - Q(mu) - Q(nu)` mod 1.
    pub fn pairing(&self, o: &CosetL) -> Rat {
        let sum = CosetL::new(
            &self.a + &o.a,
            &self.b + &o.b,
            &self.c + &o.c,
            &self.d + &o.d,
            &self.r + &o.r,
        );
        mod1(&(sum.qval() - self.qval() - o.qval()))
    }
}

/// A coset of `M'/M`, coordinates `(a, b, r, s)` with denominators 2, 2, 4,
/// and `4D`, stored in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CosetM {
    pub a: Rat,
    pub b: Rat,
    pub r: Rat,
    pub s: Rat,
}

impl CosetM {
    pub fn new(a: Rat, b: Rat, r: Rat, s: Rat) -> Self {
        CosetM { a: mod1(&a), b: mod1(&b), r: mod1(&r), s: mod1(&s) }
    }

    pub fn neg(&self) -> Self {
        CosetM::new(-self.a.clone(), -self.b.clone(), -self.r.clone(), -self.s.clone())
    }

    /// `Q_M(mu) = 2r^2 - 2ab - 2 D s^2` mod 1.
    pub fn qval(&self, d: i64) -> Rat {
        mod1(
            &(rint(2) * (&self.r * &self.r - &self.a * &self.b)
                - rint(2 * d) * &self.s * &self.s),
        )
    }

    /// Representative with coordinates lifted to the symmetric window
    /// `(-1/2, 1/2]`-style smallest magnitude (used for coset vectors in
    /// density counts; any lift works, this one is deterministic).
    pub fn lift(&self) -> [Rat; 4] {
        let l = |x: &Rat| {
            if x > &rat(1, 2) {
                x - rint(1)
            } else {
                x.clone()
            }
        };
        [l(&self.a), l(&self.b), l(&self.r), l(&self.s)]
    }
}

/// A coset of `L0'/L0`, one coordinate `t` of denominator `4D` in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct CosetL0 {
    pub t: Rat,
}

impl CosetL0 {
    pub fn new(t: Rat) -> Self {
        CosetL0 { t: mod1(&t) }
    }

    /// `Q_0(t) = 2 D t^2` mod 1.
    pub fn qval(&self, d: i64) -> Rat {
        mod1(&(rint(2 * d) * &self.t * &self.t))
    }

    /// The representative of smallest square in `t + Z` (for leading
    /// exponents of the attached theta series).
    pub fn min_square_rep(&self) -> Rat {
        if self.t > rat(1, 2) {
            &self.t - rint(1)
        } else {
            self.t.clone()
        }
    }
}

/// Complete fiber of the projection `L'/(L0 + M) -> L'/L` over `mu`: all
/// pairs `(mu0, mu1)` whose glued `(c, d)`-coordinates `c = D(s - t)`,
/// `d = s + t` reproduce `mu` (with `a`, `b`, `r` carried along).  Found by
/// exhaustive scan over the `4D x 4D` grid of `(t, s)` residues.
pub fn fiber_decompose(mu: &CosetL, d: i64) -> Vec<(CosetL0, CosetM)> {
    let mut out = Vec::new();
    let four_d = 4 * d;
    for jt in 0..four_d {
        for js in 0..four_d {
            let t = rat(jt, four_d);
            let s = rat(js, four_d);
            let cc = mod1(&(rint(d) * (&s - &t)));
            let dd = mod1(&(&s + &t));
            if cc == mu.c && dd == mu.d {
                out.push((
                    CosetL0::new(t),
                    CosetM::new(mu.a.clone(), mu.b.clone(), mu.r.clone(), s),
                ));
            }
        }
    }
    out
}

/// Index `[L : L0 + M]` via elementary divisors of the gluing matrix on the
/// `(c, d)`-coordinates.
pub fn lattice_index(d: i64) -> BigInt {
    // Columns express (c, d) images of the generators t, s: c = D(s - t), d = s + t.
    let m = [[-d, d], [1, 1]];
    let divs = smith_2x2(m);
    divs.iter().product()
}

fn smith_2x2(m: [[i64; 2]; 2]) -> [BigInt; 2] {
    // d1 = gcd of entries; d1*d2 = |det|.
    let g = m
        .iter()
        .flatten()
        .fold(BigInt::zero(), |acc, &x| acc.gcd(&BigInt::from(x)));
    let det = BigInt::from(m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs();
    assert!(!g.is_zero() && !det.is_zero());
    let d2 = &det / &g;
    [g, d2]
}

/// The CM configuration underlying all exact computations: the real field
/// `F = Q(sqrt D)`, a totally negative `Delta`, the module generators
/// `alpha`, `beta`, the cyclic Galois generator, and the norms of the
/// polarization module data.
#[derive(Clone, Debug)]
pub struct CmCore {
    /// The integer `D`.
    pub d: i64,
    /// `D` as the quadratic-field tag.
    pub disc: Rat,
    pub delta: QuadElem,
    pub alpha: CMElem,
    pub beta: CMElem,
    pub gal: CyclicGalois,
    /// `Dtilde = Delta * Delta'` as an exact rational.
    pub dtilde: Rat,
    /// `sqrt(Dtilde)` as an element of `F` (cyclic case).
    pub sqrt_dtilde: QuadElem,
    /// `N_{F/Q}` of the module scale ideal (`1/D` for the inverse different).
    pub nf0: Rat,
    /// Absolute norm of the module `a`.
    pub na: Rat,
    /// Exact rational scale with `q_W = u_eff * kappa conj(kappa) / sqrt(Dtilde)`
    /// satisfying `tr q_W = Q_{W0}`.  Pinned at construction from the basis
    /// vector `e_r` and verified on the whole Gram matrix; positive exactly
    /// when the Galois branch is the geometric one.
    pub u_eff: Rat,
}

impl CmCore {
    /// Builds the configuration; `branch_positive` selects the sign of the
    /// Galois action on `sqrt Delta` (fixed downstream by a numerical
    /// geometry identity).
    ///
    /// # Errors
    /// Propagates the non-cyclic-reflex error from the Galois construction
    /// and rejects `alpha = 0` or a `Delta` that is not totally negative.
    pub fn new(
        d: i64,
        delta: QuadElem,
        alpha: CMElem,
        beta: CMElem,
        nf0: Rat,
        na: Rat,
        branch_positive: bool,
    ) -> Result<Self, String> {
        let disc = rint(d);
        if delta.disc != disc {
            return Err("Delta must live in Q(sqrt D)".into());
        }
        if delta.neg().is_totally_positive() != true {
            return Err("Delta must be totally negative".into());
        }
        if alpha.is_zero() {
            return Err("alpha must be nonzero".into());
        }
        let gal = CyclicGalois::new(&delta, branch_positive)?;
        let dtilde_q = delta.mul(&delta.conj());
        assert!(dtilde_q.is_rational());
        let dtilde = dtilde_q.a.clone();
        let sqrt_dtilde = sqrt_in_quad(&disc, &dtilde)
            .ok_or_else(|| "sqrt(Dtilde) not in F: non-cyclic configuration".to_string())?;
        let mut core = CmCore {
            d,
            disc,
            delta,
            alpha,
            beta,
            gal,
            dtilde,
            sqrt_dtilde,
            nf0,
            na,
            u_eff: Rat::one(),
        };
        // Pin the scale from e_r = (0, 0, 1, 0), where Q_{W0} = 2.
        let e_r = [Rat::zero(), Rat::zero(), Rat::one(), Rat::zero()];
        let tr0 = core
            .kappa(&e_r)
            .rel_norm()
            .div(&core.sqrt_dtilde)
            .trace();
        if tr0.is_zero() {
            return Err("degenerate configuration: kappa(e_r) has isotropic norm".into());
        }
        let c = rint(2) / tr0;
        if c <= Rat::zero() {
            return Err("wrong Galois branch: trace form negative on e_r".into());
        }
        core.u_eff = c;
        core.check_trace_form();
        Ok(core)
    }

    /// Builds the configuration, selecting the Galois branch automatically
    /// (the unique branch making the trace form positively proportional to
    /// `Q_{W0}`).
    pub fn auto(
        d: i64,
        delta: QuadElem,
        alpha: CMElem,
        beta: CMElem,
        nf0: Rat,
        na: Rat,
    ) -> Result<Self, String> {
        match CmCore::new(d, delta.clone(), alpha.clone(), beta.clone(), nf0.clone(), na.clone(), true) {
            Ok(c) => Ok(c),
            Err(e) if e.starts_with("wrong Galois branch") => {
                CmCore::new(d, delta, alpha, beta, nf0, na, false)
            }
            Err(e) => Err(e),
        }
    }

    /// The bundled reference configuration: `D = 5`, `E = Q(zeta_5)`,
    /// `Delta = (-5 - sqrt5)/2`, `alpha = 1`,
    /// `beta = sqrt5/2 + ((5 + sqrt5)/4) sqrt Delta`, module the full ring of
    /// integers (`na = 1`), scale ideal the inverse different (`nf0 = 1/5`).
    pub fn reference_d5() -> CmCore {
        let disc = rint(5);
        let delta = QuadElem::new(disc.clone(), rat(-5, 2), rat(-1, 2));
        let alpha = CMElem::from_base(&delta, QuadElem::one(&disc));
        let beta = CMElem::new(
            delta.clone(),
            QuadElem::new(disc.clone(), Rat::zero(), rat(1, 2)),
            QuadElem::new(disc.clone(), rat(5, 4), rat(1, 4)),
        );
        CmCore::auto(5, delta, alpha, beta, rat(1, 5), rint(1))
            .expect("reference configuration is cyclic")
    }

    /// The isometry `kappa(A)` for `A = (a, b, r, s)`:
    /// `( a alpha sigma(alpha) + alpha sigma(beta)(r - s sqrtD)
    ///  + beta sigma(alpha)(r + s sqrtD) + b beta sigma(beta) ) / sqrt(Dtilde)`.
    /// The `1/sqrt(Dtilde)` scaling is what makes `kappa(M)` land inside the
    /// type-norm module with the small index asserted in the tests.
    pub fn kappa(&self, aa: &[Rat; 4]) -> CMElem {
        let [a, b, r, s] = aa;
        let sd = QuadElem::root(&self.disc);
        let r_minus = QuadElem::from_rat(&self.disc, r.clone()).sub(&sd.scale(s));
        let r_plus = QuadElem::from_rat(&self.disc, r.clone()).add(&sd.scale(s));
        let sa = self.gal.sigma(&self.alpha);
        let sb = self.gal.sigma(&self.beta);
        let t1 = self.alpha.mul(&sa).scale_base(&QuadElem::from_rat(&self.disc, a.clone()));
        let t2 = self.alpha.mul(&sb).scale_base(&r_minus);
        let t3 = self.beta.mul(&sa).scale_base(&r_plus);
        let t4 = self.beta.mul(&sb).scale_base(&QuadElem::from_rat(&self.disc, b.clone()));
        t1.add(&t2)
            .add(&t3)
            .add(&t4)
            .scale_base(&self.sqrt_dtilde.inv())
    }

    /// The exact rational scale relating the norm form to the
    /// trace-normalized form: `q_W = u_scale * kappa conj(kappa) / sqrt(Dtilde)`.
    pub fn u_scale(&self) -> Rat {
        self.u_eff.clone()
    }

    /// The `Ftilde`-valued quadratic form on `W0`:
    /// `q_W(A) = u * kappa(A) conj(kappa(A)) / sqrt(Dtilde)`, normalized so
    /// that `tr q_W = Q_{W0} = 2r^2 - 2ab - 2Ds^2` exactly.
    pub fn q_w(&self, aa: &[Rat; 4]) -> QuadElem {
        let k = self.kappa(aa);
        let n = k.rel_norm();
        n.scale(&self.u_eff).div(&self.sqrt_dtilde)
    }

    /// Polarization of `q_W`: `b_W(x, y) = q_W(x + y) - q_W(x) - q_W(y)`.
    pub fn b_w(&self, x: &[Rat; 4], y: &[Rat; 4]) -> QuadElem {
        let sum = [
            &x[0] + &y[0],
            &x[1] + &y[1],
            &x[2] + &y[2],
            &x[3] + &y[3],
        ];
        self.q_w(&sum).sub(&self.q_w(x)).sub(&self.q_w(y))
    }

    /// `Q_{W0}(A) = 2r^2 - 2ab - 2Ds^2` as an exact rational.
    pub fn q_w0(&self, aa: &[Rat; 4]) -> Rat {
        rint(2) * (&aa[2] * &aa[2] - &aa[0] * &aa[1]) - rint(2 * self.d) * &aa[3] * &aa[3]
    }

    /// Asserts that `tr q_W = Q_{W0}` on the standard basis and all pairs
    /// (exact Gram comparison); this pins the self-calibrating scale.
    pub fn check_trace_form(&self) {
        let basis = basis4();
        for (i, x) in basis.iter().enumerate() {
            let qx = self.q_w(x);
            assert_eq!(qx.trace(), self.q_w0(x), "trace form mismatch on basis {i}");
            for y in basis.iter().skip(i + 1) {
                let b = self.b_w(x, y);
                let sum = [
                    &x[0] + &y[0],
                    &x[1] + &y[1],
                    &x[2] + &y[2],
                    &x[3] + &y[3],
                ];
                let want = self.q_w0(&sum) - self.q_w0(x) - self.q_w0(y);
                assert_eq!(b.trace(), want, "trace pairing mismatch");
            }
        }
    }

    /// Coordinates of an `E`-element in the Q-basis `(1, sqrtD, sqrtDelta,
    /// sqrtD*sqrtDelta)`.
    pub fn coords(&self, z: &CMElem) -> [Rat; 4] {
        [z.u.a.clone(), z.u.b.clone(), z.v.a.clone(), z.v.b.clone()]
    }

    /// Z-basis of the CM module `a = O_F alpha + dF^{-1} beta` (coordinates in
    /// the Q-basis `(1, sqrtD, sqrtDelta, sqrtD*sqrtDelta)`).
    pub fn module_a_basis(&self) -> [CMElem; 4] {
        let omega = QuadElem::new(self.disc.clone(), rat(1, 2), rat(1, 2));
        let inv_root = QuadElem::root(&self.disc).inv();
        let x1 = self.alpha.clone();
        let x2 = self.alpha.scale_base(&omega);
        let x3 = self.beta.scale_base(&inv_root);
        let x4 = x3.scale_base(&omega);
        [x1, x2, x3, x4]
    }

    /// Index of the raw isometry image `sqrt(Dtilde) * kappa(M)` inside the
    /// type-norm module of `a` (the `O_F`-module generated by `x sigma(x)`,
    /// `x` in `a`).
    ///
    /// Returns `(index, contained)`.  For a valid configuration the image is
    /// contained with index exactly `2 D^2`: the commensurability index is 2
    /// once the determinant `D^2` of multiplication by `sqrt(Dtilde)` is
    /// removed (no genuine sublattice realizes the bare index 2, since the
    /// rescaled generators acquire non-integral norms).
    pub fn kappa_index_in_typenorm(&self) -> (Rat, bool) {
        // Raw kappa(M) generators (kappa of the standard basis, un-scaled).
        let km: Vec<[Rat; 4]> = basis4()
            .iter()
            .map(|e| self.coords(&self.kappa(e).scale_base(&self.sqrt_dtilde)))
            .collect();
        let omega = QuadElem::new(self.disc.clone(), rat(1, 2), rat(1, 2));
        let basis_a = self.module_a_basis();
        // Type-norm module generators: x_i sigma(x_i) and the polarized
        // products x_i sigma(x_j) + x_j sigma(x_i), as an O_F-module.
        let mut gens: Vec<[Rat; 4]> = Vec::new();
        for (i, x) in basis_a.iter().enumerate() {
            let sx = self.gal.sigma(x);
            let g = x.mul(&sx);
            gens.push(self.coords(&g));
            gens.push(self.coords(&g.scale_base(&omega)));
            for y in basis_a.iter().skip(i + 1) {
                let sy = self.gal.sigma(y);
                let g = x.mul(&sy).add(&y.mul(&sx));
                gens.push(self.coords(&g));
                gens.push(self.coords(&g.scale_base(&omega)));
            }
        }
        let nphi = hnf_basis(&gens);
        let km_h = hnf_basis(&km);
        let contained = km.iter().all(|v| in_span(&nphi, v));
        let idx = lattice_covolume(&km_h) / lattice_covolume(&nphi);
        (idx, contained)
    }
}

/// Standard basis of `Q^4`.
pub fn basis4() -> [[Rat; 4]; 4] {
    let z = Rat::zero;
    let o = Rat::one;
    [
        [o(), z(), z(), z()],
        [z(), o(), z(), z()],
        [z(), z(), o(), z()],
        [z(), z(), z(), o()],
    ]
}

/// Hermite-form basis of the Z-span of rational vectors (any dimension).
pub fn hnf_basis(gens: &[[Rat; 4]]) -> Vec<[Rat; 4]> {
    // Scale to integers.
    let mut den = BigInt::one();
    for g in gens {
        for x in g {
            den = den.lcm(x.denom());
        }
    }
    let denr = Rat::from(den.clone());
    let mut rows: Vec<[BigInt; 4]> = gens
        .iter()
        .map(|g| {
            [
                (&g[0] * &denr).to_integer(),
                (&g[1] * &denr).to_integer(),
                (&g[2] * &denr).to_integer(),
                (&g[3] * &denr).to_integer(),
            ]
        })
        .collect();
    let mut out: Vec<[BigInt; 4]> = Vec::new();
    for col in 0..4 {
        loop {
            let mut piv: Option<usize> = None;
            for (i, r) in rows.iter().enumerate() {
                if !r[col].is_zero() {
                    let better = match piv {
                        None => true,
                        Some(j) => r[col].abs() < rows[j][col].abs(),
                    };
                    if better {
                        piv = Some(i);
                    }
                }
            }
            let Some(j) = piv else { break };
            let p = rows[j].clone();
            let mut others = false;
            for (i, r) in rows.iter_mut().enumerate() {
                if i != j && !r[col].is_zero() {
                    let q = &r[col] / &p[col];
                    for k in 0..4 {
                        r[k] -= &q * &p[k];
                    }
                    if !r[col].is_zero() {
                        others = true;
                    }
                }
            }
            if !others {
                let p = rows.remove(j);
                out.push(p);
                break;
            }
        }
    }
    out.iter()
        .map(|r| {
            [
                Rat::new(r[0].clone(), den.clone()),
                Rat::new(r[1].clone(), den.clone()),
                Rat::new(r[2].clone(), den.clone()),
                Rat::new(r[3].clone(), den.clone()),
            ]
        })
        .collect()
}

/// Membership of a rational vector in the Z-span of an upper-triangular basis.
pub fn in_span(basis: &[[Rat; 4]], v: &[Rat; 4]) -> bool {
    let mut rem = v.clone();
    for row in basis {
        let col = (0..4).find(|&k| !row[k].is_zero());
        let Some(col) = col else { continue };
        if rem[col].is_zero() {
            continue;
        }
        let q = &rem[col] / &row[col];
        if !q.is_integer() {
            return false;
        }
        for k in 0..4 {
            rem[k] -= &q * &row[k];
        }
    }
    rem.iter().all(|x| x.is_zero())
}

/// Covolume (absolute determinant) of a full-rank triangular basis.
fn lattice_covolume(basis: &[[Rat; 4]]) -> Rat {
    assert_eq!(basis.len(), 4, "expected full-rank lattice");
    let mut det = Rat::one();
    // Triangular after HNF: product of pivots.
    for row in basis {
        let col = (0..4).find(|&k| !row[k].is_zero()).expect("zero row");
        det *= row[col].abs();
    }
    det
}
