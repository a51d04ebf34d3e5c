//! Exact arithmetic in real quadratic fields `F = Q(\sqrt D)`, the CM field
//! `E = F(\sqrt \Delta)`, and the reflex real field `Ftilde = Q(\sqrt Dtilde)`,
//! together with prime-splitting queries, local valuations, ideal-norm counting,
//! and enumeration of totally positive elements with a prescribed trace.
//!
//! All arithmetic is exact over `BigRational`; floating point appears only in
//! the embedding helpers used by the numerical oracle.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Convenience constructor for a rational from machine integers.
///
/// # Panics
/// Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "rational with zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Convenience constructor for an integer rational.
pub fn rint(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// `p`-adic valuation of a nonzero rational; `None` for zero (valuation +infinity).
pub fn ord_p(x: &Rat, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v: i64 = 0;
    let mut n = x.numer().abs();
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    let mut d = x.denom().clone();
    while (&d % &p).is_zero() {
        d /= &p;
        v -= 1;
    }
    Some(v)
}

/// Deterministic primality test for 64-bit integers (trial division; inputs are small).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Legendre symbol `(a/p)` for an odd prime `p`; returns 0, 1, or -1.
pub fn legendre(a: i64, p: u64) -> i32 {
    assert!(p > 2 && is_prime(p), "legendre requires an odd prime");
    let pm = p as i128;
    let mut base = (a as i128).rem_euclid(pm);
    if base == 0 {
        return 0;
    }
    // Euler criterion via fast exponentiation mod p.
    let mut exp = (p - 1) / 2;
    let mut acc: i128 = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % pm;
        }
        base = base * base % pm;
        exp >>= 1;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

/// Squarefree part of a nonzero rational: the unique squarefree integer `d0`
/// such that `x = d0 * y^2` for some rational `y`.
pub fn squarefree_part(x: &Rat) -> i64 {
    assert!(!x.is_zero(), "squarefree part of zero");
    let n = x.numer() * x.denom();
    let mut n: i64 = i64::try_from(&n).expect("squarefree_part: discriminant too large");
    let sign = if n < 0 { -1 } else { 1 };
    n = n.abs();
    let mut d0: i64 = 1;
    let mut f: i64 = 2;
    while f * f <= n {
        let mut e = 0;
        while n % f == 0 {
            n /= f;
            e += 1;
        }
        if e % 2 == 1 {
            d0 *= f;
        }
        f += 1;
    }
    d0 * n * sign
}

/// An element `a + b*sqrt(disc)` of a real quadratic field, with `disc` a fixed
/// positive non-square rational carried on the element.
#[derive(Clone, PartialEq, Eq)]
pub struct QuadElem {
    pub disc: Rat,
    pub a: Rat,
    pub b: Rat,
}

impl fmt::Debug for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {} sqrt({})", self.a, self.b, self.disc)
    }
}

impl QuadElem {
    pub fn new(disc: Rat, a: Rat, b: Rat) -> Self {
        QuadElem { disc, a, b }
    }

    pub fn from_rat(disc: &Rat, a: Rat) -> Self {
        QuadElem { disc: disc.clone(), a, b: Rat::zero() }
    }

    pub fn zero(disc: &Rat) -> Self {
        Self::from_rat(disc, Rat::zero())
    }

    pub fn one(disc: &Rat) -> Self {
        Self::from_rat(disc, Rat::one())
    }

    /// `sqrt(disc)` itself.
    pub fn root(disc: &Rat) -> Self {
        QuadElem { disc: disc.clone(), a: Rat::zero(), b: Rat::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.disc, other.disc, "mismatched quadratic field tags");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        QuadElem { disc: self.disc.clone(), a: &self.a + &o.a, b: &self.b + &o.b }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.check(o);
        QuadElem { disc: self.disc.clone(), a: &self.a - &o.a, b: &self.b - &o.b }
    }

    pub fn neg(&self) -> Self {
        QuadElem { disc: self.disc.clone(), a: -self.a.clone(), b: -self.b.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        QuadElem {
            disc: self.disc.clone(),
            a: &self.a * &o.a + &self.b * &o.b * &self.disc,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        QuadElem { disc: self.disc.clone(), a: &self.a * c, b: &self.b * c }
    }

    /// Galois conjugate `a - b*sqrt(disc)`.
    pub fn conj(&self) -> Self {
        QuadElem { disc: self.disc.clone(), a: self.a.clone(), b: -self.b.clone() }
    }

    /// Field trace to `Q`.
    pub fn trace(&self) -> Rat {
        &self.a + &self.a
    }

    /// Field norm to `Q`.
    pub fn norm(&self) -> Rat {
        &self.a * &self.a - &self.b * &self.b * &self.disc
    }

    /// Multiplicative inverse.
    ///
    /// # Panics
    /// Panics on zero input.
    pub fn inv(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "inverse of zero quadratic element");
        self.conj().scale(&(Rat::one() / n))
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    /// Real embedding with the given sign of the square root (`+1.0` or `-1.0`).
    pub fn embed(&self, sign: f64) -> f64 {
        let disc = rat_to_f64(&self.disc);
        rat_to_f64(&self.a) + rat_to_f64(&self.b) * sign * disc.sqrt()
    }

    /// True iff both real embeddings are strictly positive.
    ///
    /// Decided exactly: `a + b sqrt(d) > 0` and `a - b sqrt(d) > 0` hold iff
    /// either both `a > 0` and `a^2 > b^2 d`, or `a > 0`/`a >= 0` boundary
    /// cases resolved by comparing `a^2` with `b^2 d` using the sign of `b`.
    pub fn is_totally_positive(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * &self.disc;
        if self.b.is_zero() {
            return self.a.is_positive();
        }
        // Both embeddings positive <=> a > |b| sqrt(d) <=> a > 0 and a^2 > b^2 d.
        self.a.is_positive() && a2 > b2d
    }
}

/// Conversion to `f64` safe for the magnitudes appearing in this crate.
pub fn rat_to_f64(x: &Rat) -> f64 {
    // Scale down big integers pairwise to stay in range.
    let n = x.numer();
    let d = x.denom();
    let nf = bigint_to_f64(n);
    let df = bigint_to_f64(d);
    nf / df
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    use num::ToPrimitive;
    n.to_f64().expect("bigint out of f64 range")
}

/// Splitting behavior of a prime in a quadratic extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitKind {
    Split,
    Inert,
    Ramified,
}

/// Splitting of the rational prime `p` in `Q(sqrt(disc))`.
///
/// The discriminant may be any nonzero rational; only its squarefree part
/// matters.
///
/// # Panics
/// Panics if `p` is not prime.
pub fn splitting_type(p: u64, disc: &Rat) -> SplitKind {
    assert!(is_prime(p), "splitting_type: {p} is not prime");
    let d0 = squarefree_part(disc);
    if p == 2 {
        // Field discriminant is d0 (if 1 mod 4) or 4 d0; 2 ramifies unless d0 = 1 mod 4.
        return match d0.rem_euclid(8) {
            1 => SplitKind::Split,
            5 => SplitKind::Inert,
            _ => SplitKind::Ramified,
        };
    }
    if d0 % (p as i64) == 0 {
        return SplitKind::Ramified;
    }
    match legendre(d0, p) {
        1 => SplitKind::Split,
        -1 => SplitKind::Inert,
        _ => unreachable!("p does not divide the squarefree part"),
    }
}

/// Valuation data of an ideal at one prime of the real quadratic base field,
/// together with the splitting of that prime in the relevant quadratic
/// extension.
#[derive(Clone, Copy, Debug)]
pub struct PrimeVal {
    pub kind: SplitKind,
    pub ord: i64,
}

/// Multiplicative count of integral ideals of the upper field with a given
/// relative norm, from the valuation vector of that norm ideal.
///
/// Local factors: `ord + 1` at split primes, `(1 + (-1)^ord)/2` at inert
/// primes, `1` at ramified primes; the count is `0` if any valuation is
/// negative.
pub fn rho_ideal(vals: &[PrimeVal]) -> u64 {
    let mut acc: u64 = 1;
    for v in vals {
        if v.ord < 0 {
            return 0;
        }
        acc *= match v.kind {
            SplitKind::Split => (v.ord + 1) as u64,
            SplitKind::Inert => {
                if v.ord % 2 == 0 {
                    1
                } else {
                    0
                }
            }
            SplitKind::Ramified => 1,
        };
    }
    acc
}

/// A rank-`<= 2` lattice of values inside a real quadratic field, stored as a
/// coset `q0 + Z v1 + Z v2` in `(1, sqrt(disc))` coordinates.  Used as the
/// support of Eisenstein coefficients on one coset of the middle lattice.
#[derive(Clone, Debug)]
pub struct SupportCoset {
    pub disc: Rat,
    pub q0: (Rat, Rat),
    /// Hermite-form basis rows of the value lattice; may have 0, 1, or 2 rows.
    pub basis: Vec<(Rat, Rat)>,
}

impl SupportCoset {
    /// Builds the coset from an offset and arbitrary generating vectors by
    /// rational Hermite reduction.
    pub fn new(disc: Rat, q0: (Rat, Rat), gens: &[(Rat, Rat)]) -> Self {
        let basis = hermite_basis(gens);
        SupportCoset { disc, q0, basis }
    }

    /// Membership of `c + d sqrt(disc)` in the coset.
    pub fn contains(&self, c: &Rat, d: &Rat) -> bool {
        let x = (c - &self.q0.0, d - &self.q0.1);
        lattice_contains(&self.basis, &x)
    }
}

/// Hermite reduction of rational 2-vectors to an upper-triangular basis
/// `[(g, y1), (0, y2)]` (rows may be fewer for lower rank).
fn hermite_basis(gens: &[(Rat, Rat)]) -> Vec<(Rat, Rat)> {
    // Clear denominators to integers, run integer HNF, scale back.
    let mut den = BigInt::one();
    for (x, y) in gens {
        den = num::integer::lcm(den.clone(), x.denom().clone());
        den = num::integer::lcm(den.clone(), y.denom().clone());
    }
    let denr = Rat::from(den.clone());
    let mut rows: Vec<(BigInt, BigInt)> = gens
        .iter()
        .map(|(x, y)| ((x * &denr).to_integer(), (y * &denr).to_integer()))
        .filter(|(x, y)| !x.is_zero() || !y.is_zero())
        .collect();
    // Integer HNF on 2 columns via repeated gcd elimination.
    // First column: gcd of all first entries.
    let mut out: Vec<(BigInt, BigInt)> = Vec::new();
    loop {
        // Find row with smallest nonzero |first entry|.
        let mut piv: Option<usize> = None;
        for (i, r) in rows.iter().enumerate() {
            if !r.0.is_zero() {
                let better = match piv {
                    None => true,
                    Some(j) => r.0.abs() < rows[j].0.abs(),
                };
                if better {
                    piv = Some(i);
                }
            }
        }
        match piv {
            None => break,
            Some(j) => {
                let p = rows[j].clone();
                let mut done = true;
                for (i, r) in rows.iter_mut().enumerate() {
                    if i != j && !r.0.is_zero() {
                        let q = &r.0 / &p.0; // truncated division; iterate to converge
                        r.0 -= &q * &p.0;
                        r.1 -= &q * &p.1;
                        if !r.0.is_zero() {
                            done = false;
                        }
                    }
                }
                if done {
                    let p = rows.remove(j);
                    out.push(p);
                    break;
                }
            }
        }
    }
    // Remaining rows have zero first entry: reduce second column to gcd.
    let mut g2 = BigInt::zero();
    for r in &rows {
        g2 = num::integer::gcd(g2.clone(), r.1.clone());
    }
    if !g2.is_zero() {
        out.push((BigInt::zero(), g2));
    }
    // Normalize signs and reduce the first row's second entry mod the second row.
    for r in &mut out {
        let neg = if r.0.is_zero() { r.1.is_negative() } else { r.0.is_negative() };
        if neg {
            r.0 = -r.0.clone();
            r.1 = -r.1.clone();
        }
    }
    if out.len() == 2 && !out[1].1.is_zero() {
        let q = num::Integer::div_floor(&out[0].1, &out[1].1);
        let step = &q * &out[1].1;
        out[0].1 -= step;
    }
    out.iter()
        .map(|(x, y)| (Rat::new(x.clone(), den.clone()), Rat::new(y.clone(), den.clone())))
        .collect()
}

/// Membership of a rational 2-vector in the span of Hermite-form basis rows.
fn lattice_contains(basis: &[(Rat, Rat)], x: &(Rat, Rat)) -> bool {
    let mut rem = x.clone();
    for row in basis {
        if !row.0.is_zero() {
            let q = &rem.0 / &row.0;
            if !q.is_integer() {
                return false;
            }
            rem.0 -= &q * &row.0;
            rem.1 -= &q * &row.1;
        }
    }
    if !rem.0.is_zero() {
        return false;
    }
    for row in basis {
        if row.0.is_zero() && !row.1.is_zero() {
            let q = &rem.1 / &row.1;
            if !q.is_integer() {
                return false;
            }
            rem.1 -= &q * &row.1;
        }
    }
    rem.1.is_zero()
}

/// Complete list of totally positive `t = m/2 + s sqrt(Dtilde)` lying in the
/// given support coset, in ascending order of `s`.
///
/// Total positivity confines `s` to the open window `|s| < m / (2 sqrt(Dtilde))`,
/// so the list is finite; the support lattice pins `s` to an arithmetic
/// progression which is scanned exhaustively.
pub fn enumerate_trace_t(m: &Rat, support: &SupportCoset) -> Vec<QuadElem> {
    let mut out = Vec::new();
    if !m.is_positive() {
        return out;
    }
    let disc = &support.disc;
    let half_m = m / rint(2);
    // First coordinate of t - q0 is fixed; solve for the lattice combination.
    let c_target = &half_m - &support.q0.0;
    // Determine the progression of admissible s values.
    let (s0, step) = match support.basis.len() {
        0 => {
            // Lattice is trivial: t must equal q0 exactly.
            if c_target.is_zero() {
                (support.q0.1.clone(), None)
            } else {
                return out;
            }
        }
        1 => {
            let (x1, y1) = &support.basis[0];
            if x1.is_zero() {
                if !c_target.is_zero() {
                    return out;
                }
                (support.q0.1.clone(), Some(y1.clone()))
            } else {
                let n1 = &c_target / x1;
                if !n1.is_integer() {
                    return out;
                }
                (&support.q0.1 + &n1 * y1, None)
            }
        }
        _ => {
            let (x1, y1) = &support.basis[0];
            let (_, y2) = &support.basis[1];
            if x1.is_zero() {
                // Degenerate Hermite form (both rows in second column).
                if !c_target.is_zero() {
                    return out;
                }
                let g = gcd_rat(y1, y2);
                (support.q0.1.clone(), Some(g))
            } else {
                let n1 = &c_target / x1;
                if !n1.is_integer() {
                    return out;
                }
                (&support.q0.1 + &n1 * y1, Some(y2.clone()))
            }
        }
    };
    // Window: s^2 < m^2 / (4 Dtilde), strict.
    let bound2 = m * m / (rint(4) * disc);
    let mut push = |s: Rat| {
        if &s * &s < bound2 {
            out.push(QuadElem::new(disc.clone(), half_m.clone(), s));
        }
    };
    match step {
        None => push(s0),
        Some(step) => {
            assert!(!step.is_zero(), "support lattice with zero step");
            let step = step.abs();
            // Scan the progression s0 + k*step within the window.
            // |s| < sqrt(bound2): bound via rational comparison by stepping out from
            // the center k = round(-s0/step).
            let k0 = (-&s0 / &step).round();
            let mut k = k0.clone();
            loop {
                let s = &s0 + &k * &step;
                if &s * &s >= bound2 {
                    break;
                }
                push(s);
                k += Rat::one();
            }
            let mut k = &k0 - Rat::one();
            loop {
                let s = &s0 + &k * &step;
                if &s * &s >= bound2 {
                    break;
                }
                push(s);
                k -= Rat::one();
            }
        }
    }
    out.sort_by(|a, b| a.b.partial_cmp(&b.b).unwrap());
    out
}

fn gcd_rat(a: &Rat, b: &Rat) -> Rat {
    // gcd of two rationals as generators of the same Z-module.
    let den = num::integer::lcm(a.denom().clone(), b.denom().clone());
    let denr = Rat::from(den.clone());
    let ai = (a * &denr).to_integer();
    let bi = (b * &denr).to_integer();
    Rat::new(num::integer::gcd(ai, bi), den)
}

/// An element `u + v sqrt(Delta)` of the CM field `E = F(sqrt Delta)` with
/// `Delta` a fixed totally negative element of `F`.
#[derive(Clone, PartialEq, Eq)]
pub struct CMElem {
    pub delta: QuadElem,
    pub u: QuadElem,
    pub v: QuadElem,
}

impl fmt::Debug for CMElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}) + ({:?}) sqrtDelta", self.u, self.v)
    }
}

impl CMElem {
    pub fn new(delta: QuadElem, u: QuadElem, v: QuadElem) -> Self {
        assert_eq!(delta.disc, u.disc);
        assert_eq!(delta.disc, v.disc);
        CMElem { delta, u, v }
    }

    pub fn from_base(delta: &QuadElem, u: QuadElem) -> Self {
        let v = QuadElem::zero(&delta.disc);
        CMElem { delta: delta.clone(), u, v }
    }

    pub fn zero(delta: &QuadElem) -> Self {
        Self::from_base(delta, QuadElem::zero(&delta.disc))
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.v.is_zero()
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.delta, o.delta, "mismatched CM field tags");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        CMElem { delta: self.delta.clone(), u: self.u.add(&o.u), v: self.v.add(&o.v) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.check(o);
        CMElem { delta: self.delta.clone(), u: self.u.sub(&o.u), v: self.v.sub(&o.v) }
    }

    pub fn neg(&self) -> Self {
        CMElem { delta: self.delta.clone(), u: self.u.neg(), v: self.v.neg() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let u = self.u.mul(&o.u).add(&self.v.mul(&o.v).mul(&self.delta));
        let v = self.u.mul(&o.v).add(&self.v.mul(&o.u));
        CMElem { delta: self.delta.clone(), u, v }
    }

    pub fn scale_base(&self, c: &QuadElem) -> Self {
        CMElem { delta: self.delta.clone(), u: self.u.mul(c), v: self.v.mul(c) }
    }

    /// Complex conjugation (the nontrivial automorphism over `F`): negates the
    /// `sqrt(Delta)` component.
    pub fn conj(&self) -> Self {
        CMElem { delta: self.delta.clone(), u: self.u.clone(), v: self.v.neg() }
    }

    /// Relative norm to `F`: `z * conj(z) = u^2 - Delta v^2`.
    pub fn rel_norm(&self) -> QuadElem {
        self.u.mul(&self.u).sub(&self.delta.mul(&self.v).mul(&self.v))
    }

    /// Relative trace to `F`.
    pub fn rel_trace(&self) -> QuadElem {
        self.u.add(&self.u)
    }

    /// Absolute norm to `Q`.
    pub fn abs_norm(&self) -> Rat {
        self.rel_norm().norm()
    }

    pub fn inv(&self) -> Self {
        let n = self.rel_norm();
        assert!(!n.is_zero(), "inverse of zero CM element");
        self.conj().scale_base(&n.inv())
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.inv())
    }

    /// Complex embedding over the real embedding of `F` with the given sign of
    /// `sqrt(D)`; the branch of `sqrt(Delta)` has positive imaginary part.
    pub fn embed(&self, sign: f64) -> num::complex::Complex<f64> {
        let du = self.u.embed(sign);
        let dv = self.v.embed(sign);
        let dd = self.delta.embed(sign);
        assert!(dd < 0.0, "Delta embedding not negative");
        let sq = num::complex::Complex::new(0.0, (-dd).sqrt());
        num::complex::Complex::new(du, 0.0) + sq * dv
    }
}

/// The cyclic-CM Galois data: the order-4 automorphism `sigma` of `E` acting
/// on `sqrt(Delta)` through an element of `F`.
///
/// For a cyclic quartic CM field the reflex coincides with `E` and
/// `sigma(sqrt Delta) = s_sigma * sqrt(Delta)` with `s_sigma^2 = Delta'/Delta`
/// in `F`.  Non-cyclic configurations have no such `s_sigma` and are rejected.
#[derive(Clone, Debug)]
pub struct CyclicGalois {
    pub delta: QuadElem,
    pub s_sigma: QuadElem,
}

impl CyclicGalois {
    /// Constructs the automorphism with the given branch sign.
    ///
    /// # Errors
    /// Returns an error string when `Delta'/Delta` is not a square in `F`
    /// (non-cyclic reflex), naming the obstruction.
    pub fn new(delta: &QuadElem, branch_positive: bool) -> Result<Self, String> {
        let ratio = delta.conj().div(delta);
        // Seek s in F with s^2 = ratio.  Since Delta * Delta' = Dtilde in Q,
        // s = Delta' / sqrt(Dtilde) when Dtilde is the disc; in general solve
        // s = Delta' / w where w^2 = Delta*Delta' must be a square times disc.
        let dtilde = delta.mul(&delta.conj());
        assert!(dtilde.is_rational(), "Delta * Delta' must be rational");
        let dt = dtilde.a.clone();
        // w = sqrt(dt): representable in F iff dt / disc is a rational square
        // or dt itself is a rational square.
        let w = sqrt_in_quad(&delta.disc, &dt).ok_or_else(|| {
            format!(
                "non-cyclic reflex: Delta*Delta' = {dt} is not a square in F; \
                 exact Galois arithmetic requires a cyclic quartic CM field"
            )
        })?;
        let mut s = delta.conj().div(&w);
        debug_assert_eq!(s.mul(&s), ratio);
        if !branch_positive {
            s = s.neg();
        }
        Ok(CyclicGalois { delta: delta.clone(), s_sigma: s })
    }

    /// Applies `sigma`: conjugates base-field coordinates and twists the
    /// `sqrt(Delta)` component by `s_sigma`.
    pub fn sigma(&self, z: &CMElem) -> CMElem {
        CMElem {
            delta: self.delta.clone(),
            u: z.u.conj(),
            v: z.v.conj().mul(&self.s_sigma),
        }
    }
}

/// Square root of a positive rational inside `Q(sqrt disc)`, if one exists.
pub fn sqrt_in_quad(disc: &Rat, x: &Rat) -> Option<QuadElem> {
    if let Some(r) = sqrt_rat(x) {
        return Some(QuadElem::from_rat(disc, r));
    }
    let q = x / disc;
    sqrt_rat(&q).map(|r| QuadElem::new(disc.clone(), Rat::zero(), r))
}

/// Exact square root of a rational, if it is a perfect square.
pub fn sqrt_rat(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// Local valuation of a nonzero element of `Q(sqrt disc)` at a prime of that
/// field above `p`, specified by its splitting kind.  For split primes the
/// `which` flag selects the prime corresponding to the Hensel root congruent
/// to `+r` (`false`) or `-r` (`true`) of `x^2 = disc` mod powers of `p`.
pub fn quad_ord(x: &QuadElem, p: u64, kind: SplitKind, which: bool) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    match kind {
        SplitKind::Ramified => ord_p(&x.norm(), p),
        SplitKind::Inert => {
            let v = ord_p(&x.norm(), p).expect("nonzero norm");
            assert!(v % 2 == 0, "inert valuation must be even on the norm");
            Some(v / 2)
        }
        SplitKind::Split => {
            // Map sqrt(disc) to a p-adic root and read off the valuation.
            let d0 = &x.disc;
            // Work with scaled integral coordinates.
            let mut prec: u32 = 24;
            loop {
                let r = hensel_sqrt(d0, p, prec).expect("split prime must have a root");
                let r = if which { -r } else { r };
                // value = a + b*r in Q_p up to O(p^prec adjusted).
                let val = &x.a + &x.b * Rat::from(r);
                let v = match ord_p(&val, p) {
                    None => {
                        prec *= 2;
                        continue;
                    }
                    Some(v) => v,
                };
                // Trust v only when well inside the precision window.
                let slack = ord_p(&x.b, p).unwrap_or(0).abs() as u32 + 4;
                if (v.unsigned_abs() as u32) + slack < prec {
                    return Some(v);
                }
                prec *= 2;
                if prec > 1 << 16 {
                    panic!("split valuation did not stabilize");
                }
            }
        }
    }
}

/// Hensel lift of a square root of the rational `d` modulo `p^prec` (odd `p`,
/// `d` a `p`-adic unit square).
fn hensel_sqrt(d: &Rat, p: u64, prec: u32) -> Option<BigInt> {
    assert!(p > 2);
    let pb = BigInt::from(p);
    let modulus = pb.pow(prec);
    // d must be a p-adic unit here.
    let num = d.numer().mod_floor(&modulus);
    let den_inv = mod_inverse(&d.denom().mod_floor(&modulus), &modulus)?;
    let target = num * den_inv % &modulus;
    // Root mod p by brute force (p small in practice).
    let p_small = p;
    let t_mod_p = {
        use num::ToPrimitive;
        (target.mod_floor(&pb)).to_u64().unwrap()
    };
    let mut r0: Option<u64> = None;
    for x in 0..p_small {
        if x * x % p_small == t_mod_p {
            r0 = Some(x);
            break;
        }
    }
    let mut r = BigInt::from(r0?);
    // Newton iteration: r <- (r + t/r)/2 mod p^k, doubling precision.
    let mut k: u32 = 1;
    while k < prec {
        k = (k * 2).min(prec);
        let m = pb.pow(k);
        let r_inv = mod_inverse(&r.mod_floor(&m), &m)?;
        let two_inv = mod_inverse(&BigInt::from(2), &m)?;
        r = (&r + target.mod_floor(&m) * r_inv) % &m * two_inv % &m;
    }
    Some(r.mod_floor(&modulus))
}

/// Modular inverse via extended gcd; `None` if not invertible.
fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = num::Integer::extended_gcd(a, m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

use num::Integer as _;

#[cfg(test)]
mod tests {
    use super::*;

    fn d5() -> Rat {
        rint(5)
    }

    #[test]
    fn quad_field_axioms() {
        let x = QuadElem::new(d5(), rat(2, 1), rat(1, 1));
        assert_eq!(x.trace(), rint(4));
        assert_eq!(x.norm(), rint(-1));
        assert_eq!(x.conj().conj(), x);
        let y = QuadElem::new(d5(), rat(1, 3), rat(-2, 7));
        assert_eq!(x.mul(&y).norm(), x.norm() * y.norm());
        assert_eq!(x.mul(&x.inv()), QuadElem::one(&d5()));
    }

    #[test]
    fn total_positivity() {
        assert!(QuadElem::new(d5(), rat(1, 16), Rat::zero()).is_totally_positive());
        assert!(!QuadElem::zero(&d5()).is_totally_positive());
        assert!(QuadElem::new(d5(), rat(1, 16), rat(1, 100)).is_totally_positive());
        assert!(!QuadElem::new(d5(), rat(1, 16), rat(1, 10)).is_totally_positive());
        // Cross-check against the numerical embeddings on a grid.
        for na in -8..8i64 {
            for nb in -8..8i64 {
                let x = QuadElem::new(d5(), rat(na, 3), rat(nb, 7));
                let nume = x.embed(1.0) > 0.0 && x.embed(-1.0) > 0.0 && !x.is_zero();
                assert_eq!(x.is_totally_positive(), nume, "mismatch at {na}/{nb}");
            }
        }
    }

    #[test]
    fn splitting_table() {
        // Q(sqrt 5): split iff p = +-1 mod 5.
        assert_eq!(splitting_type(5, &d5()), SplitKind::Ramified);
        assert_eq!(splitting_type(11, &d5()), SplitKind::Split);
        assert_eq!(splitting_type(19, &d5()), SplitKind::Split);
        assert_eq!(splitting_type(3, &d5()), SplitKind::Inert);
        assert_eq!(splitting_type(7, &d5()), SplitKind::Inert);
        assert_eq!(splitting_type(13, &d5()), SplitKind::Inert);
        assert_eq!(splitting_type(2, &d5()), SplitKind::Inert);
        // Brute-force quadratic-residue cross-check.
        for &p in &[3u64, 7, 11, 13] {
            let has_root = (0..p).any(|x| (x * x) % p == 5 % p);
            let kind = splitting_type(p, &d5());
            assert_eq!(kind == SplitKind::Split, has_root, "p = {p}");
        }
    }

    #[test]
    fn rho_ideal_counts() {
        assert_eq!(rho_ideal(&[]), 1);
        assert_eq!(rho_ideal(&[PrimeVal { kind: SplitKind::Inert, ord: 1 }]), 0);
        assert_eq!(rho_ideal(&[PrimeVal { kind: SplitKind::Split, ord: 2 }]), 3);
        assert_eq!(rho_ideal(&[PrimeVal { kind: SplitKind::Ramified, ord: 3 }]), 1);
        assert_eq!(rho_ideal(&[PrimeVal { kind: SplitKind::Split, ord: -1 }]), 0);
        // Multiplicativity over coprime vectors.
        let a = [PrimeVal { kind: SplitKind::Split, ord: 1 }];
        let b = [PrimeVal { kind: SplitKind::Inert, ord: 2 }];
        let ab = [a[0], b[0]];
        assert_eq!(rho_ideal(&ab), rho_ideal(&a) * rho_ideal(&b));
    }

    #[test]
    fn trace_enumeration_matches_brute_force() {
        // Support: s on the grid (1/40)Z, c fixed to m/2 (full c-line lattice).
        let sup = SupportCoset::new(
            d5(),
            (Rat::zero(), Rat::zero()),
            &[(rint(1), Rat::zero()), (Rat::zero(), rat(1, 40))],
        );
        let m = rat(1, 8);
        let got = enumerate_trace_t(&m, &sup);
        // Brute force: scan all s = k/40 within a generous window.
        let mut expect = Vec::new();
        for k in -100..=100i64 {
            let s = rat(k, 40);
            let t = QuadElem::new(d5(), rat(1, 16), s.clone());
            if t.is_totally_positive() && sup.contains(&rat(1, 16), &s) {
                expect.push(s);
            }
        }
        let got_s: Vec<Rat> = got.iter().map(|t| t.b.clone()).collect();
        assert_eq!(got_s, expect);
        assert!(got.iter().all(|t| t.is_totally_positive()));
        assert!(got.iter().all(|t| t.trace() == rat(1, 8)));
        // m = 0 gives nothing.
        assert!(enumerate_trace_t(&Rat::zero(), &sup).is_empty());
    }

    #[test]
    fn trace_enumeration_with_offset_support() {
        // Coset with a nonzero offset in both coordinates.
        let sup = SupportCoset::new(
            d5(),
            (rat(1, 16), rat(1, 40)),
            &[(rat(1, 2), Rat::zero()), (Rat::zero(), rat(1, 20))],
        );
        let got = enumerate_trace_t(&rat(1, 8), &sup);
        for t in &got {
            assert!(sup.contains(&t.a, &t.b));
            assert!(t.is_totally_positive());
        }
        // s = 1/40 is in the window (1/40 < (1/16)/sqrt5 = 0.02795) and in the coset.
        assert!(got.iter().any(|t| t.b == rat(1, 40)));
        assert!(got.iter().any(|t| t.b == rat(-1, 40)));
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn cm_elem_arithmetic() {
        // Delta = (-5 - sqrt5)/2 over F = Q(sqrt5).
        let delta = QuadElem::new(d5(), rat(-5, 2), rat(-1, 2));
        let z = CMElem::new(
            delta.clone(),
            QuadElem::new(d5(), rat(1, 2), rat(1, 2)),
            QuadElem::new(d5(), rat(1, 3), rat(0, 1)),
        );
        let w = z.mul(&z.inv());
        assert_eq!(w.u, QuadElem::one(&d5()));
        assert!(w.v.is_zero());
        // Norm is totally positive for nonzero z.
        assert!(z.rel_norm().is_totally_positive());
        // conj is an involution fixing the norm.
        assert_eq!(z.conj().conj(), z);
        assert_eq!(z.conj().rel_norm(), z.rel_norm());
    }

    #[test]
    fn cyclic_galois_order_four() {
        let delta = QuadElem::new(d5(), rat(-5, 2), rat(-1, 2));
        let gal = CyclicGalois::new(&delta, true).expect("Q(zeta5) tower is cyclic");
        // sigma^2 = complex conjugation on a generic element.
        let z = CMElem::new(
            delta.clone(),
            QuadElem::new(d5(), rat(2, 3), rat(-1, 5)),
            QuadElem::new(d5(), rat(1, 7), rat(2, 9)),
        );
        let s2 = gal.sigma(&gal.sigma(&z));
        assert_eq!(s2, z.conj());
        let s4 = gal.sigma(&gal.sigma(&s2));
        assert_eq!(s4, z);
        // s_sigma^2 = Delta'/Delta exactly.
        let r = gal.s_sigma.mul(&gal.s_sigma);
        assert_eq!(r, delta.conj().div(&delta));
    }

    #[test]
    fn split_valuations() {
        // p = 11 splits in Q(sqrt5).
        let x = QuadElem::new(d5(), rint(4), rint(1));
        // norm = 16 - 5 = 11: one split prime gets ord 1, the other 0.
        let v1 = quad_ord(&x, 11, SplitKind::Split, false).unwrap();
        let v2 = quad_ord(&x, 11, SplitKind::Split, true).unwrap();
        assert_eq!(v1 + v2, 1);
        assert!(v1.min(v2) == 0);
        // Ramified: ord at (sqrt5) of sqrt5 is 1.
        let r = QuadElem::root(&d5());
        assert_eq!(quad_ord(&r, 5, SplitKind::Ramified, false), Some(1));
        // Inert: p = 3, element 3 + 0 sqrt5 has ord 1... norm 9, ord 1.
        let three = QuadElem::from_rat(&d5(), rint(3));
        assert_eq!(quad_ord(&three, 3, SplitKind::Inert, false), Some(1));
    }

    #[test]
    fn sqrt_helpers() {
        assert_eq!(sqrt_rat(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(sqrt_rat(&rat(2, 1)), None);
        let w = sqrt_in_quad(&d5(), &rint(5)).unwrap();
        assert_eq!(w, QuadElem::root(&d5()));
        let w = sqrt_in_quad(&d5(), &rint(20)).unwrap();
        assert_eq!(w.mul(&w), QuadElem::from_rat(&d5(), rint(20)));
        assert!(sqrt_in_quad(&d5(), &rint(7)).is_none());
    }
}
