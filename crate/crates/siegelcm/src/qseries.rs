//! Truncated formal Fourier series with rational exponents and log-linear
//! coefficients, the classical one-variable theta series and their reciprocal
//! combinations `u`, `v`, `w`, the rank-one theta series attached to cosets of
//! the small lattice, and constant-term extraction.
//!
//! Coefficients live in the Q-vector space spanned by 1 and `log p` for primes
//! `p`; all arithmetic is exact, and floating point enters only through
//! [`LogLinear::eval_f64`].

use crate::nfield::{rat, rint, Rat};
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// An exact value `c0 + sum_p c_p * log(p)` with rational `c0`, `c_p`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LogLinear {
    pub c0: Rat,
    pub logs: BTreeMap<u64, Rat>,
}

impl LogLinear {
    pub fn zero() -> Self {
        LogLinear::default()
    }

    pub fn from_rat(c0: Rat) -> Self {
        LogLinear { c0, logs: BTreeMap::new() }
    }

    pub fn from_log(p: u64, c: Rat) -> Self {
        let mut l = LogLinear::zero();
        l.add_log(p, c);
        l
    }

    pub fn is_zero(&self) -> bool {
        self.c0.is_zero() && self.logs.is_empty()
    }

    /// Number of distinct primes with nonzero log coefficient.
    pub fn prime_count(&self) -> usize {
        self.logs.len()
    }

    pub fn add_log(&mut self, p: u64, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.logs.entry(p).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.logs.remove(&p);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.c0 += &o.c0;
        for (p, c) in &o.logs {
            r.add_log(*p, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&rint(-1)))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return LogLinear::zero();
        }
        LogLinear {
            c0: &self.c0 * c,
            logs: self.logs.iter().map(|(p, v)| (*p, v * c)).collect(),
        }
    }

    /// Floating-point value using natural logarithms.
    pub fn eval_f64(&self) -> f64 {
        let mut v = crate::nfield::rat_to_f64(&self.c0);
        for (p, c) in &self.logs {
            v += crate::nfield::rat_to_f64(c) * (*p as f64).ln();
        }
        v
    }

    /// Serialization `c0<TAB>p:c_p,...` used by golden files and the dump mode.
    pub fn serialize(&self) -> String {
        let mut s = format!("{}", self.c0);
        s.push('\t');
        let parts: Vec<String> = self.logs.iter().map(|(p, c)| format!("{p}:{c}")).collect();
        s.push_str(&parts.join(","));
        s
    }
}

/// A truncated Fourier series `sum_e c_e q^e` with rational exponents.
///
/// Coefficients with exponent `< trunc` are exact; exponents `>= trunc` are
/// dropped.  Multiplication takes the weaker (smaller) truncation of the two
/// operands, as does addition.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    pub coeffs: BTreeMap<Rat, LogLinear>,
    pub trunc: Rat,
}

impl FourierSeries {
    pub fn zero(trunc: Rat) -> Self {
        FourierSeries { coeffs: BTreeMap::new(), trunc }
    }

    pub fn constant(c: Rat, trunc: Rat) -> Self {
        let mut s = Self::zero(trunc);
        s.set(Rat::zero(), LogLinear::from_rat(c));
        s
    }

    /// Single term `c * q^e`.
    pub fn monomial(e: Rat, c: Rat, trunc: Rat) -> Self {
        let mut s = Self::zero(trunc);
        s.set(e, LogLinear::from_rat(c));
        s
    }

    /// Sets a coefficient, dropping zeros and out-of-window exponents.
    pub fn set(&mut self, e: Rat, c: LogLinear) {
        if c.is_zero() || e >= self.trunc {
            return;
        }
        self.coeffs.insert(e, c);
    }

    pub fn add_to(&mut self, e: Rat, c: &LogLinear) {
        if e >= self.trunc || c.is_zero() {
            return;
        }
        let cur = self.coeffs.entry(e.clone()).or_insert_with(LogLinear::zero);
        *cur = cur.add(c);
        if cur.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    pub fn coeff(&self, e: &Rat) -> LogLinear {
        self.coeffs.get(e).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Least common multiple of the exponent denominators (1 for the empty series).
    pub fn denom(&self) -> num::BigInt {
        let mut l = num::BigInt::one();
        for e in self.coeffs.keys() {
            l = num::integer::lcm(l, e.denom().clone());
        }
        l
    }

    pub fn min_exponent(&self) -> Option<Rat> {
        self.coeffs.keys().next().cloned()
    }

    pub fn add(&self, o: &Self) -> Self {
        let trunc = self.trunc.clone().min(o.trunc.clone());
        let mut r = FourierSeries::zero(trunc);
        for (e, c) in &self.coeffs {
            r.add_to(e.clone(), c);
        }
        for (e, c) in &o.coeffs {
            r.add_to(e.clone(), c);
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&rint(-1)))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return FourierSeries::zero(self.trunc.clone());
        }
        FourierSeries {
            coeffs: self.coeffs.iter().map(|(e, v)| (e.clone(), v.scale(c))).collect(),
            trunc: self.trunc.clone(),
        }
    }

    /// Shift every exponent by `d` (the truncation window shifts with it).
    pub fn shift(&self, d: &Rat) -> Self {
        FourierSeries {
            coeffs: self.coeffs.iter().map(|(e, v)| (e + d, v.clone())).collect(),
            trunc: &self.trunc + d,
        }
    }

    /// Product with truncation at the weaker window, adjusted for negative
    /// leading exponents so that all kept coefficients are exact.
    pub fn mul(&self, o: &Self) -> Self {
        let zero = Rat::zero();
        let min_a = self.min_exponent().unwrap_or_else(Rat::zero).min(zero.clone());
        let min_b = o.min_exponent().unwrap_or_else(Rat::zero).min(zero);
        // A coefficient at e of the product needs a-coeffs up to e - min_b and
        // b-coeffs up to e - min_a; the guaranteed-exact window is the min of
        // trunc_a + min_b and trunc_b + min_a.
        let trunc = (&self.trunc + &min_b).min(&o.trunc + &min_a);
        let mut r = FourierSeries::zero(trunc);
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &o.coeffs {
                let e = ea + eb;
                if e >= r.trunc {
                    continue;
                }
                // LogLinear coefficients multiply only against rational ones;
                // product of two genuine log-linear values would leave the space.
                let c = mul_loglin(ca, cb);
                r.add_to(e, &c);
            }
        }
        r
    }

    /// Reciprocal of a series whose leading coefficient is a nonzero rational.
    ///
    /// # Panics
    /// Panics on the zero series or a leading coefficient that is not purely
    /// rational.
    pub fn recip(&self) -> Self {
        let e0 = self.min_exponent().expect("reciprocal of the zero series");
        let lead = self.coeff(&e0);
        assert!(lead.logs.is_empty(), "reciprocal needs a rational leading coefficient");
        let c0 = lead.c0.clone();
        assert!(!c0.is_zero());
        // f = c0 q^{e0} (1 + g), g with strictly positive exponents.
        let tail_trunc = &self.trunc - &e0;
        let mut g = FourierSeries::zero(tail_trunc.clone());
        for (e, c) in &self.coeffs {
            if e > &e0 {
                g.add_to(e - &e0, &c.scale(&(Rat::one() / &c0)));
            }
        }
        // 1/(1+g) = sum (-g)^k, truncated.
        let mut acc = FourierSeries::constant(Rat::one(), tail_trunc.clone());
        let neg_g = g.scale(&rint(-1));
        let mut pow = FourierSeries::constant(Rat::one(), tail_trunc.clone());
        let g_min = neg_g.min_exponent();
        if let Some(g_min) = g_min {
            assert!(g_min.is_positive());
            let mut k_min = Rat::zero();
            loop {
                pow = pow.mul(&neg_g);
                pow.trunc = tail_trunc.clone();
                k_min += &g_min;
                if pow.is_zero() || k_min >= tail_trunc {
                    break;
                }
                acc = acc.add(&pow);
                acc.trunc = tail_trunc.clone();
            }
        }
        let inv_lead = Rat::one() / &c0;
        acc.scale(&inv_lead).shift(&-e0)
    }

    /// Coefficient at exponent zero.
    pub fn constant_term(&self) -> LogLinear {
        self.coeff(&Rat::zero())
    }

    /// Serialization: one line per term, `exponent<TAB>c0<TAB>p:c_p,...`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for (e, c) in &self.coeffs {
            let _ = writeln!(s, "{}\t{}", e, c.serialize());
        }
        s
    }
}

/// Product of two log-linear values, defined when at least one is rational.
fn mul_loglin(a: &LogLinear, b: &LogLinear) -> LogLinear {
    if a.logs.is_empty() {
        b.scale(&a.c0)
    } else if b.logs.is_empty() {
        a.scale(&b.c0)
    } else {
        panic!("product of two log-linear values is outside the coefficient space");
    }
}

/// The three classical one-variable theta series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaKind {
    /// `sum_n q^{n^2/2}`.
    Plain,
    /// `sum_n (-1)^n q^{n^2/2}`.
    Alternating,
    /// `sum_n q^{(n+1/2)^2/2}`.
    HalfShift,
}

/// Exact truncated expansion of the selected classical theta series.
pub fn classical_theta(kind: ThetaKind, trunc: &Rat) -> FourierSeries {
    let mut s = FourierSeries::zero(trunc.clone());
    match kind {
        ThetaKind::Plain | ThetaKind::Alternating => {
            let mut n: i64 = 0;
            loop {
                let e = rat(n * n, 2);
                if &e >= trunc {
                    break;
                }
                let mut c = if n == 0 { rint(1) } else { rint(2) };
                if kind == ThetaKind::Alternating && n % 2 == 1 {
                    c = -c;
                }
                s.add_to(e, &LogLinear::from_rat(c));
                n += 1;
            }
        }
        ThetaKind::HalfShift => {
            // n and -1-n pair to the same exponent.
            let mut n: i64 = 0;
            loop {
                let e = rat((2 * n + 1) * (2 * n + 1), 8);
                if &e >= trunc {
                    break;
                }
                s.add_to(e, &LogLinear::from_rat(rint(2)));
                n += 1;
            }
        }
    }
    s
}

/// The triple `(u, v, w)` of input-series building blocks:
/// `u = 1/(2 theta) + 1/(2 theta~)`, `v = 1/(2 theta) - 1/(2 theta~)`,
/// `w = 2/theta~~`.
pub fn build_uvw(trunc: &Rat) -> (FourierSeries, FourierSeries, FourierSeries) {
    // The reciprocals lose a little precision window near trunc; pad the
    // intermediate computations so the returned series are exact below trunc.
    let pad = trunc + rint(1);
    let th = classical_theta(ThetaKind::Plain, &pad);
    let tha = classical_theta(ThetaKind::Alternating, &pad);
    let thh = classical_theta(ThetaKind::HalfShift, &pad);
    let half = rat(1, 2);
    let ith = th.recip().scale(&half);
    let itha = tha.recip().scale(&half);
    let mut u = ith.add(&itha);
    let mut v = ith.sub(&itha);
    let mut w = thh.recip().scale(&rint(2));
    u = truncate_to(u, trunc);
    v = truncate_to(v, trunc);
    w = truncate_to(w, trunc);
    (u, v, w)
}

fn truncate_to(mut s: FourierSeries, trunc: &Rat) -> FourierSeries {
    s.coeffs.retain(|e, _| e < trunc);
    s.trunc = trunc.clone();
    s
}

/// Theta series of the rank-one lattice attached to the coset `t0 + Z` with
/// quadratic form `2 D x^2`: `sum_{x in t0+Z} q^{2 D x^2}`, one unit of
/// coefficient per solution `x` (strict per-coset counting; see the crate
/// README for the counting convention).
pub fn theta0_series(t0: &Rat, d: i64, trunc: &Rat) -> FourierSeries {
    let mut s = FourierSeries::zero(trunc.clone());
    // x = t0 + n; 2 D x^2 < trunc bounds |n|.
    let two_d = rint(2 * d);
    let mut n: i64 = 0;
    loop {
        let mut grew = false;
        for sign in [1i64, -1] {
            if n == 0 && sign < 0 {
                continue;
            }
            let x = t0 + rint(sign * n);
            let e = &two_d * &x * &x;
            if e < *trunc {
                s.add_to(e, &LogLinear::from_rat(Rat::one()));
                grew = true;
            }
        }
        if !grew && n > 0 {
            break;
        }
        n += 1;
        if n > 1_000_000 {
            panic!("theta0 window too large");
        }
    }
    s
}
