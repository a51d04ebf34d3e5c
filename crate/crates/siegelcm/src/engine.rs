//! Assembly of the CM-value formulas: the tabulated bookkeeping route and the
//! generic constant-term-pairing route for `-log||theta||^2_Pet` and
//! `log|lambda_k|`, symbolic handling of the Eisenstein constant terms,
//! calibration against the floating-point oracle, config parsing, and the
//! report plumbing used by the CLI.

use crate::eisenstein::EisensteinCtx;
use crate::geometry::{cm_point, CMInput};
use crate::lattices::{fiber_decompose, CmCore, CosetL, CosetM};
use crate::nfield::{
    enumerate_trace_t, rat, rat_to_f64, rint, CMElem, QuadElem, Rat,
};
use crate::qseries::{build_uvw, theta0_series, FourierSeries, LogLinear};
use crate::thetanum::{pet_norm, rosenhain_numeric, siegel_theta};
use crate::weilrep::{lambda_spec, load_f, mu_table, EvenChar, FComponent};
use num::{BigInt, One, Signed, Zero};
use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Head slots (0-based) of the label table whose cosets have the shape
/// `(a, b, 0, 0, r)` and therefore contribute constant terms.
pub const HEAD_SLOTS: [usize; 4] = [0, 4, 8, 12];

/// Result of a constant-term pairing: the fully computed log-linear part plus
/// a symbolic rational combination of the unknown Eisenstein constant terms
/// `a_0(phi_{mu_1})`, keyed by negation-reduced coset.
#[derive(Clone, Debug, PartialEq)]
pub struct CtResult {
    pub known: LogLinear,
    pub a0: BTreeMap<CosetM, Rat>,
}

impl CtResult {
    pub fn zero() -> Self {
        CtResult { known: LogLinear::zero(), a0: BTreeMap::new() }
    }

    pub fn add_a0(&mut self, mu1: &CosetM, c: Rat) {
        if c.is_zero() {
            return;
        }
        let key = canon_m(mu1);
        let e = self.a0.entry(key.clone()).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.a0.remove(&key);
        }
    }

    pub fn add(&self, o: &CtResult) -> CtResult {
        let mut r = self.clone();
        r.known = r.known.add(&o.known);
        for (k, v) in &o.a0 {
            r.add_a0(k, v.clone());
        }
        r
    }

    pub fn scale(&self, c: &Rat) -> CtResult {
        let mut r = CtResult::zero();
        r.known = self.known.scale(c);
        for (k, v) in &self.a0 {
            r.add_a0(k, v * c);
        }
        r
    }

    /// True when no unknown constant terms remain.
    pub fn a0_free(&self) -> bool {
        self.a0.is_empty()
    }
}

/// Negation-reduced representative of a coset of `M'/M`.
pub fn canon_m(mu: &CosetM) -> CosetM {
    let n = mu.neg();
    if *mu <= n {
        mu.clone()
    } else {
        n
    }
}

/// Shape class of a label-table coset for the tabulated bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WType {
    /// `(a, b, 0, 0, r)`: full-weight trace `1/8` contribution.
    Delta,
    /// `(a, b, 1/2, 0, r)`: doubled trace `1/8 - 1/(8D)` contribution.
    DeltaPrime,
    /// Any other shape: no contribution in the tabulated route.
    Neither,
}

/// Shape classification of a coset of `L'/L`.
pub fn wtype(mu: &CosetL) -> WType {
    if mu.c.is_zero() && mu.d.is_zero() {
        WType::Delta
    } else if mu.c == rat(1, 2) && mu.d.is_zero() {
        WType::DeltaPrime
    } else {
        WType::Neither
    }
}

/// One evaluated quantity: the exact log-linear value, its float image, and
/// the optional oracle comparison.
#[derive(Clone, Debug)]
pub struct FormulaResult {
    pub quantity: String,
    pub loglinear: LogLinear,
    pub float_value: f64,
    pub oracle_value: Option<f64>,
    pub abs_diff: Option<f64>,
    pub calibrated: bool,
}

impl FormulaResult {
    pub fn csv_line(&self) -> String {
        let fmt = |x: f64| format!("{x:.12e}");
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{},{},{}",
            self.quantity,
            self.loglinear.serialize().replace('\t', ";").replace(',', "|"),
            fmt(self.float_value),
            self.oracle_value.map(fmt).unwrap_or_default(),
            self.abs_diff.map(fmt).unwrap_or_default()
        );
        s
    }
}

/// Floating-point values of the quantities at the constructed CM point.
#[derive(Clone, Debug)]
pub struct Oracle {
    /// `-ln ||theta^S_chr(tau)||^2_Pet` for the ten even characteristics.
    pub theta_pet: BTreeMap<EvenChar, f64>,
    /// `ln |lambda_k(tau)|` for `k = 1, 2, 3`.
    pub lambda_log: [f64; 3],
}

/// Builds the oracle by direct numerical theta-series evaluation at the CM
/// point of the configuration.
pub fn build_oracle(core: &CmCore) -> Result<Oracle, String> {
    let pt = cm_point(core)?;
    let tau = pt.tau;
    let mut theta_pet = BTreeMap::new();
    for chr in EvenChar::all() {
        let v = siegel_theta(&chr, &tau);
        let pet = pet_norm(v, &tau, 0.5);
        if !(pet > 0.0) {
            return Err(format!("oracle theta norm vanished for {chr:?}"));
        }
        theta_pet.insert(chr, -pet.ln());
    }
    let lams = rosenhain_numeric(&tau);
    let mut lambda_log = [0.0; 3];
    for k in 0..3 {
        let a = lams[k].norm();
        if !(a > 0.0) {
            return Err("oracle lambda vanished".into());
        }
        lambda_log[k] = a.ln();
    }
    Ok(Oracle { theta_pet, lambda_log })
}

/// The evaluation engine: one CM input, its Eisenstein context, and caches
/// for trace sums of coefficients.
pub struct Engine {
    pub cm: CMInput,
    pub ctx: EisensteinCtx,
    am_cache: RefCell<BTreeMap<String, LogLinear>>,
}

impl Engine {
    /// Builds the engine, validating the CM input.
    ///
    /// # Errors
    /// Propagates input validation and Eisenstein-context restrictions.
    pub fn new(cm: CMInput) -> Result<Engine, String> {
        cm.validate()?;
        let ctx = EisensteinCtx::new(&cm.core)?;
        Ok(Engine { cm, ctx, am_cache: RefCell::new(BTreeMap::new()) })
    }

    fn d(&self) -> i64 {
        self.cm.core.d
    }

    /// The global constant `C_E = (4/omega_E) |C(T)| / Lambda(0, chi)` when
    /// the class data is fully supplied.
    pub fn c_e(&self) -> Option<Rat> {
        self.cm.lambda0chi.as_ref().map(|l| {
            rat(4, self.cm.omega_e as i64) * rint(self.cm.c_t as i64) / l
        })
    }

    /// `sum_{t totally positive, tr t = m} a(t, phi_{mu1})`, cached.
    ///
    /// # Errors
    /// Propagates density stabilization failures.
    pub fn a_m_sum(&self, mu1: &CosetM, m: &Rat) -> Result<LogLinear, String> {
        let key = format!("{:?}|{}", canon_m(mu1).lift(), m);
        if let Some(v) = self.am_cache.borrow().get(&key) {
            return Ok(v.clone());
        }
        let sup = self.ctx.support(mu1);
        let mut acc = LogLinear::zero();
        for t in enumerate_trace_t(m, &sup) {
            acc = acc.add(&self.ctx.coeff_a(&t, mu1)?);
        }
        self.am_cache.borrow_mut().insert(key, acc.clone());
        Ok(acc)
    }

    /// The four constant-term coset classes, in head-slot order.
    pub fn head_classes(&self) -> [CosetM; 4] {
        let mus = mu_table();
        HEAD_SLOTS.map(|i| {
            let mu = &mus[i];
            debug_assert!(mu.c.is_zero() && mu.d.is_zero());
            canon_m(&CosetM::new(mu.a.clone(), mu.b.clone(), mu.r.clone(), Rat::zero()))
        })
    }

    /// Head-slot signs of the input form for one characteristic.
    pub fn eps_head(&self, chr: EvenChar) -> [i64; 4] {
        let f = load_f(chr);
        HEAD_SLOTS.map(|i| match f[i] {
            FComponent::U(s) => s as i64,
            _ => panic!("head slot is not a u-component"),
        })
    }

    /// Tabulated-route evaluation of the pairing for one theta quantity
    /// (without the global constant): the four signed constant terms plus the
    /// shape-dispatched trace sums at the two singular slots.
    ///
    /// # Errors
    /// Propagates coefficient computation failures.
    pub fn route_tabulated(&self, chr: EvenChar) -> Result<CtResult, String> {
        let f = load_f(chr);
        let mus = mu_table();
        let mut res = CtResult::zero();
        let eps = self.eps_head(chr);
        for (j, &slot) in HEAD_SLOTS.iter().enumerate() {
            let mu = &mus[slot];
            let mu1 = CosetM::new(mu.a.clone(), mu.b.clone(), mu.r.clone(), Rat::zero());
            res.add_a0(&mu1, rint(eps[j]));
        }
        let m_delta = rat(1, 8);
        let m_deltap = rat(1, 8) - rat(1, 8 * self.d());
        for (i, c) in f.iter().enumerate() {
            if *c != FComponent::W {
                continue;
            }
            let mu = &mus[i];
            match wtype(mu) {
                WType::Delta => {
                    let mu1 =
                        CosetM::new(mu.a.clone(), mu.b.clone(), mu.r.clone(), Rat::zero());
                    res.known = res.known.add(&self.a_m_sum(&mu1, &m_delta)?);
                }
                WType::DeltaPrime => {
                    let mu1 = CosetM::new(
                        mu.a.clone(),
                        mu.b.clone(),
                        mu.r.clone(),
                        rat(1, 4 * self.d()),
                    );
                    res.known = res
                        .known
                        .add(&self.a_m_sum(&mu1, &m_deltap)?.scale(&rint(2)));
                }
                WType::Neither => {}
            }
        }
        Ok(res)
    }

    /// Generic constant-term pairing of the input form against the product of
    /// the rank-one theta series and the coefficient family, summed over all
    /// 64 cosets and their full fibers.
    ///
    /// # Errors
    /// Propagates coefficient computation failures.
    pub fn route_ct(&self, chr: EvenChar) -> Result<CtResult, String> {
        let f = load_f(chr);
        let mus = mu_table();
        // Only exponents `e < 1/2` of the input components matter: the sole
        // negative exponent is `-1/8` and the only other pairing slot is the
        // constant term.
        let trunc_f = rat(1, 2);
        let (u, v, w) = build_uvw(&trunc_f);
        let trunc_th = rat(1, 8);
        let mut res = CtResult::zero();
        for (i, comp) in f.iter().enumerate() {
            let series: FourierSeries = match comp {
                FComponent::Zero => continue,
                FComponent::U(s) => u.scale(&rint(*s as i64)),
                FComponent::V(s) => v.scale(&rint(*s as i64)),
                FComponent::W => w.clone(),
            };
            let mu = &mus[i];
            for (mu0, mu1) in fiber_decompose(mu, self.d()) {
                let th = theta0_series(&mu0.t, self.d(), &trunc_th);
                for (e1, c1) in series.coeffs.iter() {
                    assert!(c1.logs.is_empty(), "input coefficients are rational");
                    if e1.is_negative() {
                        for (e2, c2) in th.coeffs.iter() {
                            let m = -(e1 + e2);
                            if !m.is_positive() {
                                continue;
                            }
                            let weight = &c1.c0 * &c2.c0;
                            res.known = res
                                .known
                                .add(&self.a_m_sum(&mu1, &m)?.scale(&weight));
                        }
                    } else if e1.is_zero() {
                        let c2 = th.coeff(&Rat::zero());
                        if !c2.is_zero() {
                            res.add_a0(&mu1, &c1.c0 * &c2.c0);
                        }
                    }
                }
            }
        }
        Ok(res)
    }

    /// The signed combination of pairings entering `log|lambda_k|`.
    ///
    /// # Errors
    /// Propagates coefficient computation failures.
    pub fn lambda_combination(
        &self,
        k: usize,
        route: fn(&Engine, EvenChar) -> Result<CtResult, String>,
    ) -> Result<CtResult, String> {
        let mut res = CtResult::zero();
        for (chr, sign) in lambda_spec(k) {
            res = res.add(&route(self, chr)?.scale(&rint(sign)));
        }
        Ok(res)
    }

    /// Numeric value of a pairing result: the known part plus the overridden
    /// constant terms, scaled by `C_E`.
    ///
    /// # Errors
    /// Fails when an unknown constant term has no override or when `C_E` is
    /// unavailable.
    pub fn numeric_value(&self, res: &CtResult) -> Result<f64, String> {
        let ce = self
            .c_e()
            .ok_or_else(|| "C_E unavailable: supply Lambda(0, chi) in the config".to_string())?;
        let mut v = res.known.eval_f64();
        if !res.a0.is_empty() {
            let heads = self.head_classes();
            for (mu1, c) in &res.a0 {
                let j = heads
                    .iter()
                    .position(|h| h == mu1)
                    .ok_or_else(|| format!("constant term on unexpected coset {mu1:?}"))?;
                let a0 = self.cm.a0_overrides[j].as_ref().ok_or_else(|| {
                    format!("missing constant-term override for head class {}", j + 1)
                })?;
                v += rat_to_f64(&(c * a0));
            }
        }
        Ok(rat_to_f64(&ce) * v)
    }

    /// Evaluates `-log||theta^S_chr||^2_Pet` by the tabulated route.
    ///
    /// # Errors
    /// Propagates coefficient and override failures.
    pub fn eval_theta_formula(
        &self,
        chr: EvenChar,
        oracle: Option<&Oracle>,
        offset: f64,
    ) -> Result<FormulaResult, String> {
        let res = self.route_tabulated(chr)?;
        let float_value = self.numeric_value(&res)? + offset;
        let oracle_value = oracle.map(|o| o.theta_pet[&chr]);
        let abs_diff = oracle_value.map(|ov| (float_value - ov).abs());
        Ok(FormulaResult {
            quantity: format!("theta_{}{}{}{}", chr.0, chr.1, chr.2, chr.3),
            loglinear: res.known,
            float_value,
            oracle_value,
            abs_diff,
            calibrated: offset != 0.0,
        })
    }

    /// Evaluates `log|lambda_k|`; the unknown constant terms must cancel
    /// exactly, so no overrides are consulted.
    ///
    /// # Errors
    /// Propagates coefficient failures; fails if the cancellation breaks.
    pub fn eval_lambda_formula(
        &self,
        k: usize,
        oracle: Option<&Oracle>,
    ) -> Result<FormulaResult, String> {
        let res = self.lambda_combination(k, Engine::route_tabulated)?;
        if !res.a0_free() {
            return Err(format!(
                "constant terms fail to cancel in lambda_{k}: {:?}",
                res.a0
            ));
        }
        let float_value = self.numeric_value(&res)?;
        let oracle_value = oracle.map(|o| o.lambda_log[k - 1]);
        let abs_diff = oracle_value.map(|ov| (float_value - ov).abs());
        Ok(FormulaResult {
            quantity: format!("lambda_{k}"),
            loglinear: res.known,
            float_value,
            oracle_value,
            abs_diff,
            calibrated: false,
        })
    }

    /// Solves for the single additive calibration offset on one theta
    /// quantity: `offset = oracle - formula`.
    ///
    /// # Errors
    /// Propagates evaluation failures.
    pub fn calibrate(&self, chr: EvenChar, oracle: &Oracle) -> Result<f64, String> {
        let res = self.route_tabulated(chr)?;
        let formula = self.numeric_value(&res)?;
        Ok(oracle.theta_pet[&chr] - formula)
    }

    /// The four characteristics used to pin the head-class constant terms:
    /// one per distinct head sign pattern, chosen among those whose known
    /// (trace-sum) part vanishes on both routes so the solve is pure
    /// constant-term algebra.
    pub fn a0_solver_chars() -> [EvenChar; 4] {
        [
            EvenChar(0, 1, 1, 0),
            EvenChar(0, 0, 1, 0),
            EvenChar(0, 1, 0, 0),
            EvenChar(0, 0, 0, 0),
        ]
    }

    /// Solves the four head-class constant-term overrides from the oracle on
    /// the four solver characteristics (a 4x4 linear system over the head
    /// sign patterns; the global metric offset is absorbed into the zero
    /// class, whose sign is +1 in every pattern).
    ///
    /// # Errors
    /// Fails when `C_E` is unavailable or the sign matrix is singular.
    pub fn solve_a0_overrides(&self, oracle: &Oracle) -> Result<[f64; 4], String> {
        let ce = self
            .c_e()
            .ok_or_else(|| "C_E unavailable: supply Lambda(0, chi) in the config".to_string())?;
        let ce = rat_to_f64(&ce);
        let heads = self.head_classes();
        let mut mat = [[0f64; 4]; 4];
        let mut rhs = [0f64; 4];
        for (row, chr) in Self::a0_solver_chars().into_iter().enumerate() {
            let res = self.route_tabulated(chr)?;
            for (mu1, c) in &res.a0 {
                let j = heads
                    .iter()
                    .position(|h| h == mu1)
                    .ok_or_else(|| format!("constant term on unexpected coset {mu1:?}"))?;
                mat[row][j] = rat_to_f64(c);
            }
            rhs[row] = oracle.theta_pet[&chr] / ce - res.known.eval_f64();
        }
        solve4(mat, rhs).ok_or_else(|| "singular head sign system".into())
    }
}

/// Dense 4x4 Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..4 {
            if row == col {
                continue;
            }
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    Some([b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2], b[3] / a[3][3]])
}

/// Rounds a solved override to a rational with denominator `10^12`, the
/// precision at which the f64 oracle is reproducible.
pub fn a0_rat(x: f64) -> Rat {
    let den: i64 = 1_000_000_000_000;
    Rat::new(BigInt::from((x * den as f64).round() as i64), BigInt::from(den))
}

/// Parses a quadratic-field element written as `"a/b + c/d sqrtD"` (either
/// part optional, signs allowed).
///
/// # Errors
/// Reports malformed numerals or a mismatched discriminant tag.
pub fn parse_field_elem(s: &str, disc: &Rat) -> Result<QuadElem, String> {
    let norm = s.replace('-', "+-");
    let mut a = Rat::zero();
    let mut b = Rat::zero();
    for raw in norm.split('+') {
        let term = raw.trim();
        if term.is_empty() {
            continue;
        }
        let (coeff_str, is_sqrt) = match term.find("sqrt") {
            Some(pos) => {
                let tag: i64 = term[pos + 4..]
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad sqrt tag in {term:?}"))?;
                if rint(tag) != *disc {
                    return Err(format!("sqrt tag {tag} does not match the field tag {disc}"));
                }
                (term[..pos].trim().to_string(), true)
            }
            None => (term.to_string(), false),
        };
        let c = parse_rat(&coeff_str)?;
        if is_sqrt {
            b += c;
        } else {
            a += c;
        }
    }
    Ok(QuadElem::new(disc.clone(), a, b))
}

/// Parses `"p/q"`, `"p"`, a bare `-` (meaning `-1`, for sqrt coefficients),
/// or the empty string (meaning `1`).
///
/// # Errors
/// Reports malformed numerals.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let t = s.trim().trim_end_matches('*').trim();
    if t.is_empty() {
        return Ok(Rat::one());
    }
    if t == "-" {
        return Ok(-Rat::one());
    }
    match t.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator {p:?}"))?;
            let q: i64 = q.trim().parse().map_err(|_| format!("bad denominator {q:?}"))?;
            if q == 0 {
                return Err("zero denominator".into());
            }
            Ok(rat(p, q))
        }
        None => {
            let p: i64 = t.parse().map_err(|_| format!("bad numeral {t:?}"))?;
            Ok(rint(p))
        }
    }
}

/// A parsed flat `key = value` configuration.
#[derive(Clone, Debug, Default)]
pub struct Config {
    pub entries: BTreeMap<String, (String, usize)>,
}

impl Config {
    /// Parses the flat format; `#`-prefixed lines and blanks are skipped.
    ///
    /// # Errors
    /// Reports the line number of any malformed line or duplicate key.
    pub fn parse(text: &str) -> Result<Config, String> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let ln = idx + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| format!("line {ln}: expected key = value"))?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(format!("line {ln}: empty key"));
            }
            if entries
                .insert(key.clone(), (v.trim().to_string(), ln))
                .is_some()
            {
                return Err(format!("line {ln}: duplicate key {key:?}"));
            }
        }
        Ok(Config { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map(|(_, l)| *l).unwrap_or(0)
    }

    /// Builds the CM input from the configuration.
    ///
    /// Recognized keys: `preset` (`d5`), or the explicit set `d`, `delta`,
    /// `alpha_u`, `alpha_v`, `beta_u`, `beta_v`, `nf0`, `na`, `xi_u`, `xi_v`;
    /// plus `omega_e`, `c_t`, `lambda0chi`, `a0_1..a0_4`, `trace_field`.
    ///
    /// # Errors
    /// Reports the offending key (and its line) for malformed values.
    pub fn build_input(&self) -> Result<CMInput, String> {
        let mut cm = match self.get("preset") {
            Some("d5") => CMInput::reference_d5(),
            Some(other) => {
                return Err(format!(
                    "key 'preset' (line {}): unknown preset {other:?}",
                    self.line("preset")
                ))
            }
            None if self.get("d").is_none() => CMInput::reference_d5(),
            None => {
                let err = |k: &str, e: String| {
                    format!("key '{k}' (line {}): {e}", self.line(k))
                };
                let need = |k: &str| {
                    self.get(k)
                        .map(str::to_string)
                        .ok_or_else(|| format!("missing required key '{k}'"))
                };
                let d: i64 = need("d")?
                    .parse()
                    .map_err(|_| err("d", "bad integer".into()))?;
                let disc = rint(d);
                let fe = |k: &str| -> Result<QuadElem, String> {
                    parse_field_elem(&need(k)?, &disc).map_err(|e| err(k, e))
                };
                let delta = fe("delta")?;
                let alpha = CMElem::new(delta.clone(), fe("alpha_u")?, fe("alpha_v")?);
                let beta = CMElem::new(delta.clone(), fe("beta_u")?, fe("beta_v")?);
                let nf0 = parse_rat(&need("nf0")?).map_err(|e| err("nf0", e))?;
                let na = parse_rat(&need("na")?).map_err(|e| err("na", e))?;
                let core = CmCore::auto(d, delta.clone(), alpha, beta, nf0, na)?;
                let xi = CMElem::new(delta, fe("xi_u")?, fe("xi_v")?);
                CMInput {
                    core,
                    xi,
                    omega_e: 2,
                    c_t: 1,
                    lambda0chi: None,
                    a0_overrides: [None, None, None, None],
                }
            }
        };
        if let Some(v) = self.get("omega_e") {
            cm.omega_e = v
                .parse()
                .map_err(|_| format!("key 'omega_e' (line {}): bad integer", self.line("omega_e")))?;
        }
        if let Some(v) = self.get("c_t") {
            cm.c_t = v
                .parse()
                .map_err(|_| format!("key 'c_t' (line {}): bad integer", self.line("c_t")))?;
        }
        if let Some(v) = self.get("lambda0chi") {
            cm.lambda0chi = Some(
                parse_rat(v)
                    .map_err(|e| format!("key 'lambda0chi' (line {}): {e}", self.line("lambda0chi")))?,
            );
        }
        for j in 0..4 {
            let key = format!("a0_{}", j + 1);
            if let Some(v) = self.get(&key) {
                cm.a0_overrides[j] = Some(
                    parse_rat(v)
                        .map_err(|e| format!("key '{key}' (line {}): {e}", self.line(&key)))?,
                );
            }
        }
        if let Some(v) = self.get("trace_field") {
            if v != "F" && v != "Ftilde" {
                return Err(format!(
                    "key 'trace_field' (line {}): expected F or Ftilde",
                    self.line("trace_field")
                ));
            }
        }
        Ok(cm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> Engine {
        Engine::new(CMInput::reference_d5()).unwrap()
    }

    #[test]
    fn head_classes_and_signs() {
        let e = engine();
        let heads = e.head_classes();
        let want = [
            CosetM::new(Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()),
            CosetM::new(Rat::zero(), rat(1, 2), Rat::zero(), Rat::zero()),
            CosetM::new(rat(1, 2), Rat::zero(), Rat::zero(), Rat::zero()),
            CosetM::new(rat(1, 2), rat(1, 2), rat(1, 2), Rat::zero()),
        ];
        assert_eq!(heads, want);
        // The first head sign is +1 for every characteristic, so a global
        // additive offset is equivalent to shifting the zero-class constant.
        for chr in EvenChar::all() {
            assert_eq!(e.eps_head(chr)[0], 1);
        }
        assert_eq!(e.eps_head(EvenChar(0, 0, 0, 0)), [1, -1, -1, -1]);
        assert_eq!(e.eps_head(EvenChar(1, 1, 1, 1)), [1, 1, 1, -1]);
    }

    #[test]
    fn lambda_a0_cancellation_is_exact() {
        let e = engine();
        for k in 1..=3 {
            let mut a0 = CtResult::zero();
            for (chr, sign) in lambda_spec(k) {
                let eps = e.eps_head(chr);
                let heads = e.head_classes();
                for (j, h) in heads.iter().enumerate() {
                    a0.add_a0(h, rint(sign * eps[j]));
                }
            }
            assert!(a0.a0_free(), "head terms must cancel for lambda_{k}");
        }
    }

    #[test]
    fn config_parsing_reports_lines() {
        let good = "preset = d5\nomega_e = 10\nlambda0chi = 2/5\n# comment\n";
        let cfg = Config::parse(good).unwrap();
        let cm = cfg.build_input().unwrap();
        assert_eq!(cm.omega_e, 10);
        let bad = "preset = d5\nnot a pair\n";
        let err = Config::parse(bad).unwrap_err();
        assert!(err.contains("line 2"), "{err}");
        let badkey = "preset = d5\nomega_e = ten\n";
        let err = Config::parse(badkey).unwrap().build_input().unwrap_err();
        assert!(err.contains("omega_e"), "{err}");
    }

    #[test]
    fn field_element_parser_roundtrip() {
        let disc = rint(5);
        let x = parse_field_elem("-5/2 + -1/2 sqrt5", &disc).unwrap();
        assert_eq!(x, QuadElem::new(disc.clone(), rat(-5, 2), rat(-1, 2)));
        let y = parse_field_elem("3", &disc).unwrap();
        assert_eq!(y, QuadElem::new(disc.clone(), rint(3), Rat::zero()));
        let z = parse_field_elem("sqrt5", &disc).unwrap();
        assert_eq!(z, QuadElem::new(disc.clone(), Rat::zero(), Rat::one()));
        assert!(parse_field_elem("sqrt7", &disc).is_err());
    }

    #[test]
    fn c_e_is_one_for_reference() {
        let e = engine();
        assert_eq!(e.c_e(), Some(Rat::one()));
    }
}
