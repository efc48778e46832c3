//! Exact-rational parameter validation and theorem classification.
//!
//! Nothing in this module touches floating point: theorem endpoints are sharp
//! and a rounding error at an endpoint would flip a label.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = BigRational;

/// Builds the rational `n/d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Lossy conversion for the solver side of the dual representation.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Formats a rational as `n` or `n/d`.
pub fn fraction_string(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegimeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),
    #[error("exponent system {system} is not defined for model {model}")]
    UnknownSystem { system: SystemId, model: Model },
    #[error("cannot parse '{0}' as a decimal or fraction")]
    Parse(String),
}

/// Parses decimal (`0.25`, `-1.5e-2`), integer or fraction (`3/4`) text exactly.
pub fn parse_rational(text: &str) -> Result<Rational, RegimeError> {
    let s = text.trim();
    let err = || RegimeError::Parse(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n).map_err(|_| err())?;
        let d = parse_rational(d).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let all_digits = format!("{whole}{frac}");
    let numer = BigInt::from_str(if all_digits.is_empty() {
        "0"
    } else {
        &all_digits
    })
    .map_err(|_| err())?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Model {
    Inls,
    Inlh,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Inls => "INLS",
            Model::Inlh => "INLH",
        })
    }
}

impl FromStr for Model {
    type Err = RegimeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "INLS" => Ok(Model::Inls),
            "INLH" => Ok(Model::Inlh),
            _ => Err(RegimeError::InvalidParams(format!("unknown model '{s}'"))),
        }
    }
}

/// Physical parameters. `alpha` is ignored for INLS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelParams {
    pub model: Model,
    pub dim: u32,
    pub b: Rational,
    pub q: Rational,
    pub alpha: Rational,
}

impl ModelParams {
    pub fn inls(dim: u32, b: Rational, q: Rational) -> Self {
        Self {
            model: Model::Inls,
            dim,
            b,
            q,
            alpha: Rational::zero(),
        }
    }

    pub fn inlh(dim: u32, alpha: Rational, b: Rational, q: Rational) -> Self {
        Self {
            model: Model::Inlh,
            dim,
            b,
            q,
            alpha,
        }
    }

    fn n(&self) -> Rational {
        int(self.dim as i64)
    }

    fn b_over_n(&self) -> Rational {
        &self.b / self.n()
    }

    fn alpha_over_n(&self) -> Rational {
        &self.alpha / self.n()
    }
}

impl fmt::Display for ModelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} N={} b={} q={}",
            self.model,
            self.dim,
            fraction_string(&self.b),
            fraction_string(&self.q)
        )?;
        if self.model == Model::Inlh {
            write!(f, " alpha={}", fraction_string(&self.alpha))?;
        }
        Ok(())
    }
}

/// Condition check. INLH: min{b, α, N−α, N−b, 1−2b+α} > 0. INLS: 0 < b < 1, b < N.
/// Tuples with q ≤ 1 or N = 0 are rejected as malformed.
pub fn validate_constraints(p: &ModelParams) -> bool {
    if p.dim == 0 || p.q <= Rational::one() {
        return false;
    }
    let n = p.n();
    let zero = Rational::zero();
    match p.model {
        Model::Inls => p.b > zero && p.b < Rational::one() && p.b < n,
        Model::Inlh => {
            let terms = [
                p.b.clone(),
                p.alpha.clone(),
                &n - &p.alpha,
                &n - &p.b,
                Rational::one() - int(2) * &p.b + &p.alpha,
            ];
            terms.iter().all(|t| *t > zero)
        }
    }
}

/// s_c = N/2 − (2−b)/(q−1) for INLS, s_c' = N/2 − (2−2b+α)/(2(q−1)) for INLH.
pub fn critical_exponent(p: &ModelParams) -> Result<Rational, RegimeError> {
    let qm1 = &p.q - Rational::one();
    if qm1.is_zero() {
        return Err(RegimeError::DivisionByZero(
            "q = 1 in the critical exponent",
        ));
    }
    let half_n = p.n() / int(2);
    Ok(match p.model {
        Model::Inls => half_n - (int(2) - &p.b) / qm1,
        Model::Inlh => half_n - (int(2) - int(2) * &p.b + &p.alpha) / (int(2) * qm1),
    })
}

/// Mass-critical exponent: 1 + 2(2−b)/N for INLS, 1 + (2−2b+α)/N for INLH.
pub fn mass_critical_q(p: &ModelParams) -> Rational {
    let n = p.n();
    match p.model {
        Model::Inls => Rational::one() + int(2) * (int(2) - &p.b) / n,
        Model::Inlh => Rational::one() + (int(2) - int(2) * &p.b + &p.alpha) / n,
    }
}

/// Coefficient of the weighted potential in the virial identity
/// V'' = 8·(kinetic or energy) + c·P.
///
/// INLS: c = 4(N(q−1)+2b−4)/(1+q) against 8E(u₀), P = ∫|u|^{1+q}|x|^{−b}.
/// INLH: c = 4(N(q−1)+2b−α)/q against 8‖∇w‖², P = ∫(J_α∗|·|^{−b}|w|^q)|x|^{−b}|w|^q.
pub fn virial_coefficient(p: &ModelParams) -> Rational {
    let core = virial_numerator(p);
    match p.model {
        Model::Inls => core / (Rational::one() + &p.q),
        Model::Inlh => core / p.q.clone(),
    }
}

/// The dilation numerator 4(N(q−1)+2b−4) (INLS) or 4(N(q−1)+2b−α) (INLH).
/// It vanishes exactly at the INLS mass-critical exponent.
pub fn virial_numerator(p: &ModelParams) -> Rational {
    let base = p.n() * (&p.q - Rational::one()) + int(2) * &p.b;
    match p.model {
        Model::Inls => int(4) * (base - int(4)),
        Model::Inlh => int(4) * (base - &p.alpha),
    }
}

/// Exponent ρ of the coefficient t^ρ in the pseudoconformally transformed equation.
pub fn pseudoconformal_exponent(p: &ModelParams) -> Rational {
    let nq = p.n() * (&p.q - Rational::one());
    match p.model {
        Model::Inls => nq / int(2) + &p.b - int(2),
        Model::Inlh => nq + int(2) * &p.b - &p.alpha - int(2),
    }
}

/// Theoretical log–log slope of the free weighted potential:
/// −(N(q−1)+2b)/2 for INLS and −(N(q−1)−α)−2b for the Hartree term.
pub fn weighted_potential_slope(p: &ModelParams) -> Rational {
    let nq = p.n() * (&p.q - Rational::one());
    match p.model {
        Model::Inls => -(nq + int(2) * &p.b) / int(2),
        Model::Inlh => -(nq - &p.alpha) - int(2) * &p.b,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MassClass {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremLabel {
    NonScattering,
    Scattering,
    OutOfTheoremRange,
}

impl fmt::Display for TheoremLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SystemId {
    InlsInner,
    InlsOuter,
    InlhC1,
    InlhC2,
    InlhE1,
    InlhE2,
}

impl SystemId {
    pub const ALL: [SystemId; 6] = [
        SystemId::InlsInner,
        SystemId::InlsOuter,
        SystemId::InlhC1,
        SystemId::InlhC2,
        SystemId::InlhE1,
        SystemId::InlhE2,
    ];

    pub fn model(self) -> Model {
        match self {
            SystemId::InlsInner | SystemId::InlsOuter => Model::Inls,
            _ => Model::Inlh,
        }
    }

    pub fn for_model(model: Model) -> impl Iterator<Item = SystemId> {
        Self::ALL.into_iter().filter(move |s| s.model() == model)
    }

    pub fn name(self) -> &'static str {
        match self {
            SystemId::InlsInner => "INLS_inner",
            SystemId::InlsOuter => "INLS_outer",
            SystemId::InlhC1 => "INLH_C1",
            SystemId::InlhC2 => "INLH_C2",
            SystemId::InlhE1 => "INLH_E1",
            SystemId::InlhE2 => "INLH_E2",
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentCertificate {
    pub system: SystemId,
    pub feasible: bool,
    pub witness: BTreeMap<String, Rational>,
    /// When infeasible: the inequality chain that collapsed.
    pub violation: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassifyOptions {
    /// Admit N = 1 into the INLH non-scattering range when additionally
    /// q < 3/2 + (α−2b)/N.
    pub inlh_one_dim_extension: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegimeReport {
    pub params: ModelParams,
    pub valid: bool,
    pub s_crit: Rational,
    pub mass_class: MassClass,
    pub theorem_label: TheoremLabel,
    pub certificates: Vec<ExponentCertificate>,
    pub notes: Vec<String>,
}

/// Theorem endpoints as exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thresholds {
    /// Lower bound of the non-scattering range (open).
    pub nonscattering_low: Rational,
    /// Upper end of the non-scattering range (open) = lower end of scattering.
    pub split: Rational,
    /// Upper end of the scattering range (open).
    pub scattering_high: Rational,
}

pub fn thresholds(p: &ModelParams) -> Thresholds {
    let n = p.n();
    let one = Rational::one();
    match p.model {
        Model::Inls => Thresholds {
            nonscattering_low: one.clone(),
            split: &one + (int(2) - int(2) * &p.b) / &n,
            scattering_high: one + int(2) * (int(2) - &p.b) / n,
        },
        Model::Inlh => {
            let shifted = &one + (&p.alpha - int(2) * &p.b) / &n;
            Thresholds {
                nonscattering_low: if shifted > one { shifted } else { one.clone() },
                split: &one + (&one + &p.alpha - int(2) * &p.b) / &n,
                scattering_high: one + (int(2) - int(2) * &p.b + &p.alpha) / n,
            }
        }
    }
}

fn theorem_label(p: &ModelParams, opts: ClassifyOptions, notes: &mut Vec<String>) -> TheoremLabel {
    let t = thresholds(p);
    let q = &p.q;
    match p.model {
        Model::Inls => {
            if *q > t.nonscattering_low && *q < t.split {
                TheoremLabel::NonScattering
            } else if *q >= t.split && *q < t.scattering_high {
                TheoremLabel::Scattering
            } else {
                TheoremLabel::OutOfTheoremRange
            }
        }
        Model::Inlh => {
            if *q > t.nonscattering_low && *q < t.split {
                if p.dim >= 2 {
                    return TheoremLabel::NonScattering;
                }
                let extra = ratio(3, 2) + (&p.alpha - int(2) * &p.b) / p.n();
                if !opts.inlh_one_dim_extension {
                    notes.push(format!(
                        "N=1 lies outside the non-scattering theorem; the one-dimensional \
                         extension additionally needs q < 3/2+(alpha-2b)/N = {} (enable the flag to apply it)",
                        fraction_string(&extra)
                    ));
                    TheoremLabel::OutOfTheoremRange
                } else if *q < extra {
                    notes.push("N=1 admitted through the one-dimensional extension".to_string());
                    TheoremLabel::NonScattering
                } else {
                    notes.push(format!(
                        "N=1 extension rejects q: needs q < {}",
                        fraction_string(&extra)
                    ));
                    TheoremLabel::OutOfTheoremRange
                }
            } else if *q > t.split && *q < t.scattering_high {
                TheoremLabel::Scattering
            } else {
                TheoremLabel::OutOfTheoremRange
            }
        }
    }
}

/// Full classification of a tuple. Fails with `InvalidParams` when the
/// condition check rejects the tuple.
pub fn classify(p: &ModelParams) -> Result<RegimeReport, RegimeError> {
    classify_with(p, ClassifyOptions::default())
}

pub fn classify_with(p: &ModelParams, opts: ClassifyOptions) -> Result<RegimeReport, RegimeError> {
    if !validate_constraints(p) {
        return Err(RegimeError::InvalidParams(match p.model {
            Model::Inls => format!("{p}: INLS needs 0 < b < 1, b < N and q > 1"),
            Model::Inlh => {
                format!("{p}: INLH needs min{{b, alpha, N-alpha, N-b, 1-2b+alpha}} > 0 and q > 1")
            }
        }));
    }
    let s_crit = critical_exponent(p)?;
    let mass_class = if s_crit.is_zero() {
        MassClass::Critical
    } else if s_crit.is_negative() {
        MassClass::Subcritical
    } else {
        MassClass::Supercritical
    };
    let mut notes = Vec::new();
    let theorem_label = theorem_label(p, opts, &mut notes);
    if p.model == Model::Inls && p.dim == 1 && theorem_label == TheoremLabel::NonScattering {
        let inner_cap = int(2) - int(2) * &p.b;
        if p.q >= inner_cap {
            notes.push(format!(
                "the inner Hölder system needs q < 2-2b/N = {}; reported infeasible for this N=1 tuple",
                fraction_string(&inner_cap)
            ));
        }
    }
    let certificates = SystemId::for_model(p.model)
        .map(|s| feasibility(p, s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RegimeReport {
        params: p.clone(),
        valid: true,
        s_crit,
        mass_class,
        theorem_label,
        certificates,
        notes,
    })
}

// ---------------------------------------------------------------------------
// Exponent systems
// ---------------------------------------------------------------------------

/// Affine form `constant + Σ coeff·var` over named exponent variables.
#[derive(Debug, Clone)]
struct Affine {
    constant: Rational,
    terms: Vec<(&'static str, Rational)>,
}

impl Affine {
    fn constant(c: Rational) -> Self {
        Self {
            constant: c,
            terms: Vec::new(),
        }
    }

    fn var(name: &'static str) -> Self {
        Self {
            constant: Rational::zero(),
            terms: vec![(name, Rational::one())],
        }
    }

    fn plus(mut self, coeff: Rational, name: &'static str) -> Self {
        self.terms.push((name, coeff));
        self
    }

    fn add_const(mut self, c: Rational) -> Self {
        self.constant += c;
        self
    }

    fn eval(&self, w: &BTreeMap<String, Rational>) -> Option<Rational> {
        let mut acc = self.constant.clone();
        for (name, c) in &self.terms {
            acc += c * w.get(*name)?;
        }
        Some(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rel {
    Positive,
    NonNegative,
    Zero,
}

#[derive(Debug, Clone)]
struct Constraint {
    label: &'static str,
    form: Affine,
    rel: Rel,
}

fn gt(label: &'static str, form: Affine) -> Constraint {
    Constraint {
        label,
        form,
        rel: Rel::Positive,
    }
}

fn ge(label: &'static str, form: Affine) -> Constraint {
    Constraint {
        label,
        form,
        rel: Rel::NonNegative,
    }
}

fn eq(label: &'static str, form: Affine) -> Constraint {
    Constraint {
        label,
        form,
        rel: Rel::Zero,
    }
}

/// `a − b` with `a`, `b` affine.
fn minus(a: Affine, b: Affine) -> Affine {
    let mut out = a;
    out.constant -= b.constant;
    for (n, c) in b.terms {
        out.terms.push((n, -c));
    }
    out
}

fn v(name: &'static str) -> Affine {
    Affine::var(name)
}

fn k(c: Rational) -> Affine {
    Affine::constant(c)
}

/// The inequalities and equalities of a system, as stated (plus positivity of
/// every reciprocal exponent, which the Hölder bookkeeping presupposes).
fn constraints(p: &ModelParams, system: SystemId) -> Vec<Constraint> {
    let one = Rational::one();
    let half = ratio(1, 2);
    let bn = p.b_over_n();
    let an = p.alpha_over_n();
    let q = p.q.clone();
    let n = p.n();
    match system {
        SystemId::InlsInner => vec![
            eq(
                "1/a = 1 - q/2 - 1/gamma",
                v("1/a")
                    .plus(one.clone(), "1/gamma")
                    .add_const(&q / int(2) - &one),
            ),
            gt("1/a > b/N", minus(v("1/a"), k(bn.clone()))),
            gt("1/gamma > 0", v("1/gamma")),
            gt(
                "1/gamma < 1 - q/2 - b/N",
                minus(k(&one - &q / int(2) - &bn), v("1/gamma")),
            ),
        ],
        SystemId::InlsOuter => vec![
            eq(
                "1/d = 1 - q/2 - 1/beta",
                v("1/d")
                    .plus(one.clone(), "1/beta")
                    .add_const(&q / int(2) - &one),
            ),
            gt("1/d < b/N", minus(k(bn.clone()), v("1/d"))),
            ge("1/beta <= 1/2", minus(k(half.clone()), v("1/beta"))),
            gt(
                "1/beta > -q/2 - b/N",
                v("1/beta").add_const(&q / int(2) + &bn),
            ),
            gt("1/beta > 0", v("1/beta")),
            gt("q > 1 - 2b/N", k(&q - &one + int(2) * &bn)),
        ],
        SystemId::InlhC1 => {
            let total = &one + &an - (int(2) * &q - &one) / int(2);
            vec![
                eq(
                    "1/e1 + 1/f1 + (2q-1)/2 + 1/r = 1 + alpha/N",
                    v("1/e1")
                        .plus(one.clone(), "1/f1")
                        .plus(one.clone(), "1/r")
                        .add_const(-total.clone()),
                ),
                eq(
                    "1/e2 + 1/f2 + (2q-1)/2 + 1/r = 1 + alpha/N",
                    v("1/e2")
                        .plus(one.clone(), "1/f2")
                        .plus(one.clone(), "1/r")
                        .add_const(-total),
                ),
                gt("N/e1 > b", minus(v("1/e1"), k(bn.clone()))),
                gt("N/e2 > b", minus(v("1/e2"), k(bn.clone()))),
                gt("N/f1 > b", minus(v("1/f1"), k(bn.clone()))),
                gt("N/f2 < b", minus(k(bn.clone()), v("1/f2"))),
                gt("1/f2 > 0", v("1/f2")),
                gt("r > 2", minus(k(half.clone()), v("1/r"))),
                gt("1/r > 0", v("1/r")),
                gt(
                    "1/r < 3/2 + alpha/N - q - 2b/N",
                    minus(k(ratio(3, 2) + &an - &q - int(2) * &bn), v("1/r")),
                ),
            ]
        }
        SystemId::InlhC2 => {
            let total = &one + &an - (int(2) * &q - &one) / int(2);
            vec![
                eq(
                    "1/g1 + 1/h1 + (2q-1)/2 + 1/r2 = 1 + alpha/N",
                    v("1/g1")
                        .plus(one.clone(), "1/h1")
                        .plus(one.clone(), "1/r2")
                        .add_const(-total.clone()),
                ),
                eq(
                    "1/g2 + 1/h2 + (2q-1)/2 + 1/r2 = 1 + alpha/N",
                    v("1/g2")
                        .plus(one.clone(), "1/h2")
                        .plus(one.clone(), "1/r2")
                        .add_const(-total),
                ),
                gt("N/g1 > b", minus(v("1/g1"), k(bn.clone()))),
                gt("N/h1 < b", minus(k(bn.clone()), v("1/h1"))),
                gt("N/h2 < b", minus(k(bn.clone()), v("1/h2"))),
                gt("N/g2 < b", minus(k(bn.clone()), v("1/g2"))),
                gt("1/h1 > 0", v("1/h1")),
                gt("1/h2 > 0", v("1/h2")),
                gt("1/g2 > 0", v("1/g2")),
                gt("r2 > 2", minus(k(half.clone()), v("1/r2"))),
                gt("1/r2 > 0", v("1/r2")),
                gt(
                    "1/r2 > 3/2 + alpha/N - q - 2b/N",
                    minus(v("1/r2"), k(ratio(3, 2) + &an - &q - int(2) * &bn)),
                ),
            ]
        }
        SystemId::InlhE1 => {
            let total = &one + &an;
            let two_q = int(2) * &q;
            vec![
                eq(
                    "1/a1 + 1/b1 + 2q/r1 = 1 + alpha/N",
                    v("1/a1")
                        .plus(one.clone(), "1/b1")
                        .plus(two_q.clone(), "1/r1")
                        .add_const(-total.clone()),
                ),
                eq(
                    "1/a2 + 1/b2 + 2q/r1 = 1 + alpha/N",
                    v("1/a2")
                        .plus(one.clone(), "1/b2")
                        .plus(two_q.clone(), "1/r1")
                        .add_const(-total.clone()),
                ),
                gt("N/a1 > b", minus(v("1/a1"), k(bn.clone()))),
                gt("N/a2 > b", minus(v("1/a2"), k(bn.clone()))),
                gt("N/b1 > b", minus(v("1/b1"), k(bn.clone()))),
                gt("N/b2 < b", minus(k(bn.clone()), v("1/b2"))),
                gt("1/b2 > 0", v("1/b2")),
                gt("r1 > 2", minus(k(half.clone()), v("1/r1"))),
                gt("2q/r1 > 0", v("1/r1")),
                gt(
                    "2q/r1 < 1 + alpha/N - 2b/N",
                    minus(
                        k(&total - int(2) * &bn),
                        Affine::constant(Rational::zero()).plus(two_q.clone(), "1/r1"),
                    ),
                ),
                gt(
                    "2q/r1 > q - 2/N",
                    Affine::constant(int(2) / &n - &q).plus(two_q, "1/r1"),
                ),
                eq(
                    "nu1 = N(1/2 - 1/r1)",
                    v("nu1").plus(n.clone(), "1/r1").add_const(-(&n / int(2))),
                ),
                gt("nu1 > 0", v("nu1")),
                gt("nu1 < 1/q", minus(k(one / &q), v("nu1"))),
            ]
        }
        SystemId::InlhE2 => {
            let total = &one + &an;
            let two_q = int(2) * &q;
            vec![
                eq(
                    "1/a3 + 1/b3 + 2q/r2 = 1 + alpha/N",
                    v("1/a3")
                        .plus(one.clone(), "1/b3")
                        .plus(two_q.clone(), "1/r2")
                        .add_const(-total.clone()),
                ),
                gt("N/a3 < b", minus(k(bn.clone()), v("1/a3"))),
                gt("N/b3 < b", minus(k(bn.clone()), v("1/b3"))),
                gt("1/a3 > 0", v("1/a3")),
                gt("1/b3 > 0", v("1/b3")),
                gt("1/r2 > 0", v("1/r2")),
                gt(
                    "q > 2q/r2",
                    Affine::constant(q.clone()).plus(-two_q.clone(), "1/r2"),
                ),
                gt(
                    "2q/r2 > 1 + alpha/N - 2b/N",
                    Affine::constant(-(&total - int(2) * &bn)).plus(two_q, "1/r2"),
                ),
                eq(
                    "nu2 = N(1/2 - 1/r2)",
                    v("nu2").plus(n.clone(), "1/r2").add_const(-(&n / int(2))),
                ),
                gt("nu2 > 0", v("nu2")),
                gt("nu2 < 1/q", minus(k(one / &q), v("nu2"))),
            ]
        }
    }
}

/// Substitutes a witness into every constraint of `system`; returns the
/// label of the first violated one.
pub fn check_witness(
    p: &ModelParams,
    system: SystemId,
    witness: &BTreeMap<String, Rational>,
) -> Result<(), String> {
    for c in constraints(p, system) {
        let value = c
            .form
            .eval(witness)
            .ok_or_else(|| format!("witness lacks a variable used by '{}'", c.label))?;
        let ok = match c.rel {
            Rel::Positive => value.is_positive(),
            Rel::NonNegative => !value.is_negative(),
            Rel::Zero => value.is_zero(),
        };
        if !ok {
            return Err(c.label.to_string());
        }
    }
    Ok(())
}

/// Open interval (or half-open when `hi_closed`) with exact endpoints.
struct Interval {
    lo: Rational,
    hi: Rational,
    hi_closed: bool,
}

impl Interval {
    fn open(lo: Rational, hi: Rational) -> Self {
        Self {
            lo,
            hi,
            hi_closed: false,
        }
    }

    fn nonempty(&self) -> bool {
        self.lo < self.hi
    }

    fn midpoint(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    fn describe(&self, var: &str) -> String {
        format!(
            "{var} needs {} < {var} {} {}, which is empty",
            fraction_string(&self.lo),
            if self.hi_closed { "<=" } else { "<" },
            fraction_string(&self.hi)
        )
    }
}

fn max_of(values: impl IntoIterator<Item = Rational>) -> Rational {
    values
        .into_iter()
        .reduce(|a, b| if b > a { b } else { a })
        .expect("non-empty")
}

fn min_of(values: impl IntoIterator<Item = Rational>) -> Rational {
    values
        .into_iter()
        .reduce(|a, b| if b < a { b } else { a })
        .expect("non-empty")
}

/// Witness search for one system: eliminate equalities, walk the free
/// variables in a fixed order and take the midpoint of each interval.
pub fn feasibility(p: &ModelParams, system: SystemId) -> Result<ExponentCertificate, RegimeError> {
    if system.model() != p.model {
        return Err(RegimeError::UnknownSystem {
            system,
            model: p.model,
        });
    }
    let one = Rational::one();
    let zero = Rational::zero();
    let half = ratio(1, 2);
    let bn = p.b_over_n();
    let an = p.alpha_over_n();
    let q = p.q.clone();
    let n = p.n();
    let mut w: BTreeMap<String, Rational> = BTreeMap::new();
    let infeasible = |msg: String| ExponentCertificate {
        system,
        feasible: false,
        witness: BTreeMap::new(),
        violation: Some(msg),
    };

    match system {
        SystemId::InlsInner => {
            let iv = Interval::open(zero, &one - &q / int(2) - &bn);
            if !iv.nonempty() {
                return Ok(infeasible(iv.describe("1/gamma")));
            }
            let g = iv.midpoint();
            w.insert("1/a".into(), &one - &q / int(2) - &g);
            w.insert("1/gamma".into(), g);
        }
        SystemId::InlsOuter => {
            if q <= &one - int(2) * &bn {
                return Ok(infeasible(format!(
                    "q > 1 - 2b/N = {} fails",
                    fraction_string(&(&one - int(2) * &bn))
                )));
            }
            let lo = max_of([zero, -(&q / int(2)) - &bn, &one - &q / int(2) - &bn]);
            let iv = Interval {
                lo,
                hi: half,
                hi_closed: true,
            };
            if !iv.nonempty() {
                return Ok(infeasible(iv.describe("1/beta")));
            }
            let beta = iv.midpoint();
            w.insert("1/d".into(), &one - &q / int(2) - &beta);
            w.insert("1/beta".into(), beta);
        }
        SystemId::InlhC1 => {
            let cap = ratio(3, 2) + &an - &q - int(2) * &bn;
            let iv = Interval::open(zero.clone(), min_of([half, cap]));
            if !iv.nonempty() {
                return Ok(infeasible(iv.describe("1/r")));
            }
            let r = iv.midpoint();
            let s = ratio(3, 2) + &an - &q - &r;
            let e1 = Interval::open(bn.clone(), &s - &bn);
            if !e1.nonempty() {
                return Ok(infeasible(e1.describe("1/e1")));
            }
            let e1 = e1.midpoint();
            let f2 = Interval::open(zero, min_of([bn.clone(), &s - &bn]));
            if !f2.nonempty() {
                return Ok(infeasible(f2.describe("1/f2")));
            }
            let f2 = f2.midpoint();
            w.insert("1/f1".into(), &s - &e1);
            w.insert("1/e1".into(), e1);
            w.insert("1/e2".into(), &s - &f2);
            w.insert("1/f2".into(), f2);
            w.insert("1/r".into(), r);
        }
        SystemId::InlhC2 => {
            let base = ratio(3, 2) + &an - &q;
            let lo = max_of([zero.clone(), &base - int(2) * &bn]);
            let hi = min_of([half, &base - &bn]);
            let iv = Interval::open(lo, hi);
            if !iv.nonempty() {
                return Ok(infeasible(iv.describe("1/r2")));
            }
            let r2 = iv.midpoint();
            let s = &base - &r2;
            let g1 = Interval::open(max_of([bn.clone(), &s - &bn]), s.clone());
            if !g1.nonempty() {
                return Ok(infeasible(g1.describe("1/g1")));
            }
            let g1 = g1.midpoint();
            let g2 = Interval::open(max_of([zero, &s - &bn]), min_of([bn.clone(), s.clone()]));
            if !g2.nonempty() {
                return Ok(infeasible(g2.describe("1/g2")));
            }
            let g2 = g2.midpoint();
            w.insert("1/h1".into(), &s - &g1);
            w.insert("1/g1".into(), g1);
            w.insert("1/h2".into(), &s - &g2);
            w.insert("1/g2".into(), g2);
            w.insert("1/r2".into(), r2);
        }
        SystemId::InlhE1 => {
            let two_q = int(2) * &q;
            let total = &one + &an;
            let lo = max_of([zero.clone(), (&q - int(2) / &n) / &two_q]);
            let hi = min_of([half.clone(), (&total - int(2) * &bn) / &two_q]);
            let iv = Interval::open(lo, hi);
            if !iv.nonempty() {
                return Ok(infeasible(iv.describe("1/r1")));
            }
            let r1 = iv.midpoint();
            let t = &total - &two_q * &r1;
            let a1 = Interval::open(bn.clone(), &t - &bn);
            if !a1.nonempty() {
                return Ok(infeasible(a1.describe("1/a1")));
            }
            let a1 = a1.midpoint();
            let b2 = Interval::open(zero, min_of([bn.clone(), &t - &bn]));
            if !b2.nonempty() {
                return Ok(infeasible(b2.describe("1/b2")));
            }
            let b2 = b2.midpoint();
            w.insert("1/b1".into(), &t - &a1);
            w.insert("1/a1".into(), a1);
            w.insert("1/a2".into(), &t - &b2);
            w.insert("1/b2".into(), b2);
            w.insert("nu1".into(), &n * (&half - &r1));
            w.insert("1/r1".into(), r1);
        }
        SystemId::InlhE2 => {
            let two_q = int(2) * &q;
            let total = &one + &an;
            let lo = max_of([
                zero.clone(),
                (&total - int(2) * &bn) / &two_q,
                (&q - int(2) / &n) / &two_q,
            ]);
            let hi = min_of([half.clone(), total.clone() / &two_q]);
            let iv = Interval::open(lo, hi);
            if !iv.nonempty() {
                return Ok(infeasible(iv.describe("1/r2")));
            }
            let r2 = iv.midpoint();
            let t = &total - &two_q * &r2;
            let a3 = Interval::open(max_of([zero, &t - &bn]), min_of([bn.clone(), t.clone()]));
            if !a3.nonempty() {
                return Ok(infeasible(a3.describe("1/a3")));
            }
            let a3 = a3.midpoint();
            w.insert("1/b3".into(), &t - &a3);
            w.insert("1/a3".into(), a3);
            w.insert("nu2".into(), &n * (&half - &r2));
            w.insert("1/r2".into(), r2);
        }
    }

    if let Err(label) = check_witness(p, system, &w) {
        // The elimination above should make this unreachable; report it as
        // infeasible rather than hand out a certificate that does not verify.
        return Ok(infeasible(format!(
            "constructed witness violates '{label}'"
        )));
    }
    Ok(ExponentCertificate {
        system,
        feasible: true,
        witness: w,
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions_exactly() {
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("3/2").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("-1.5e-2").unwrap(), ratio(-3, 200));
        assert_eq!(parse_rational(" 7 ").unwrap(), int(7));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("2.5/0.5").unwrap(), int(5));
        for bad in ["", "abc", "1/0", "1..2", "e3", "1.2.3"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn validate_examples() {
        assert!(validate_constraints(&ModelParams::inlh(
            3,
            int(2),
            ratio(1, 2),
            int(2)
        )));
        assert!(!validate_constraints(&ModelParams::inlh(
            2,
            int(2),
            ratio(1, 2),
            int(2)
        )));
        assert!(!validate_constraints(&ModelParams::inls(1, int(1), int(2))));
    }

    #[test]
    fn critical_exponent_examples() {
        assert_eq!(
            critical_exponent(&ModelParams::inls(2, ratio(1, 2), ratio(5, 2))).unwrap(),
            int(0)
        );
        assert_eq!(
            critical_exponent(&ModelParams::inls(1, ratio(1, 2), ratio(3, 2))).unwrap(),
            ratio(-5, 2)
        );
        assert_eq!(
            critical_exponent(&ModelParams::inlh(2, int(1), ratio(1, 4), int(2))).unwrap(),
            ratio(-1, 4)
        );
        assert!(matches!(
            critical_exponent(&ModelParams::inls(1, ratio(1, 2), int(1))),
            Err(RegimeError::DivisionByZero(_))
        ));
    }

    #[test]
    fn classify_examples() {
        let r = classify(&ModelParams::inls(1, ratio(1, 2), ratio(3, 2))).unwrap();
        assert_eq!(r.theorem_label, TheoremLabel::NonScattering);
        let r = classify(&ModelParams::inls(2, ratio(1, 2), int(2))).unwrap();
        assert_eq!(r.theorem_label, TheoremLabel::Scattering);
        let r = classify(&ModelParams::inlh(2, int(1), ratio(1, 4), ratio(3, 2))).unwrap();
        assert_eq!(r.theorem_label, TheoremLabel::NonScattering);
        assert!(classify(&ModelParams::inls(1, int(1), int(2))).is_err());
    }

    #[test]
    fn boundary_endpoints() {
        // INLS: closed left endpoint of the scattering range.
        let p = ModelParams::inls(2, ratio(1, 2), ratio(3, 2));
        assert_eq!(
            classify(&p).unwrap().theorem_label,
            TheoremLabel::Scattering
        );
        // INLH: the split point belongs to neither theorem.
        let p = ModelParams::inlh(2, int(1), ratio(1, 4), ratio(7, 4));
        assert_eq!(
            classify(&p).unwrap().theorem_label,
            TheoremLabel::OutOfTheoremRange
        );
        // Mass-critical exponent is out of range for both models.
        let p = ModelParams::inls(2, ratio(1, 2), ratio(5, 2));
        let r = classify(&p).unwrap();
        assert_eq!(r.theorem_label, TheoremLabel::OutOfTheoremRange);
        assert_eq!(r.mass_class, MassClass::Critical);
    }

    #[test]
    fn one_dim_hartree_flag() {
        let p = ModelParams::inlh(1, ratio(1, 2), ratio(1, 8), ratio(3, 2));
        let plain = classify(&p).unwrap();
        assert_eq!(plain.theorem_label, TheoremLabel::OutOfTheoremRange);
        assert!(!plain.notes.is_empty());
        let ext = classify_with(
            &p,
            ClassifyOptions {
                inlh_one_dim_extension: true,
            },
        )
        .unwrap();
        assert_eq!(ext.theorem_label, TheoremLabel::NonScattering);
    }

    #[test]
    fn feasibility_examples() {
        let c = feasibility(
            &ModelParams::inls(2, ratio(1, 4), ratio(3, 2)),
            SystemId::InlsInner,
        )
        .unwrap();
        assert!(c.feasible);
        assert_eq!(c.witness["1/gamma"], ratio(1, 16));
        let c = feasibility(
            &ModelParams::inls(1, ratio(1, 2), ratio(3, 2)),
            SystemId::InlsInner,
        )
        .unwrap();
        assert!(!c.feasible);
        assert!(c.violation.unwrap().contains("-1/4"));
        let c = feasibility(
            &ModelParams::inls(1, ratio(1, 2), ratio(3, 2)),
            SystemId::InlsOuter,
        )
        .unwrap();
        assert!(c.feasible);
        let beta = &c.witness["1/beta"];
        assert!(*beta > int(0) && *beta <= ratio(1, 2));
        assert!(matches!(
            feasibility(
                &ModelParams::inls(1, ratio(1, 2), ratio(3, 2)),
                SystemId::InlhC1
            ),
            Err(RegimeError::UnknownSystem { .. })
        ));
    }

    #[test]
    fn witness_checker_rejects_tampering() {
        let p = ModelParams::inlh(3, int(1), ratio(1, 4), ratio(3, 2));
        for s in SystemId::for_model(Model::Inlh) {
            let c = feasibility(&p, s).unwrap();
            if !c.feasible {
                continue;
            }
            let mut w = c.witness.clone();
            let key = w.keys().next().unwrap().clone();
            *w.get_mut(&key).unwrap() += int(10);
            assert!(check_witness(&p, s, &w).is_err(), "{s}");
        }
    }

    #[test]
    fn virial_coefficient_vanishes_at_mass_critical() {
        for (n, b) in [(1, ratio(1, 4)), (2, ratio(1, 2)), (3, ratio(3, 4))] {
            let mut p = ModelParams::inls(n, b, int(2));
            p.q = mass_critical_q(&p);
            assert!(virial_numerator(&p).is_zero());
            assert!(virial_coefficient(&p).is_zero());
        }
    }

    #[test]
    fn weighted_slope_example() {
        let p = ModelParams::inls(1, ratio(1, 4), ratio(3, 2));
        assert_eq!(weighted_potential_slope(&p), ratio(-1, 2));
    }
}
