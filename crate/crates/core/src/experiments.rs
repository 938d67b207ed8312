//! Area-radius pair measurements, the hyperbolic plug-in tables, the
//! polynomial degree report and presentation comparisons.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::backend::GroupBackend;
use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::filling::{
    check_affine_equiv, check_preceq, enumerate_loops, harea_fill_with, AffineCheck, BruteForceConfig, FillConfig,
    FillStatus, FillingResult, RangeCheck, Solver,
};
use crate::presentation::HomPresentation;
use crate::surface::{assemble_surface, measure, SurfaceDiagram};
use crate::word::{Letter, Word};

pub const BALL_CAVEAT: &str = "values are computed inside a finite ball and are lower bounds for the untruncated complex";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FillingPolicy {
    /// The exact solver's minimal chain, radius measured afterwards.
    MinAreaThenMeasureRadius,
    /// Least radius among the minimal chains found by both solvers.
    MinRadiusAmongMinArea,
    /// Brute-force search only, within its node budget.
    SearchBudgeted,
}

impl FromStr for FillingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min_area_then_measure_radius" | "min-area" => Ok(FillingPolicy::MinAreaThenMeasureRadius),
            "min_radius_among_min_area" | "min-radius" => Ok(FillingPolicy::MinRadiusAmongMinArea),
            "search_budgeted" | "budgeted" => Ok(FillingPolicy::SearchBudgeted),
            other => Err(Error::Unsupported(format!("unknown filling policy {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleMeasure {
    pub word: String,
    pub length: usize,
    pub area: Option<i64>,
    pub radius: Option<usize>,
    pub status: FillStatus,
    pub solver: Solver,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArWitness {
    /// Index into the cycle list.
    pub cycle: usize,
    pub word: String,
    pub area: i64,
    pub radius: usize,
    pub diagram: SurfaceDiagram,
}

/// Tables are indexed by n, entry 0 included.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArPairReport {
    pub f_table: Vec<i64>,
    pub g_table: Vec<i64>,
    /// Largest-area cycle of length ≤ n with its diagram.
    pub witnesses: Vec<Option<ArWitness>>,
    pub policy: FillingPolicy,
    pub ball_radius: usize,
    pub cycles: Vec<CycleMeasure>,
    pub gaps: Vec<String>,
    pub caveat: String,
}

struct Measured {
    fill: FillingResult,
    radius: Option<usize>,
    diagram: Option<SurfaceDiagram>,
}

fn measured(ball: &CayleyBall, fill: FillingResult) -> Result<Measured> {
    if fill.status != FillStatus::Optimal {
        return Ok(Measured { fill, radius: None, diagram: None });
    }
    let diagram = assemble_surface(ball, &fill.chain)?;
    let radius = measure(&diagram)?.radius;
    Ok(Measured { fill, radius, diagram: Some(diagram) })
}

fn fill_by_policy(ball: &CayleyBall, w: &Word, policy: FillingPolicy) -> Result<Measured> {
    let gamma = ball.loop_to_cycle(0, w)?;
    let brute = |max_area: i64| {
        let mut cfg = FillConfig::with_solver(Solver::BruteForce);
        cfg.brute = BruteForceConfig { max_area, ..BruteForceConfig::default() };
        harea_fill_with(ball, &gamma, &cfg)
    };
    match policy {
        FillingPolicy::MinAreaThenMeasureRadius => measured(ball, harea_fill_with(ball, &gamma, &FillConfig::default())?),
        FillingPolicy::SearchBudgeted => measured(ball, brute(BruteForceConfig::default().max_area)?),
        FillingPolicy::MinRadiusAmongMinArea => {
            let ilp = measured(ball, harea_fill_with(ball, &gamma, &FillConfig::default())?)?;
            if ilp.fill.status != FillStatus::Optimal {
                return Ok(ilp);
            }
            let other = measured(ball, brute(ilp.fill.area)?)?;
            let better = other.fill.status == FillStatus::Optimal
                && other.fill.area == ilp.fill.area
                && other.radius.unwrap_or(usize::MAX) < ilp.radius.unwrap_or(usize::MAX);
            Ok(if better { other } else { ilp })
        }
    }
}

pub fn measure_ar_pair(
    backend: &GroupBackend,
    pres: &HomPresentation,
    n_max: usize,
    ball_radius: usize,
    policy: FillingPolicy,
) -> Result<ArPairReport> {
    let ball = CayleyBall::build(backend, pres, ball_radius)?;
    measure_ar_pair_in(&ball, n_max, policy)
}

/// Every loop of length ≤ n_max gets one filling chosen by the policy, and
/// that single diagram supplies both its area and its radius.
pub fn measure_ar_pair_in(ball: &CayleyBall, n_max: usize, policy: FillingPolicy) -> Result<ArPairReport> {
    if n_max == 0 {
        return Err(Error::Unsupported("n_max must be at least 1".into()));
    }
    let loops = enumerate_loops(ball, n_max);
    let results: Vec<Result<Measured>> = loops.par_iter().map(|w| fill_by_policy(ball, w, policy)).collect();
    let pres = ball.presentation();
    let mut cycles = Vec::with_capacity(loops.len());
    let mut diagrams = Vec::with_capacity(loops.len());
    let mut gaps = Vec::new();
    for (w, r) in loops.iter().zip(results) {
        let m = r?;
        let word = pres.format_word(w);
        let ok = m.fill.status == FillStatus::Optimal && m.radius.is_some();
        if !ok {
            gaps.push(word.clone());
        }
        cycles.push(CycleMeasure {
            word,
            length: w.len(),
            area: ok.then_some(m.fill.area),
            radius: if ok { m.radius } else { None },
            status: m.fill.status,
            solver: m.fill.solver,
        });
        diagrams.push(m.diagram);
    }
    let mut f_table = vec![0i64; n_max + 1];
    let mut g_table = vec![0i64; n_max + 1];
    let mut witnesses: Vec<Option<ArWitness>> = vec![None; n_max + 1];
    let mut best: Option<usize> = None;
    let mut k = 0;
    for n in 0..=n_max {
        if n > 0 {
            f_table[n] = f_table[n - 1];
            g_table[n] = g_table[n - 1];
        }
        while k < cycles.len() && cycles[k].length <= n {
            if let (Some(a), Some(r)) = (cycles[k].area, cycles[k].radius) {
                if a > f_table[n] || best.is_none() {
                    best = Some(k);
                }
                f_table[n] = f_table[n].max(a);
                g_table[n] = g_table[n].max(r as i64);
            }
            k += 1;
        }
        witnesses[n] = best.map(|i| ArWitness {
            cycle: i,
            word: cycles[i].word.clone(),
            area: cycles[i].area.unwrap_or(0),
            radius: cycles[i].radius.unwrap_or(0),
            diagram: diagrams[i].clone().expect("measured cycles have diagrams"),
        });
    }
    Ok(ArPairReport {
        f_table,
        g_table,
        witnesses,
        policy,
        ball_radius: ball.radius(),
        cycles,
        gaps,
        caveat: BALL_CAVEAT.into(),
    })
}

/// A positive rational read from "3", "3/2" or "1.25".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositiveRational {
    pub num: u64,
    pub den: u64,
}

impl PositiveRational {
    pub fn new(num: u64, den: u64) -> Result<PositiveRational> {
        if num == 0 || den == 0 {
            return Err(Error::Unsupported("constants must be positive".into()));
        }
        let g = num.gcd(&den);
        Ok(PositiveRational { num: num / g, den: den / g })
    }

    pub fn integer(n: u64) -> Result<PositiveRational> {
        Self::new(n, 1)
    }
}

impl FromStr for PositiveRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Unsupported(format!("not a positive rational: {s:?}"));
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            return Self::new(p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
        }
        if let Some((i, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10u64.pow(frac.len() as u32);
            let whole: u64 = if i.is_empty() { 0 } else { i.parse().map_err(|_| bad())? };
            let part: u64 = frac.parse().map_err(|_| bad())?;
            return Self::new(whole.checked_mul(den).and_then(|x| x.checked_add(part)).ok_or_else(bad)?, den);
        }
        Self::integer(s.parse().map_err(|_| bad())?)
    }
}

impl fmt::Display for PositiveRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for PositiveRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PositiveRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// ⌈log₂ x⌉ for x ≥ 1.
fn ceil_log2(x: &BigUint) -> u64 {
    if *x <= BigUint::one() {
        0
    } else {
        (x - 1u32).bits()
    }
}

/// ⌈(p/q)·k·(log₂n + 1)⌉, exactly: with y = pk·log₂n the answer is the
/// least K with qK − pk ≥ y, and ⌈y⌉ = ⌈log₂(n^(pk))⌉.
fn ceil_scaled_log(r: PositiveRational, k: u64, n: u64) -> u64 {
    let pk = r.num * k;
    let y = ceil_log2(&BigUint::from(n).pow(pk as u32));
    (y + pk).div_ceil(r.den)
}

/// f(n) = B·n·(log₂n + 1) and g(n) = C·(log₂n + 1), stored as ceilings;
/// the logarithm is exact at powers of two.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperbolicArPair {
    #[serde(rename = "B")]
    pub b: PositiveRational,
    #[serde(rename = "C")]
    pub c: PositiveRational,
    pub n_max: usize,
    pub f: Vec<u64>,
    pub g: Vec<u64>,
    /// Whether the table entry involved no rounding of the logarithm.
    pub log_exact: Vec<bool>,
    /// f(n) ≥ n on 1..=n_max.
    pub dominates_identity: bool,
    pub caveat: String,
}

pub fn hyperbolic_ar_pair(b: PositiveRational, c: PositiveRational, n_max: usize) -> HyperbolicArPair {
    let mut f = vec![0u64; n_max + 1];
    let mut g = vec![0u64; n_max + 1];
    let mut log_exact = vec![true; n_max + 1];
    for n in 1..=n_max as u64 {
        f[n as usize] = ceil_scaled_log(b, n, n);
        g[n as usize] = ceil_scaled_log(c, 1, n);
        log_exact[n as usize] = n.is_power_of_two();
    }
    let dominates_identity = (1..=n_max).all(|n| f[n] >= n as u64);
    HyperbolicArPair {
        b,
        c,
        n_max,
        f,
        g,
        log_exact,
        dominates_identity,
        caveat: "entries are ceilings, exact where log_exact is set and upper bounds elsewhere".into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    #[serde(rename = "M")]
    pub m: i64,
    /// (M²)^g(n)·f(n) for n = 0..=n_max (entry 0 is 0), as decimal strings.
    pub composite: Vec<String>,
    /// Least-squares slope of ln composite against ln n over 1..=n_max.
    pub fitted_slope: f64,
    /// The slope rounded to the nearest integer.
    pub degree: u32,
    /// Least κ with composite(n) ≤ κ·n^degree on the range.
    pub kappa: String,
    /// 1 + 2·C·log₂M, the exponent predicted by the shape of the bound.
    pub predicted_degree: f64,
    pub caveat: String,
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap_or(f64::INFINITY).ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap_or(f64::INFINITY).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

pub fn polynomial_degree_report(m: i64, hyp: &HyperbolicArPair) -> Result<DegreeReport> {
    if m < 1 {
        return Err(Error::Unsupported("M must be at least 1".into()));
    }
    if hyp.n_max == 0 {
        return Err(Error::Unsupported("the table is empty".into()));
    }
    let m2 = BigUint::from((m * m) as u64);
    let composite: Vec<BigUint> = (0..=hyp.n_max)
        .map(|n| if n == 0 { BigUint::zero() } else { m2.pow(hyp.g[n] as u32) * BigUint::from(hyp.f[n]) })
        .collect();
    let pts: Vec<(f64, f64)> = (1..=hyp.n_max).map(|n| ((n as f64).ln(), ln_big(&composite[n]))).collect();
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / k, sy / k);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    let fitted_slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let degree = fitted_slope.round().max(0.0) as u32;
    let kappa = (1..=hyp.n_max)
        .map(|n| {
            let denom = BigUint::from(n as u64).pow(degree);
            composite[n].div_ceil(&denom)
        })
        .max()
        .unwrap_or_default();
    let c = hyp.c.num as f64 / hyp.c.den as f64;
    Ok(DegreeReport {
        m,
        composite: composite.iter().map(|x| x.to_string()).collect(),
        fitted_slope,
        degree,
        kappa: kappa.to_string(),
        predicted_degree: 1.0 + 2.0 * c * (m as f64).log2(),
        caveat: "finite-range fit on the sampled n only".into(),
    })
}

/// Generator images between two presentations of one group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorDictionary {
    /// Image of each generator of the first presentation, over the second.
    pub forward: Vec<Word>,
    /// Image of each generator of the second presentation, over the first.
    pub backward: Vec<Word>,
}

impl GeneratorDictionary {
    pub fn identity(rank: usize) -> GeneratorDictionary {
        let words: Vec<Word> = (0..rank).map(|i| Word::new(vec![Letter::pos(i)])).collect();
        GeneratorDictionary { forward: words.clone(), backward: words }
    }
}

fn translate(images: &[Word], w: &Word) -> Word {
    w.substitute(|l| if l.is_inverse() { images[l.generator()].inverse() } else { images[l.generator()].clone() })
}

/// Reduced words up to the given length, in shortlex order.
fn reduced_words(rank: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for k in 0..2 * rank {
                let l = Letter::from_order_key(k);
                if w.last() == Some(l.inverse()) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Relators map to the identity both ways, the round trips fix every
/// generator, and triviality agrees on all words up to `max_len`. Returns
/// the number of words compared.
pub fn check_dictionary(
    pres_a: &HomPresentation,
    backend_a: &GroupBackend,
    pres_b: &HomPresentation,
    backend_b: &GroupBackend,
    dict: &GeneratorDictionary,
    max_len: usize,
) -> Result<usize> {
    if dict.forward.len() != pres_a.rank() || dict.backward.len() != pres_b.rank() {
        return Err(Error::Dictionary("dictionary size differs from the generator counts".into()));
    }
    let fail = |what: String| Err(Error::Dictionary(what));
    let trivial = |backend: &GroupBackend, w: &Word| backend.equal_in_group(w, &Word::empty());
    for r in pres_a.marked_relators() {
        if !trivial(backend_b, &translate(&dict.forward, &r))? {
            return fail(format!("relator {} is not trivial after translation", pres_a.format_word(&r)));
        }
    }
    for r in pres_b.marked_relators() {
        if !trivial(backend_a, &translate(&dict.backward, &r))? {
            return fail(format!("relator {} is not trivial after translation", pres_b.format_word(&r)));
        }
    }
    for (i, name) in pres_a.generators().iter().enumerate() {
        let a = Word::new(vec![Letter::pos(i)]);
        if !backend_a.equal_in_group(&translate(&dict.backward, &translate(&dict.forward, &a)), &a)? {
            return fail(format!("round trip moves generator {name}"));
        }
    }
    for (i, name) in pres_b.generators().iter().enumerate() {
        let b = Word::new(vec![Letter::pos(i)]);
        if !backend_b.equal_in_group(&translate(&dict.forward, &translate(&dict.backward, &b)), &b)? {
            return fail(format!("round trip moves generator {name}"));
        }
    }
    let words = reduced_words(pres_a.rank(), max_len);
    for w in &words {
        if trivial(backend_a, w)? != trivial(backend_b, &translate(&dict.forward, w))? {
            return fail(format!("{} is trivial on one side only", pres_a.format_word(w)));
        }
    }
    Ok(words.len())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub first: ArPairReport,
    pub second: ArPairReport,
    pub words_checked: usize,
    /// f₁ ≼ f₂ and f₂ ≼ f₁.
    pub f_forward: RangeCheck,
    pub f_backward: RangeCheck,
    /// g₁ ≅ g₂.
    pub g: AffineCheck,
    pub f_constant: Option<i64>,
    pub g_constant: Option<i64>,
    pub holds: bool,
    pub caveat: String,
}

#[allow(clippy::too_many_arguments)]
pub fn compare_presentations(
    pres_a: &HomPresentation,
    backend_a: &GroupBackend,
    pres_b: &HomPresentation,
    backend_b: &GroupBackend,
    dict: &GeneratorDictionary,
    n_max: usize,
    ball_radius: usize,
    c_max: i64,
) -> Result<EquivalenceReport> {
    let words_checked = check_dictionary(pres_a, backend_a, pres_b, backend_b, dict, 4)?;
    let policy = FillingPolicy::MinAreaThenMeasureRadius;
    let first = measure_ar_pair(backend_a, pres_a, n_max, ball_radius, policy)?;
    let second = measure_ar_pair(backend_b, pres_b, n_max, ball_radius, policy)?;
    let f_forward = check_preceq(&first.f_table, &second.f_table, c_max);
    let f_backward = check_preceq(&second.f_table, &first.f_table, c_max);
    let g = check_affine_equiv(&first.g_table, &second.g_table, c_max);
    let f_constant = f_forward.constant.zip(f_backward.constant).map(|(x, y)| x.max(y));
    let g_constant = g.constant();
    Ok(EquivalenceReport {
        holds: f_constant.is_some() && g_constant.is_some(),
        first,
        second,
        words_checked,
        f_forward,
        f_backward,
        g,
        f_constant,
        g_constant,
        caveat: format!("finite-range check on n <= {n_max}; {BALL_CAVEAT}"),
    })
}
