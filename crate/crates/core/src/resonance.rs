//! Exact search for small denominators `λ(n₁) + … + λ(n_p)` over integer
//! tuples with `n₁ + … + n_p = 0` and `|n_j| >= 3`.
//!
//! Every decision (zero or not, which tuple is smallest) is taken on exact
//! big rationals. A floating-point sum is only used to skip tuples that are
//! provably not competitive, with a margin of `1e-6`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::multiplier::{lambda, lambda_unchecked};

const PREFILTER_MARGIN: f64 = 1e-6;

/// A tuple `(n₁, …, n_p)` with `Σ n_j = 0`, every `|n_j| >= 3`, `3 <= p <= 6`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct Tuple(Vec<i64>);

impl Tuple {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if !(3..=6).contains(&entries.len()) {
            return Err(Error::UnsupportedArity(entries.len()));
        }
        if let Some(&n) = entries.iter().find(|n| n.abs() < 3) {
            return Err(Error::ExcludedMode(n));
        }
        if entries.iter().sum::<i64>() != 0 {
            return Err(Error::InvalidInput(format!(
                "tuple {entries:?} does not sum to zero"
            )));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|n| -n).collect())
    }

    /// Representative of the orbit under permutations and global sign flip:
    /// entries sorted non-increasing, lexicographically largest of `±t`.
    pub fn canonical(&self) -> Self {
        Self(canonical(&self.0))
    }
}

impl TryFrom<Vec<i64>> for Tuple {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        Tuple::new(v)
    }
}

impl From<Tuple> for Vec<i64> {
    fn from(t: Tuple) -> Self {
        t.0
    }
}

fn sorted_desc(entries: &[i64]) -> Vec<i64> {
    let mut v = entries.to_vec();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn canonical(entries: &[i64]) -> Vec<i64> {
    let pos = sorted_desc(entries);
    let neg: Vec<i64> = pos.iter().rev().map(|n| -n).collect();
    pos.max(neg)
}

/// Exact `Σ_j λ(n_j)`.
pub fn lambda_sum(t: &Tuple) -> BigRational {
    exact_sum(t.entries())
}

fn exact_sum(entries: &[i64]) -> BigRational {
    entries
        .iter()
        .map(|&n| lambda(n).expect("tuple entries satisfy |n| >= 3"))
        .fold(BigRational::zero(), |acc, x| acc + x)
}

fn float_sum(entries: &[i64]) -> f64 {
    entries.iter().map(|&n| lambda_unchecked(n)).sum()
}

/// True iff the entries can be paired into couples `(a, −a)`, i.e. every
/// value occurs as often as its negative. Always false for odd arity.
pub fn is_totally_degenerate(entries: &[i64]) -> bool {
    if entries.len() % 2 == 1 {
        return false;
    }
    let mut counts: BTreeMap<i64, i64> = BTreeMap::new();
    for &n in entries {
        *counts.entry(n.abs()).or_default() += n.signum();
    }
    counts.values().all(|&c| c == 0)
}

/// Number of distinct orderings of a multiset, `p! / Π mult!`.
fn permutation_count(sorted: &[i64]) -> u64 {
    let mut total: u64 = (1..=sorted.len() as u64).product();
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
            total /= run;
        } else {
            run = 1;
        }
    }
    total
}

/// Best tuple within the `n_min = min_j |n_j|` class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinModeRow {
    pub n_min: i64,
    #[serde(with = "rational_str")]
    pub min_value: BigRational,
    pub argmin: Tuple,
    /// `λ(n) − 2λ(n+1) + λ(n+2)` at `n = n_min`: the double integral of `λ''`
    /// over the unit square at `n_min`, a lower bound for this class.
    #[serde(with = "rational_str")]
    pub telescoping_bound: BigRational,
}

impl MinModeRow {
    /// `min|Σλ| · n_min⁴`.
    pub fn scaled(&self) -> f64 {
        self.min_value.to_f64().unwrap_or(f64::NAN) * (self.n_min as f64).powi(4)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResonanceReport {
    pub p: usize,
    pub bound: i64,
    /// Exact minimum of `|Σλ|` over tuples that are not totally degenerate.
    pub min_value: BigRational,
    pub argmin: Tuple,
    /// Ordered tuples (all permutations counted) that are totally degenerate.
    pub degenerate_count: u64,
    /// Ordered tuples that are not totally degenerate.
    pub nondegenerate_count: u64,
    /// Canonical representatives of nondegenerate tuples with `Σλ = 0`.
    pub exact_zero_tuples: Vec<Tuple>,
    /// Per-`n_min` minima (arity 4 only).
    pub by_min_mode: Vec<MinModeRow>,
}

impl ResonanceReport {
    /// Whether `min_value` clears the explicit constant for `p = 3` (2/5) or
    /// `p = 5` (9/35). `None` for other arities.
    pub fn satisfies_explicit_bound(&self) -> Option<bool> {
        explicit_lower_bound(self.p).map(|b| self.min_value >= b)
    }

    /// `min_{n_min} (min|Σλ| · n_min⁴)` over the arity-4 table.
    pub fn fitted_constant(&self) -> Option<f64> {
        self.by_min_mode
            .iter()
            .map(MinModeRow::scaled)
            .reduce(f64::min)
    }

    /// Least-squares slope of `log min|Σλ|` against `log n_min`.
    pub fn fitted_exponent(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .by_min_mode
            .iter()
            .filter_map(|r| {
                let v = r.min_value.to_f64()?;
                (v > 0.0).then(|| ((r.n_min as f64).ln(), v.ln()))
            })
            .collect();
        crate::fit::fit_slope(&pts)
    }
}

/// Explicit lower bounds on `|Σλ|` for odd arities.
pub fn explicit_lower_bound(p: usize) -> Option<BigRational> {
    match p {
        3 => Some(BigRational::new(2.into(), 5.into())),
        5 => Some(BigRational::new(9.into(), 35.into())),
        _ => None,
    }
}

/// Search options. `pruned` enumerates one canonical representative per
/// orbit of permutations and global sign flip and recovers multiplicities by
/// orbit counting; otherwise every ordered tuple is visited.
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub pruned: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { pruned: true }
    }
}

/// Exhaustive exact search over tuples of arity `p` with `|n_j| <= bound`.
pub fn min_denominator(p: usize, bound: i64) -> Result<ResonanceReport> {
    search(p, bound, SearchOptions::default())
}

/// Exhaustive arity-6 search; every nondegenerate exact zero is recorded.
pub fn search_resonances_p6(bound: i64) -> Result<ResonanceReport> {
    search(6, bound, SearchOptions::default())
}

pub fn search(p: usize, bound: i64, opts: SearchOptions) -> Result<ResonanceReport> {
    if !(3..=6).contains(&p) {
        return Err(Error::UnsupportedArity(p));
    }
    // Admissible values in non-increasing order.
    let values: Vec<i64> = (3..=bound).rev().chain((3..=bound).map(|n| -n)).collect();
    let track_rows = p == 4;

    let acc = if opts.pruned {
        (0..values.len())
            .into_par_iter()
            .filter(|&i| values[i] > 0)
            .map(|i| {
                let mut acc = Accumulator::new(track_rows);
                let mut buf = vec![values[i]];
                pruned_walk(&values, p, bound, i, values[i], &mut buf, &mut acc);
                acc
            })
            .reduce(|| Accumulator::new(track_rows), Accumulator::merge)
    } else {
        values
            .par_iter()
            .map(|&lead| {
                let mut acc = Accumulator::new(track_rows);
                let mut buf = vec![lead];
                ordered_walk(&values, p, lead, &mut buf, &mut acc);
                acc
            })
            .reduce(|| Accumulator::new(track_rows), Accumulator::merge)
    };
    acc.finish(p, bound)
}

fn pruned_walk(
    values: &[i64],
    p: usize,
    bound: i64,
    idx: usize,
    sum: i64,
    buf: &mut Vec<i64>,
    acc: &mut Accumulator,
) {
    let remaining = (p - buf.len()) as i64;
    let current = values[idx];
    if remaining == 1 {
        let last = -sum;
        if last.abs() >= 3 && last.abs() <= bound && last <= current {
            buf.push(last);
            let neg: Vec<i64> = buf.iter().rev().map(|n| -n).collect();
            if *buf >= neg {
                let weight = permutation_count(buf) * if *buf == neg { 1 } else { 2 };
                acc.visit(buf, weight);
            }
            buf.pop();
        }
        return;
    }
    for j in idx..values.len() {
        let v = values[j];
        let s = sum + v;
        // The remaining r - 1 entries lie in [-bound, v].
        let r = remaining - 1;
        if -s > r * v {
            break;
        }
        if -s < -r * bound {
            continue;
        }
        buf.push(v);
        pruned_walk(values, p, bound, j, s, buf, acc);
        buf.pop();
    }
}

fn ordered_walk(values: &[i64], p: usize, sum: i64, buf: &mut Vec<i64>, acc: &mut Accumulator) {
    if buf.len() == p - 1 {
        let last = -sum;
        if values.contains(&last) {
            buf.push(last);
            acc.visit(buf, 1);
            buf.pop();
        }
        return;
    }
    for &v in values {
        buf.push(v);
        ordered_walk(values, p, sum + v, buf, acc);
        buf.pop();
    }
}

#[derive(Clone)]
struct Candidate {
    value: BigRational,
    approx: f64,
    tuple: Vec<i64>,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        (&self.value, &self.tuple) < (&other.value, &other.tuple)
    }
}

struct Accumulator {
    best: Option<Candidate>,
    degenerate: u64,
    nondegenerate: u64,
    zeros: BTreeSet<Vec<i64>>,
    rows: Option<BTreeMap<i64, Candidate>>,
}

impl Accumulator {
    fn new(track_rows: bool) -> Self {
        Self {
            best: None,
            degenerate: 0,
            nondegenerate: 0,
            zeros: BTreeSet::new(),
            rows: track_rows.then(BTreeMap::new),
        }
    }

    fn visit(&mut self, entries: &[i64], weight: u64) {
        if is_totally_degenerate(entries) {
            self.degenerate += weight;
            return;
        }
        self.nondegenerate += weight;
        let approx = float_sum(entries).abs();
        let n_min = entries.iter().map(|n| n.abs()).min().unwrap_or(0);

        let competitive = |c: &Option<&Candidate>| match c {
            None => true,
            Some(c) => approx <= c.approx + PREFILTER_MARGIN,
        };
        let need_exact = approx < PREFILTER_MARGIN
            || competitive(&self.best.as_ref())
            || self
                .rows
                .as_ref()
                .is_some_and(|rows| competitive(&rows.get(&n_min)));
        if !need_exact {
            return;
        }

        let value = exact_sum(entries).abs();
        let tuple = canonical(entries);
        if value.is_zero() {
            self.zeros.insert(tuple.clone());
        }
        let cand = Candidate {
            approx: value.to_f64().unwrap_or(0.0),
            value,
            tuple,
        };
        if let Some(rows) = self.rows.as_mut() {
            let replace = rows.get(&n_min).is_none_or(|cur| cand.better_than(cur));
            if replace {
                rows.insert(n_min, cand.clone());
            }
        }
        if self.best.as_ref().is_none_or(|cur| cand.better_than(cur)) {
            self.best = Some(cand);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.degenerate += other.degenerate;
        self.nondegenerate += other.nondegenerate;
        self.zeros.extend(other.zeros);
        if let Some(b) = other.best {
            if self.best.as_ref().is_none_or(|cur| b.better_than(cur)) {
                self.best = Some(b);
            }
        }
        if let (Some(rows), Some(other_rows)) = (self.rows.as_mut(), other.rows) {
            for (k, c) in other_rows {
                let replace = rows.get(&k).is_none_or(|cur| c.better_than(cur));
                if replace {
                    rows.insert(k, c);
                }
            }
        }
        self
    }

    fn finish(self, p: usize, bound: i64) -> Result<ResonanceReport> {
        let best = self.best.ok_or(Error::EmptyDomain { p, bound })?;
        let by_min_mode = self
            .rows
            .unwrap_or_default()
            .into_iter()
            .map(|(n_min, c)| MinModeRow {
                n_min,
                min_value: c.value,
                argmin: Tuple(c.tuple),
                telescoping_bound: second_difference(n_min),
            })
            .collect();
        Ok(ResonanceReport {
            p,
            bound,
            min_value: best.value,
            argmin: Tuple(best.tuple),
            degenerate_count: self.degenerate,
            nondegenerate_count: self.nondegenerate,
            exact_zero_tuples: self.zeros.into_iter().map(Tuple).collect(),
            by_min_mode,
        })
    }
}

/// `λ(n) − 2λ(n+1) + λ(n+2)` for `n >= 3`.
fn second_difference(n: i64) -> BigRational {
    let l = |k: i64| lambda(k).expect("n >= 3");
    l(n) - l(n + 1) * BigRational::from_integer(BigInt::from(2)) + l(n + 2)
}

/// Closed-form count of ordered totally degenerate 6-tuples with
/// `3 <= |n_j| <= bound`: three `(a, −a)` pairs with magnitudes drawn as a
/// multiset from `bound − 2` values.
pub fn degenerate_count_p6_formula(bound: i64) -> u64 {
    let k = (bound - 2).max(0) as u64;
    let distinct = if k >= 3 { k * (k - 1) * (k - 2) / 6 } else { 0 };
    720 * distinct + 180 * k * k.saturating_sub(1) + 20 * k
}

/// On-disk certificate: exact fractions as decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub p: usize,
    pub bound: i64,
    pub min_numerator: String,
    pub min_denominator: String,
    pub argmin: Tuple,
    pub degenerate_count: u64,
    pub nondegenerate_count: u64,
    pub exact_zero_tuples: Vec<Tuple>,
    pub by_min_mode: Vec<MinModeRow>,
    /// Informational; recomputed from the exact rows on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_exponent: Option<f64>,
}

impl From<&ResonanceReport> for Certificate {
    fn from(r: &ResonanceReport) -> Self {
        Certificate {
            p: r.p,
            bound: r.bound,
            min_numerator: r.min_value.numer().to_string(),
            min_denominator: r.min_value.denom().to_string(),
            argmin: r.argmin.clone(),
            degenerate_count: r.degenerate_count,
            nondegenerate_count: r.nondegenerate_count,
            exact_zero_tuples: r.exact_zero_tuples.clone(),
            by_min_mode: r.by_min_mode.clone(),
            fitted_constant: r.fitted_constant(),
            fitted_exponent: r.fitted_exponent(),
        }
    }
}

impl TryFrom<Certificate> for ResonanceReport {
    type Error = Error;
    fn try_from(c: Certificate) -> Result<Self> {
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|e| Error::InvalidInput(format!("bad integer {s:?}: {e}")))
        };
        let den = parse(&c.min_denominator)?;
        if den.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(ResonanceReport {
            p: c.p,
            bound: c.bound,
            min_value: BigRational::new(parse(&c.min_numerator)?, den),
            argmin: c.argmin,
            degenerate_count: c.degenerate_count,
            nondegenerate_count: c.nondegenerate_count,
            exact_zero_tuples: c.exact_zero_tuples,
            by_min_mode: c.by_min_mode,
        })
    }
}

/// Certificate JSON text. Deterministic: identical reports give identical bytes.
pub fn certificate_json(report: &ResonanceReport) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&Certificate::from(report))?;
    text.push('\n');
    Ok(text)
}

pub fn certify(report: &ResonanceReport, path: &Path) -> Result<()> {
    fs::write(path, certificate_json(report)?)?;
    Ok(())
}

pub fn read_certificate(path: &Path) -> Result<ResonanceReport> {
    let cert: Certificate = serde_json::from_str(&fs::read_to_string(path)?)?;
    cert.try_into()
}

/// Serde adapter writing a rational as `"p/q"`.
pub mod rational_str {
    use num_rational::BigRational;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", v.numer(), v.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let text = String::deserialize(d)?;
        let (n, q) = text.split_once('/').unwrap_or((&text, "1"));
        let n = n.trim().parse().map_err(D::Error::custom)?;
        let q: num_bigint::BigInt = q.trim().parse().map_err(D::Error::custom)?;
        if q == num_bigint::BigInt::from(0) {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(BigRational::new(n, q))
    }
}

impl Serialize for ResonanceReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Certificate::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ResonanceReport {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let cert = Certificate::deserialize(d)?;
        cert.try_into().map_err(serde::de::Error::custom)
    }
}

/// `|x|` as `f64`, for reporting.
pub fn to_f64(x: &BigRational) -> f64 {
    x.abs().to_f64().unwrap_or(f64::NAN)
}
