//! Piecewise-affine interval maps built from horseshoe schedules.
//!
//! A [`PAMap`] is stored as its node list and the exact value at every node;
//! between nodes it is the linear interpolant, so continuity is structural.
//! Schedules describe a sequence of blocks `I_k` of width `|I_k|` carrying
//! `s_k` full legs, each leg an affine bijection onto the block.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, format_rational, int, rat, Rational};

/// Continuous piecewise-affine self-map of a closed interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PAMap {
    nodes: Vec<Rational>,
    values: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct MapFile {
    #[serde(with = "rational::serde_vec")]
    domain: Vec<Rational>,
    #[serde(with = "rational::serde_vec")]
    nodes: Vec<Rational>,
    #[serde(with = "rational::serde_vec")]
    values: Vec<Rational>,
}

impl PAMap {
    /// Builds a map from its nodes and node values. The domain is
    /// `[nodes[0], nodes[last]]`.
    pub fn new(nodes: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::invalid("a map needs at least two nodes"));
        }
        if nodes.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        if let Some(w) = nodes.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "nodes must be strictly increasing (index {})",
                w + 1
            )));
        }
        let (lo, hi) = (&nodes[0], &nodes[nodes.len() - 1]);
        if let Some(v) = values.iter().find(|v| *v < lo || *v > hi) {
            return Err(Error::invalid(format!(
                "value {} leaves the domain [{}, {}]: not a self-map",
                format_rational(v),
                format_rational(lo),
                format_rational(hi)
            )));
        }
        Ok(Self { nodes, values })
    }

    pub fn identity(lo: Rational, hi: Rational) -> Result<Self> {
        Self::new(vec![lo.clone(), hi.clone()], vec![lo, hi])
    }

    pub fn lo(&self) -> &Rational {
        &self.nodes[0]
    }

    pub fn hi(&self) -> &Rational {
        &self.nodes[self.nodes.len() - 1]
    }

    pub fn nodes(&self) -> &[Rational] {
        &self.nodes
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of affine pieces.
    pub fn piece_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn contains(&self, x: &Rational) -> bool {
        x >= self.lo() && x <= self.hi()
    }

    fn check_domain(&self, x: &Rational) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                point: format_rational(x),
                lo: format_rational(self.lo()),
                hi: format_rational(self.hi()),
            })
        }
    }

    /// Index `i` of the piece `[x_i, x_{i+1}]` containing `x` (the left one at
    /// an interior node). Caller guarantees `x` is in the domain.
    fn piece_of(&self, x: &Rational) -> usize {
        let i = self.nodes.partition_point(|n| n <= x);
        i.saturating_sub(1).min(self.nodes.len() - 2)
    }

    fn eval_unchecked(&self, x: &Rational) -> Rational {
        let i = self.piece_of(x);
        let (x0, x1) = (&self.nodes[i], &self.nodes[i + 1]);
        let (v0, v1) = (&self.values[i], &self.values[i + 1]);
        if x == x0 {
            return v0.clone();
        }
        if x == x1 {
            return v1.clone();
        }
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational> {
        self.check_domain(x)?;
        Ok(self.eval_unchecked(x))
    }

    /// `x, φ(x), …, φ^{n-1}(x)`.
    pub fn orbit(&self, x: &Rational, n: usize) -> Result<Vec<Rational>> {
        self.check_domain(x)?;
        let mut out = Vec::with_capacity(n);
        let mut cur = x.clone();
        for _ in 0..n {
            let next = self.eval_unchecked(&cur);
            out.push(cur);
            cur = next;
        }
        Ok(out)
    }

    /// Exact image `φ([a, b])`, an interval since `φ` is continuous.
    pub fn image(&self, a: &Rational, b: &Rational) -> Result<(Rational, Rational)> {
        self.check_domain(a)?;
        self.check_domain(b)?;
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let va = self.eval_unchecked(a);
        let vb = self.eval_unchecked(b);
        let (mut lo, mut hi) = if va <= vb { (va, vb) } else { (vb, va) };
        let start = self.nodes.partition_point(|n| n <= a);
        let end = self.nodes.partition_point(|n| n < b);
        for v in &self.values[start..end.max(start)] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        Ok((lo, hi))
    }

    /// Slope of each piece, in order.
    pub fn slopes(&self) -> Vec<Rational> {
        self.nodes
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| (&v[1] - &v[0]) / (&x[1] - &x[0]))
            .collect()
    }

    /// Largest absolute slope (a Lipschitz constant of the map).
    pub fn max_abs_slope(&self) -> Rational {
        self.slopes()
            .into_iter()
            .map(|s| s.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// `self ∘ inner`. Both maps must share a domain.
    pub fn compose(&self, inner: &PAMap, budget: usize) -> Result<PAMap> {
        if self.lo() != inner.lo() || self.hi() != inner.hi() {
            return Err(Error::invalid("composition needs a common domain"));
        }
        let mut nodes = Vec::with_capacity(inner.nodes.len());
        let mut values = Vec::with_capacity(inner.nodes.len());
        nodes.push(inner.nodes[0].clone());
        values.push(self.eval_unchecked(&inner.values[0]));
        for i in 0..inner.nodes.len() - 1 {
            let (x0, x1) = (&inner.nodes[i], &inner.nodes[i + 1]);
            let (v0, v1) = (&inner.values[i], &inner.values[i + 1]);
            if v0 != v1 {
                // outer nodes strictly between v0 and v1, in the order the
                // inner piece visits them
                let (lo, hi) = if v0 < v1 { (v0, v1) } else { (v1, v0) };
                let start = self.nodes.partition_point(|n| n <= lo);
                let end = self.nodes.partition_point(|n| n < hi);
                let span = x1 - x0;
                let dv = v1 - v0;
                let mut push = |j: usize| {
                    let u = &self.nodes[j];
                    nodes.push(x0 + (u - v0) * &span / &dv);
                    values.push(self.values[j].clone());
                };
                if v0 < v1 {
                    (start..end).for_each(&mut push);
                } else {
                    (start..end).rev().for_each(&mut push);
                }
            }
            nodes.push(x1.clone());
            values.push(self.eval_unchecked(v1));
            if nodes.len() > budget {
                return Err(Error::Budget {
                    what: "composition nodes",
                    needed: format!("more than {}", nodes.len()),
                    budget,
                });
            }
        }
        Ok(PAMap { nodes, values })
    }

    /// Exact `p`-fold composition.
    pub fn compose_power(&self, p: usize, budget: usize) -> Result<PAMap> {
        if p == 0 {
            return Err(Error::invalid("composition power must be positive"));
        }
        let mut acc = self.clone();
        for _ in 1..p {
            acc = self.compose(&acc, budget)?;
        }
        Ok(acc)
    }

    /// Same function with collinear interior nodes removed.
    pub fn simplified(&self) -> PAMap {
        let mut nodes = vec![self.nodes[0].clone()];
        let mut values = vec![self.values[0].clone()];
        for i in 1..self.nodes.len() - 1 {
            let (xp, vp) = (nodes.last().unwrap(), values.last().unwrap());
            let (x, v) = (&self.nodes[i], &self.values[i]);
            let (xn, vn) = (&self.nodes[i + 1], &self.values[i + 1]);
            let left = (v - vp) / (x - xp);
            let right = (vn - v) / (xn - x);
            if left != right {
                nodes.push(x.clone());
                values.push(v.clone());
            }
        }
        nodes.push(self.hi().clone());
        values.push(self.values[self.values.len() - 1].clone());
        PAMap { nodes, values }
    }

    /// True when both maps are the same function (node sets may differ).
    pub fn same_function(&self, other: &PAMap) -> bool {
        self.lo() == other.lo()
            && self.hi() == other.hi()
            && self
                .nodes
                .iter()
                .chain(other.nodes.iter())
                .all(|x| self.eval_unchecked(x) == other.eval_unchecked(x))
    }

    /// `T⁻¹ ∘ self ∘ T` where `T` is the increasing affine map from `[lo, hi]`
    /// onto this map's domain; the result lives on `[lo, hi]`.
    pub fn conjugate_onto(&self, lo: &Rational, hi: &Rational) -> Result<PAMap> {
        if lo >= hi {
            return Err(Error::Degenerate("empty conjugation target".into()));
        }
        let scale = (hi - lo) / (self.hi() - self.lo());
        let back = |y: &Rational| lo + (y - self.lo()) * &scale;
        PAMap::new(
            self.nodes.iter().map(back).collect(),
            self.values.iter().map(back).collect(),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let file = MapFile {
            domain: vec![self.lo().clone(), self.hi().clone()],
            nodes: self.nodes.clone(),
            values: self.values.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MapFile = serde_json::from_str(text)?;
        if file.domain.len() != 2 {
            return Err(Error::invalid("domain must be [lo, hi]"));
        }
        let map = PAMap::new(file.nodes, file.values)?;
        if map.lo() != &file.domain[0] || map.hi() != &file.domain[1] {
            return Err(Error::invalid(
                "first/last node must equal the domain endpoints",
            ));
        }
        Ok(map)
    }
}

impl fmt::Display for PAMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PAMap on [{}, {}] with {} nodes",
            format_rational(self.lo()),
            format_rational(self.hi()),
            self.nodes.len()
        )
    }
}

/// One horseshoe block: `[left, right]` split into `legs` equal legs, each
/// mapped affinely onto the whole block, alternating increasing/decreasing
/// and starting increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HorseshoeBlock {
    pub index: usize,
    pub left: Rational,
    pub right: Rational,
    pub legs: BigUint,
}

impl HorseshoeBlock {
    pub fn new(index: usize, left: Rational, right: Rational, legs: BigUint) -> Result<Self> {
        if left >= right {
            return Err(Error::Degenerate(format!(
                "block {index} has nonpositive width"
            )));
        }
        if legs < BigUint::from(2u32) {
            return Err(Error::invalid(format!(
                "block {index} needs at least 2 legs"
            )));
        }
        Ok(Self {
            index,
            left,
            right,
            legs,
        })
    }

    pub fn width(&self) -> Rational {
        &self.right - &self.left
    }

    /// `ε_k = |I_k| / s_k`, the common leg width.
    pub fn leg_width(&self) -> Rational {
        self.width() / rational::from_biguint(self.legs.clone())
    }

    pub fn legs_u64(&self) -> Option<u64> {
        self.legs.to_u64()
    }

    pub fn ln_legs(&self) -> f64 {
        rational::ln_biguint(&self.legs)
    }

    /// Leg endpoints `left = e_0 < e_1 < … < e_s = right`.
    pub fn leg_endpoints(&self) -> Result<Vec<Rational>> {
        let s = self
            .legs_u64()
            .ok_or_else(|| Error::invalid("too many legs to enumerate"))?;
        let eps = self.leg_width();
        Ok((0..=s).map(|t| &self.left + &eps * int(t as i64)).collect())
    }

    /// The block map itself, on `[left, right]`.
    pub fn to_map(&self) -> Result<PAMap> {
        let nodes = self.leg_endpoints()?;
        let values = (0..nodes.len())
            .map(|t| {
                if t % 2 == 0 {
                    self.left.clone()
                } else {
                    self.right.clone()
                }
            })
            .collect();
        PAMap::new(nodes, values)
    }
}

/// How block widths and leg counts are generated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleRule {
    /// `|I_n| = C / 3^{nr}`, `C = (3^r - 1)/3^r`, `3^{s(n+1)}` legs, `n ≥ 0`.
    PowerLaw { s: u32, r: Rational },
    /// `|I_n| ∝ 1/n²`, `3^{sn}` legs, `n ≥ 1`.
    Quadratic { s: u32 },
    /// `|I_n| ∝ 1/n²`, `(2n+1)^s` legs, `n ≥ 1`.
    OddLegs { s: u32 },
    /// Declared `(width, legs)` pairs, indexed from 1.
    Explicit(Vec<(Rational, BigUint)>),
}

/// A block rule truncated after `truncation` blocks; the rest of `[0, 1]`
/// is left to the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    rule: ScheduleRule,
    truncation: usize,
    /// `1 / Σ_{i ≤ K} i^{-2}` for the quadratic-width rules.
    quadratic_norm: Option<Rational>,
}

impl Schedule {
    pub fn new(rule: ScheduleRule, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::invalid("truncation K must be at least 1"));
        }
        let quadratic_norm = match &rule {
            ScheduleRule::PowerLaw { s, r } => {
                if *s == 0 {
                    return Err(Error::invalid("power law needs s >= 1"));
                }
                if !r.is_positive() {
                    return Err(Error::invalid("power law needs r > 0"));
                }
                None
            }
            ScheduleRule::Quadratic { s } | ScheduleRule::OddLegs { s } => {
                if *s == 0 {
                    return Err(Error::invalid("leg exponent s must be >= 1"));
                }
                let total: Rational = (1..=truncation as i64).map(|i| rat(1, i * i)).sum();
                Some(total.recip())
            }
            ScheduleRule::Explicit(items) => {
                if items.is_empty() {
                    return Err(Error::invalid("explicit schedule is empty"));
                }
                if items.len() != truncation {
                    return Err(Error::invalid(
                        "explicit schedule truncation must equal its length",
                    ));
                }
                let mut total = Rational::zero();
                for (i, (w, s)) in items.iter().enumerate() {
                    if !w.is_positive() {
                        return Err(Error::invalid(format!("block {} width must be > 0", i + 1)));
                    }
                    if *s < BigUint::from(2u32) {
                        return Err(Error::invalid(format!("block {} needs >= 2 legs", i + 1)));
                    }
                    total += w;
                }
                if total > Rational::one() {
                    return Err(Error::Infeasible(format!(
                        "block widths sum to {} > 1",
                        format_rational(&total)
                    )));
                }
                None
            }
        };
        Ok(Self {
            rule,
            truncation,
            quadratic_norm,
        })
    }

    pub fn power_law(s: u32, r: Rational, truncation: usize) -> Result<Self> {
        Self::new(ScheduleRule::PowerLaw { s, r }, truncation)
    }

    pub fn quadratic(s: u32, truncation: usize) -> Result<Self> {
        Self::new(ScheduleRule::Quadratic { s }, truncation)
    }

    pub fn odd_legs(s: u32, truncation: usize) -> Result<Self> {
        Self::new(ScheduleRule::OddLegs { s }, truncation)
    }

    pub fn explicit(items: Vec<(Rational, u64)>) -> Result<Self> {
        let len = items.len();
        Self::new(
            ScheduleRule::Explicit(
                items
                    .into_iter()
                    .map(|(w, s)| (w, BigUint::from(s)))
                    .collect(),
            ),
            len,
        )
    }

    pub fn rule(&self) -> &ScheduleRule {
        &self.rule
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Index of the first block (`I_0` for power laws, `I_1` otherwise).
    pub fn first_index(&self) -> usize {
        match self.rule {
            ScheduleRule::PowerLaw { .. } => 0,
            _ => 1,
        }
    }

    /// Block indices present in the truncated map.
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.first_index()..self.first_index() + self.truncation
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k < self.first_index() {
            return Err(Error::invalid(format!(
                "block index {k} precedes the first block {}",
                self.first_index()
            )));
        }
        if let ScheduleRule::Explicit(items) = &self.rule {
            if k > items.len() {
                return Err(Error::invalid(format!(
                    "explicit schedule has no block {k}"
                )));
            }
        }
        Ok(())
    }

    /// Leg count `s_k`.
    pub fn legs(&self, k: usize) -> Result<BigUint> {
        self.check_index(k)?;
        Ok(match &self.rule {
            ScheduleRule::PowerLaw { s, .. } => rational::pow3(*s as u64 * (k as u64 + 1)),
            ScheduleRule::Quadratic { s } => rational::pow3(*s as u64 * k as u64),
            ScheduleRule::OddLegs { s } => rational::pow_big(2 * k as u64 + 1, *s as u64),
            ScheduleRule::Explicit(items) => items[k - 1].1.clone(),
        })
    }

    /// Exact (or, for fractional `r`, binary-rational) width `|I_k|`.
    pub fn width(&self, k: usize) -> Result<Rational> {
        self.check_index(k)?;
        Ok(match &self.rule {
            ScheduleRule::PowerLaw { r, .. } => {
                let c = Rational::one() - rational::pow3_neg(r)?;
                c * rational::pow3_neg(&(r * int(k as i64)))?
            }
            ScheduleRule::Quadratic { .. } | ScheduleRule::OddLegs { .. } => {
                let k = k as i64;
                self.quadratic_norm.as_ref().expect("normalized") * rat(1, k * k)
            }
            ScheduleRule::Explicit(items) => items[k - 1].0.clone(),
        })
    }

    /// `ln |I_k|` from the analytic rule (no rational rounding).
    pub fn ln_width(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        Ok(match &self.rule {
            ScheduleRule::PowerLaw { r, .. } => {
                let r = rational::to_f64(r);
                (-(3f64.powf(-r))).ln_1p() - k as f64 * r * 3f64.ln()
            }
            ScheduleRule::Quadratic { .. } | ScheduleRule::OddLegs { .. } => {
                rational::ln_abs(self.quadratic_norm.as_ref().expect("normalized"))
                    - 2.0 * (k as f64).ln()
            }
            ScheduleRule::Explicit(items) => rational::ln_abs(&items[k - 1].0),
        })
    }

    /// `ln s_k` from the analytic rule, without forming `s_k`.
    pub fn ln_legs(&self, k: usize) -> Result<f64> {
        self.check_index(k)?;
        let ln3 = 3f64.ln();
        Ok(match &self.rule {
            ScheduleRule::PowerLaw { s, .. } => *s as f64 * (k as f64 + 1.0) * ln3,
            ScheduleRule::Quadratic { s } => *s as f64 * k as f64 * ln3,
            ScheduleRule::OddLegs { s } => *s as f64 * (2.0 * k as f64 + 1.0).ln(),
            ScheduleRule::Explicit(items) => rational::ln_biguint(&items[k - 1].1),
        })
    }

    /// The `K` blocks laid end to end from 0.
    pub fn blocks(&self) -> Result<Vec<HorseshoeBlock>> {
        let mut left = Rational::zero();
        let mut out = Vec::with_capacity(self.truncation);
        for k in self.indices() {
            let right = &left + self.width(k)?;
            out.push(HorseshoeBlock::new(k, left, right.clone(), self.legs(k)?)?);
            left = right;
        }
        if left > Rational::one() {
            return Err(Error::Infeasible(format!(
                "blocks end at {} beyond the domain [0, 1]",
                format_rational(&left)
            )));
        }
        Ok(out)
    }

    pub fn block(&self, k: usize) -> Result<HorseshoeBlock> {
        if !self.indices().contains(&k) {
            return Err(Error::invalid(format!(
                "block {k} is outside the truncated schedule {:?}",
                self.indices()
            )));
        }
        let i = k - self.first_index();
        Ok(self.blocks()?.swap_remove(i))
    }

    /// Short human-readable description.
    pub fn describe(&self) -> String {
        match &self.rule {
            ScheduleRule::PowerLaw { s, r } => format!(
                "power_law(s={s}, r={}) K={}",
                format_rational(r),
                self.truncation
            ),
            ScheduleRule::Quadratic { s } => format!("quadratic(s={s}) K={}", self.truncation),
            ScheduleRule::OddLegs { s } => format!("odd_legs(s={s}) K={}", self.truncation),
            ScheduleRule::Explicit(items) => format!("explicit({} blocks)", items.len()),
        }
    }
}

/// `x ↦ |1 - |3x - 1||` on `[0, 1]`.
pub fn make_tent_g() -> PAMap {
    PAMap::new(
        vec![int(0), rat(1, 3), rat(2, 3), int(1)],
        vec![int(0), int(1), int(0), int(1)],
    )
    .expect("tent is valid")
}

/// Assembles the full-leg horseshoe map of a schedule on `[0, 1]`, identity
/// on the tail `[a_K, 1]`.
pub fn make_schedule_map(schedule: &Schedule, budget: usize) -> Result<PAMap> {
    let blocks = schedule.blocks()?;
    let total_legs: BigUint = blocks.iter().map(|b| b.legs.clone()).sum();
    if total_legs + 2u32 > BigUint::from(budget) {
        return Err(Error::Budget {
            what: "schedule map nodes",
            needed: format!("{}", blocks.iter().map(|b| b.legs.clone()).sum::<BigUint>()),
            budget,
        });
    }
    let end = blocks
        .last()
        .map(|b| b.right.clone())
        .unwrap_or_else(Rational::zero);
    let reaches_end = end == Rational::one();
    let two = BigUint::from(2u32);
    for (i, b) in blocks.iter().enumerate() {
        let odd = &b.legs % &two == BigUint::one();
        let last_to_end = i + 1 == blocks.len() && reaches_end;
        if !odd && !last_to_end {
            return Err(Error::invalid(format!(
                "block {} has an even leg count {}; only odd counts keep the block endpoints fixed",
                b.index, b.legs
            )));
        }
    }

    let mut nodes = vec![Rational::zero()];
    let mut values = vec![Rational::zero()];
    for b in &blocks {
        let m = b.to_map()?;
        nodes.extend(m.nodes[1..].iter().cloned());
        values.extend(m.values[1..].iter().cloned());
    }
    if !reaches_end {
        nodes.push(Rational::one());
        values.push(Rational::one());
    }
    PAMap::new(nodes, values)
}

/// `φ_{s,r}` truncated after `K` blocks.
pub fn make_phi_sr(s: u32, r: Rational, k: usize) -> Result<PAMap> {
    make_schedule_map(&Schedule::power_law(s, r, k)?, rational::default_budget())
}

pub fn make_quadratic_map(s: u32, k: usize) -> Result<PAMap> {
    make_schedule_map(&Schedule::quadratic(s, k)?, rational::default_budget())
}

pub fn make_odd_legs_map(s: u32, k: usize) -> Result<PAMap> {
    make_schedule_map(&Schedule::odd_legs(s, k)?, rational::default_budget())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tent_values() {
        let g = make_tent_g();
        assert_eq!(g.eval(&int(0)).unwrap(), int(0));
        assert_eq!(g.eval(&rat(1, 3)).unwrap(), int(1));
        assert_eq!(g.eval(&rat(1, 2)).unwrap(), rat(1, 2));
        assert_eq!(g.eval(&rat(1, 6)).unwrap(), rat(1, 2));
    }

    #[test]
    fn tent_matches_closed_formula() {
        let g = make_tent_g();
        for i in 0..=60 {
            let x = rat(i, 60);
            let inner = (int(3) * &x - int(1)).abs();
            let expected = (int(1) - inner).abs();
            assert_eq!(g.eval(&x).unwrap(), expected);
        }
    }

    #[test]
    fn orbit_of_fixed_point() {
        let g = make_tent_g();
        assert_eq!(g.orbit(&int(0), 4).unwrap(), vec![int(0); 4]);
    }

    #[test]
    fn eval_outside_domain_fails() {
        let g = make_tent_g();
        assert!(matches!(
            g.eval(&rat(3, 2)),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn phi_11_blocks() {
        let sch = Schedule::power_law(1, int(1), 2).unwrap();
        assert_eq!(sch.width(0).unwrap(), rat(2, 3));
        assert_eq!(sch.width(1).unwrap(), rat(2, 9));
        assert_eq!(sch.legs(0).unwrap(), BigUint::from(3u32));
        assert_eq!(sch.legs(1).unwrap(), BigUint::from(9u32));
        assert_eq!(sch.block(0).unwrap().leg_width(), rat(2, 9));
        let phi = make_phi_sr(1, int(1), 2).unwrap();
        let a1 = rat(2, 3);
        assert_eq!(phi.eval(&a1).unwrap(), a1);
    }

    #[test]
    fn phi_tail_is_identity() {
        let phi = make_phi_sr(1, int(1), 3).unwrap();
        assert_eq!(phi.eval(&int(1)).unwrap(), int(1));
        let a3 = rat(26, 27);
        assert_eq!(phi.eval(&a3).unwrap(), a3);
        assert_eq!(phi.eval(&rat(53, 54)).unwrap(), rat(53, 54));
    }

    #[test]
    fn leg_counts_of_the_other_rules() {
        assert_eq!(
            Schedule::quadratic(1, 3).unwrap().legs(2).unwrap(),
            BigUint::from(9u32)
        );
        assert_eq!(
            Schedule::odd_legs(1, 4).unwrap().legs(3).unwrap(),
            BigUint::from(7u32)
        );
        assert_eq!(
            Schedule::odd_legs(2, 2).unwrap().legs(1).unwrap(),
            BigUint::from(9u32)
        );
    }

    #[test]
    fn quadratic_widths_fill_the_interval() {
        let sch = Schedule::quadratic(1, 5).unwrap();
        let blocks = sch.blocks().unwrap();
        assert_eq!(blocks.last().unwrap().right, int(1));
        let map = make_quadratic_map(1, 5).unwrap();
        assert_eq!(map.hi(), &int(1));
    }

    #[test]
    fn odd_legs_square_is_composition() {
        let psi = make_odd_legs_map(1, 3).unwrap();
        let psi2 = make_odd_legs_map(2, 3).unwrap();
        let composed = psi.compose_power(2, 1_000_000).unwrap();
        assert!(composed.same_function(&psi2));
    }

    #[test]
    fn explicit_schedule_map() {
        let sch = Schedule::explicit(vec![(rat(1, 2), 3), (rat(1, 4), 9)]).unwrap();
        let map = make_schedule_map(&sch, 1000).unwrap();
        assert_eq!(map.node_count(), 1 + 3 + 9 + 1);
        assert_eq!(map.eval(&rat(7, 8)).unwrap(), rat(7, 8));
        assert_eq!(map.eval(&rat(1, 6)).unwrap(), rat(1, 2));
    }

    #[test]
    fn two_leg_tent_allowed_only_when_filling_the_domain() {
        let full = Schedule::explicit(vec![(int(1), 2)]).unwrap();
        let map = make_schedule_map(&full, 100).unwrap();
        assert_eq!(map.values(), &[int(0), int(1), int(0)]);
        let partial = Schedule::explicit(vec![(rat(1, 2), 2)]).unwrap();
        assert!(make_schedule_map(&partial, 100).is_err());
    }

    #[test]
    fn oversized_schedules_rejected() {
        assert!(Schedule::explicit(vec![(rat(3, 4), 3), (rat(1, 2), 3)]).is_err());
        assert!(Schedule::power_law(1, int(0), 3).is_err());
        assert!(Schedule::power_law(0, int(1), 3).is_err());
    }

    #[test]
    fn power_law_matches_phi_sr_node_for_node() {
        let sch = Schedule::power_law(1, int(1), 3).unwrap();
        let a = make_schedule_map(&sch, 10_000).unwrap();
        let b = make_phi_sr(1, int(1), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn compose_power_of_tent() {
        let g = make_tent_g();
        assert_eq!(g.compose_power(1, 100).unwrap(), g);
        let g2 = g.compose_power(2, 100).unwrap();
        let nine = HorseshoeBlock::new(0, int(0), int(1), BigUint::from(9u32))
            .unwrap()
            .to_map()
            .unwrap();
        assert_eq!(g2, nine);
        for i in 0..=270 {
            let x = rat(i, 270);
            let twice = g.eval(&g.eval(&x).unwrap()).unwrap();
            assert_eq!(g2.eval(&x).unwrap(), twice);
        }
    }

    #[test]
    fn compose_power_of_identity() {
        let id = PAMap::identity(int(0), int(1)).unwrap();
        assert_eq!(id.compose_power(5, 10).unwrap(), id);
    }

    #[test]
    fn compose_budget_guard() {
        let g = make_tent_g();
        assert!(matches!(g.compose_power(6, 100), Err(Error::Budget { .. })));
    }

    #[test]
    fn image_uses_interior_nodes() {
        let g = make_tent_g();
        assert_eq!(g.image(&int(0), &rat(1, 9)).unwrap(), (int(0), rat(1, 3)));
        assert_eq!(
            g.image(&rat(1, 6), &rat(1, 2)).unwrap(),
            (rat(1, 2), int(1))
        );
        assert_eq!(g.image(&int(0), &int(1)).unwrap(), (int(0), int(1)));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let phi = make_phi_sr(1, rat(1, 2), 3).unwrap();
        let text = phi.to_json().unwrap();
        assert!(text.contains("\"domain\""));
        let back = PAMap::from_json(&text).unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn rejects_non_self_maps_and_unsorted_nodes() {
        assert!(PAMap::new(vec![int(0), int(1)], vec![int(0), int(2)]).is_err());
        assert!(PAMap::new(vec![int(1), int(0)], vec![int(0), int(0)]).is_err());
    }

    #[test]
    fn simplified_drops_collinear_nodes() {
        let m = PAMap::new(
            vec![int(0), rat(1, 2), int(1)],
            vec![int(0), rat(1, 2), int(1)],
        )
        .unwrap();
        assert_eq!(m.simplified().node_count(), 2);
        assert!(m.simplified().same_function(&m));
    }
}
