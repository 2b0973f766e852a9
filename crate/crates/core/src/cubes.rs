//! Horseshoes on cubes under the max metric, and nested-cube maps built from
//! them.
//!
//! A block on `E = [a, b]^m` with leg parameter `κ` cuts `[a, b]` into
//! `4κ + 1` cells of width `δ`. The `x_1` axis is cut into
//! `2(2κ+1)^{m-1} − 1` vertical slabs. Odd slabs map affinely onto the
//! horizontal boxes `H_i = [a, b] × Π cell(i_j)` with odd `i`. `x_1` is
//! stretched with alternating orientation and the other coordinates are
//! contracted. Even slabs leave `E` through a tent-shaped bump.
//!
//! Dimension quantities are measured for `Φ = φ²`: `ρ_n` looks at
//! `Φ`-times `0, …, n−1`.

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{Cover, CoverElement};
use crate::rational::{self, format_rational, int, Rational};
use crate::surgery::{Condition, Refusal};

/// `max_i |x_i − y_i|`.
pub fn rho_distance(x: &[Rational], y: &[Rational]) -> Result<Rational> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .max()
        .unwrap_or_else(Rational::zero))
}

/// One `m`-dimensional `(2κ+1)^{m-1}`-horseshoe on `[lo, hi]^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeBlock {
    m: usize,
    kappa: u64,
    lo: Rational,
    hi: Rational,
    grid: Vec<Rational>,
    slabs: Vec<Rational>,
    /// Cell multi-index (odd, 1-based, length `m−1`) for each odd slab.
    legs: Vec<Vec<usize>>,
    /// Leg images are the `H` boxes dilated by `1 + inflation` about their
    /// centres; 0 gives the exact horseshoe.
    inflation: Rational,
    /// How far even slabs push `x_1` outside `E` at their midpoint.
    escape: Rational,
}

/// Builds the block with legs onto the exact `H` boxes.
pub fn make_cube_block(m: usize, kappa: u64, lo: Rational, hi: Rational) -> Result<CubeBlock> {
    CubeBlock::new(
        m,
        kappa,
        lo,
        hi,
        Rational::zero(),
        rational::default_budget(),
    )
}

impl CubeBlock {
    pub fn new(
        m: usize,
        kappa: u64,
        lo: Rational,
        hi: Rational,
        inflation: Rational,
        budget: usize,
    ) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid("cube blocks need m >= 2"));
        }
        if kappa == 0 {
            return Err(Error::invalid("leg parameter must be at least 1"));
        }
        if lo >= hi {
            return Err(Error::Degenerate("empty cube".into()));
        }
        if inflation.is_negative() {
            return Err(Error::invalid("inflation must be >= 0"));
        }
        let per_axis = 2 * kappa + 1;
        let leg_count = num_traits::pow(BigUint::from(per_axis), m - 1);
        let legs_n = leg_count
            .to_usize()
            .filter(|&c| c <= budget)
            .ok_or_else(|| Error::Budget {
                what: "cube legs",
                needed: leg_count.to_string(),
                budget,
            })?;
        let cells = 4 * kappa + 1;
        let side = &hi - &lo;
        let delta = &side / int(cells as i64);
        let grid: Vec<Rational> = (0..=cells)
            .map(|i| {
                if i == cells {
                    hi.clone()
                } else {
                    &lo + &delta * int(i as i64)
                }
            })
            .collect();

        let slab_count = 2 * legs_n - 1;
        let narrow = 4 * kappa as usize;
        let rest = slab_count - narrow;
        let wide = &delta / int(rest as i64);
        let mut slabs = Vec::with_capacity(slab_count + 1);
        slabs.push(lo.clone());
        for l in 1..=slab_count {
            let next = if l == slab_count {
                hi.clone()
            } else if l <= narrow {
                &lo + &delta * int(l as i64)
            } else {
                slabs[l - 1].clone() + &wide
            };
            slabs.push(next);
        }

        // odd multi-indices in lexicographic order, with the two corner legs
        // moved to the ends so the corners stay fixed
        let odd: Vec<usize> = (1..=cells as usize).step_by(2).collect();
        let mut all: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..m - 1 {
            all = all
                .into_iter()
                .flat_map(|p| {
                    odd.iter().map(move |&i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        let top = cells as usize;
        let mut first = vec![1; m - 1];
        first[m - 2] = top;
        let mut last = vec![top; m - 1];
        last[m - 2] = 1;
        let mut legs = vec![first.clone()];
        legs.extend(all.into_iter().filter(|p| *p != first && *p != last));
        legs.push(last);

        let escape = &side / int(2);
        Ok(Self {
            m,
            kappa,
            lo,
            hi,
            grid,
            slabs,
            legs,
            inflation,
            escape,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kappa(&self) -> u64 {
        self.kappa
    }

    pub fn bounds(&self) -> (&Rational, &Rational) {
        (&self.lo, &self.hi)
    }

    pub fn side(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn grid(&self) -> &[Rational] {
        &self.grid
    }

    pub fn slabs(&self) -> &[Rational] {
        &self.slabs
    }

    pub fn leg_assignment(&self) -> &[Vec<usize>] {
        &self.legs
    }

    pub fn leg_count(&self) -> usize {
        self.legs.len()
    }

    pub fn slab_count(&self) -> usize {
        self.slabs.len() - 1
    }

    /// Cell width `δ = |E|/(4κ+1)`, which is also the cylinder diameter.
    pub fn cell_width(&self) -> Rational {
        self.side() / int(4 * self.kappa as i64 + 1)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.m && x.iter().all(|c| c >= &self.lo && c <= &self.hi)
    }

    /// The `H` box of leg `q` (before inflation).
    pub fn h_box(&self, q: usize) -> (Vec<Rational>, Vec<Rational>) {
        let mut lo = vec![self.lo.clone()];
        let mut hi = vec![self.hi.clone()];
        for &i in &self.legs[q] {
            lo.push(self.grid[i - 1].clone());
            hi.push(self.grid[i].clone());
        }
        (lo, hi)
    }

    /// The box leg `q` maps onto: the `H` box dilated by `1 + inflation`.
    fn target_box(&self, q: usize) -> (Vec<Rational>, Vec<Rational>) {
        let (lo, hi) = self.h_box(q);
        let half = &self.inflation / int(2);
        lo.into_iter()
            .zip(hi)
            .map(|(l, h)| {
                let pad = (&h - &l) * &half;
                (l - &pad, h + pad)
            })
            .unzip()
    }

    /// 1-based slab containing `x1` (the left one on a boundary).
    fn slab_of(&self, x1: &Rational) -> usize {
        self.slabs
            .partition_point(|s| s < x1)
            .clamp(1, self.slab_count())
    }

    /// Leg `q` applied to `x`, extended affinely beyond its slab.
    fn leg_apply(&self, q: usize, x: &[Rational]) -> Vec<Rational> {
        let l = 2 * q + 1;
        let (s0, s1) = (&self.slabs[l - 1], &self.slabs[l]);
        let (tlo, thi) = self.target_box(q);
        let t = (&x[0] - s0) / (s1 - s0);
        let mut out = Vec::with_capacity(self.m);
        out.push(if q.is_multiple_of(2) {
            &tlo[0] + (&thi[0] - &tlo[0]) * &t
        } else {
            &thi[0] - (&thi[0] - &tlo[0]) * &t
        });
        let side = self.side();
        for j in 1..self.m {
            let u = (&x[j] - &self.lo) / &side;
            out.push(&tlo[j] + (&thi[j] - &tlo[j]) * u);
        }
        out
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if !self.contains(x) {
            return Err(Error::OutsideDomain {
                point: format!("{:?}", x.iter().map(format_rational).collect::<Vec<_>>()),
                lo: format_rational(&self.lo),
                hi: format_rational(&self.hi),
            });
        }
        let l = self.slab_of(&x[0]);
        if l % 2 == 1 {
            return Ok(self.leg_apply((l - 1) / 2, x));
        }
        let (s0, s1) = (&self.slabs[l - 1], &self.slabs[l]);
        let t = (&x[0] - s0) / (s1 - s0);
        let mut left_face = x.to_vec();
        left_face[0] = s0.clone();
        let mut right_face = x.to_vec();
        right_face[0] = s1.clone();
        let left = self.leg_apply((l - 2) / 2, &left_face);
        let right = self.leg_apply(l / 2, &right_face);
        let e = left[0].clone();
        let bump = Rational::one() - (int(2) * &t - int(1)).abs();
        let outward = if int(2) * &e >= &self.lo + &self.hi {
            Rational::one()
        } else {
            -Rational::one()
        };
        let mut out = vec![e + outward * &self.escape * bump];
        let s = Rational::one() - &t;
        for j in 1..self.m {
            out.push(&left[j] * &s + &right[j] * &t);
        }
        Ok(out)
    }

    /// Image of a box lying inside one odd slab, where the map is affine.
    fn box_image(
        &self,
        lo: &[Rational],
        hi: &[Rational],
    ) -> Result<(Vec<Rational>, Vec<Rational>)> {
        let mid = (&lo[0] + &hi[0]) / int(2);
        let l = self.slab_of(&mid);
        if l.is_multiple_of(2) || hi[0] > self.slabs[l] || lo[0] < self.slabs[l - 1] {
            return Err(Error::NotAffine(format!(
                "box [{}, {}] in x1 is not inside one leg",
                format_rational(&lo[0]),
                format_rational(&hi[0])
            )));
        }
        let q = (l - 1) / 2;
        let a = self.leg_apply(q, lo);
        let b = self.leg_apply(q, hi);
        Ok(a.into_iter()
            .zip(b)
            .map(|(u, v)| if u <= v { (u, v) } else { (v, u) })
            .unzip())
    }

    /// Exact image of the odd slab of leg `q`.
    pub fn leg_image(&self, q: usize) -> Result<(Vec<Rational>, Vec<Rational>)> {
        if q >= self.leg_count() {
            return Err(Error::invalid(format!("no leg {q}")));
        }
        let mut lo = vec![self.lo.clone(); self.m];
        let mut hi = vec![self.hi.clone(); self.m];
        lo[0] = self.slabs[2 * q].clone();
        hi[0] = self.slabs[2 * q + 1].clone();
        self.box_image(&lo, &hi)
    }

    /// `ρ_n`-diameter of a box under `Φ = φ²`. The box must stay inside
    /// legs up to `φ`-time `2n − 2`.
    pub fn rho_diameter(&self, lo: &[Rational], hi: &[Rational], n: usize) -> Result<Rational> {
        if n == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        let side = |lo: &[Rational], hi: &[Rational]| {
            lo.iter()
                .zip(hi)
                .map(|(a, b)| b - a)
                .max()
                .unwrap_or_else(Rational::zero)
        };
        let (mut l, mut h) = (lo.to_vec(), hi.to_vec());
        let mut diam = side(&l, &h);
        for step in 1..=2 * (n - 1) {
            let (nl, nh) = self.box_image(&l, &h)?;
            l = nl;
            h = nh;
            if step % 2 == 0 {
                let d = side(&l, &h);
                if d > diam {
                    diam = d;
                }
            }
        }
        Ok(diam)
    }

    /// Intervals of `x_1` that stay in odd slabs for `level − 1` steps,
    /// left to right.
    fn x1_cylinders(&self, level: usize, budget: usize) -> Result<Vec<(Rational, Rational)>> {
        let odd: Vec<(Rational, Rational)> = (0..self.leg_count())
            .map(|q| (self.slabs[2 * q].clone(), self.slabs[2 * q + 1].clone()))
            .collect();
        let mut current = odd.clone();
        for _ in 1..level {
            let mut next = Vec::with_capacity(current.len() * odd.len());
            for (q, (s0, s1)) in odd.iter().enumerate() {
                let (tlo, thi) = self.target_box(q);
                let scale = (s1 - s0) / (&thi[0] - &tlo[0]);
                let mut pulled: Vec<(Rational, Rational)> = current
                    .iter()
                    .map(|(u, v)| {
                        if q % 2 == 0 {
                            (s0 + (u - &tlo[0]) * &scale, s0 + (v - &tlo[0]) * &scale)
                        } else {
                            (s0 + (&thi[0] - v) * &scale, s0 + (&thi[0] - u) * &scale)
                        }
                    })
                    .collect();
                if q % 2 == 1 {
                    pulled.reverse();
                }
                next.extend(pulled);
                if next.len() > budget {
                    return Err(Error::Budget {
                        what: "cube cylinders",
                        needed: format!("more than {}", next.len()),
                        budget,
                    });
                }
            }
            current = next;
        }
        Ok(current)
    }
}

/// Closed-form count `(2κ+1)^{nm}` (`3^{knm}` when `2κ+1 = 3^k`).
pub fn cube_cylinder_count(block: &CubeBlock, n: usize) -> BigUint {
    num_traits::pow(BigUint::from(2 * block.kappa + 1), n * block.m)
}

/// The stage-`n` cylinders of the block: an `x_1` interval that stays in the
/// legs through `φ`-time `2n − 2`, times an odd cell box in the other
/// coordinates. Every box has `ρ_n`-diameter `δ`. There are
/// `(2κ+1)^{2n(m-1)}` of them, which agrees with [`cube_cylinder_count`]
/// for `m = 2`.
pub fn cube_cylinders(
    block: &CubeBlock,
    n: usize,
    budget: usize,
) -> Result<Vec<(Vec<Rational>, Vec<Rational>)>> {
    if n == 0 {
        return Err(Error::invalid("stage n must be at least 1"));
    }
    let total = num_traits::pow(BigUint::from(block.leg_count()), 2 * n);
    if total > BigUint::from(budget) {
        return Err(Error::Budget {
            what: "cube cylinders",
            needed: total.to_string(),
            budget,
        });
    }
    let strips = block.x1_cylinders(2 * n - 1, budget)?;
    let mut cells: Vec<&Vec<usize>> = block.legs.iter().collect();
    cells.sort();
    let mut out = Vec::with_capacity(strips.len() * cells.len());
    for (u, v) in &strips {
        for idx in &cells {
            let mut lo = vec![u.clone()];
            let mut hi = vec![v.clone()];
            for &i in idx.iter() {
                lo.push(block.grid[i - 1].clone());
                hi.push(block.grid[i].clone());
            }
            out.push((lo, hi));
        }
    }
    Ok(out)
}

/// The cylinders as a cover with exact `ρ_n`-diameters.
pub fn cube_cylinder_cover(block: &CubeBlock, n: usize, budget: usize) -> Result<Cover> {
    let boxes = cube_cylinders(block, n, budget)?;
    let mut elements = Vec::with_capacity(boxes.len());
    for (lo, hi) in boxes {
        let diameter = block.rho_diameter(&lo, &hi, n)?;
        elements.push(CoverElement { lo, hi, diameter });
    }
    Ok(Cover::new(elements))
}

/// Size rule for the nested blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CubeRule {
    /// `|E_k| = B / 3^{kr}`.
    PowerLaw { r: Rational },
    /// `|E_k| = B / k²`.
    Quadratic,
}

impl CubeRule {
    pub fn describe(&self) -> String {
        match self {
            CubeRule::PowerLaw { r } => format!("power:r={}", format_rational(r)),
            CubeRule::Quadratic => "quadratic".into(),
        }
    }

    /// `ln |E_k|`.
    pub fn ln_side(&self, b: &Rational, k: usize) -> f64 {
        let ln_b = rational::ln_abs(b);
        match self {
            CubeRule::PowerLaw { r } => ln_b - k as f64 * rational::to_f64(r) * 3f64.ln(),
            CubeRule::Quadratic => ln_b - 2.0 * (k as f64).ln(),
        }
    }

    pub fn side(&self, b: &Rational, k: usize) -> Result<Rational> {
        Ok(match self {
            CubeRule::PowerLaw { r } => b * rational::pow3_neg(&(r * int(k as i64)))?,
            CubeRule::Quadratic => b / int((k * k) as i64),
        })
    }
}

/// `ln 3^{knm} / ln((2·3^k − 1)/|E_k|)`, the stage-`n` value of block `k`.
pub fn cube_stage_dimension(
    rule: &CubeRule,
    b: &Rational,
    m: usize,
    k: usize,
    n: usize,
) -> Result<f64> {
    if k == 0 || n == 0 || m == 0 {
        return Err(Error::invalid("m, k and n must be positive"));
    }
    if !b.is_positive() {
        return Err(Error::invalid("B must be positive"));
    }
    let ln3 = 3f64.ln();
    // ln(2·3^k − 1) without overflow
    let ln_cells = k as f64 * ln3 + (2.0 - 3f64.powi(-(k.min(600) as i32))).ln();
    let denom = ln_cells - rule.ln_side(b, k);
    if denom <= 0.0 {
        return Err(Error::Degenerate(format!("block {k} has ε_k >= 1")));
    }
    Ok((k * n * m) as f64 * ln3 / denom)
}

/// `m/(1+r)` for power laws, `m` for the quadratic rule.
pub fn cube_limit(rule: &CubeRule, m: usize) -> Rational {
    let m = int(m as i64);
    match rule {
        CubeRule::PowerLaw { r } => &m / (Rational::one() + r),
        CubeRule::Quadratic => m,
    }
}

/// A block with its enclosing cube `E' ⊃ E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacedBlock {
    pub k: usize,
    pub block: CubeBlock,
    pub outer_lo: Rational,
    pub outer_hi: Rational,
}

impl PlacedBlock {
    pub fn outer_contains(&self, x: &[Rational]) -> bool {
        x.iter().all(|c| c >= &self.outer_lo && c <= &self.outer_hi)
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if self.block.contains(x) {
            self.block.eval(x)
        } else {
            extend_identity_boundary(&self.block, (&self.outer_lo, &self.outer_hi), x)
        }
    }
}

/// Value at `x ∈ E' \ E` of the radial interpolation between `φ` on `∂E`
/// and the identity on `∂E'`. Along each ray from the centre, the point a
/// fraction `t` of the way from `∂E` to `∂E'` maps to the same fraction
/// between `φ(y)` and `z`, where `y ∈ ∂E` and `z ∈ ∂E'` lie on that ray.
pub fn extend_identity_boundary(
    block: &CubeBlock,
    outer: (&Rational, &Rational),
    x: &[Rational],
) -> Result<Vec<Rational>> {
    let (olo, ohi) = outer;
    let (lo, hi) = block.bounds();
    if !(olo < lo && hi < ohi) {
        return Err(Error::Infeasible("E must lie in the interior of E'".into()));
    }
    let two = int(2);
    let c = (lo + hi) / &two;
    if (ohi - &c) != (&c - olo) {
        return Err(Error::invalid("E and E' must be concentric"));
    }
    if x.len() != block.m() || x.iter().any(|v| v < olo || v > ohi) {
        return Err(Error::invalid("point is outside E'"));
    }
    let r_in = block.side() / &two;
    let r_out = ohi - &c;
    let r = x.iter().map(|v| (v - &c).abs()).max().expect("m >= 2");
    if r < r_in {
        return Err(Error::invalid("point is inside E"));
    }
    let y: Vec<Rational> = x.iter().map(|v| &c + (v - &c) * &r_in / &r).collect();
    let z: Vec<Rational> = x.iter().map(|v| &c + (v - &c) * &r_out / &r).collect();
    let t = (&r - &r_in) / (&r_out - &r_in);
    let fy = block.eval(&y)?;
    let s = Rational::one() - &t;
    Ok(fy.iter().zip(&z).map(|(u, w)| u * &s + w * &t).collect())
}

/// Nested blocks on `[0, 1]^m`, identity off the enclosing cubes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeMap {
    pub m: usize,
    pub rule: CubeRule,
    pub b: Rational,
    pub blocks: Vec<PlacedBlock>,
}

#[derive(Serialize)]
struct BlockFile {
    k: usize,
    kappa: u64,
    #[serde(with = "rational::serde_vec")]
    bounds: Vec<Rational>,
    #[serde(with = "rational::serde_vec")]
    outer: Vec<Rational>,
    leg_assignment: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct CubeFile {
    m: usize,
    rule: String,
    #[serde(rename = "B", with = "rational::serde_str")]
    b: Rational,
    blocks: Vec<BlockFile>,
}

impl CubeMap {
    pub fn eval(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: x.len(),
            });
        }
        if x.iter().any(|v| v.is_negative() || v > &Rational::one()) {
            return Err(Error::invalid("point is outside the unit cube"));
        }
        for p in &self.blocks {
            if p.outer_contains(x) {
                return p.eval(x);
            }
        }
        Ok(x.to_vec())
    }

    pub fn block(&self, k: usize) -> Result<&PlacedBlock> {
        self.blocks
            .iter()
            .find(|p| p.k == k)
            .ok_or_else(|| Error::invalid(format!("no block {k}")))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CubeFile {
            m: self.m,
            rule: self.rule.describe(),
            b: self.b.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|p| BlockFile {
                    k: p.k,
                    kappa: p.block.kappa(),
                    bounds: vec![p.block.lo.clone(), p.block.hi.clone()],
                    outer: vec![p.outer_lo.clone(), p.outer_hi.clone()],
                    leg_assignment: p.block.legs.clone(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

/// Blocks `k = 1..=K` with `2κ+1 = 3^k` legs per axis, each `E_k` centred in
/// an `E'_k` of three times its side, laid corner to corner along the
/// diagonal from the origin.
pub fn make_nested_cube_map(
    m: usize,
    rule: CubeRule,
    b: Rational,
    blocks: usize,
) -> Result<CubeMap> {
    if blocks == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    if !b.is_positive() {
        return Err(Error::invalid("B must be positive"));
    }
    if let CubeRule::PowerLaw { r } = &rule {
        if !r.is_positive() {
            return Err(Error::invalid("r must be positive"));
        }
    }
    let budget = rational::default_budget();
    let mut cursor = Rational::zero();
    let mut placed = Vec::with_capacity(blocks);
    for k in 1..=blocks {
        let side = rule.side(&b, k)?;
        let outer_hi = &cursor + &side * int(3);
        if outer_hi > Rational::one() {
            return Err(Error::Infeasible(format!(
                "block {k} does not fit: enclosing cubes reach {}",
                format_rational(&outer_hi)
            )));
        }
        let lo = &cursor + &side;
        let hi = &lo + &side;
        let kappa = (rational::pow3(k as u64) - 1u32) / 2u32;
        let kappa = kappa
            .to_u64()
            .ok_or_else(|| Error::invalid("leg parameter overflows"))?;
        let block = CubeBlock::new(m, kappa, lo, hi, Rational::zero(), budget)?;
        placed.push(PlacedBlock {
            k,
            block,
            outer_lo: cursor.clone(),
            outer_hi: outer_hi.clone(),
        });
        cursor = outer_hi;
    }
    Ok(CubeMap {
        m,
        rule,
        b,
        blocks: placed,
    })
}

/// Per-leg containment data of a strong cube horseshoe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CubeCert {
    #[serde(with = "rational::serde_vec")]
    pub margins: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub margin: Rational,
}

/// Checks `|E| > ε` and `H_i ⊂ interior φ(V_l)` for every odd slab, with
/// exact margins.
pub fn is_strong_cube_horseshoe(
    block: &CubeBlock,
    eps: &Rational,
) -> Result<std::result::Result<CubeCert, Refusal>> {
    let size = block.side() - eps;
    if !size.is_positive() {
        return Ok(Err(Refusal {
            condition: Condition::Size,
            margin: size,
            leg: None,
            detail: format!("|E| is not > ε = {}", format_rational(eps)),
        }));
    }
    let mut margins = Vec::with_capacity(block.leg_count());
    for q in 0..block.leg_count() {
        let (ilo, ihi) = block.leg_image(q)?;
        let (hlo, hhi) = block.h_box(q);
        let margin = (0..block.m)
            .map(|j| rational::min_q(&(&hlo[j] - &ilo[j]), &(&ihi[j] - &hhi[j])).clone())
            .min()
            .expect("m >= 2");
        if !margin.is_positive() {
            return Ok(Err(Refusal {
                condition: Condition::Containment,
                margin,
                leg: Some(q),
                detail: format!("H box of leg {q} is not inside the interior of φ(V)"),
            }));
        }
        margins.push(margin);
    }
    let margin = margins.iter().min().cloned().expect("at least one leg");
    Ok(Ok(CubeCert { margins, margin }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::cover_critical_exponent;
    use crate::rational::rat;

    const B: usize = 1_000_000;

    fn unit_block(m: usize, kappa: u64) -> CubeBlock {
        make_cube_block(m, kappa, int(0), int(1)).unwrap()
    }

    #[test]
    fn rho_examples() {
        assert_eq!(
            rho_distance(&[int(0), int(0)], &[rat(1, 3), rat(1, 9)]).unwrap(),
            rat(1, 3)
        );
        assert_eq!(rho_distance(&[rat(1, 2)], &[rat(1, 2)]).unwrap(), int(0));
        assert!(rho_distance(&[int(0)], &[int(0), int(1)]).is_err());
    }

    #[test]
    fn block_shapes() {
        let b = unit_block(2, 1);
        assert_eq!(b.leg_count(), 3);
        assert_eq!(b.slab_count(), 5);
        assert_eq!(b.leg_assignment(), &[vec![5], vec![3], vec![1]]);
        let b3 = unit_block(3, 1);
        assert_eq!(b3.leg_count(), 9);
        assert_eq!(b3.slab_count(), 17);
        let w = b3.slabs();
        for l in 1..=4 {
            assert_eq!(&w[l] - &w[l - 1], rat(1, 5));
        }
        assert_eq!(&w[17] - &w[16], rat(1, 5) / int(13));
        assert_eq!(w[17], int(1));
    }

    #[test]
    fn corners_are_fixed() {
        for m in 2..=3 {
            let b = unit_block(m, 1);
            let mut c1 = vec![int(0); m];
            c1[m - 1] = int(1);
            assert_eq!(b.eval(&c1).unwrap(), c1);
            let mut c2 = vec![int(1); m];
            c2[m - 1] = int(0);
            assert_eq!(b.eval(&c2).unwrap(), c2);
        }
    }

    #[test]
    fn odd_slabs_map_onto_h_boxes() {
        let b = unit_block(3, 1);
        for q in 0..b.leg_count() {
            assert_eq!(b.leg_image(q).unwrap(), b.h_box(q));
        }
    }

    #[test]
    fn even_slabs_leave_the_cube() {
        let b = unit_block(2, 1);
        for l in [2usize, 4] {
            let mid = (&b.slabs()[l - 1] + &b.slabs()[l]) / int(2);
            for y in [int(0), rat(1, 3), int(1)] {
                let v = b.eval(&[mid.clone(), y]).unwrap();
                assert!(v[0] < int(0) || v[0] > int(1));
            }
        }
    }

    #[test]
    fn block_map_is_continuous_across_slabs() {
        let b = unit_block(2, 1);
        for s in &b.slabs()[1..b.slab_count()] {
            for y in [int(0), rat(2, 7), int(1)] {
                let tiny = rat(1, 1_000_000_000);
                let left = b.eval(&[s - &tiny, y.clone()]).unwrap();
                let right = b.eval(&[s + &tiny, y.clone()]).unwrap();
                assert!(rho_distance(&left, &right).unwrap() < rat(1, 1_000_000));
            }
        }
    }

    #[test]
    fn cylinder_counts_and_diameters() {
        let b = unit_block(2, 1);
        assert_eq!(cube_cylinder_count(&b, 1), BigUint::from(9u32));
        assert_eq!(
            cube_cylinder_count(&unit_block(3, 1), 1),
            BigUint::from(27u32)
        );
        let cover = cube_cylinder_cover(&b, 2, B).unwrap();
        assert_eq!(cover.len(), 81);
        assert_eq!(cover.uniform_diameter(), Some(&rat(1, 5)));
        let n1 = cube_cylinders(&b, 1, B).unwrap();
        assert_eq!(n1.len(), 9);
    }

    #[test]
    fn enumerated_exponent_matches_formula() {
        let map = make_nested_cube_map(2, CubeRule::PowerLaw { r: int(1) }, rat(1, 2), 2).unwrap();
        let block = &map.block(1).unwrap().block;
        assert_eq!(block.side(), rat(1, 6));
        for n in 1..=2 {
            let cover = cube_cylinder_cover(block, n, B).unwrap();
            let got = cover_critical_exponent(&cover);
            let want = cube_stage_dimension(&map.rule, &map.b, 2, 1, n).unwrap();
            assert!((got - want).abs() < 1e-9, "{got} {want}");
        }
    }

    #[test]
    fn stage_values() {
        let rule = CubeRule::PowerLaw { r: int(1) };
        let v = cube_stage_dimension(&rule, &int(1), 2, 10, 1).unwrap();
        let want = 20.0 * 3f64.ln() / ((2.0 * 3f64.powi(10) - 1.0).ln() + 10.0 * 3f64.ln());
        assert!((v - want).abs() < 1e-12);
        assert!((v - 0.969).abs() < 1e-3);
        assert_eq!(cube_limit(&rule, 2), int(1));
        assert_eq!(cube_limit(&CubeRule::Quadratic, 3), int(3));
        let q = cube_stage_dimension(&CubeRule::Quadratic, &rat(1, 5), 2, 400, 1).unwrap();
        assert!(q > 1.93 && q < 2.0, "{q}");
    }

    #[test]
    fn nested_map_layout() {
        let map = make_nested_cube_map(2, CubeRule::PowerLaw { r: int(1) }, rat(1, 2), 3).unwrap();
        for (p, k) in map.blocks.iter().zip(1..) {
            assert_eq!(p.block.side(), rat(1, 2) / int(3i64.pow(k)));
            assert_eq!(p.block.leg_count(), 3usize.pow(k));
        }
        assert_eq!(
            map.eval(&[rat(99, 100), rat(1, 100)]).unwrap(),
            vec![rat(99, 100), rat(1, 100)]
        );
        assert!(make_nested_cube_map(2, CubeRule::Quadratic, int(1), 3).is_err());
        let q = make_nested_cube_map(2, CubeRule::Quadratic, rat(1, 5), 3).unwrap();
        assert_eq!(q.blocks[1].block.side(), rat(1, 20));
        assert!(map.to_json().unwrap().contains("\"leg_assignment\""));
    }

    #[test]
    fn annulus_extension() {
        let map = make_nested_cube_map(2, CubeRule::PowerLaw { r: int(1) }, rat(1, 2), 1).unwrap();
        let p = &map.blocks[0];
        let (olo, ohi) = (&p.outer_lo, &p.outer_hi);
        // identity on the outer boundary
        for i in 0..=20 {
            let t = olo + (ohi - olo) * rat(i, 20);
            for x in [vec![t.clone(), olo.clone()], vec![ohi.clone(), t.clone()]] {
                assert_eq!(p.eval(&x).unwrap(), x);
            }
        }
        // agreement with the block on the inner boundary
        let (lo, hi) = p.block.bounds();
        for i in 0..=20 {
            let t = lo + (hi - lo) * rat(i, 20);
            let x = vec![t, lo.clone()];
            assert_eq!(
                extend_identity_boundary(&p.block, (olo, ohi), &x).unwrap(),
                p.block.eval(&x).unwrap()
            );
        }
        // images stay in E'
        for i in 0..=12 {
            for j in 0..=12 {
                let x = vec![
                    olo + (ohi - olo) * rat(i, 12),
                    olo + (ohi - olo) * rat(j, 12),
                ];
                let v = p.eval(&x).unwrap();
                assert!(p.outer_contains(&v));
            }
        }
    }

    #[test]
    fn strong_cube_detector() {
        let map = make_nested_cube_map(2, CubeRule::PowerLaw { r: int(1) }, rat(1, 2), 1).unwrap();
        let block = &map.blocks[0].block;
        let r = is_strong_cube_horseshoe(block, &rat(1, 100))
            .unwrap()
            .unwrap_err();
        assert_eq!((r.condition, r.margin), (Condition::Containment, int(0)));
        let inflated = CubeBlock::new(2, 1, int(0), int(1), rat(1, 10), B).unwrap();
        let cert = is_strong_cube_horseshoe(&inflated, &rat(1, 2))
            .unwrap()
            .unwrap();
        assert_eq!(cert.margin, rat(1, 100));
        let r = is_strong_cube_horseshoe(&inflated, &int(1))
            .unwrap()
            .unwrap_err();
        assert_eq!(r.condition, Condition::Size);
    }
}
