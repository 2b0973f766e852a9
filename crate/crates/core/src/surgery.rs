//! Strong horseshoes and local surgery near a fixed point.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps1d::{make_schedule_map, PAMap, Schedule};
use crate::rational::{self, format_rational, int, Rational};
use crate::symbolic;

/// `[(2a+b)/3, (a+2b)/3]`.
pub fn middle_third(a: &Rational, b: &Rational) -> Result<(Rational, Rational)> {
    if a >= b {
        return Err(Error::Degenerate(format!(
            "[{}, {}] has no middle third",
            format_rational(a),
            format_rational(b)
        )));
    }
    let three = int(3);
    Ok(((int(2) * a + b) / &three, (a + int(2) * b) / &three))
}

/// The four defining conditions, in the order they are checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `|J| > ε`.
    Size,
    /// exactly `k` legs inside `J` with pairwise disjoint interiors
    Legs,
    /// `|J_i| > |J|/(2k)`.
    LegWidth,
    /// `J ⊂ interior of φ(Ĵ_i)`.
    Containment,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Size => "size",
            Condition::Legs => "legs",
            Condition::LegWidth => "leg-width",
            Condition::Containment => "containment",
        })
    }
}

/// Why a candidate is not a strong horseshoe. The condition holds exactly
/// when `margin > 0` (`>= 0` for [`Condition::Legs`]).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Refusal {
    pub condition: Condition,
    #[serde(with = "rational::serde_str")]
    pub margin: Rational,
    /// Index of the offending leg, if any.
    pub leg: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "refused on {} (margin {}): {}",
            self.condition,
            format_rational(&self.margin),
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImageCheck {
    #[serde(with = "rational::serde_vec")]
    pub middle_third: Vec<Rational>,
    #[serde(with = "rational::serde_vec")]
    pub image: Vec<Rational>,
    #[serde(with = "rational::serde_str")]
    pub margin: Rational,
}

/// Exact witness that `(J, J_1, …, J_k)` is a strong `(ε, k)`-horseshoe.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StrongHorseshoeCert {
    #[serde(with = "rational::serde_vec")]
    pub j: Vec<Rational>,
    pub legs: Vec<LegInterval>,
    pub checks: Vec<ImageCheck>,
    /// Smallest containment margin over the legs.
    #[serde(with = "rational::serde_str")]
    pub margin: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LegInterval(
    #[serde(with = "rational::serde_str")] pub Rational,
    #[serde(with = "rational::serde_str")] pub Rational,
);

pub type HorseshoeVerdict = std::result::Result<StrongHorseshoeCert, Refusal>;

fn refuse(
    condition: Condition,
    margin: Rational,
    leg: Option<usize>,
    detail: String,
) -> HorseshoeVerdict {
    Err(Refusal {
        condition,
        margin,
        leg,
        detail,
    })
}

/// Checks the strong-horseshoe conditions exactly. Domain errors (legs or
/// `J` outside the map's domain) are errors; failed conditions are a
/// [`Refusal`].
pub fn is_strong_horseshoe(
    map: &PAMap,
    j: (&Rational, &Rational),
    legs: &[(Rational, Rational)],
    eps: &Rational,
    k: usize,
) -> Result<HorseshoeVerdict> {
    let (a, b) = j;
    if a >= b {
        return Err(Error::Degenerate("J is empty or a point".into()));
    }
    if !map.contains(a) || !map.contains(b) {
        return Err(Error::invalid("J leaves the map's domain"));
    }
    let width = b - a;
    let size = &width - eps;
    if !size.is_positive() {
        return Ok(refuse(
            Condition::Size,
            size,
            None,
            format!(
                "|J| = {} is not > ε = {}",
                format_rational(&width),
                format_rational(eps)
            ),
        ));
    }

    if legs.len() != k || k == 0 {
        return Ok(refuse(
            Condition::Legs,
            int(-1),
            None,
            format!("{} legs given, k = {k}", legs.len()),
        ));
    }
    for (i, (l, r)) in legs.iter().enumerate() {
        if l >= r || l < a || r > b {
            return Err(Error::invalid(format!("leg {i} is not a subinterval of J")));
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| legs[x].0.cmp(&legs[y].0));
    for w in order.windows(2) {
        let gap = &legs[w[1]].0 - &legs[w[0]].1;
        if gap.is_negative() {
            return Ok(refuse(
                Condition::Legs,
                gap,
                Some(w[1]),
                format!("legs {} and {} overlap", w[0], w[1]),
            ));
        }
    }

    let min_width = &width / int(2 * k as i64);
    for (i, (l, r)) in legs.iter().enumerate() {
        let m = (r - l) - &min_width;
        if !m.is_positive() {
            return Ok(refuse(
                Condition::LegWidth,
                m,
                Some(i),
                format!(
                    "|J_{i}| is not > |J|/(2k) = {}",
                    format_rational(&min_width)
                ),
            ));
        }
    }

    let mut checks = Vec::with_capacity(k);
    for (i, (l, r)) in legs.iter().enumerate() {
        let (ml, mr) = middle_third(l, r)?;
        let (lo, hi) = map.image(&ml, &mr)?;
        let margin = rational::min_q(&(a - &lo), &(&hi - b)).clone();
        if !margin.is_positive() {
            return Ok(refuse(
                Condition::Containment,
                margin,
                Some(i),
                format!(
                    "φ(Ĵ_{i}) = [{}, {}] does not contain J in its interior",
                    format_rational(&lo),
                    format_rational(&hi)
                ),
            ));
        }
        checks.push(ImageCheck {
            middle_third: vec![ml, mr],
            image: vec![lo, hi],
            margin,
        });
    }
    let margin = checks
        .iter()
        .map(|c| c.margin.clone())
        .min()
        .expect("k >= 1");
    Ok(Ok(StrongHorseshoeCert {
        j: vec![a.clone(), b.clone()],
        legs: legs
            .iter()
            .map(|(l, r)| LegInterval(l.clone(), r.clone()))
            .collect(),
        checks,
        margin,
    }))
}

/// A map with `k` equal legs on `J = [a, b]` whose middle thirds overshoot
/// `J` by `η = min(a − lo, hi − b, |J|)/2` on both sides; identity away from
/// `J`. Returns the map and its legs.
pub fn make_strong_horseshoe_map(
    j: (&Rational, &Rational),
    k: usize,
    ambient: (&Rational, &Rational),
) -> Result<(PAMap, Vec<(Rational, Rational)>)> {
    let (a, b) = j;
    let (lo, hi) = ambient;
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if a >= b {
        return Err(Error::Degenerate("J is empty or a point".into()));
    }
    if a <= lo || b >= hi {
        return Err(Error::Infeasible(format!(
            "J = [{}, {}] must lie strictly inside [{}, {}] to leave room for a strict superset",
            format_rational(a),
            format_rational(b),
            format_rational(lo),
            format_rational(hi)
        )));
    }
    let width = b - a;
    let eta = rational::min_q(rational::min_q(&(a - lo), &(hi - b)), &width).clone() / int(2);
    let w = &width / int(k as i64);
    let third = &w / int(3);
    let low = a - &eta;
    let high = b + &eta;

    let mut nodes = vec![lo.clone(), a.clone()];
    let mut values = vec![lo.clone(), a.clone()];
    let mut legs = Vec::with_capacity(k);
    for i in 0..k {
        let c = a + &w * int(i as i64);
        let up = i % 2 == 0;
        let (first, second, end) = if up {
            (low.clone(), high.clone(), b.clone())
        } else {
            (high.clone(), low.clone(), a.clone())
        };
        nodes.push(&c + &third);
        values.push(first);
        nodes.push(&c + &third * int(2));
        values.push(second);
        let right = if i + 1 == k { b.clone() } else { &c + &w };
        nodes.push(right.clone());
        values.push(end);
        legs.push((c, right));
    }
    if k.is_multiple_of(2) {
        // the last leg ends at a; bridge back to the identity
        let back = b + &eta;
        nodes.push(back.clone());
        values.push(back);
    }
    nodes.push(hi.clone());
    values.push(hi.clone());
    Ok((PAMap::new(nodes, values)?, legs))
}

/// `max |f − g|`, attained at a node of one of the maps.
pub fn sup_distance(f: &PAMap, g: &PAMap) -> Result<Rational> {
    if f.lo() != g.lo() || f.hi() != g.hi() {
        return Err(Error::invalid("sup distance needs a common domain"));
    }
    let mut best = Rational::zero();
    for x in f.nodes().iter().chain(g.nodes()) {
        let d = (f.eval(x)? - g.eval(x)?).abs();
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

/// Result of [`splice`].
#[derive(Clone, Debug)]
pub struct Splice {
    pub map: PAMap,
    /// Width of the modified window `(p, p + δ)`; `None` when no surgery
    /// was needed.
    pub delta: Option<Rational>,
    pub schedule: Option<Schedule>,
    /// Closed-form dimension of the inserted block.
    pub limit: f64,
    pub distance: Rational,
}

#[derive(Serialize)]
struct SpliceReport {
    #[serde(with = "rational::serde_str")]
    fixed_point: Rational,
    #[serde(with = "rational::serde_str")]
    target: Rational,
    #[serde(with = "rational::serde_str")]
    eps: Rational,
    delta: Option<String>,
    #[serde(with = "rational::serde_str")]
    sup_distance: Rational,
    schedule: Option<String>,
    limit: f64,
}

impl Splice {
    pub fn certificate_json(
        &self,
        p: &Rational,
        target: &Rational,
        eps: &Rational,
    ) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SpliceReport {
            fixed_point: p.clone(),
            target: target.clone(),
            eps: eps.clone(),
            delta: self.delta.as_ref().map(format_rational),
            sup_distance: self.distance.clone(),
            schedule: self.schedule.as_ref().map(Schedule::describe),
            limit: self.limit,
        })?)
    }
}

/// Block schedule whose closed-form limit is `a`: `power_law(1, (1−a)/a)`
/// for `0 < a < 1`, `quadratic(1)` for `a = 1`.
pub fn schedule_for_target(a: &Rational, blocks: usize) -> Result<Schedule> {
    if a.is_negative() || a > &Rational::one() || a.is_zero() {
        return Err(Error::invalid(format!(
            "target {} must lie in (0, 1]",
            format_rational(a)
        )));
    }
    if a.is_one() {
        Schedule::quadratic(1, blocks)
    } else {
        Schedule::power_law(1, (Rational::one() - a) / a, blocks)
    }
}

/// Replaces `phi0` on `(p, p + δ)` by a rescaled horseshoe schedule of
/// dimension `a` followed by an affine bridge, keeping the sup distance below
/// `ε`. `δ` is the largest power of two `≤ min(ε, hi − p)` on whose
/// window `phi0` stays within `ε/2` of `p`.
pub fn splice(
    phi0: &PAMap,
    p: &Rational,
    a: &Rational,
    eps: &Rational,
    blocks: usize,
) -> Result<Splice> {
    if !eps.is_positive() {
        return Err(Error::invalid("ε must be positive"));
    }
    if a.is_negative() || a > &Rational::one() {
        return Err(Error::invalid("target dimension must lie in [0, 1]"));
    }
    if &phi0.eval(p)? != p {
        return Err(Error::invalid(format!(
            "{} is not a fixed point",
            format_rational(p)
        )));
    }
    if a.is_zero() {
        return Ok(Splice {
            map: phi0.clone(),
            delta: None,
            schedule: None,
            limit: 0.0,
            distance: Rational::zero(),
        });
    }
    if p >= phi0.hi() {
        return Err(Error::Infeasible(
            "no room to the right of the fixed point".into(),
        ));
    }

    let room = phi0.hi() - p;
    let half = eps / int(2);
    let mut delta = rational::dyadic_floor(rational::min_q(eps, &room)).expect("positive bound");
    loop {
        let left = rational::max_q(phi0.lo(), &(p - &delta)).clone();
        let (ilo, ihi) = phi0.image(&left, &(p + &delta))?;
        let spread = rational::max_q(&(p - &ilo), &(&ihi - p)).clone();
        if spread < half {
            break;
        }
        delta /= int(2);
        if delta.numer().bits() == 0 || delta.denom().bits() > 4096 {
            return Err(Error::Infeasible(format!(
                "no window around {} keeps φ0 within ε/2",
                format_rational(p)
            )));
        }
    }

    let schedule = schedule_for_target(a, blocks)?;
    let block = make_schedule_map(&schedule, rational::default_budget())?;
    let mid = p + &delta / int(2);
    let end = p + &delta;
    let inner = block.conjugate_onto(p, &mid)?;

    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (x, v) in phi0.nodes().iter().zip(phi0.values()) {
        if x < p {
            nodes.push(x.clone());
            values.push(v.clone());
        }
    }
    nodes.extend(inner.nodes().iter().cloned());
    values.extend(inner.values().iter().cloned());
    nodes.push(end.clone());
    values.push(phi0.eval(&end)?);
    for (x, v) in phi0.nodes().iter().zip(phi0.values()) {
        if x > &end {
            nodes.push(x.clone());
            values.push(v.clone());
        }
    }
    let map = PAMap::new(nodes, values)?;
    let distance = sup_distance(&map, phi0)?;
    if &distance >= eps {
        return Err(Error::Infeasible(format!(
            "spliced map is {} away from φ0, not < ε",
            format_rational(&distance)
        )));
    }
    let limit = symbolic::closed_form_limit(&schedule, symbolic::LimitMode::Liminf)?;
    Ok(Splice {
        map,
        delta: Some(delta),
        schedule: Some(schedule),
        limit,
        distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps1d::make_tent_g;
    use crate::rational::rat;

    #[test]
    fn middle_thirds() {
        assert_eq!(
            middle_third(&int(0), &int(1)).unwrap(),
            (rat(1, 3), rat(2, 3))
        );
        assert_eq!(middle_third(&int(0), &int(3)).unwrap(), (int(1), int(2)));
        assert!(middle_third(&rat(1, 2), &rat(1, 2)).is_err());
    }

    #[test]
    fn tent_is_refused_on_containment() {
        let g = make_tent_g();
        let legs = vec![
            (int(0), rat(1, 3)),
            (rat(1, 3), rat(2, 3)),
            (rat(2, 3), int(1)),
        ];
        let r = is_strong_horseshoe(&g, (&int(0), &int(1)), &legs, &rat(1, 2), 3)
            .unwrap()
            .unwrap_err();
        assert_eq!(r.condition, Condition::Containment);
        assert_eq!(r.leg, Some(0));
        assert_eq!(r.margin, rat(-1, 3));
    }

    #[test]
    fn generator_is_certified() {
        for k in 1..=5 {
            let (map, legs) =
                make_strong_horseshoe_map((&rat(1, 4), &rat(3, 4)), k, (&int(0), &int(1))).unwrap();
            let cert = is_strong_horseshoe(&map, (&rat(1, 4), &rat(3, 4)), &legs, &rat(1, 4), k)
                .unwrap()
                .unwrap();
            assert_eq!(cert.margin, rat(1, 8));
            assert_eq!(map.eval(&rat(1, 8)).unwrap(), rat(1, 8));
            assert_eq!(map.eval(&rat(15, 16)).unwrap(), rat(15, 16));
        }
    }

    #[test]
    fn generator_needs_room() {
        assert!(make_strong_horseshoe_map((&int(0), &int(1)), 3, (&int(0), &int(1))).is_err());
    }

    #[test]
    fn size_and_width_refusals() {
        let (map, legs) =
            make_strong_horseshoe_map((&rat(1, 4), &rat(3, 4)), 3, (&int(0), &int(1))).unwrap();
        let r = is_strong_horseshoe(&map, (&rat(1, 4), &rat(3, 4)), &legs, &rat(1, 2), 3)
            .unwrap()
            .unwrap_err();
        assert_eq!((r.condition, r.margin), (Condition::Size, int(0)));
        let thin = vec![(rat(1, 4), rat(1, 3))];
        let r = is_strong_horseshoe(&map, (&rat(1, 4), &rat(3, 4)), &thin, &rat(1, 8), 1)
            .unwrap()
            .unwrap_err();
        assert_eq!(r.condition, Condition::LegWidth);
        assert_eq!(r.margin, rat(1, 12) - rat(1, 4));
    }

    #[test]
    fn sup_distance_examples() {
        let g = make_tent_g();
        let id = PAMap::identity(int(0), int(1)).unwrap();
        assert_eq!(sup_distance(&g, &g).unwrap(), int(0));
        assert_eq!(sup_distance(&id, &g).unwrap(), rat(2, 3));
    }

    #[test]
    fn splice_identity() {
        let id = PAMap::identity(int(0), int(1)).unwrap();
        let eps = rat(1, 10);
        for a in [rat(1, 4), rat(1, 2), int(1)] {
            let s = splice(&id, &rat(1, 2), &a, &eps, 3).unwrap();
            assert!(s.distance < eps);
            let delta = s.delta.clone().unwrap();
            // the identity needs δ < ε/2
            assert_eq!(delta, rat(1, 32));
            for i in 0..=1000 {
                let x = rat(i, 1000);
                if x <= rat(1, 2) || x >= rat(1, 2) + &delta {
                    assert_eq!(s.map.eval(&x).unwrap(), x);
                }
            }
            assert!((s.limit - rational::to_f64(&a)).abs() < 1e-12);
        }
        let s = splice(&id, &rat(1, 2), &int(0), &eps, 3).unwrap();
        assert_eq!(s.map, id);
        assert!(splice(&id, &int(1), &rat(1, 2), &eps, 3).is_err());
    }

    #[test]
    fn splice_requires_a_fixed_point() {
        let g = make_tent_g();
        assert!(splice(&g, &rat(1, 5), &rat(1, 2), &rat(1, 10), 2).is_err());
        let s = splice(&g, &rat(1, 2), &rat(1, 2), &rat(1, 10), 2).unwrap();
        assert!(s.distance < rat(1, 10));
    }
}
