//! Closed-form cylinder counts, per-block stage values and limit formulas.
//!
//! Stage `n` of a block looks at the cylinders of `φ^{n+1}` inside `I_k`:
//! there are `s_k^{n+1}` of them, all of width `|I_k|/s_k^{n+1}`, and each has
//! Bowen diameter `ε_k` over `n + 1` iterates.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::maps1d::{HorseshoeBlock, Schedule, ScheduleRule};
use crate::rational::{self, format_rational, int, Rational};

/// Which end of the limit to report for schedules without a single limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitMode {
    Limsup,
    Liminf,
}

/// `s_k^{n+1}`.
pub fn cylinder_count(block: &HorseshoeBlock, n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::invalid("stage n must be at least 1"));
    }
    Ok(num_traits::pow(block.legs.clone(), n + 1))
}

/// The `s_k^{n+1}` stage-`n` cylinders of `I_k`, left to right.
pub fn cylinder_endpoints(
    block: &HorseshoeBlock,
    n: usize,
    budget: usize,
) -> Result<Vec<(Rational, Rational)>> {
    let count = cylinder_count(block, n)?;
    let c = count
        .to_usize()
        .filter(|&c| c <= budget)
        .ok_or_else(|| Error::Budget {
            what: "cylinders",
            needed: count.to_string(),
            budget,
        })?;
    let width = block.width() / rational::from_biguint(count);
    let mut out = Vec::with_capacity(c);
    let mut left = block.left.clone();
    for i in 0..c {
        let right = if i + 1 == c {
            block.right.clone()
        } else {
            &left + &width
        };
        out.push((left, right.clone()));
        left = right;
    }
    Ok(out)
}

/// Per-block normalized value `ln s / ln(s/|I|)` from logarithms.
fn block_value(ln_s: f64, ln_width: f64) -> Result<f64> {
    if ln_s <= 0.0 {
        return Err(Error::Degenerate(
            "a block with one leg has log s_k = 0".into(),
        ));
    }
    let denom = ln_s - ln_width;
    if denom <= 0.0 {
        return Err(Error::Degenerate(
            "leg width ε_k >= 1: the stage formula needs ε_k < 1".into(),
        ));
    }
    Ok(ln_s / denom)
}

/// `(n+1) ln s_k / ln(s_k/|I_k|)`.
pub fn stage_dimension(block: &HorseshoeBlock, n: usize) -> Result<f64> {
    if block.leg_width() >= Rational::one() {
        return Err(Error::Degenerate(format!(
            "leg width {} >= 1",
            format_rational(&block.leg_width())
        )));
    }
    let v = block_value(block.ln_legs(), rational::ln_abs(&block.width()))?;
    Ok((n as f64 + 1.0) * v)
}

/// Exact limit for the analytic rules; `None` for explicit data.
pub fn closed_form_limit_exact(schedule: &Schedule) -> Option<Rational> {
    match schedule.rule() {
        ScheduleRule::PowerLaw { s, r } => {
            let s = int(*s as i64);
            Some(&s / (&s + r))
        }
        ScheduleRule::Quadratic { .. } => Some(Rational::one()),
        ScheduleRule::OddLegs { s } => Some(int(*s as i64) / int(*s as i64 + 2)),
        ScheduleRule::Explicit(_) => None,
    }
}

/// Limit of the per-block values. Explicit schedules report the max
/// (`Limsup`) or min (`Liminf`) over their blocks, in declared order.
pub fn closed_form_limit(schedule: &Schedule, mode: LimitMode) -> Result<f64> {
    if let Some(q) = closed_form_limit_exact(schedule) {
        return Ok(rational::to_f64(&q));
    }
    let values = stage_sequence(schedule, schedule.truncation())?;
    let pick = match mode {
        LimitMode::Limsup => values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        LimitMode::Liminf => values.iter().cloned().fold(f64::INFINITY, f64::min),
    };
    Ok(pick)
}

/// Per-block normalized values for the first `k_max` blocks.
///
/// Analytic rules are evaluated from logarithms, so `k_max` may exceed the
/// schedule's truncation (the width normalization stays that of the
/// truncation).
pub fn stage_sequence(schedule: &Schedule, k_max: usize) -> Result<Vec<f64>> {
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    let first = schedule.first_index();
    let last = match schedule.rule() {
        ScheduleRule::PowerLaw { .. } => k_max,
        _ => k_max.min(match schedule.rule() {
            ScheduleRule::Explicit(items) => items.len(),
            _ => usize::MAX,
        }),
    };
    (first..=last)
        .map(|k| block_value(schedule.ln_legs(k)?, schedule.ln_width(k)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn block(width: Rational, legs: u32) -> HorseshoeBlock {
        HorseshoeBlock::new(0, int(0), width, BigUint::from(legs)).unwrap()
    }

    #[test]
    fn counts() {
        assert_eq!(
            cylinder_count(&block(int(1), 3), 2).unwrap(),
            BigUint::from(27u32)
        );
        assert_eq!(
            cylinder_count(&block(int(1), 2), 1).unwrap(),
            BigUint::from(4u32)
        );
        assert_eq!(
            cylinder_count(&block(int(1), 9), 3).unwrap(),
            BigUint::from(6561u32)
        );
        assert!(cylinder_count(&block(int(1), 3), 0).is_err());
    }

    #[test]
    fn endpoints_of_the_unit_tent() {
        let cyl = cylinder_endpoints(&block(int(1), 3), 1, 100).unwrap();
        assert_eq!(cyl.len(), 9);
        assert!(cyl.iter().all(|(a, b)| b - a == rat(1, 9)));
        assert!(cylinder_endpoints(&block(int(1), 3), 8, 1000).is_err());
    }

    #[test]
    fn endpoints_refine() {
        let b = block(rat(1, 3), 3);
        let coarse = cylinder_endpoints(&b, 1, 1000).unwrap();
        let fine = cylinder_endpoints(&b, 2, 1000).unwrap();
        for (a, _) in &coarse {
            assert!(fine.iter().any(|(x, _)| x == a));
        }
    }

    #[test]
    fn stage_dimension_values() {
        let b = block(rat(1, 3), 3);
        assert!((stage_dimension(&b, 2).unwrap() - 1.5).abs() < 1e-12);
        assert!((stage_dimension(&b, 1000).unwrap() / 1001.0 - 0.5).abs() < 1e-12);
        let wide = block(int(3), 3);
        assert!(stage_dimension(&wide, 1).is_err());
    }

    #[test]
    fn limits() {
        let pl = Schedule::power_law(1, int(1), 5).unwrap();
        assert_eq!(closed_form_limit(&pl, LimitMode::Liminf).unwrap(), 0.5);
        let pl = Schedule::power_law(2, rat(1, 2), 5).unwrap();
        assert_eq!(closed_form_limit_exact(&pl).unwrap(), rat(4, 5));
        let q = Schedule::quadratic(3, 5).unwrap();
        assert_eq!(closed_form_limit(&q, LimitMode::Limsup).unwrap(), 1.0);
        let o = Schedule::odd_legs(1, 5).unwrap();
        assert_eq!(closed_form_limit_exact(&o).unwrap(), rat(1, 3));
    }

    #[test]
    fn explicit_limits_are_extremes() {
        let sch = Schedule::explicit(vec![(rat(1, 3), 3), (rat(1, 9), 3)]).unwrap();
        let hi = closed_form_limit(&sch, LimitMode::Limsup).unwrap();
        let lo = closed_form_limit(&sch, LimitMode::Liminf).unwrap();
        assert!((hi - 0.5).abs() < 1e-12);
        assert!((lo - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_stage_twenty() {
        let sch = Schedule::power_law(1, int(1), 1).unwrap();
        let seq = stage_sequence(&sch, 20).unwrap();
        assert_eq!(seq.len(), 21);
        let expected = 21.0 / (41.0 + 1.5f64.ln() / 3f64.ln());
        assert!((seq[20] - expected).abs() < 1e-12);
    }

    #[test]
    fn quadratic_stage_thousand() {
        let sch = Schedule::quadratic(1, 1000).unwrap();
        let seq = stage_sequence(&sch, 1000).unwrap();
        let v = *seq.last().unwrap();
        assert!((v - 0.987).abs() < 1e-3, "{v}");
        // the first block is an outlier; from k = 2 on the sequence increases
        assert!(seq[0] > seq[1]);
        assert!(seq[1..].windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn self_similar_blocks_give_one_half() {
        let sch =
            Schedule::explicit(vec![(rat(1, 3), 3), (rat(1, 9), 9), (rat(1, 27), 27)]).unwrap();
        for v in stage_sequence(&sch, 3).unwrap() {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }
}
