use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{bisect, golden_min, maximize};

const YOUNG_TOL: f64 = 1e-9;

/// Lebesgue exponents `(p, q, r)` of a bilinear convolution-type estimate,
/// with the moment weight `k` and the kernel power `gamma`. Infinite
/// exponents are `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTriple {
    #[serde(with = "extended_real")]
    pub p: f64,
    #[serde(with = "extended_real")]
    pub q: f64,
    #[serde(with = "extended_real")]
    pub r: f64,
    pub k: f64,
    pub gamma: f64,
}

/// `1 / x` with `1 / inf = 0`.
fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

impl ExponentTriple {
    pub fn new(p: f64, q: f64, r: f64, k: f64, gamma: f64) -> Result<Self> {
        for (name, x) in [("p", p), ("q", q), ("r", r)] {
            if !(x >= 1.0) {
                return Err(Error::Range(format!("exponent {name} must be at least 1, got {x}")));
            }
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Range(format!("gamma must lie in [0, 1], got {gamma}")));
        }
        if !(k >= gamma && k.is_finite()) {
            return Err(Error::Range(format!("weight k = {k} must be at least gamma = {gamma}")));
        }
        Ok(ExponentTriple { p, q, r, k, gamma })
    }

    /// The triple whose `r` is fixed by `1 + 1/r = 1/p + 1/q`.
    pub fn from_young(p: f64, q: f64, k: f64, gamma: f64) -> Result<Self> {
        let inv_r = recip(p) + recip(q) - 1.0;
        if !(inv_r >= -YOUNG_TOL && inv_r <= 1.0) {
            return Err(Error::Range(format!("no r in [1, inf] satisfies Young's relation for p = {p}, q = {q}")));
        }
        let r = if inv_r <= 0.0 { f64::INFINITY } else { 1.0 / inv_r };
        ExponentTriple::new(p, q, r, k, gamma)
    }

    /// `1 + 1/r - 1/p - 1/q`.
    pub fn young_residual(&self) -> f64 {
        1.0 + recip(self.r) - recip(self.p) - recip(self.q)
    }

    /// Left side `1/q + gamma r / (2 (r - q))` of the exponent condition,
    /// `1/q + gamma/2` for `r = inf`; `None` when `r <= q` with `r` finite.
    pub fn condition_value(&self) -> Option<f64> {
        if self.r.is_infinite() {
            return Some(recip(self.q) + 0.5 * self.gamma);
        }
        if self.r <= self.q {
            return None;
        }
        Some(recip(self.q) + self.gamma * self.r / (2.0 * (self.r - self.q)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Admissible,
    YoungFail,
    ConditionFail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Admissibility {
    pub triple: ExponentTriple,
    pub verdict: Verdict,
    pub young_residual: f64,
    /// `None` when `r <= q` with `r` finite.
    pub condition_value: Option<f64>,
    /// `2/p`.
    pub condition_bound: f64,
    /// Open interval of valid `alpha`, when nonempty.
    pub alpha_interval: Option<(f64, f64)>,
    /// Midpoint of `alpha_interval`.
    pub alpha: Option<f64>,
    /// `p + p^2 / (2 (p - 1)) < 2q`, the condition with denominators cleared
    /// (meaningful for `gamma = 1` and `1 < p`).
    pub cleared_form: Option<bool>,
    /// `p^2 + p / (p - 1) < 2q`, the other quadratic form in circulation.
    pub quadratic_form: Option<bool>,
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        self.verdict == Verdict::Admissible
    }
}

/// Classifies a triple: Young's relation first, then the exponent condition.
/// On success returns the midpoint witness `alpha` and checks `alpha p < 2`
/// and `alpha q > 1`.
pub fn check_admissible(t: &ExponentTriple) -> Result<Admissibility> {
    let t = ExponentTriple::new(t.p, t.q, t.r, t.k, t.gamma)?;
    let young_residual = t.young_residual();
    let condition_value = t.condition_value();
    let condition_bound = 2.0 * recip(t.p);
    let (cleared_form, quadratic_form) = if t.p > 1.0 && t.p.is_finite() {
        let p = t.p;
        (Some(p + p * p / (2.0 * (p - 1.0)) < 2.0 * t.q), Some(p * p + p / (p - 1.0) < 2.0 * t.q))
    } else {
        (None, None)
    };
    let mut out = Admissibility {
        triple: t,
        verdict: Verdict::YoungFail,
        young_residual,
        condition_value,
        condition_bound,
        alpha_interval: None,
        alpha: None,
        cleared_form,
        quadratic_form,
    };
    if young_residual.abs() > YOUNG_TOL {
        return Ok(out);
    }
    match condition_value {
        Some(c) if c < condition_bound => {
            let alpha = 0.5 * (c + condition_bound);
            if !(alpha * t.p < 2.0 && alpha * t.q > 1.0) {
                return Err(Error::AssertionFailure(format!(
                    "witness alpha = {alpha} violates alpha p < 2 or alpha q > 1 for {t:?}"
                )));
            }
            out.verdict = Verdict::Admissible;
            out.alpha_interval = Some((c, condition_bound));
            out.alpha = Some(alpha);
        }
        _ => out.verdict = Verdict::ConditionFail,
    }
    Ok(out)
}

/// `2/p - condition_value` along Young's relation, as a function of `p`
/// for fixed `q`. Uses `r / (r - q) = p / (q (p - 1))`, valid on both sides
/// of the point `r = inf`.
fn margin(p: f64, q: f64, gamma: f64) -> f64 {
    2.0 / p - 1.0 / q - gamma * p / (2.0 * q * (p - 1.0))
}

/// Largest value of `p` for which Young's relation leaves `r <= inf`.
fn p_upper(q: f64) -> f64 {
    q / (q - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinR {
    pub gamma: f64,
    pub r_min: f64,
    pub p_star: f64,
    pub q_star: f64,
    /// Smallest `q` admitting any `p`.
    pub feasibility_threshold: f64,
}

/// Interval of `p > 1` on which the exponent condition holds for fixed `q`
/// (with `r` from Young's relation, continued past `r = inf`), located by
/// scanning `samples` points then bisecting each boundary.
pub fn condition_interval(q: f64, gamma: f64, samples: usize) -> Option<(f64, f64)> {
    let lo = 1.0 + 1e-12;
    // Past 4q the margin is dominated by -1/q - gamma/(2q) < 0.
    let hi = 4.0 * q + 2.0;
    let m = |p: f64| margin(p, q, gamma);
    let (p_best, best) = maximize(m, lo, hi, samples);
    if best <= 0.0 {
        return None;
    }
    let left = if m(lo) > 0.0 { lo } else { bisect(m, lo, p_best) };
    let right = if m(hi) > 0.0 { hi } else { bisect(m, p_best, hi) };
    Some((left, right))
}

/// Smallest `q` for which [`condition_interval`] is nonempty.
pub fn feasibility_threshold(gamma: f64, samples: usize) -> Result<f64> {
    check_gamma(gamma)?;
    let best = |q: f64| maximize(|p| margin(p, q, gamma), 1.0 + 1e-12, 4.0 * q + 2.0, samples).1;
    let (mut lo, mut hi) = (1.0 + 1e-9, 2.0);
    while best(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::DegenerateInput(format!("no feasible q for gamma = {gamma}")));
        }
    }
    Ok(bisect(best, lo, hi))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Range(format!("the r sweep needs gamma in (0, 1], got {gamma}")));
    }
    Ok(())
}

/// Minimizes the Young-implied `r` over admissible `(p, q)`. For each `q`
/// the smallest admissible `p` gives the smallest `r`; the resulting
/// profile in `q` is scanned on `samples` points and refined by golden
/// section. Every reported optimum is confirmed by [`check_admissible`]
/// at a point just inside the admissible region.
pub fn min_r_sweep(gamma: f64, samples: usize) -> Result<MinR> {
    check_gamma(gamma)?;
    let samples = samples.max(16);
    let q_feas = feasibility_threshold(gamma, samples)?;
    let r_of = |q: f64| -> f64 {
        match condition_interval(q, gamma, samples) {
            Some((p, _)) if p < p_upper(q) => 1.0 / (1.0 / p + 1.0 / q - 1.0),
            _ => f64::INFINITY,
        }
    };
    let (q_lo, q_hi) = (q_feas * (1.0 + 1e-9), 4.0 * q_feas);
    let step = (q_hi - q_lo) / (samples - 1) as f64;
    let mut best = (q_lo, r_of(q_lo));
    for i in 1..samples {
        let q = q_lo + step * i as f64;
        let r = r_of(q);
        if r < best.1 {
            best = (q, r);
        }
    }
    let (q_star, r_min) = golden_min(r_of, (best.0 - step).max(q_lo), (best.0 + step).min(q_hi), 1e-10);
    let (p_star, _) = condition_interval(q_star, gamma, samples)
        .ok_or_else(|| Error::AssertionFailure("optimum left the feasible region".into()))?;
    let inside = ExponentTriple::from_young(p_star * (1.0 + 1e-7), q_star, gamma, gamma)?;
    if !check_admissible(&inside)?.is_admissible() {
        return Err(Error::AssertionFailure(format!("sweep optimum {inside:?} is not admissible")));
    }
    Ok(MinR { gamma, r_min, p_star, q_star, feasibility_threshold: q_feas })
}

/// Roots of `3p^2 - (2 + 4q) p + 4q`, the boundary of the cleared condition
/// for `gamma = 1`.
pub fn cleared_form_roots(q: f64) -> Option<(f64, f64)> {
    let b = 2.0 + 4.0 * q;
    let disc = b * b - 48.0 * q;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some(((b - s) / 6.0, (b + s) / 6.0))
}

/// Small parameter `delta` and the four derived exponents shifts used by the
/// dispersive function space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaFamily {
    pub delta: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl DeltaFamily {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.01) {
            return Err(Error::Range(format!("delta must lie in (0, 1/100), got {delta}")));
        }
        let d1 = 4.0 * delta / (3.0 + 2.0 * delta);
        Ok(DeltaFamily {
            delta,
            d1,
            d2: d1,
            d3: 16.0 * delta / (9.0 + 14.0 * delta),
            d4: 16.0 * delta / (9.0 - 2.0 * delta),
        })
    }

    /// Residuals of the six exponent identities tying the family together.
    pub fn identities(&self) -> [(&'static str, f64); 6] {
        let DeltaFamily { delta, d1, d2, d3, d4 } = *self;
        let a = 1.0 / (1.5 + delta);
        let b = 1.0 / (2.0 - d3);
        let c = 1.0 / (2.0 + d4);
        [
            ("convolution 3/2+delta with 2-d3", a + b - (1.0 + 1.0 / 6.0)),
            ("conjugate 2-d3 and 2+d4", b + c - 1.0),
            ("interpolation d1", 3.0 * (a - 1.0 / 6.0) - (1.5 - d1)),
            ("interpolation d2", 3.0 * (c - 1.0 / 6.0) - (1.0 - d2)),
            ("holder 2-d3", 1.0 / 6.0 + (1.0 + 2.0 * delta) / (3.0 + 2.0 * delta) - b),
            ("holder 3/2+delta", 1.0 / 6.0 + c - a),
        ]
    }

    /// The two bilinear triples used in the dispersive bootstrap:
    /// `(2 - d3, 2 + d4, inf)` and `(3/2 + delta, 2 - d3, 6)`.
    pub fn triples(&self, gamma: f64) -> Result<[ExponentTriple; 2]> {
        Ok([
            ExponentTriple::new(2.0 - self.d3, 2.0 + self.d4, f64::INFINITY, gamma, gamma)?,
            ExponentTriple::new(1.5 + self.delta, 2.0 - self.d3, 6.0, gamma, gamma)?,
        ])
    }
}

/// Builds the family and checks every identity to `1e-12`.
pub fn delta_family(delta: f64) -> Result<DeltaFamily> {
    let fam = DeltaFamily::new(delta)?;
    for (name, res) in fam.identities() {
        if res.abs() > 1e-12 {
            return Err(Error::AssertionFailure(format!("identity '{name}' off by {res:e} at delta = {delta}")));
        }
    }
    for d in [fam.d1, fam.d2, fam.d3, fam.d4] {
        if !(d > 0.0 && d < 2.0 * delta) {
            return Err(Error::AssertionFailure(format!("shift {d} outside (0, 2 delta)")));
        }
    }
    Ok(fam)
}

/// Serializes infinite exponents as the string `"inf"` so they survive JSON.
pub mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
            Repr::Text(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hard_sphere_infinite_r_is_admissible() {
        let t = ExponentTriple::new(1.5, 3.0, f64::INFINITY, 1.0, 1.0).unwrap();
        let a = check_admissible(&t).unwrap();
        assert_eq!(a.verdict, Verdict::Admissible);
        assert!((a.condition_value.unwrap() - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn young_failure() {
        let t = ExponentTriple::new(1.5, 3.0, 3.0, 1.0, 1.0).unwrap();
        assert_eq!(check_admissible(&t).unwrap().verdict, Verdict::YoungFail);
    }

    #[test]
    fn direct_arithmetic_example() {
        let t = ExponentTriple::from_young(1.3, 2.2, 3.0, 1.0).unwrap();
        assert!((t.r - 4.4687).abs() < 1e-4);
        let a = check_admissible(&t).unwrap();
        assert!((a.condition_value.unwrap() - 1.439).abs() < 1e-3);
        assert!((a.condition_bound - 1.538).abs() < 1e-3);
        assert!(a.is_admissible());
        assert_eq!(a.cleared_form, Some(true));
    }

    #[test]
    fn r_equal_q_is_rejected() {
        // 1 + 1/2 = 1/1 + 1/2.
        let t = ExponentTriple::new(1.0, 2.0, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(check_admissible(&t).unwrap().verdict, Verdict::ConditionFail);
    }

    #[test]
    fn range_errors() {
        assert!(matches!(ExponentTriple::new(0.5, 2.0, 2.0, 1.0, 1.0), Err(Error::Range(_))));
        assert!(matches!(ExponentTriple::new(1.5, 2.0, 6.0, 0.5, 1.0), Err(Error::Range(_))));
        assert!(matches!(DeltaFamily::new(0.01), Err(Error::Range(_))));
        assert!(matches!(min_r_sweep(0.0, 100), Err(Error::Range(_))));
    }

    #[test]
    fn sweep_reproduces_the_optimum() {
        let m = min_r_sweep(1.0, 400).unwrap();
        assert!((m.r_min - 3.885).abs() < 1e-2, "{m:?}");
        assert!((m.q_star - 2.15301).abs() < 1e-2, "{m:?}");
        assert!((m.p_star - 1.2612).abs() < 1e-2, "{m:?}");
        let threshold = 1.0 + 3f64.sqrt() / 2.0;
        assert!((m.feasibility_threshold - threshold).abs() < 1e-3, "{m:?}");
    }

    #[test]
    fn interval_matches_cleared_roots() {
        let q = 2.15301;
        let (a, b) = condition_interval(q, 1.0, 400).unwrap();
        let (ra, rb) = cleared_form_roots(q).unwrap();
        assert!((a - ra).abs() < 1e-9 && (b - rb).abs() < 1e-9);
        assert!((ra - 1.26121).abs() < 1e-4 && (rb - 2.27615).abs() < 1e-4);
        assert!(condition_interval(1.86, 1.0, 400).is_none());
    }

    #[test]
    fn delta_family_values() {
        let f = delta_family(0.005).unwrap();
        assert!((f.d1 - 0.0066445).abs() < 1e-7 && f.d1 == f.d2);
        assert!((f.d3 - 0.0088202).abs() < 1e-7);
        assert!((f.d4 - 0.0088988).abs() < 1e-7);
    }

    #[test]
    fn delta_triples_are_admissible() {
        for delta in [1e-4, 1e-3, 5e-3, 9.9e-3] {
            let fam = delta_family(delta).unwrap();
            for t in fam.triples(1.0).unwrap() {
                assert!(check_admissible(&t).unwrap().is_admissible(), "{delta} {t:?}");
            }
        }
    }

    #[test]
    fn shifts_shrink_with_delta() {
        let a = DeltaFamily::new(1e-3).unwrap();
        let b = DeltaFamily::new(1e-4).unwrap();
        assert!(b.d1 < a.d1 && b.d3 < a.d3 && b.d4 < a.d4);
    }

    #[test]
    fn infinite_exponents_round_trip_through_json() {
        let t = ExponentTriple::new(1.5, 3.0, f64::INFINITY, 1.0, 1.0).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"inf\""));
        let back: ExponentTriple = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }

    proptest! {
        #[test]
        fn witness_has_margin(p in 1.0f64..3.0, q in 1.0f64..8.0, gamma in 0.0f64..=1.0) {
            prop_assume!(1.0 / p + 1.0 / q >= 1.0);
            let t = ExponentTriple::from_young(p, q, gamma, gamma).unwrap();
            let a = check_admissible(&t).unwrap();
            if let (Some((lo, hi)), Some(alpha)) = (a.alpha_interval, a.alpha) {
                prop_assume!(hi - lo > 2e-9);
                prop_assert!(alpha - lo >= 1e-9 && hi - alpha >= 1e-9);
                prop_assert!(alpha * p < 2.0 && alpha * q > 1.0);
            }
        }

        #[test]
        fn delta_identities_hold(delta in 1e-6f64..0.0099) {
            prop_assert!(delta_family(delta).is_ok());
        }

        #[test]
        fn classification_ignores_data_scale(p in 1.0f64..2.0, q in 2.0f64..6.0, k in 1.0f64..5.0) {
            prop_assume!(1.0 / p + 1.0 / q >= 1.0);
            let a = check_admissible(&ExponentTriple::from_young(p, q, 1.0, 1.0).unwrap()).unwrap();
            let b = check_admissible(&ExponentTriple::from_young(p, q, k, 1.0).unwrap()).unwrap();
            prop_assert_eq!(a.verdict, b.verdict);
        }
    }
}
