//! Weil height of j, Faltings height of elliptic curves from period data,
//! normalization conversions and the basic height inequalities.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::error::{domain, Error, Result};
use crate::lattice::SiegelTau;
use crate::modular::{delta_tau, DeltaNormalization, QSeriesConfig};

/// Δ normalization under which the period formula for h_F is consistent.
pub const SILVERMAN_NORMALIZATION: DeltaNormalization = DeltaNormalization::TwoPi12;

/// Constant in h(E) ≤ h(j)/12 + c.
pub const HETJ_CONSTANT: f64 = 2.95;

/// A rational number in lowest terms with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalJ {
    num: BigInt,
    den: BigInt,
}

impl RationalJ {
    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return domain("zero denominator");
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.is_zero() { (num, den) } else { (num / &g, den / &g) };
        if den.sign() == Sign::Minus {
            num = -num;
            den = -den;
        }
        Ok(Self { num, den })
    }

    pub fn parse(num: &str, den: &str) -> Result<Self> {
        let p = |s: &str| {
            s.trim()
                .parse::<BigInt>()
                .map_err(|e| Error::Domain(format!("invalid integer {s:?}: {e}")))
        };
        Self::new(p(num)?, p(den)?)
    }

    pub fn from_i64(num: i64, den: i64) -> Result<Self> {
        Self::new(BigInt::from(num), BigInt::from(den))
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn to_f64(&self) -> f64 {
        let (a, b) = (big_ln(self.num.magnitude()), big_ln(self.den.magnitude()));
        let sign = if self.num.sign() == Sign::Minus { -1.0 } else { 1.0 };
        if self.num.is_zero() {
            0.0
        } else {
            sign * (a - b).exp()
        }
    }
}

fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 900 {
        x.to_f64().map_or(f64::NAN, f64::ln)
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().map_or(f64::NAN, f64::ln) + shift as f64 * std::f64::consts::LN_2
    }
}

/// log max(|a|, |b|) for j = a/b in lowest terms.
pub fn weil_height_rational_j(j: &RationalJ) -> f64 {
    big_ln(j.num.magnitude().max(j.den.magnitude()))
}

/// An elliptic curve over a number field k of degree D, described through
/// one reduced period ratio per complex embedding.
///
/// The curve is assumed semi-stable over k; nothing here can check that.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRecord {
    pub label: String,
    pub degree: usize,
    pub embeddings: Vec<SiegelTau>,
    pub log_norm_minimal_discriminant: f64,
    pub j_rational: Option<RationalJ>,
}

impl CurveRecord {
    pub fn new(
        label: impl Into<String>,
        degree: usize,
        embeddings: Vec<SiegelTau>,
        log_norm_minimal_discriminant: f64,
        j_rational: Option<RationalJ>,
    ) -> Result<Self> {
        let r = Self {
            label: label.into(),
            degree,
            embeddings,
            log_norm_minimal_discriminant,
            j_rational,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 {
            return domain("degree must be at least 1");
        }
        if self.embeddings.len() != self.degree {
            return Err(Error::MissingData(format!(
                "{}: expected {} embeddings, found {}",
                self.label,
                self.degree,
                self.embeddings.len()
            )));
        }
        if !(self.log_norm_minimal_discriminant >= 0.0) || !self.log_norm_minimal_discriminant.is_finite() {
            return domain(format!("{}: log |N Delta| must be finite and >= 0", self.label));
        }
        Ok(())
    }

    /// Embeddings whose complex-conjugate representative (−Re τ, Im τ) is
    /// missing from the list. Real points of the domain boundary pair with
    /// themselves.
    pub fn conjugation_warnings(&self) -> Vec<String> {
        let tol = 1e-8;
        let self_conjugate = |t: &SiegelTau| {
            t.re().abs() < tol || (t.re().abs() - 0.5).abs() < tol || (t.to_complex().norm() - 1.0).abs() < tol
        };
        let mut unmatched: Vec<SiegelTau> = self.embeddings.iter().filter(|t| !self_conjugate(t)).copied().collect();
        let mut warnings = Vec::new();
        while let Some(t) = unmatched.pop() {
            let partner = unmatched
                .iter()
                .position(|u| (u.re() + t.re()).abs() < tol && (u.im() - t.im()).abs() < tol);
            match partner {
                Some(k) => {
                    unmatched.swap_remove(k);
                }
                None => warnings.push(format!(
                    "{}: embedding tau = {} + {}i has no conjugate partner",
                    self.label,
                    t.re(),
                    t.im()
                )),
            }
        }
        warnings
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightConvention {
    /// Faltings' h_F.
    Faltings,
    /// h = h_F + (g/2) log π.
    Normalized,
    /// h − (g/2) log 2π.
    Colmez,
}

impl HeightConvention {
    /// Offset of this convention relative to h_F.
    fn offset(self, g: u32) -> f64 {
        let half_g = f64::from(g) / 2.0;
        match self {
            Self::Faltings => 0.0,
            Self::Normalized => half_g * PI.ln(),
            Self::Colmez => half_g * PI.ln() - half_g * (2.0 * PI).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightValue {
    pub value: f64,
    pub convention: HeightConvention,
}

impl HeightValue {
    pub fn new(value: f64, convention: HeightConvention) -> Self {
        Self { value, convention }
    }
}

pub fn convert_height(h: HeightValue, target: HeightConvention, g: u32) -> HeightValue {
    if h.convention == target {
        return h;
    }
    let base = h.value - h.convention.offset(g);
    HeightValue::new(base + target.offset(g), target)
}

/// Height of a product: heights add in every convention.
pub fn product_height(a: HeightValue, b: HeightValue) -> Result<HeightValue> {
    if a.convention != b.convention {
        return domain("product height needs both factors in one convention");
    }
    Ok(HeightValue::new(a.value + b.value, a.convention))
}

/// h_F from the minimal discriminant and the period ratios.
pub fn faltings_height_silverman(record: &CurveRecord) -> Result<HeightValue> {
    faltings_height_with(record, SILVERMAN_NORMALIZATION)
}

pub fn faltings_height_with(record: &CurveRecord, normalization: DeltaNormalization) -> Result<HeightValue> {
    record.validate()?;
    let cfg = QSeriesConfig::default();
    let mut sum = 0.0;
    for &tau in &record.embeddings {
        let d = delta_tau(tau, &cfg, normalization)?;
        sum += d.value.norm().ln() + 6.0 * tau.im().ln();
    }
    let d = 12.0 * record.degree as f64;
    Ok(HeightValue::new(
        record.log_norm_minimal_discriminant / d - sum / d,
        HeightConvention::Faltings,
    ))
}

/// Inputs to [`height_inequality_suite`].
#[derive(Debug, Clone)]
pub enum HeightCheck<'a> {
    /// h(A′) ≤ h(A) + ½ log deg φ for an isogeny φ: A → A′.
    Isogeny { h_source: f64, h_target: f64, degree: f64 },
    /// h(B) ≤ h(A) + g log(√(2π) h⁰(B, L)²) for an abelian subvariety B.
    Subvariety { h_ambient: f64, h_sub: f64, g: u32, h0: f64 },
    /// h(E) ≤ h(j)/12 + 2.95, computed end to end from the record.
    Hetj(&'a CurveRecord),
}

pub fn height_inequality_suite(inputs: &[HeightCheck<'_>]) -> Result<Vec<BoundReport>> {
    inputs.iter().map(height_check).collect()
}

fn height_check(check: &HeightCheck<'_>) -> Result<BoundReport> {
    match *check {
        HeightCheck::Isogeny { h_source, h_target, degree } => {
            if !(degree >= 1.0) {
                return domain("isogeny degree must be >= 1");
            }
            Ok(BoundReport::new("isogeny_height", h_target, h_source + 0.5 * degree.ln())
                .with_input("h_source", h_source)
                .with_input("degree", degree))
        }
        HeightCheck::Subvariety { h_ambient, h_sub, g, h0 } => {
            if !(h0 >= 1.0) {
                return domain("h0 must be >= 1");
            }
            let rhs = h_ambient + f64::from(g) * ((2.0 * PI).sqrt() * h0 * h0).ln();
            Ok(BoundReport::new("subvariety_height", h_sub, rhs)
                .with_input("h_ambient", h_ambient)
                .with_input("g", f64::from(g))
                .with_input("h0", h0))
        }
        HeightCheck::Hetj(record) => {
            let j = record
                .j_rational
                .as_ref()
                .ok_or_else(|| Error::MissingData(format!("{}: no rational j", record.label)))?;
            let h_f = faltings_height_silverman(record)?;
            let h = convert_height(h_f, HeightConvention::Normalized, 1);
            let hj = weil_height_rational_j(j);
            Ok(BoundReport::new("hetj", h.value, hj / 12.0 + HETJ_CONSTANT)
                .with_input("h_j", hj)
                .with_input("h_faltings", h_f.value))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(tau: SiegelTau, log_disc: f64) -> CurveRecord {
        CurveRecord::new("t", 1, vec![tau], log_disc, None).unwrap()
    }

    #[test]
    fn weil_heights() {
        let h = weil_height_rational_j(&RationalJ::from_i64(1728, 1).unwrap());
        assert!((h - 1728f64.ln()).abs() < 1e-15);
        assert_eq!(weil_height_rational_j(&RationalJ::from_i64(0, 5).unwrap()), 0.0);
        let h = weil_height_rational_j(&RationalJ::from_i64(-122023936, 161051).unwrap());
        assert!((h - 122023936f64.ln()).abs() < 1e-15);
        let h = weil_height_rational_j(&RationalJ::from_i64(6, -4).unwrap());
        assert!((h - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn weil_height_of_huge_numbers() {
        let big = BigInt::from(10).pow(400) * 7;
        let j = RationalJ::new(big, BigInt::from(3)).unwrap();
        let expect = 400.0 * 10f64.ln() + 7f64.ln();
        assert!((weil_height_rational_j(&j) - expect).abs() < 1e-12);
    }

    #[test]
    fn synthetic_height_at_i() {
        let r = record(SiegelTau::i(), 0.0);
        let h = faltings_height_silverman(&r).unwrap();
        let d = delta_tau(SiegelTau::i(), &QSeriesConfig::default(), SILVERMAN_NORMALIZATION).unwrap();
        assert!((h.value + d.value.norm().ln() / 12.0).abs() < 1e-15);
        assert_eq!(h.convention, HeightConvention::Faltings);
    }

    #[test]
    fn fixture_heights_match_high_precision() {
        // reference h_F from a 50-digit evaluation of the same formula
        let cases = [
            (0.5, 1.149_390_106_123_252_4, 5.0 * 11f64.ln(), -0.308_009_841_118_403_06),
            (0.0, 1.221_127_360_764_627_3, 37f64.ln(), -0.996_542_207_637_367_15),
        ];
        for (re, im, ld, expect) in cases {
            let h = faltings_height_silverman(&record(SiegelTau::new(re, im).unwrap(), ld)).unwrap();
            assert!((h.value - expect).abs() < 1e-12, "{} vs {expect}", h.value);
        }
    }

    #[test]
    fn conjugate_embeddings_average_out() {
        let t = SiegelTau::new(0.21, 1.37).unwrap();
        let tc = SiegelTau::new(-0.21, 1.37).unwrap();
        let one = faltings_height_silverman(&record(t, 3.0)).unwrap();
        let two = CurveRecord::new("t2", 2, vec![t, tc], 6.0, None).unwrap();
        assert!(two.conjugation_warnings().is_empty());
        let h2 = faltings_height_silverman(&two).unwrap();
        assert!((one.value - h2.value).abs() < 1e-14);
        let lone = CurveRecord::new("t3", 2, vec![t, t], 6.0, None).unwrap();
        assert_eq!(lone.conjugation_warnings().len(), 2);
    }

    #[test]
    fn record_validation() {
        assert!(matches!(
            CurveRecord::new("x", 2, vec![SiegelTau::i()], 0.0, None),
            Err(Error::MissingData(_))
        ));
        assert!(CurveRecord::new("x", 1, vec![SiegelTau::i()], -1.0, None).is_err());
        assert!(CurveRecord::new("x", 0, vec![], 0.0, None).is_err());
    }

    #[test]
    fn conversions() {
        let h = convert_height(HeightValue::new(0.0, HeightConvention::Faltings), HeightConvention::Normalized, 1);
        assert_eq!(h.value, 0.5 * PI.ln());
        let c = convert_height(HeightValue::new(1.0, HeightConvention::Normalized), HeightConvention::Colmez, 2);
        assert!((c.value - (1.0 - (2.0 * PI).ln())).abs() < 1e-15);
    }

    #[test]
    fn inequality_suite_examples() {
        let reports = height_inequality_suite(&[
            HeightCheck::Isogeny { h_source: 0.3, h_target: 0.3, degree: 1.0 },
            HeightCheck::Subvariety { h_ambient: 0.0, h_sub: 0.5 * (2.0 * PI).ln(), g: 1, h0: 1.0 },
            HeightCheck::Isogeny { h_source: 0.3, h_target: 0.31, degree: 1.0 },
        ])
        .unwrap();
        assert!(reports[0].satisfied && reports[1].satisfied && !reports[2].satisfied);
        assert!(reports[1].margin.abs() < 1e-15);

        let r = CurveRecord::new("11a3", 1, vec![SiegelTau::new(0.5, 1.087_533_286_862_971_3).unwrap()], 11f64.ln(), Some(RationalJ::from_i64(-4096, 11).unwrap())).unwrap();
        let rep = height_inequality_suite(&[HeightCheck::Hetj(&r)]).unwrap();
        assert!(rep[0].satisfied && rep[0].margin > 0.0);
        let bare = record(SiegelTau::i(), 0.0);
        assert!(matches!(height_inequality_suite(&[HeightCheck::Hetj(&bare)]), Err(Error::MissingData(_))));
    }

    proptest! {
        #[test]
        fn conversion_round_trip(v in -100.0f64..100.0, g in 1u32..6) {
            use HeightConvention::*;
            for a in [Faltings, Normalized, Colmez] {
                for b in [Faltings, Normalized, Colmez] {
                    let h = HeightValue::new(v, a);
                    let back = convert_height(convert_height(h, b, g), a, g);
                    prop_assert!((back.value - v).abs() <= 1e-13 * v.abs().max(1.0));
                    let via = convert_height(convert_height(h, Colmez, g), b, g);
                    prop_assert!((via.value - convert_height(h, b, g).value).abs() <= 1e-13 * v.abs().max(1.0));
                }
            }
        }

        #[test]
        fn product_heights_add(a in -5.0f64..5.0, b in -5.0f64..5.0, g1 in 1u32..3, g2 in 1u32..3) {
            use HeightConvention::*;
            let p = product_height(HeightValue::new(a, Faltings), HeightValue::new(b, Faltings)).unwrap();
            let pn = convert_height(p, Normalized, g1 + g2);
            let sum = product_height(
                convert_height(HeightValue::new(a, Faltings), Normalized, g1),
                convert_height(HeightValue::new(b, Faltings), Normalized, g2),
            ).unwrap();
            prop_assert!((pn.value - sum.value).abs() < 1e-13);
        }

        #[test]
        fn height_is_independent_of_boundary_representative(im in 0.87f64..3.0) {
            let a = faltings_height_silverman(&record(SiegelTau::new(0.5, im).unwrap(), 1.0)).unwrap();
            let b = faltings_height_silverman(&record(SiegelTau::new(-0.5, im).unwrap(), 1.0)).unwrap();
            prop_assert!((a.value - b.value).abs() < 1e-13);
        }
    }
}
