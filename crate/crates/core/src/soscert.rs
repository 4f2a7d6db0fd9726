//! Exact checking of weighted sum-of-squares certificates and of
//! coefficient-wise nonnegativity.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bundled;
use crate::exactnum::{parse_rational, BigRational};
use crate::inequality::{h_poly, IneqError};
use crate::polyring::{MultiPoly, PolyError, PolyJson};
use crate::report::{combine, CheckReport, Status};

#[derive(Debug, Error)]
pub enum SosError {
    #[error("malformed certificate: square {index} has non-positive weight {lambda}")]
    NonPositiveWeight { index: usize, lambda: String },
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("no bundled certificate for m2 = {0} (expected 1..=7)")]
    MissingData(u32),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Ineq(#[from] IneqError),
}

/// On-disk certificate layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    pub ring: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<String>,
    #[serde(default = "unit_scale")]
    pub scale: String,
    pub target: PolyJson,
    pub squares: Vec<SquareJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SquareJson {
    pub lambda: String,
    pub poly: PolyJson,
}

fn unit_scale() -> String {
    "1".to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedSquare {
    pub lambda: BigRational,
    pub poly: MultiPoly,
}

/// `target = sum lambda_i p_i^2`, with `target` being the bracket of
/// `host` scaled by `scale`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SosCertificate {
    pub ring: Vec<String>,
    pub host: Option<String>,
    pub scale: BigRational,
    pub target: MultiPoly,
    pub squares: Vec<WeightedSquare>,
}

impl SosCertificate {
    pub fn new(target: MultiPoly, squares: Vec<(BigRational, MultiPoly)>) -> Self {
        Self {
            ring: target.vars().iter().map(|s| s.to_string()).collect(),
            host: None,
            scale: BigRational::one(),
            target,
            squares: squares
                .into_iter()
                .map(|(lambda, poly)| WeightedSquare { lambda, poly })
                .collect(),
        }
    }

    pub fn from_json(json: &CertificateJson) -> Result<Self, SosError> {
        let ring: Vec<&str> = json.ring.iter().map(String::as_str).collect();
        let rational = |s: &str| parse_rational(s).map_err(|_| SosError::Malformed(format!("bad rational `{s}`")));
        let target = MultiPoly::from_json(&json.target)?.in_ring(&ring)?;
        let squares = json
            .squares
            .iter()
            .map(|sq| {
                Ok(WeightedSquare {
                    lambda: rational(&sq.lambda)?,
                    poly: MultiPoly::from_json(&sq.poly)?.in_ring(&ring)?,
                })
            })
            .collect::<Result<Vec<_>, SosError>>()?;
        Ok(Self {
            ring: json.ring.clone(),
            host: json.host.clone(),
            scale: rational(&json.scale)?,
            target,
            squares,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self, SosError> {
        let json: CertificateJson = serde_json::from_str(text).map_err(|e| SosError::Malformed(e.to_string()))?;
        Self::from_json(&json)
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            ring: self.ring.clone(),
            source: None,
            host: self.host.clone(),
            scale: self.scale.to_string(),
            target: self.target.to_json(),
            squares: self
                .squares
                .iter()
                .map(|s| SquareJson {
                    lambda: s.lambda.to_string(),
                    poly: s.poly.to_json(),
                })
                .collect(),
        }
    }

    /// The bundled certificate for the `h_{m2}` bracket.
    pub fn bundled(m2: u32) -> Result<Self, SosError> {
        let text = bundled::certificate_json(m2).ok_or(SosError::MissingData(m2))?;
        Self::from_json_str(text)
    }

    fn check_weights(&self) -> Result<(), SosError> {
        for (index, sq) in self.squares.iter().enumerate() {
            if !sq.lambda.is_positive() {
                return Err(SosError::NonPositiveWeight {
                    index,
                    lambda: sq.lambda.to_string(),
                });
            }
        }
        Ok(())
    }

    /// `sum lambda_i p_i^2`.
    pub fn expansion(&self) -> MultiPoly {
        let ring: Vec<&str> = self.ring.iter().map(String::as_str).collect();
        self.squares
            .iter()
            .fold(MultiPoly::zero(&ring), |acc, sq| acc + (&sq.poly * &sq.poly).scale(&sq.lambda))
    }

    /// Weight times value of the first square that is a nonzero constant.
    pub fn constant_square(&self) -> Option<BigRational> {
        self.squares
            .iter()
            .find(|sq| !sq.poly.is_zero() && sq.poly.total_degree() == 0)
            .map(|sq| {
                let c = sq.poly.constant_term();
                &sq.lambda * &c * &c
            })
    }
}

/// Verified iff `target - sum lambda_i p_i^2` is identically zero.
pub fn verify_sos(cert: &SosCertificate) -> Result<CheckReport, SosError> {
    cert.check_weights()?;
    let residual = &cert.target - &cert.expansion();
    let status = if residual.is_zero() {
        Status::Verified
    } else {
        Status::ResidualNonzero
    };
    let mut report = CheckReport::new("sos", status)
        .with("ring", cert.ring.join(","))
        .with("squares", cert.squares.len())
        .with("target_terms", cert.target.len());
    if let Some(host) = &cert.host {
        report = report.with("host", host);
    }
    if status == Status::ResidualNonzero {
        report = report
            .with_residual(&residual)
            .with_note(format!("residual has {} terms", residual.len()));
    } else if let Some(k) = cert.constant_square() {
        report = report.with_note(format!(
            "nonnegative certified; strictness via constant square: target >= {k} > 0"
        ));
    }
    Ok(report)
}

/// Verified iff no stored coefficient is negative; offending monomials are witnesses.
pub fn verify_nonneg_coeffs(p: &MultiPoly, label: &str) -> CheckReport {
    let negative = p.negative_terms();
    let status = if negative.is_empty() {
        Status::Verified
    } else {
        Status::CoefficientNegative
    };
    let vars = p.vars();
    let mut report = CheckReport::new("nonneg_coeffs", status)
        .with("polynomial", label)
        .with("terms", p.len())
        .with("negative_terms", negative.len());
    for (m, c) in negative {
        let mono = MultiPoly::from_terms(&vars, [(m.exponents().to_vec(), BigRational::one())])
            .expect("monomial from the same ring");
        report = report.with_witness(mono.to_expr_string(), c);
    }
    if status == Status::Verified && !p.is_zero() {
        let c0 = p.constant_term();
        if !c0.is_zero() {
            report = report.with_note(format!("nonnegative certified; strictness via constant term {c0}"));
        }
    }
    report
}

/// Certifies `h_{m2} > 0`: the regenerated `h_{m2}` must match the reference
/// expansion, split as `scale * bracket + rest` with `rest` coefficient-wise
/// nonnegative, and the bracket must have a valid SOS certificate.
pub fn verify_bracket_positivity(m2: u32) -> Result<CheckReport, SosError> {
    let cert = SosCertificate::bundled(m2)?;
    let reference = bundled::h_expansion(m2).ok_or(SosError::MissingData(m2))?;
    let ring: Vec<&str> = cert.ring.iter().map(String::as_str).collect();
    let host = h_poly(m2)?.in_ring(&ring)?;

    let reference_diff = &host - &reference.in_ring(&ring)?;
    let reference_status = if reference_diff.is_zero() {
        Status::Verified
    } else {
        Status::ResidualNonzero
    };
    let rest = &host - &cert.target.scale(&cert.scale);
    let rest_report = verify_nonneg_coeffs(&rest, &format!("h{m2} - scale * bracket"));
    let sos = verify_sos(&cert)?;

    let status = combine([reference_status, rest_report.status, sos.status], Status::Verified);
    let mut report = CheckReport::new("bracket_positivity", status)
        .with("m2", m2)
        .with("scale", &cert.scale)
        .with("host_terms", host.len())
        .with("rest_terms", rest.len())
        .with("reference_expansion", format!("{reference_status:?}").to_lowercase())
        .with("rest_nonneg", format!("{:?}", rest_report.status).to_lowercase())
        .with("sos", format!("{:?}", sos.status).to_lowercase());
    if reference_status != Status::Verified {
        report = report
            .with_residual(&reference_diff)
            .with_note("regenerated h differs from the reference expansion (residual attached)");
    } else if sos.status != Status::Verified {
        report.residual = sos.residual.clone();
        report = report.with_note("certificate residual attached");
    }
    report.witnesses.extend(rest_report.witnesses);
    if status == Status::Verified {
        let k = cert.constant_square().unwrap_or_else(BigRational::zero);
        report = report.with_note(format!(
            "nonnegative certified; strictness via constant square: h{m2} >= {} > 0",
            &cert.scale * k
        ));
    }
    Ok(report)
}

/// [`verify_sos`] over all bundled certificates, in `m2` order.
pub fn verify_all_bundled() -> Result<Vec<CheckReport>, SosError> {
    (1..=7u32)
        .into_par_iter()
        .map(|m2| SosCertificate::bundled(m2).and_then(|c| verify_sos(&c)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, rat};
    use crate::inequality::g_poly;
    use proptest::prelude::*;

    fn poly(text: &str) -> MultiPoly {
        MultiPoly::parse(text, &["b", "c"]).unwrap()
    }

    #[test]
    fn trivial_certificates() {
        let ok = SosCertificate::new(poly("b^2"), vec![(int(1), poly("b"))]);
        assert_eq!(verify_sos(&ok).unwrap().status, Status::Verified);
        let bad = SosCertificate::new(poly("b^2 + 1"), vec![(int(1), poly("b"))]);
        let r = verify_sos(&bad).unwrap();
        assert_eq!(r.status, Status::ResidualNonzero);
        assert_eq!(r.residual, Some(poly("1").to_json()));
        let neg = SosCertificate::new(poly("b^2"), vec![(int(0), poly("b"))]);
        assert!(matches!(verify_sos(&neg), Err(SosError::NonPositiveWeight { index: 0, .. })));
    }

    #[test]
    fn nonneg_coeff_examples() {
        let r = verify_nonneg_coeffs(&poly("b^2 - c^2"), "p");
        assert_eq!(r.status, Status::CoefficientNegative);
        assert_eq!(r.witnesses[0].at, "c^2");
        assert_eq!(r.witnesses[0].value, "-1");
        assert_eq!(verify_nonneg_coeffs(&g_poly(), "g").status, Status::Verified);
        assert_eq!(verify_nonneg_coeffs(&bundled::g_expansion(), "g").status, Status::Verified);
    }

    #[test]
    fn bundled_certificates_verify() {
        let reports = verify_all_bundled().unwrap();
        assert_eq!(reports.len(), 7);
        for (i, r) in reports.iter().enumerate() {
            assert_eq!(r.status, Status::Verified, "h{}: {:?}", i + 1, r.residual);
        }
        let scales = ["1/9", "1/45", "1/35", "1/315", "1/63", "1/7", "1/45"];
        for (m2, scale) in (1..=7).zip(scales) {
            let r = verify_bracket_positivity(m2).unwrap();
            assert_eq!(r.status, Status::Verified, "h{m2}");
            assert_eq!(r.subject["scale"], scale);
        }
        assert!(matches!(verify_bracket_positivity(8), Err(SosError::MissingData(8))));
    }

    #[test]
    fn first_bracket_matches_reference() {
        let cert = SosCertificate::bundled(1).unwrap();
        let expected =
            poly("48b^6c^4 + 664b^4c^4 - 48b^4c^2 + 2884b^2c^4 + 3003c^6 - 546b^2c^2 + 3766c^4 + 36b^2 - 1557c^2 + 180");
        assert_eq!(cert.target, expected);
        assert_eq!(cert.squares.len(), 10);
        assert_eq!(cert.squares[0].lambda, int(4924));
    }

    #[test]
    fn json_round_trip() {
        let cert = SosCertificate::bundled(3).unwrap();
        let text = serde_json::to_string(&cert.to_json()).unwrap();
        assert_eq!(SosCertificate::from_json_str(&text).unwrap(), cert);
    }

    fn certificate() -> impl Strategy<Value = (u32, usize, usize)> {
        (1u32..=7, 0usize..10, 0usize..8)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn perturbing_a_square_coefficient_is_detected((m2, sq, term) in certificate()) {
            let mut cert = SosCertificate::bundled(m2).unwrap();
            let sq = sq % cert.squares.len();
            let p = &cert.squares[sq].poly;
            let (mono, _) = p.sorted_terms()[term % p.len()];
            let bump = MultiPoly::from_terms(&p.vars(), [(mono.exponents().to_vec(), int(1))]).unwrap();
            cert.squares[sq].poly = p + &bump;
            prop_assert_eq!(verify_sos(&cert).unwrap().status, Status::ResidualNonzero);
        }

        #[test]
        fn perturbing_target_or_weight_is_detected(m2 in 1u32..=7, idx in 0usize..40, weight in any::<bool>()) {
            let mut cert = SosCertificate::bundled(m2).unwrap();
            if weight {
                let i = idx % cert.squares.len();
                cert.squares[i].lambda += int(1);
            } else {
                let (mono, _) = cert.target.sorted_terms()[idx % cert.target.len()];
                let bump = MultiPoly::from_terms(&cert.target.vars(), [(mono.exponents().to_vec(), int(1))]).unwrap();
                cert.target = &cert.target + &bump;
            }
            prop_assert_eq!(verify_sos(&cert).unwrap().status, Status::ResidualNonzero);
        }

        #[test]
        fn square_order_does_not_matter(m2 in 1u32..=7, seed in any::<u64>()) {
            let mut cert = SosCertificate::bundled(m2).unwrap();
            let n = cert.squares.len();
            cert.squares.rotate_left((seed % n as u64) as usize);
            if seed % 2 == 0 {
                cert.squares.reverse();
            }
            prop_assert_eq!(verify_sos(&cert).unwrap().status, Status::Verified);
        }

        #[test]
        fn certified_targets_exceed_the_constant_square(
            m2 in 1u32..=7, bn in -60i64..60, bd in 1i64..20, cn in -60i64..60, cd in 1i64..20
        ) {
            let cert = SosCertificate::bundled(m2).unwrap();
            let value = cert.target.eval_at(&[("b", rat(bn, bd)), ("c", rat(cn, cd))]).unwrap();
            let k = cert.constant_square().unwrap();
            prop_assert!(k.is_positive());
            prop_assert!(value >= k);
        }
    }
}
