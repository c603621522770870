use serde::{Deserialize, Serialize};

use super::{
    check_condition_g3, condition_g4, find_e_vector, hitting_ratio_constant, select_delta_star,
    vec2, AuxField, AuxFunctionSet, ConeFunctionSet, HittingGrid, Regime, Vec2, WedgeError,
    WedgeSpec,
};

/// Summary of the closed-form analytics of one wedge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WedgeAnalyticsReport {
    pub zeta: f64,
    pub alpha_star: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub regime: Regime,
    pub e: Option<Vec2>,
    pub c_e: Option<f64>,
    pub c_v: Option<f64>,
    pub c0_hitting: Option<f64>,
    pub delta_star: Option<f64>,
    #[serde(rename = "condition_G3")]
    pub condition_g3: bool,
    #[serde(rename = "condition_G4")]
    pub condition_g4: bool,
    /// Infima and suprema are grid approximations.
    pub grid_approximate: bool,
    pub warnings: Vec<String>,
}

/// Runs every analytic check that applies to the spec's regime.
pub fn analytics_report(
    spec: &WedgeSpec,
    grid: HittingGrid,
) -> Result<WedgeAnalyticsReport, WedgeError> {
    let mut warnings: Vec<String> = spec.alpha_warning().into_iter().collect();
    let e = find_e_vector(spec).ok();
    let supported = spec.alpha_star() < 1.0;
    let (delta_star, c_v, c0) = if supported {
        let d = select_delta_star(spec)?;
        let aux = AuxFunctionSet::new(spec, d)?;
        let c0 = if spec.regime() == Regime::AlphaPositive {
            let h = hitting_ratio_constant(spec, d, grid)?;
            if !h.stable {
                warnings.push("hitting ratio grid refinement did not settle to 1%".into());
            }
            Some(h.value)
        } else {
            None
        };
        (Some(d), aux.c_v(), c0)
    } else {
        warnings.push(format!(
            "alpha* = {} >= 1: auxiliary functions not constructed",
            spec.alpha_star()
        ));
        (None, None, None)
    };
    Ok(WedgeAnalyticsReport {
        zeta: spec.zeta(),
        alpha_star: spec.alpha_star(),
        zeta1: spec.zeta1(),
        zeta2: spec.zeta2(),
        regime: spec.regime(),
        e: e.map(|(v, _)| v),
        c_e: e.map(|(_, c)| c),
        c_v,
        c0_hitting: c0,
        delta_star,
        condition_g3: check_condition_g3(spec),
        condition_g4: condition_g4(spec).holds(),
        grid_approximate: true,
        warnings,
    })
}

/// One sample of the cone and auxiliary functions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub r: f64,
    pub z: f64,
    pub psi: f64,
    pub phi: f64,
    pub v: Option<f64>,
    pub v1: Option<f64>,
    pub v2: Option<f64>,
}

/// Samples `Ψ`, `Φ` and the auxiliary functions on `radii × angles`.
/// Auxiliary values are given only inside the ball of radius δ*.
pub fn field_table(spec: &WedgeSpec, radii: &[f64], n_angular: usize) -> Vec<FieldRow> {
    let cone = ConeFunctionSet::new(spec);
    let aux = select_delta_star(spec)
        .ok()
        .and_then(|d| AuxFunctionSet::new(spec, d).ok());
    let mut rows = Vec::with_capacity(radii.len() * (n_angular + 1));
    for &r in radii {
        for i in 0..=n_angular {
            let z = spec.zeta() * i as f64 / n_angular.max(1) as f64;
            let p = vec2::polar(r, z);
            let pick = |f: AuxField| {
                aux.as_ref()
                    .filter(|a| a.has(f) && r <= a.delta_star())
                    .map(|a| a.value(f, p))
            };
            rows.push(FieldRow {
                r,
                z,
                psi: cone.harmonic_polar(r, z),
                phi: cone.gauge_at(p),
                v: pick(AuxField::V),
                v1: pick(AuxField::V1),
                v2: pick(AuxField::V2),
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn report_for_positive_regime() {
        let spec = WedgeSpec::from_angles(0.75 * PI, 3.0 * PI / 16.0, 3.0 * PI / 16.0).unwrap();
        let r = analytics_report(&spec, HittingGrid::default()).unwrap();
        assert!((r.alpha_star - 0.5).abs() < 1e-15);
        assert!(r.condition_g3 && r.condition_g4);
        assert!(r.c0_hitting.unwrap() > 0.0);
        assert!(r.warnings.is_empty());
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("condition_G3").is_some());
    }

    #[test]
    fn report_for_large_alpha_warns() {
        let spec = WedgeSpec::from_angles(0.5, 0.4, 0.4).unwrap();
        let r = analytics_report(&spec, HittingGrid::default()).unwrap();
        assert!(r.delta_star.is_none());
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn table_shape() {
        let spec = WedgeSpec::from_angles(PI / 2.0, -PI / 8.0, -PI / 8.0).unwrap();
        let rows = field_table(&spec, &[1e-6, 1.0], 4);
        assert_eq!(rows.len(), 10);
        assert!(rows[0].v.is_some() && rows[0].v1.is_none());
        assert!(rows[9].v.is_none());
    }
}
