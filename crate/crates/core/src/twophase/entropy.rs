use serde::{Deserialize, Serialize};

use super::profile::DensityProfile;
use super::{h, TwoPhaseConstants, TwoPhaseError};

/// Which sign pattern of `f_r'(rho(0+))`, `f_l'(rho(0-))` holds at the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCase {
    /// Both nonnegative.
    Eb1,
    /// Both nonpositive.
    Eb2,
    /// `f_r' <= 0 <= f_l'`.
    Eb3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    /// Positions `x != 0` of jumps with `rho(x+) < rho(x-)`.
    pub ei_violations: Vec<f64>,
    /// `|c2 h(rho(0+)) - c1 h(rho(0-))|`.
    pub flux_residual: f64,
    pub eb_case: Option<BoundaryCase>,
    pub rho_left: f64,
    pub rho_right: f64,
}

impl EntropyReport {
    pub fn passes(&self, flux_tol: f64) -> bool {
        self.ei_violations.is_empty() && self.flux_residual < flux_tol && self.eb_case.is_some()
    }
}

/// Classifies the interface, treating characteristic speeds within `tol` of 0 as 0.
pub(crate) fn boundary_case(rho_left: f64, rho_right: f64, c1: f64, c2: f64, tol: f64) -> Option<BoundaryCase> {
    let snap = |v: f64| if v.abs() <= tol { 0.0 } else { v };
    let fr = snap(c2 * (1.0 - 2.0 * rho_right));
    let fl = snap(c1 * (1.0 - 2.0 * rho_left));
    if fr >= 0.0 && fl >= 0.0 {
        Some(BoundaryCase::Eb1)
    } else if fr <= 0.0 && fl <= 0.0 {
        Some(BoundaryCase::Eb2)
    } else if fr <= 0.0 && fl >= 0.0 {
        Some(BoundaryCase::Eb3)
    } else {
        None
    }
}

/// Interior and interface entropy conditions for a profile at time `profile.t`.
/// One-sided limits at 0 come from the piece structure; 0 must be a piece end
/// or an interior point of a piece.
pub fn entropy_check(profile: &DensityProfile, c1: f64, c2: f64) -> Result<EntropyReport, TwoPhaseError> {
    TwoPhaseConstants::new(c1, c2)?;
    if profile.pieces.is_empty() {
        return Err(TwoPhaseError::Structure("profile has no pieces".into()));
    }
    let ei_violations = profile
        .jumps()
        .into_iter()
        .filter(|j| j.x != 0.0 && j.right < j.left)
        .map(|j| j.x)
        .collect();
    let rho_left = profile.left_limit(0.0);
    let rho_right = profile.right_limit(0.0);
    Ok(EntropyReport {
        ei_violations,
        flux_residual: (c2 * h(rho_right) - c1 * h(rho_left)).abs(),
        eb_case: boundary_case(rho_left, rho_right, c1, c2, 0.0),
        rho_left,
        rho_right,
    })
}

impl DensityProfile {
    /// Piecewise-constant profile from bin averages on consecutive bins
    /// `edges[k]..edges[k + 1]`. Jumps larger than three times both
    /// neighbouring jumps are treated as shocks; smaller steps are joined
    /// as a discretized fan. `edges` must contain 0.
    pub fn from_samples(t: f64, edges: &[f64], values: &[f64]) -> Result<(Self, Vec<f64>), TwoPhaseError> {
        if edges.len() != values.len() + 1 || values.is_empty() {
            return Err(TwoPhaseError::Structure(format!(
                "{} edges for {} bins",
                edges.len(),
                values.len()
            )));
        }
        if !edges.contains(&0.0) {
            return Err(TwoPhaseError::Structure("no bin edge at 0".into()));
        }
        let mut parts: Vec<(f64, super::PieceKind)> = values
            .iter()
            .enumerate()
            .map(|(k, &v)| (edges[k + 1], super::PieceKind::Plateau(v)))
            .collect();
        parts.last_mut().unwrap().0 = f64::INFINITY;
        let jumps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let shocks = (0..jumps.len())
            .filter(|&k| {
                let size = jumps[k].abs();
                let before = if k > 0 { jumps[k - 1].abs() } else { 0.0 };
                let after = jumps.get(k + 1).map_or(0.0, |j| j.abs());
                size > 0.0 && size > 3.0 * before && size > 3.0 * after
            })
            .map(|k| edges[k + 1])
            .collect();
        Ok((DensityProfile::from_pieces(t, &parts), shocks))
    }
}

/// Entropy conditions on a sampled profile. `E_i` is checked only at
/// detected shocks, since small steps of a discretized fan decrease. The
/// one-sided limits at 0 are extrapolated linearly from the two nearest bins
/// on each side unless a shock separates them, and characteristic speeds
/// within `sign_tol` of 0 count as 0.
pub fn entropy_check_samples(
    t: f64,
    edges: &[f64],
    values: &[f64],
    c1: f64,
    c2: f64,
    sign_tol: f64,
) -> Result<EntropyReport, TwoPhaseError> {
    let (profile, shocks) = DensityProfile::from_samples(t, edges, values)?;
    let mut report = entropy_check(&profile, c1, c2)?;
    report
        .ei_violations
        .retain(|x| shocks.iter().any(|s| s == x));

    let zero = edges.iter().position(|&e| e == 0.0).unwrap();
    let mid = |k: usize| 0.5 * (edges[k] + edges[k + 1]);
    let extrapolate = |near: usize, far: usize, between: f64| {
        if shocks.contains(&between) {
            values[near]
        } else {
            let slope = (values[near] - values[far]) / (mid(near) - mid(far));
            (values[near] + slope * (0.0 - mid(near))).clamp(0.0, 1.0)
        }
    };
    if zero >= 2 {
        report.rho_left = extrapolate(zero - 1, zero - 2, edges[zero - 1]);
    }
    if zero + 1 < values.len() {
        report.rho_right = extrapolate(zero, zero + 1, edges[zero + 1]);
    }
    report.flux_residual = (c2 * h(report.rho_right) - c1 * h(report.rho_left)).abs();
    report.eb_case = boundary_case(report.rho_left, report.rho_right, c1, c2, sign_tol);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twophase::{profile, PieceKind, ProfileCase};

    #[test]
    fn corollary_profiles_pass() {
        for (rho, expect) in [
            (0.1, BoundaryCase::Eb1),
            (0.3, BoundaryCase::Eb2),
            (0.7, BoundaryCase::Eb2),
        ] {
            let (_, p) = profile(rho, 2.0, 1.0, 1.0).unwrap();
            let r = entropy_check(&p, 2.0, 1.0).unwrap();
            assert!(r.ei_violations.is_empty());
            assert!(r.flux_residual < 1e-12, "rho {rho}: {}", r.flux_residual);
            assert_eq!(r.eb_case, Some(expect));
            assert!(r.passes(1e-10));
        }
    }

    #[test]
    fn critical_case_flux_identity() {
        let k = TwoPhaseConstants::new(2.0, 1.0).unwrap();
        let (case, p) = profile(0.3, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(case, ProfileCase::Critical);
        let r = entropy_check(&p, 2.0, 1.0).unwrap();
        assert!((r.rho_left - (1.0 - k.rho_star)).abs() < 1e-15);
        assert_eq!(r.rho_right, 0.5);
        assert!((2.0 * h(1.0 - k.rho_star) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_constant_passes() {
        let p = DensityProfile::from_pieces(1.0, &[(f64::INFINITY, PieceKind::Plateau(0.4))]);
        let r = entropy_check(&p, 1.0, 1.0).unwrap();
        assert!(r.passes(1e-14));
    }

    #[test]
    fn reversed_jump_is_flagged() {
        let p = DensityProfile::from_pieces(
            1.0,
            &[
                (-0.5, PieceKind::Plateau(0.8)),
                (f64::INFINITY, PieceKind::Plateau(0.2)),
            ],
        );
        let r = entropy_check(&p, 1.0, 1.0).unwrap();
        assert_eq!(r.ei_violations, vec![-0.5]);
        assert!(!r.passes(1e-10));
    }

    #[test]
    fn sampled_profile_limits_and_structure() {
        let (_, p) = profile(0.3, 2.0, 1.0, 1.0).unwrap();
        let edges: Vec<f64> = (0..=40).map(|k| -1.0 + k as f64 * 0.05).collect();
        let values: Vec<f64> = edges
            .windows(2)
            .map(|w| p.integral(w[0], w[1]) / (w[1] - w[0]))
            .collect();
        let r = entropy_check_samples(1.0, &edges, &values, 2.0, 1.0, 1e-9).unwrap();
        assert!(r.ei_violations.is_empty());
        assert_eq!(r.eb_case, Some(BoundaryCase::Eb2));
        // Linear extrapolation is exact on the fan and on the plateau.
        assert!(r.flux_residual < 1e-12, "{r:?}");

        let shifted: Vec<f64> = edges.iter().map(|e| e + 0.025).collect();
        assert!(matches!(
            entropy_check_samples(1.0, &shifted, &values, 2.0, 1.0, 1e-9),
            Err(TwoPhaseError::Structure(_))
        ));
    }

    #[test]
    fn sampled_reversed_shock_is_flagged() {
        let edges: Vec<f64> = (0..=20).map(|k| -1.0 + k as f64 * 0.1).collect();
        let values: Vec<f64> = (0..20).map(|k| if k < 5 { 0.9 } else { 0.1 }).collect();
        let r = entropy_check_samples(1.0, &edges, &values, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(r.ei_violations.len(), 1);
        assert!((r.ei_violations[0] + 0.5).abs() < 1e-12);
    }
}
