//! Purity-based inversion of global depolarization.
//!
//! A prepared state is modelled as `ρ = p |ψ⟩⟨ψ| + (1 − p) I / d`. Then
//! `Tr(ρ²) = p² + 2p(1 − p)/d + (1 − p)²/d = 1/d + p²(1 − 1/d)`, and the
//! measured energy is `p E + (1 − p) Tr(H) / d`. Both relations invert in
//! closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest fidelity that is still divided by.
pub const FIDELITY_FLOOR: f64 = 1e-6;

const PURITY_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MitigationInput {
    pub e_measured: f64,
    pub purity: f64,
    pub trace_h: f64,
    pub dim: usize,
}

impl MitigationInput {
    pub fn validate(&self) -> Result<()> {
        check_purity(self.purity, self.dim)
    }
}

fn check_purity(purity: f64, dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!("dimension must be >= 2, got {dim}")));
    }
    let floor = 1.0 / dim as f64;
    if !purity.is_finite() || purity < floor - PURITY_SLACK || purity > 1.0 + PURITY_SLACK {
        return Err(Error::InvalidArgument(format!(
            "purity {purity} outside [{floor}, 1] for dimension {dim}"
        )));
    }
    Ok(())
}

/// Weight `p` of the pure component that reproduces `purity` in dimension `dim`.
pub fn estimate_fidelity(purity: f64, dim: usize) -> Result<f64> {
    check_purity(purity, dim)?;
    let inv_d = 1.0 / dim as f64;
    let p_sq = ((purity - inv_d) / (1.0 - inv_d)).clamp(0.0, 1.0);
    Ok(p_sq.sqrt())
}

/// Energy of the pure component, `(E − (1 − p) Tr(H)/d) / p`.
pub fn mitigate_energy(input: &MitigationInput) -> Result<f64> {
    input.validate()?;
    let p = estimate_fidelity(input.purity, input.dim)?;
    if p < FIDELITY_FLOOR {
        return Err(Error::DegenerateState {
            fidelity: p,
            floor: FIDELITY_FLOOR,
        });
    }
    let mixed_energy = input.trace_h / input.dim as f64;
    Ok((input.e_measured - (1.0 - p) * mixed_energy) / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_endpoints() {
        assert_eq!(estimate_fidelity(1.0, 8).unwrap(), 1.0);
        assert_eq!(estimate_fidelity(0.125, 8).unwrap(), 0.0);
    }

    #[test]
    fn fidelity_inverts_closed_form() {
        let p: f64 = 0.9;
        let purity = p * p + 2.0 * p * (1.0 - p) / 8.0 + (1.0 - p).powi(2) / 8.0;
        assert!((purity - 0.83375).abs() < 1e-15);
        assert!((estimate_fidelity(purity, 8).unwrap() - 0.9).abs() < 1e-12);
        // A slightly off purity still lands close to 0.9.
        assert!((estimate_fidelity(0.833906, 8).unwrap() - 0.9).abs() < 1e-3);
    }

    #[test]
    fn out_of_range_purity_rejected() {
        assert!(estimate_fidelity(0.1, 8).is_err());
        assert!(estimate_fidelity(1.01, 8).is_err());
        assert!(estimate_fidelity(f64::NAN, 8).is_err());
        assert!(estimate_fidelity(0.5, 1).is_err());
        // Slack admits rounding at the edges.
        assert_eq!(estimate_fidelity(1.0 + 1e-12, 8).unwrap(), 1.0);
    }

    #[test]
    fn pure_state_untouched() {
        let input = MitigationInput { e_measured: -3.2, purity: 1.0, trace_h: 40.0, dim: 8 };
        assert_eq!(mitigate_energy(&input).unwrap(), -3.2);
    }

    #[test]
    fn traceless_observable_rescales() {
        let p: f64 = 0.6;
        let purity = 0.125 + p * p * 0.875;
        let input = MitigationInput { e_measured: 1.5, purity, trace_h: 0.0, dim: 8 };
        assert!((mitigate_energy(&input).unwrap() - 1.5 / p).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_is_degenerate() {
        let input = MitigationInput { e_measured: 1.0, purity: 0.125, trace_h: 8.0, dim: 8 };
        assert!(matches!(mitigate_energy(&input), Err(Error::DegenerateState { .. })));
    }
}
