use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Largest derivative order supported anywhere in the crate.
pub const MAX_ORDER: usize = 12;

/// Truncation and tolerance parameters shared by every evaluation.
///
/// Immutable once built; cheap to copy and safe to share across threads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalContext {
    /// Euler–Maclaurin summation length as a multiple of `max(|t|, 10)`.
    pub em_terms_factor: f64,
    /// Maximum number of Bernoulli correction terms.
    pub em_correction_order: usize,
    /// Radius of the circle used for Cauchy-integral differentiation.
    pub ring_radius: f64,
    /// Trapezoid nodes on that circle.
    pub ring_nodes: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for EvalContext {
    fn default() -> Self {
        EvalContext {
            em_terms_factor: 0.3,
            em_correction_order: 30,
            ring_radius: 0.25,
            ring_nodes: 64,
            abs_tol: 1e-12,
            rel_tol: 1e-13,
        }
    }
}

impl EvalContext {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidContext(msg));
        if !(self.em_terms_factor.is_finite() && self.em_terms_factor > 0.0) {
            return bad(format!("em_terms_factor must be positive, got {}", self.em_terms_factor));
        }
        if !(2..=30).contains(&self.em_correction_order) {
            return bad(format!(
                "em_correction_order must lie in [2, 30], got {}",
                self.em_correction_order
            ));
        }
        if !(self.ring_radius.is_finite() && self.ring_radius > 0.0 && self.ring_radius < 1.0) {
            return bad(format!("ring_radius must lie in (0, 1), got {}", self.ring_radius));
        }
        if self.ring_nodes < 16 || self.ring_nodes % 2 != 0 {
            return bad(format!("ring_nodes must be even and >= 16, got {}", self.ring_nodes));
        }
        for (name, v) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }

    /// Checks that the ring can resolve derivatives up to order `k`.
    pub fn validate_for_order(&self, k: usize) -> Result<()> {
        self.validate()?;
        if k > MAX_ORDER + 2 {
            return Err(Error::Domain(format!("derivative order {k} exceeds {}", MAX_ORDER + 2)));
        }
        if self.ring_nodes < 4 * k {
            return Err(Error::InvalidContext(format!(
                "ring_nodes = {} is below 4k = {}",
                self.ring_nodes,
                4 * k
            )));
        }
        Ok(())
    }

    pub fn with_em_terms_factor(mut self, factor: f64) -> Self {
        self.em_terms_factor = factor;
        self
    }

    pub fn with_abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_ring_nodes(mut self, nodes: usize) -> Self {
        self.ring_nodes = nodes;
        self
    }

    /// Short stable checksum identifying these parameters; stored with
    /// cached zeros so results computed under other settings are not reused.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.em_terms_factor.to_bits().to_le_bytes());
        hasher.update((self.em_correction_order as u64).to_le_bytes());
        hasher.update(self.ring_radius.to_bits().to_le_bytes());
        hasher.update((self.ring_nodes as u64).to_le_bytes());
        hasher.update(self.abs_tol.to_bits().to_le_bytes());
        hasher.update(self.rel_tol.to_bits().to_le_bytes());
        let bytes = hasher.finalize();
        bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        EvalContext::default().validate().unwrap();
        EvalContext::default().validate_for_order(12).unwrap();
    }

    #[test]
    fn rejects_bad_fields() {
        let ctx = EvalContext { em_correction_order: 1, ..Default::default() };
        assert!(ctx.validate().is_err());
        let ctx = EvalContext { ring_nodes: 31, ..Default::default() };
        assert!(ctx.validate().is_err());
        let ctx = EvalContext { ring_nodes: 16, ..Default::default() };
        assert!(ctx.validate_for_order(5).is_err());
        assert!(EvalContext::default().with_abs_tol(0.0).validate().is_err());
    }

    #[test]
    fn digest_tracks_fields() {
        let a = EvalContext::default();
        assert_eq!(a.digest(), EvalContext::default().digest());
        assert_eq!(a.digest().len(), 16);
        assert_ne!(a.digest(), a.with_abs_tol(1e-11).digest());
    }
}
