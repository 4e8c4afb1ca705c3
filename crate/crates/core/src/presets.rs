//! Shipped fiber descriptions.

use crate::dispersion::StepIndexFiber;

const PPSF_TOML: &str = include_str!("../data/ppsf.toml");

/// The 20 cm, Λ = 54 μm poled fiber, with `dn = 0` (uncalibrated).
pub fn ppsf() -> StepIndexFiber {
    StepIndexFiber::from_toml_str(PPSF_TOML).expect("shipped fiber description is valid")
}

#[cfg(test)]
mod tests {
    #[test]
    fn loads() {
        let f = super::ppsf();
        assert_eq!(f.length_m, 0.2);
        assert_eq!(f.poling_period_um, 54.0);
        assert_eq!(f.birefringence_dn, 0.0);
    }
}
