use std::fmt;

use crate::coeffs::ScalarFn;
use crate::error::{Error, Result};
use crate::numerics::integrate;

/// Absolutely continuous part of a measure: a bounded density on a bounded support.
#[derive(Clone)]
pub struct ContinuousPart {
    pub density: ScalarFn,
    pub support: (f64, f64),
}

impl fmt::Debug for ContinuousPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContinuousPart {{ support: {:?} }}", self.support)
    }
}

/// Finite signed measure with atoms of modulus below one.
#[derive(Debug, Clone, Default)]
pub struct SignedAtomicMeasure {
    atoms: Vec<(f64, f64)>,
    continuous: Option<ContinuousPart>,
}

impl SignedAtomicMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn point(at: f64, weight: f64) -> Result<Self> {
        Self::new(vec![(at, weight)], None)
    }

    /// Atoms with zero weight are dropped.
    pub fn new(mut atoms: Vec<(f64, f64)>, continuous: Option<ContinuousPart>) -> Result<Self> {
        for &(at, w) in &atoms {
            if !at.is_finite() || !w.is_finite() || w.abs() >= 1.0 {
                return Err(Error::AtomWeight { at, weight: w });
            }
        }
        atoms.retain(|&(_, w)| w != 0.0);
        atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in atoms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::DuplicateAtom(w[0].0));
            }
        }
        if let Some(c) = &continuous {
            let (lo, hi) = c.support;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Invalid(format!("continuous support ({lo}, {hi})")));
            }
        }
        Ok(Self { atoms, continuous })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn continuous(&self) -> Option<&ContinuousPart> {
        self.continuous.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.continuous.is_none()
    }

    pub fn atom_at(&self, x: f64) -> f64 {
        self.atoms
            .binary_search_by(|p| p.0.total_cmp(&x))
            .map(|i| self.atoms[i].1)
            .unwrap_or(0.0)
    }

    /// Continuous mass of `(-inf, x]`.
    pub fn continuous_mass_up_to(&self, x: f64) -> Result<f64> {
        match &self.continuous {
            None => Ok(0.0),
            Some(c) => {
                let (lo, hi) = c.support;
                if x <= lo {
                    return Ok(0.0);
                }
                let d = c.density.clone();
                integrate(move |y| d(y), lo, x.min(hi), 1e-13)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn rejects_unit_atom() {
        assert!(matches!(
            SignedAtomicMeasure::point(0.0, 1.0),
            Err(Error::AtomWeight { .. })
        ));
        assert!(SignedAtomicMeasure::point(0.0, -0.999).is_ok());
    }

    #[test]
    fn sorted_and_zero_dropped() {
        let m = SignedAtomicMeasure::new(vec![(2.0, 0.1), (-1.0, 0.0), (0.5, -0.2)], None).unwrap();
        assert_eq!(m.atoms(), &[(0.5, -0.2), (2.0, 0.1)]);
        assert_eq!(m.atom_at(2.0), 0.1);
        assert_eq!(m.atom_at(1.0), 0.0);
    }

    #[test]
    fn duplicate_rejected() {
        assert_eq!(
            SignedAtomicMeasure::new(vec![(1.0, 0.1), (1.0, 0.2)], None).unwrap_err(),
            Error::DuplicateAtom(1.0)
        );
    }

    #[test]
    fn continuous_mass() {
        let m = SignedAtomicMeasure::new(
            vec![],
            Some(ContinuousPart {
                density: Arc::new(|_| 0.25),
                support: (-1.0, 1.0),
            }),
        )
        .unwrap();
        assert!((m.continuous_mass_up_to(0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((m.continuous_mass_up_to(5.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(m.continuous_mass_up_to(-3.0).unwrap(), 0.0);
    }
}
