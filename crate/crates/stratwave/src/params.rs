use crate::error::{Error, Result};

/// Physical constants of the model: gravitational acceleration `g`,
/// Coriolis parameter `f`, and buoyancy frequency `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Gravitational acceleration, strictly positive (the density equation
    /// divides by it).
    pub g: f64,
    /// Coriolis parameter; may be zero or negative.
    pub f: f64,
    /// Buoyancy frequency, strictly positive (the energy density divides
    /// by its square).
    pub n: f64,
}

impl PhysicalParams {
    pub fn new(g: f64, f: f64, n: f64) -> Result<Self> {
        if !(g.is_finite() && f.is_finite() && n.is_finite()) {
            return Err(Error::InvalidParameter(
                "physical constants must be finite".into(),
            ));
        }
        if g <= 0.0 {
            return Err(Error::InvalidParameter(format!("g must be > 0, got {g}")));
        }
        if n <= 0.0 {
            return Err(Error::InvalidParameter(format!("N must be > 0, got {n}")));
        }
        Ok(Self { g, f, n })
    }

    /// `g^2 / N^2`, the weight of the density term in the energy and in
    /// the costate substitution.
    pub fn g2_over_n2(&self) -> f64 {
        (self.g / self.n) * (self.g / self.n)
    }

    /// `N^2 / g`, the buoyancy restoring coefficient of the density
    /// equation.
    pub fn n2_over_g(&self) -> f64 {
        self.n * self.n / self.g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_signs() {
        assert!(PhysicalParams::new(1.0, 0.0, 1.0).is_ok());
        assert!(PhysicalParams::new(1.0, -0.3, 1.0).is_ok());
        assert!(PhysicalParams::new(0.0, 0.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn derived_ratios() {
        let p = PhysicalParams::new(3.0, 0.0, 1.0).unwrap();
        assert_eq!(p.g2_over_n2(), 9.0);
        assert_eq!(p.n2_over_g(), 1.0 / 3.0);
    }
}
