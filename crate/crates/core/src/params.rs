use crate::error::{Error, Result};

/// Which pairs of databases count as neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Neighboring {
    /// Unbounded DP: neighbors differ by one user being added or removed.
    #[default]
    AddRemove,
    /// Bounded DP: neighbors differ by one user changing their data. Handled
    /// by running the add/remove mechanisms with half the budget.
    Replace,
}

/// An `(epsilon, delta)` budget together with its neighboring model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyParams {
    epsilon: f64,
    delta: f64,
    neighboring: Neighboring,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64, neighboring: Neighboring) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidParameters("epsilon must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameters("delta must lie in [0, 1]"));
        }
        Ok(Self {
            epsilon,
            delta,
            neighboring,
        })
    }

    /// Shorthand for the add/remove model.
    pub fn add_remove(epsilon: f64, delta: f64) -> Result<Self> {
        Self::new(epsilon, delta, Neighboring::AddRemove)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn neighboring(&self) -> Neighboring {
        self.neighboring
    }

    /// Budget actually spent by the add/remove mechanisms.
    pub fn effective_epsilon(&self) -> f64 {
        match self.neighboring {
            Neighboring::AddRemove => self.epsilon,
            Neighboring::Replace => self.epsilon / 2.0,
        }
    }

    pub fn effective_delta(&self) -> f64 {
        match self.neighboring {
            Neighboring::AddRemove => self.delta,
            Neighboring::Replace => self.delta / 2.0,
        }
    }

    /// Splits the budget evenly across `kappa` partitions per user.
    pub fn divided(&self, kappa: u32) -> Result<Self> {
        if kappa == 0 {
            return Err(Error::InvalidParameters("kappa must be >= 1"));
        }
        let k = f64::from(kappa);
        Self::new(self.epsilon / k, self.delta / k, self.neighboring)
    }

    /// The equivalent add/remove budget.
    pub fn to_add_remove(&self) -> Self {
        Self {
            epsilon: self.effective_epsilon(),
            delta: self.effective_delta(),
            neighboring: Neighboring::AddRemove,
        }
    }
}
