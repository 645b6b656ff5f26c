/// Every numerical threshold used by the crate, in one place.
///
/// Guards (`symmetry`, `singular_shift`, `singular_update`, `kernel`,
/// `independence`, `tie`) are fixed. The remaining fields are slacks and are
/// multiplied by [`Tolerances::scaled`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Relative asymmetry accepted by the symmetric eigensolver.
    pub symmetry: f64,
    /// Minimum distance of a shift from the spectrum, relative to `max(1, ||S||_2)`.
    pub singular_shift: f64,
    /// Minimum `|1 + w^T M w|` for a Sherman-Morrison update.
    pub singular_update: f64,
    /// Eigenvalues at or below `kernel * ||A||_2` count as zero.
    pub kernel: f64,
    /// Gram `lambda_min` above `independence * max ||w_i||^2` means independent.
    pub independence: f64,
    /// Relative gap below which two candidate potentials are treated as tied.
    pub tie: f64,
    /// Identity defect allowed per dimension: `||sum v v^T - I||_F <= frame_defect * n`.
    pub frame_defect: f64,
    /// Allowed deviation of a column norm from 1 in column mode.
    pub unit_column: f64,
    /// Relative slack for potential monotonicity and step diagnostics.
    pub relative_slack: f64,
    /// Relative slack used when a step is retried after a strict scan found nothing.
    pub retry_slack: f64,
    /// Absolute slack for the interlacing check.
    pub interlacing: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        symmetry: 1e-12,
        singular_shift: 1e-12,
        singular_update: 1e-12,
        kernel: 1e-8,
        independence: 1e-10,
        tie: 1e-12,
        frame_defect: 1e-8,
        unit_column: 1e-8,
        relative_slack: 1e-7,
        retry_slack: 1e-9,
        interlacing: 1e-9,
    };

    pub const SCALE_ENV: &'static str = "RI_TOLERANCE_SCALE";

    /// Multiplies every slack by `factor`, leaving the guards untouched.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.frame_defect *= factor;
        self.unit_column *= factor;
        self.relative_slack *= factor;
        self.retry_slack *= factor;
        self.interlacing *= factor;
        self
    }

    /// Defaults scaled by `RI_TOLERANCE_SCALE` when it is set to a positive number.
    pub fn from_env() -> Self {
        let factor = std::env::var(Self::SCALE_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|f| f.is_finite() && *f > 0.0)
            .unwrap_or(1.0);
        Self::default().scaled(factor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_touches_only_slacks() {
        let base = Tolerances::default();
        let s = base.scaled(10.0);
        assert_eq!(s.kernel, base.kernel);
        assert_eq!(s.singular_shift, base.singular_shift);
        assert_eq!(s.relative_slack, 1e-6);
        assert_eq!(s.interlacing, 1e-8);
    }
}
