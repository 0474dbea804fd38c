use std::fmt;

/// Default absolute tolerance for junction and compatibility gaps.
pub const JUNCTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    Bounded,
    Continuous,
    Lp,
    Compatibility,
    Interpolation,
    Summability,
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConditionKind::Bounded => "bounded",
            ConditionKind::Continuous => "continuous",
            ConditionKind::Lp => "lp",
            ConditionKind::Compatibility => "compatibility",
            ConditionKind::Interpolation => "interpolation",
            ConditionKind::Summability => "summability",
        };
        f.write_str(s)
    }
}

/// One checked equality `lhs = rhs` (or inequality `lhs < rhs`) at a location.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub location: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

impl Witness {
    pub fn equality(location: f64, lhs: f64, rhs: f64) -> Self {
        Witness { location, lhs, rhs, gap: (lhs - rhs).abs() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub kind: ConditionKind,
    pub verdict: bool,
    pub witnesses: Vec<Witness>,
    /// The scalar the verdict is about (a p-sum, a tail bound), when there is one.
    pub value: Option<f64>,
}

impl ConditionReport {
    /// Verdict from gaps: true iff every witness gap is within `tol`.
    pub fn from_gaps(kind: ConditionKind, witnesses: Vec<Witness>, tol: f64) -> Self {
        let verdict = witnesses.iter().all(|w| w.gap <= tol);
        ConditionReport { kind, verdict, witnesses, value: None }
    }

    pub fn max_gap(&self) -> f64 {
        self.witnesses.iter().map(|w| w.gap).fold(0.0, f64::max)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, if self.verdict { "holds" } else { "fails" })?;
        if let Some(v) = self.value {
            write!(f, " (value {v})")?;
        }
        if !self.witnesses.is_empty() {
            write!(f, ", max gap {:e} over {} witnesses", self.max_gap(), self.witnesses.len())?;
        }
        Ok(())
    }
}
