use std::fmt;

use super::{
    CoefficientSet, LinearParams, MaterialError, MaterialModel, StateBounds, StateSample,
};

/// Conditions checked pointwise on a coefficient set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructureCondition {
    /// b¹¹ > 0 and b²² > 0.
    StorageMonotone,
    /// a¹¹a²² > a¹²a²¹.
    Ellipticity,
    /// b¹¹b²²a¹²a²¹ > ((b¹²a²¹ + b²¹a¹²)/2)².
    Parabolicity,
    /// Every a^{ji} > 0.
    PositiveConductivity,
}

impl StructureCondition {
    pub const ALL: [StructureCondition; 4] = [
        StructureCondition::StorageMonotone,
        StructureCondition::Ellipticity,
        StructureCondition::Parabolicity,
        StructureCondition::PositiveConductivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StructureCondition::StorageMonotone => "storage-monotone",
            StructureCondition::Ellipticity => "ellipticity",
            StructureCondition::Parabolicity => "parabolicity",
            StructureCondition::PositiveConductivity => "positive-conductivity",
        }
    }

    /// Left and right side of the condition at `c` (holds iff lhs > rhs).
    pub fn sides(self, c: &CoefficientSet) -> (f64, f64) {
        let (b, a) = (&c.b, &c.a);
        match self {
            StructureCondition::StorageMonotone => (b[0][0].min(b[1][1]), 0.0),
            StructureCondition::Ellipticity => (a[0][0] * a[1][1], a[0][1] * a[1][0]),
            StructureCondition::Parabolicity => {
                let lhs = b[0][0] * b[1][1] * a[0][1] * a[1][0];
                let half = 0.5 * (b[0][1] * a[1][0] + b[1][0] * a[0][1]);
                (lhs, half * half)
            }
            StructureCondition::PositiveConductivity => {
                (a.iter().flatten().copied().fold(f64::INFINITY, f64::min), 0.0)
            }
        }
    }

    pub fn holds(self, c: &CoefficientSet) -> bool {
        let (l, r) = self.sides(c);
        l > r
    }
}

/// Outcome of one strict inequality `lhs > rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionOutcome {
    pub lhs: f64,
    pub rhs: f64,
}

impl ConditionOutcome {
    pub fn holds(&self) -> bool {
        self.lhs > self.rhs
    }

    /// True when the inequality fails only because it is strict.
    pub fn equality(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Per-condition summary of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Inequality {
    pub condition: StructureCondition,
    pub failures: usize,
    pub first_failure: Option<(StateSample, ConditionOutcome)>,
}

impl Inequality {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureReport {
    pub samples: usize,
    pub conditions: Vec<Inequality>,
    pub evaluation_errors: Vec<(StateSample, MaterialError)>,
}

impl StructureReport {
    pub fn get(&self, c: StructureCondition) -> &Inequality {
        self.conditions
            .iter()
            .find(|q| q.condition == c)
            .expect("every condition is reported")
    }

    pub fn passed(&self, c: StructureCondition) -> bool {
        self.evaluation_errors.is_empty() && self.get(c).passed()
    }

    pub fn all_pass(&self) -> bool {
        StructureCondition::ALL.iter().all(|&c| self.passed(c))
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} samples", self.samples)?;
        for q in &self.conditions {
            match &q.first_failure {
                None => writeln!(f, "  {:<22} pass", q.condition.name())?,
                Some((s, o)) => writeln!(
                    f,
                    "  {:<22} FAIL at {} samples, first {}: {:.6e} <= {:.6e}",
                    q.condition.name(),
                    q.failures,
                    s,
                    o.lhs,
                    o.rhs
                )?,
            }
        }
        for (s, e) in &self.evaluation_errors {
            writeln!(f, "  evaluation error at {s}: {e}")?;
        }
        Ok(())
    }
}

/// Evaluates every structure condition at every sample.
pub fn check_structure_conditions(
    model: &dyn MaterialModel,
    grid: &[StateSample],
) -> StructureReport {
    let mut conditions: Vec<Inequality> = StructureCondition::ALL
        .iter()
        .map(|&condition| Inequality {
            condition,
            failures: 0,
            first_failure: None,
        })
        .collect();
    let mut evaluation_errors = Vec::new();
    for &s in grid {
        let c = match model.evaluate(s) {
            Ok(c) => c,
            Err(e) => {
                evaluation_errors.push((s, e));
                continue;
            }
        };
        for q in conditions.iter_mut() {
            let (lhs, rhs) = q.condition.sides(&c);
            if !(lhs > rhs) {
                q.failures += 1;
                if q.first_failure.is_none() {
                    q.first_failure = Some((s, ConditionOutcome { lhs, rhs }));
                }
            }
        }
    }
    StructureReport {
        samples: grid.len(),
        conditions,
        evaluation_errors,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearConditionReport {
    /// β¹¹β²²κ¹²κ²¹ > ((β¹²κ²¹ + β²¹κ¹²)/2)².
    pub parabolicity: ConditionOutcome,
    /// κ¹¹κ²² > κ¹²κ²¹.
    pub ellipticity: ConditionOutcome,
}

impl LinearConditionReport {
    pub fn all_pass(&self) -> bool {
        self.parabolicity.holds() && self.ellipticity.holds()
    }
}

impl fmt::Display for LinearConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, o) in [
            ("parabolicity", self.parabolicity),
            ("ellipticity", self.ellipticity),
        ] {
            let verdict = match (o.holds(), o.equality()) {
                (true, _) => "pass",
                (false, true) => "FAIL (equality, strict inequality required)",
                (false, false) => "FAIL",
            };
            writeln!(f, "  {name:<13} {:.6e} > {:.6e}: {verdict}", o.lhs, o.rhs)?;
        }
        Ok(())
    }
}

pub fn check_linear_conditions(p: &LinearParams) -> LinearConditionReport {
    let (b, k) = (&p.beta, &p.kappa);
    let half = 0.5 * (b[0][1] * k[1][0] + b[1][0] * k[0][1]);
    LinearConditionReport {
        parabolicity: ConditionOutcome {
            lhs: b[0][0] * b[1][1] * k[0][1] * k[1][0],
            rhs: half * half,
        },
        ellipticity: ConditionOutcome {
            lhs: k[0][0] * k[1][1],
            rhs: k[0][1] * k[1][0],
        },
    }
}

/// Tensor grid of `n_theta × n_m` samples, endpoints included.
pub fn state_grid(theta: [f64; 2], m: [f64; 2], n_theta: usize, n_m: usize) -> Vec<StateSample> {
    let axis = |r: [f64; 2], n: usize| -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![0.5 * (r[0] + r[1])],
            _ => (0..n)
                .map(|k| {
                    if k + 1 == n {
                        r[1]
                    } else {
                        r[0] + (r[1] - r[0]) * k as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    };
    let ms = axis(m, n_m);
    axis(theta, n_theta)
        .into_iter()
        .flat_map(|t| ms.iter().map(move |&mm| StateSample::new(t, mm)))
        .collect()
}

/// Wraps a model and multiplies both cross-conductivities by `factor`.
#[derive(Debug, Clone)]
pub struct CrossScaled<M> {
    pub inner: M,
    pub factor: f64,
}

impl<M: MaterialModel> MaterialModel for CrossScaled<M> {
    fn evaluate(&self, s: StateSample) -> Result<CoefficientSet, MaterialError> {
        let mut c = self.inner.evaluate(s)?;
        c.a[0][1] *= self.factor;
        c.a[1][0] *= self.factor;
        Ok(c)
    }

    fn bounds(&self) -> StateBounds {
        self.inner.bounds()
    }

    fn is_constant(&self) -> bool {
        self.inner.is_constant()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::Material;

    fn linear(beta: [[f64; 2]; 2], kappa: [[f64; 2]; 2]) -> LinearParams {
        LinearParams {
            beta,
            kappa,
            nu: [0.0, 0.0],
        }
    }

    const I: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn ellipticity_examples() {
        let grid = [StateSample::new(300.0, 0.5)];
        let ok = Material::Linear(linear(I, [[2.0, 1.0], [1.0, 2.0]]));
        let r = check_structure_conditions(&ok, &grid);
        assert!(r.passed(StructureCondition::Ellipticity));
        let bad = Material::Linear(linear(I, [[1.0, 2.0], [2.0, 1.0]]));
        let r = check_structure_conditions(&bad, &grid);
        assert!(!r.passed(StructureCondition::Ellipticity));
        let (s, o) = r.get(StructureCondition::Ellipticity).first_failure.unwrap();
        assert_eq!(s, grid[0]);
        assert_eq!((o.lhs, o.rhs), (1.0, 4.0));
    }

    #[test]
    fn linear_conditions_examples() {
        let r = check_linear_conditions(&linear(I, I));
        assert!(!r.parabolicity.holds());
        assert!(r.parabolicity.equality());

        assert!(r.to_string().contains("equality"));

        // identity storage has no cross terms, so the right side vanishes
        let r = check_linear_conditions(&linear(I, [[2.0, 1.0], [1.0, 2.0]]));
        assert_eq!((r.parabolicity.lhs, r.parabolicity.rhs), (1.0, 0.0));
        assert!(r.all_pass());

        let r = check_linear_conditions(&linear(
            [[1.0, 1.0], [1.0, 1.0]],
            [[2.0, 1.0], [1.0, 2.0]],
        ));
        assert_eq!((r.parabolicity.lhs, r.parabolicity.rhs), (1.0, 1.0));
        assert!(!r.parabolicity.holds());
        assert!(r.ellipticity.holds());

        let m = [[2.0, 1.0], [1.0, 2.0]];
        let r = check_linear_conditions(&linear(m, m));
        assert_eq!((r.parabolicity.lhs, r.parabolicity.rhs), (4.0, 1.0));
        assert!(r.all_pass());
    }

    #[test]
    fn sweep_agrees_with_linear_check_for_symmetric_storage() {
        let cases = [
            linear([[2.0, 1.0], [1.0, 2.0]], [[2.0, 1.0], [1.0, 2.0]]),
            linear([[1.0, 0.5], [0.5, 3.0]], [[1.0, 3.0], [0.2, 1.0]]),
            linear(I, I),
            linear([[1.0, 2.0], [2.0, 1.0]], [[1.0, 0.1], [0.1, 1.0]]),
        ];
        let grid = state_grid([280.0, 300.0], [0.0, 1.0], 3, 3);
        for p in cases {
            let lin = check_linear_conditions(&p);
            let sweep = check_structure_conditions(&Material::Linear(p), &grid);
            assert_eq!(
                lin.parabolicity.holds(),
                sweep.passed(StructureCondition::Parabolicity)
            );
            assert_eq!(
                lin.ellipticity.holds(),
                sweep.passed(StructureCondition::Ellipticity)
            );
        }
    }

    #[test]
    fn grid_shape() {
        let g = state_grid([273.0, 313.0], [0.05, 0.95], 11, 11);
        assert_eq!(g.len(), 121);
        assert_eq!(g[0], StateSample::new(273.0, 0.05));
        assert_eq!(g[120], StateSample::new(313.0, 0.95));
        assert_eq!(state_grid([1.0, 3.0], [0.0, 1.0], 1, 1), [StateSample::new(2.0, 0.5)]);
    }

    #[test]
    fn cross_scaling_breaks_ellipticity() {
        let m = Material::Linear(linear(I, [[2.0, 1.0], [1.0, 2.0]]));
        let grid = [StateSample::new(1.0, 1.0)];
        assert!(check_structure_conditions(&m, &grid).passed(StructureCondition::Ellipticity));
        let scaled = CrossScaled {
            inner: m,
            factor: 50.0,
        };
        let r = check_structure_conditions(&scaled, &grid);
        assert!(!r.passed(StructureCondition::Ellipticity));
    }
}
