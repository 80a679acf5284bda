//! Problem files.
//!
//! A problem file is a TOML document:
//!
//! ```toml
//! dim = 2
//! feasible_point = [0.5, 0.5]   # optional, enables Fejér diagnostics
//!
//! [[sets]]
//! kind = "hyperslab"
//! normal = [1.0, 0.0]
//! lower = 0.0
//! upper = 1.0
//!
//! [[sets]]
//! kind = "ball"
//! center = [0.0, 0.0]
//! radius = 1.0
//! beta = 0.25
//! ```
//!
//! Kinds: `halfspace` and `hyperplane` (`normal`, `offset`), `hyperslab`
//! (`normal`, `lower`, `upper`), `ball` (`center`, `radius`), `box` (`lower`,
//! `upper` as vectors). Every set carries an enlargement depth `beta > 0`,
//! except that a hyperslab may omit it: the slab is then the constraint itself,
//! read as the half-width enlargement of its median hyperplane.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use valiant_core::sets::ConvexSet;
use valiant_core::{
    Ball, BoxSet, Constraint, FeasibilityProblem, Halfspace, Hyperplane, Hyperslab, Point,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible_point: Option<Vec<f64>>,
    pub sets: Vec<SetSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SetSpec {
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
        beta: f64,
    },
    Hyperplane {
        normal: Vec<f64>,
        offset: f64,
        beta: f64,
    },
    Hyperslab {
        normal: Vec<f64>,
        lower: f64,
        upper: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        beta: f64,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
        beta: f64,
    },
}

impl SetSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SetSpec::Halfspace { .. } => "halfspace",
            SetSpec::Hyperplane { .. } => "hyperplane",
            SetSpec::Hyperslab { .. } => "hyperslab",
            SetSpec::Ball { .. } => "ball",
            SetSpec::Box { .. } => "box",
        }
    }

    /// A hyperslab given without `beta`: usable by the ARM method.
    pub fn as_plain_slab(&self) -> Option<(&[f64], f64, f64)> {
        match self {
            SetSpec::Hyperslab {
                normal,
                lower,
                upper,
                beta: None,
            } => Some((normal, *lower, *upper)),
            _ => None,
        }
    }
}

/// A problem-file error, anchored to a line of the source when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ProblemError {}

/// A validated problem ready for the solvers.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub file: ProblemFile,
    pub problem: FeasibilityProblem,
    /// Present when every set is a hyperslab without `beta`.
    pub slabs: Option<Vec<Hyperslab>>,
    pub feasible_point: Option<Point>,
}

/// Line (1-based) of the `index`-th `[[sets]]` header.
fn set_header_line(src: &str, index: usize) -> Option<usize> {
    src.lines()
        .enumerate()
        .filter(|(_, l)| l.trim_start().starts_with("[[sets]]"))
        .nth(index)
        .map(|(n, _)| n + 1)
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

impl ProblemFile {
    pub fn parse(src: &str) -> Result<Self, ProblemError> {
        toml::from_str(src).map_err(|e| ProblemError {
            line: e.span().map(|s| line_of_offset(src, s.start)),
            message: e.message().trim().to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem files always serialize")
    }

    /// Parses and validates `src`.
    pub fn load_str(src: &str) -> Result<LoadedProblem, ProblemError> {
        let file = Self::parse(src)?;
        file.build().map_err(|(index, message)| ProblemError {
            line: index.and_then(|i| set_header_line(src, i)),
            message,
        })
    }

    pub fn load(path: &Path) -> Result<LoadedProblem, ProblemError> {
        let src = std::fs::read_to_string(path).map_err(|e| ProblemError {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::load_str(&src)
    }

    /// Validates the document; errors carry the offending set index.
    pub fn build(&self) -> Result<LoadedProblem, (Option<usize>, String)> {
        if self.dim == 0 {
            return Err((None, "dim must be positive".into()));
        }
        if self.sets.is_empty() {
            return Err((None, "at least one [[sets]] entry is required".into()));
        }
        let dim = self.dim;
        let vector = |name: &str, v: &[f64]| -> Result<Point, String> {
            if v.len() != dim {
                return Err(format!(
                    "`{name}` has {} entries, expected dim = {dim}",
                    v.len()
                ));
            }
            Point::new(v.to_vec()).map_err(|e| format!("`{name}`: {e}"))
        };

        let mut constraints = Vec::with_capacity(self.sets.len());
        for (i, spec) in self.sets.iter().enumerate() {
            let at = |e: String| (Some(i), format!("set #{} ({}): {e}", i + 1, spec.kind()));
            let constraint = build_constraint(spec, vector).map_err(at)?;
            constraints.push(constraint);
        }
        let problem = FeasibilityProblem::new(constraints).map_err(|e| (None, e.to_string()))?;

        let slabs = self
            .sets
            .iter()
            .map(|s| s.as_plain_slab())
            .collect::<Option<Vec<_>>>()
            .map(|plain| {
                plain
                    .into_iter()
                    .map(|(n, lo, hi)| {
                        Hyperslab::new(Point::new(n.to_vec()).expect("checked"), lo, hi)
                            .expect("checked")
                    })
                    .collect()
            });
        let feasible_point = self
            .feasible_point
            .as_deref()
            .map(|v| vector("feasible_point", v))
            .transpose()
            .map_err(|e| (None, e))?;

        Ok(LoadedProblem {
            file: self.clone(),
            problem,
            slabs,
            feasible_point,
        })
    }
}

fn build_constraint(
    spec: &SetSpec,
    vector: impl Fn(&str, &[f64]) -> Result<Point, String>,
) -> Result<Constraint, String> {
    let err = |e: valiant_core::Error| e.to_string();
    let (set, beta): (Arc<dyn ConvexSet>, f64) = match spec {
        SetSpec::Halfspace {
            normal,
            offset,
            beta,
        } => (
            Arc::new(Halfspace::new(vector("normal", normal)?, *offset).map_err(err)?),
            *beta,
        ),
        SetSpec::Hyperplane {
            normal,
            offset,
            beta,
        } => (
            Arc::new(Hyperplane::new(vector("normal", normal)?, *offset).map_err(err)?),
            *beta,
        ),
        SetSpec::Hyperslab {
            normal,
            lower,
            upper,
            beta,
        } => {
            let slab = Hyperslab::new(vector("normal", normal)?, *lower, *upper).map_err(err)?;
            match beta {
                Some(beta) => (Arc::new(slab), *beta),
                None => {
                    if upper <= lower {
                        return Err(
                            "a hyperslab without `beta` needs upper > lower (zero-width slab)"
                                .into(),
                        );
                    }
                    let (plane, half_width) = slab.median();
                    (Arc::new(plane), half_width)
                }
            }
        }
        SetSpec::Ball {
            center,
            radius,
            beta,
        } => (
            Arc::new(Ball::new(vector("center", center)?, *radius).map_err(err)?),
            *beta,
        ),
        SetSpec::Box { lower, upper, beta } => (
            Arc::new(BoxSet::new(vector("lower", lower)?, vector("upper", upper)?).map_err(err)?),
            *beta,
        ),
    };
    Constraint::new(set, beta).map_err(err)
}
