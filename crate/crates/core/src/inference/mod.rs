//! Maximum-likelihood fitting of the four bivariate families, likelihood
//! ratio tests of unit shapes and the model selection rule built on them.

mod dataset;
mod fit;
mod loglik;
mod lr;
mod nelder_mead;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    cncdir_logpdf, dir_logpdf, kb2_logpdf, ncdir_logpdf, CNcDirParams, DirParams, Kb2Params,
    NcDirParams, ParamSet, SimplexPoint,
};
use crate::specfun::SeriesControl;

pub use dataset::{ingest_square_csv, read_simplex_csv, Dataset2D, Ingested};
pub use fit::{fit_ml, FitOptions, FitReport};
pub use loglik::loglik;
pub use lr::{lr_battery, lr_from_fits, lr_test, select_model, LrBattery, LrReport};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};

/// The bivariate families that can be fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Dir,
    Kb2,
    NcDir,
    CNcDir,
}

/// Role of one entry of a family's parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ParamKind {
    Shape,
    Tilt,
    Noncentrality,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::CNcDir, Family::NcDir, Family::Dir, Family::Kb2];

    /// Parameter names in vector order: shapes, then `delta` or the
    /// non-centralities.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Dir => &["alpha1", "alpha2", "alpha3"],
            Family::Kb2 => &["alpha1", "alpha2", "alpha3", "delta"],
            Family::NcDir | Family::CNcDir => &[
                "alpha1", "alpha2", "alpha3", "lambda1", "lambda2", "lambda3",
            ],
        }
    }

    pub fn n_params(self) -> usize {
        self.param_names().len()
    }

    pub(crate) fn kind(self, i: usize) -> ParamKind {
        match (self, i) {
            (_, 0..=2) => ParamKind::Shape,
            (Family::Kb2, _) => ParamKind::Tilt,
            _ => ParamKind::Noncentrality,
        }
    }

    /// Build the parameter set of this family from a full parameter vector.
    pub fn param_set(self, theta: &[f64]) -> Result<ParamSet> {
        if theta.len() != self.n_params() {
            return Err(Error::domain(format!(
                "{self} expects {} parameters, got {}",
                self.n_params(),
                theta.len()
            )));
        }
        let alpha = theta[..3].to_vec();
        Ok(match self {
            Family::Dir => ParamSet::from(&DirParams::new(alpha)?),
            Family::Kb2 => {
                ParamSet::from(&Kb2Params::new([theta[0], theta[1], theta[2]], theta[3])?)
            }
            Family::NcDir => ParamSet::from(&NcDirParams::new(alpha, theta[3..].to_vec())?),
            Family::CNcDir => ParamSet::from(&CNcDirParams::new(alpha, theta[3..].to_vec())?),
        })
    }

    /// Inverse of [`Family::param_set`].
    pub fn vector_from(self, p: &ParamSet) -> Result<Vec<f64>> {
        let mut v = p.alpha.clone();
        if v.len() != 3 {
            return Err(Error::domain(
                "fitted families are bivariate: three shapes expected",
            ));
        }
        match self {
            Family::Dir => {}
            Family::Kb2 => v.push(p.delta.ok_or_else(|| Error::domain("missing delta"))?),
            Family::NcDir | Family::CNcDir => {
                let l = p
                    .lambda
                    .as_ref()
                    .ok_or_else(|| Error::domain("missing lambda"))?;
                if l.len() != 3 {
                    return Err(Error::domain("three non-centralities expected"));
                }
                v.extend_from_slice(l);
            }
        }
        Ok(v)
    }
}

/// Log density of any family at `x`.
pub fn log_density(
    family: Family,
    p: &ParamSet,
    x: &SimplexPoint,
    ctl: SeriesControl,
) -> Result<f64> {
    match family {
        Family::Dir => dir_logpdf(&p.to_dir()?, x),
        Family::Kb2 => kb2_logpdf(&p.to_kb2()?, x, ctl),
        Family::NcDir => ncdir_logpdf(&p.to_ncdir()?, x, ctl),
        Family::CNcDir => cncdir_logpdf(&p.to_cncdir()?, x, ctl),
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Dir => "dir",
            Family::Kb2 => "kb2",
            Family::NcDir => "ncdir",
            Family::CNcDir => "cncdir",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dir" | "dirichlet" => Ok(Family::Dir),
            "kb" | "kb2" => Ok(Family::Kb2),
            "ncdir" => Ok(Family::NcDir),
            "cncdir" => Ok(Family::CNcDir),
            other => Err(Error::domain(format!("unknown model family '{other}'"))),
        }
    }
}

/// A family together with the set of shapes pinned to one (zero-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: Family,
    pub constraints: BTreeSet<usize>,
}

impl ModelSpec {
    pub fn unconstrained(family: Family) -> Self {
        ModelSpec {
            family,
            constraints: BTreeSet::new(),
        }
    }

    pub fn constrained(family: Family, pinned: &[usize]) -> Result<Self> {
        if let Some(i) = pinned.iter().find(|&&i| i > 2) {
            return Err(Error::domain(format!(
                "only shapes 1 to 3 can be pinned, got index {}",
                i + 1
            )));
        }
        Ok(ModelSpec {
            family,
            constraints: pinned.iter().copied().collect(),
        })
    }

    /// Parse a constraint list such as `a1,a2,a3` (empty for none).
    pub fn parse(family: Family, constraints: &str) -> Result<Self> {
        let mut pinned = Vec::new();
        for tok in constraints
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
        {
            let digits = tok.trim_start_matches(|c: char| c.is_ascii_alphabetic());
            match digits.parse::<usize>() {
                Ok(k @ 1..=3) => pinned.push(k - 1),
                _ => {
                    return Err(Error::domain(format!(
                        "cannot read constraint '{tok}'; use a1, a2 or a3"
                    )))
                }
            }
        }
        Self::constrained(family, &pinned)
    }

    /// Indices of the parameters left free.
    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.family.n_params())
            .filter(|i| !self.constraints.contains(i))
            .collect()
    }

    pub fn n_free(&self) -> usize {
        self.family.n_params() - self.constraints.len()
    }

    /// Hypothesis label, e.g. `alpha1=alpha3=1`.
    pub fn hypothesis(&self) -> String {
        if self.constraints.is_empty() {
            return "unconstrained".into();
        }
        let names: Vec<String> = self
            .constraints
            .iter()
            .map(|i| format!("alpha{}", i + 1))
            .collect();
        format!("{}=1", names.join("="))
    }

    /// The four hypotheses tested for every family: all three shapes, then
    /// each pair.
    pub fn unit_shape_hypotheses(family: Family) -> Vec<ModelSpec> {
        [&[0usize, 1, 2][..], &[0, 1], &[0, 2], &[1, 2]]
            .iter()
            .map(|c| ModelSpec::constrained(family, c).expect("valid indices"))
            .collect()
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.family, self.hypothesis())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_parsing() {
        let m = ModelSpec::parse(Family::CNcDir, "a1,a2,a3").unwrap();
        assert_eq!(m.n_free(), 3);
        assert_eq!(m.free_indices(), vec![3, 4, 5]);
        assert_eq!(m.hypothesis(), "alpha1=alpha2=alpha3=1");
        assert_eq!(ModelSpec::parse(Family::Dir, "").unwrap().n_free(), 3);
        assert_eq!(
            ModelSpec::parse(Family::Kb2, "alpha2, a3")
                .unwrap()
                .free_indices(),
            vec![0, 3]
        );
        assert!(ModelSpec::parse(Family::Dir, "a4").is_err());
        assert!(ModelSpec::parse(Family::Dir, "x").is_err());
        assert_eq!("NcDir".parse::<Family>().unwrap(), Family::NcDir);
    }

    #[test]
    fn vector_round_trip() {
        for f in Family::ALL {
            let theta: Vec<f64> = (0..f.n_params()).map(|i| 0.5 + i as f64).collect();
            let p = f.param_set(&theta).unwrap();
            assert_eq!(f.vector_from(&p).unwrap(), theta);
        }
        assert!(Family::Dir.param_set(&[1.0, 1.0]).is_err());
    }
}
