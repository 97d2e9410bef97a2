use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_shapes(alpha: &[f64]) -> Result<()> {
    if alpha.len() < 2 {
        return Err(Error::domain(format!(
            "need at least two shape parameters, got {}",
            alpha.len()
        )));
    }
    if let Some(a) = alpha.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
        return Err(Error::domain(format!(
            "shape parameter {a} is not a positive finite number"
        )));
    }
    Ok(())
}

fn check_noncentralities(lambda: &[f64], len: usize) -> Result<()> {
    if lambda.len() != len {
        return Err(Error::domain(format!(
            "expected {len} non-centrality parameters, got {}",
            lambda.len()
        )));
    }
    if let Some(l) = lambda.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(Error::domain(format!(
            "non-centrality {l} is not a finite number >= 0"
        )));
    }
    Ok(())
}

/// Dirichlet shapes `α_1, ..., α_{D+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirParams {
    alpha: Vec<f64>,
}

impl DirParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        check_shapes(&alpha)?;
        Ok(DirParams { alpha })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_plus(&self) -> f64 {
        self.alpha.iter().sum()
    }

    /// Number of free coordinates `D`.
    pub fn dim(&self) -> usize {
        self.alpha.len() - 1
    }
}

/// Bivariate Kummer-Beta: three shapes and a real tilt `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kb2Params {
    alpha: [f64; 3],
    delta: f64,
}

impl Kb2Params {
    pub fn new(alpha: [f64; 3], delta: f64) -> Result<Self> {
        check_shapes(&alpha)?;
        if !delta.is_finite() {
            return Err(Error::domain(format!(
                "tilt parameter {delta} is not finite"
            )));
        }
        Ok(Kb2Params { alpha, delta })
    }

    pub fn alpha(&self) -> [f64; 3] {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha_plus(&self) -> f64 {
        self.alpha.iter().sum()
    }
}

/// Non-central chi-squared with `dof >= 0` degrees of freedom and
/// non-centrality `lambda >= 0`, not both zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcChisqParams {
    dof: f64,
    lambda: f64,
}

impl NcChisqParams {
    pub fn new(dof: f64, lambda: f64) -> Result<Self> {
        if !(dof >= 0.0) || !dof.is_finite() || !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!(
                "invalid non-central chi-squared parameters dof={dof} lambda={lambda}"
            )));
        }
        if dof == 0.0 && lambda == 0.0 {
            return Err(Error::domain(
                "zero degrees of freedom needs a positive non-centrality",
            ));
        }
        Ok(NcChisqParams { dof, lambda })
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

macro_rules! noncentral_params {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            alpha: Vec<f64>,
            lambda: Vec<f64>,
        }

        impl $name {
            pub fn new(alpha: Vec<f64>, lambda: Vec<f64>) -> Result<Self> {
                check_shapes(&alpha)?;
                check_noncentralities(&lambda, alpha.len())?;
                Ok($name { alpha, lambda })
            }

            /// Zero non-centralities.
            pub fn central(alpha: Vec<f64>) -> Result<Self> {
                let n = alpha.len();
                Self::new(alpha, vec![0.0; n])
            }

            pub fn alpha(&self) -> &[f64] {
                &self.alpha
            }

            pub fn lambda(&self) -> &[f64] {
                &self.lambda
            }

            pub fn alpha_plus(&self) -> f64 {
                self.alpha.iter().sum()
            }

            pub fn lambda_plus(&self) -> f64 {
                self.lambda.iter().sum()
            }

            /// Number of free coordinates `D`.
            pub fn dim(&self) -> usize {
                self.alpha.len() - 1
            }

            pub fn dirichlet(&self) -> DirParams {
                DirParams { alpha: self.alpha.clone() }
            }

            /// Same parameters with components reordered: component `i` of
            /// the result is component `order[i]` of `self`.
            pub fn permuted(&self, order: &[usize]) -> Result<Self> {
                let mut seen = vec![false; self.alpha.len()];
                if order.len() != self.alpha.len()
                    || order.iter().any(|&i| i >= seen.len() || std::mem::replace(&mut seen[i], true))
                {
                    return Err(Error::domain(format!("{order:?} is not a permutation")));
                }
                Ok($name {
                    alpha: order.iter().map(|&i| self.alpha[i]).collect(),
                    lambda: order.iter().map(|&i| self.lambda[i]).collect(),
                })
            }
        }
    };
}

noncentral_params!(
    /// Classical non-central Dirichlet: shapes and non-centralities.
    NcDirParams
);
noncentral_params!(
    /// Conditional non-central Dirichlet: shapes and non-centralities.
    CNcDirParams
);

/// Family-agnostic parameter record, the JSON exchange format
/// `{"alpha": [...], "lambda": [...], "delta": ...}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamSet {
    pub alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

impl ParamSet {
    fn lambda_or_zero(&self) -> Vec<f64> {
        self.lambda
            .clone()
            .unwrap_or_else(|| vec![0.0; self.alpha.len()])
    }

    pub fn to_dir(&self) -> Result<DirParams> {
        DirParams::new(self.alpha.clone())
    }

    pub fn to_kb2(&self) -> Result<Kb2Params> {
        let alpha: [f64; 3] = self
            .alpha
            .as_slice()
            .try_into()
            .map_err(|_| Error::domain("Kummer-Beta needs exactly three shape parameters"))?;
        Kb2Params::new(alpha, self.delta.unwrap_or(0.0))
    }

    pub fn to_ncdir(&self) -> Result<NcDirParams> {
        NcDirParams::new(self.alpha.clone(), self.lambda_or_zero())
    }

    pub fn to_cncdir(&self) -> Result<CNcDirParams> {
        CNcDirParams::new(self.alpha.clone(), self.lambda_or_zero())
    }
}

impl From<&DirParams> for ParamSet {
    fn from(p: &DirParams) -> Self {
        ParamSet {
            alpha: p.alpha.clone(),
            ..Default::default()
        }
    }
}

impl From<&Kb2Params> for ParamSet {
    fn from(p: &Kb2Params) -> Self {
        ParamSet {
            alpha: p.alpha.to_vec(),
            lambda: None,
            delta: Some(p.delta),
        }
    }
}

impl From<&NcDirParams> for ParamSet {
    fn from(p: &NcDirParams) -> Self {
        ParamSet {
            alpha: p.alpha.clone(),
            lambda: Some(p.lambda.clone()),
            delta: None,
        }
    }
}

impl From<&CNcDirParams> for ParamSet {
    fn from(p: &CNcDirParams) -> Self {
        ParamSet {
            alpha: p.alpha.clone(),
            lambda: Some(p.lambda.clone()),
            delta: None,
        }
    }
}
