use serde::Serialize;

use super::{fit_ml, Dataset2D, Family, FitOptions, FitReport, ModelSpec};
use crate::error::{Error, Result};
use crate::specfun::chisq_sf;

/// Largest negative `l1 - l0` attributed to optimizer tolerance.
const NESTING_SLACK: f64 = 1e-6;

/// Likelihood-ratio test of a constrained model against the unconstrained one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LrReport {
    pub model: ModelSpec,
    pub hypothesis: String,
    /// `-2 (l0 - l1)`, clamped at zero.
    pub w: f64,
    pub df: usize,
    pub p_value: f64,
    pub l0: f64,
    pub l1: f64,
    /// Set when the constrained maximum exceeds the unconstrained one by more
    /// than the optimizer slack.
    pub nesting_violated: bool,
}

/// Test statistic from two finished fits of the same family.
pub fn lr_from_fits(constrained: &FitReport, unconstrained: &FitReport) -> Result<LrReport> {
    let spec = &constrained.spec;
    if spec.family != unconstrained.spec.family || !unconstrained.spec.constraints.is_empty() {
        return Err(Error::domain(
            "the reference fit must be the unconstrained model of the same family",
        ));
    }
    let df = spec.constraints.len();
    if df == 0 {
        return Err(Error::domain(
            "a likelihood-ratio test needs at least one constraint",
        ));
    }
    let (l0, l1) = (constrained.loglik, unconstrained.loglik);
    let raw = -2.0 * (l0 - l1);
    let w = raw.max(0.0);
    Ok(LrReport {
        model: spec.clone(),
        hypothesis: spec.hypothesis(),
        w,
        df,
        p_value: chisq_sf(w, df as f64)?,
        l0,
        l1,
        nesting_violated: l0 - l1 > NESTING_SLACK,
    })
}

/// Fit the constrained and unconstrained models and compare them. The
/// unconstrained search also starts from the constrained optimum.
pub fn lr_test(spec: &ModelSpec, data: &Dataset2D, opts: &FitOptions) -> Result<LrReport> {
    let constrained = fit_ml(spec, data, opts)?;
    let mut wide = opts.clone();
    wide.extra_starts.push(constrained.theta.clone());
    let unconstrained = fit_ml(&ModelSpec::unconstrained(spec.family), data, &wide)?;
    lr_from_fits(&constrained, &unconstrained)
}

/// The four unit-shape hypotheses of one family against a shared
/// unconstrained fit.
#[derive(Debug, Clone, Serialize)]
pub struct LrBattery {
    pub family: Family,
    pub unconstrained: FitReport,
    pub constrained: Vec<FitReport>,
    pub tests: Vec<LrReport>,
}

impl LrBattery {
    /// Fit of the model chosen by [`select_model`].
    pub fn selected_fit(&self, level: f64) -> Result<&FitReport> {
        let chosen = select_model(&self.tests, level)?;
        if chosen.constraints.is_empty() {
            return Ok(&self.unconstrained);
        }
        self.constrained
            .iter()
            .find(|f| f.spec == chosen)
            .ok_or_else(|| Error::domain("selected model has no fit"))
    }

    /// Markdown table with one row per hypothesis.
    pub fn to_markdown(&self) -> String {
        let mut s = String::from(
            "| model | H0 | l0 | l | w | df | p-value |\n|---|---|---|---|---|---|---|\n",
        );
        for t in &self.tests {
            let p = if t.p_value < 1e-4 {
                "<.0001".to_string()
            } else {
                format!("{:.4}", t.p_value)
            };
            s.push_str(&format!(
                "| {} | {} | {:.4} | {:.4} | {:.4} | {} | {} |\n",
                self.family, t.hypothesis, t.l0, t.l1, t.w, t.df, p
            ));
        }
        s
    }
}

pub fn lr_battery(family: Family, data: &Dataset2D, opts: &FitOptions) -> Result<LrBattery> {
    let hyps = ModelSpec::unit_shape_hypotheses(family);
    let constrained = hyps
        .iter()
        .map(|h| fit_ml(h, data, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut wide = opts.clone();
    wide.extra_starts
        .extend(constrained.iter().map(|f| f.theta.clone()));
    let unconstrained = fit_ml(&ModelSpec::unconstrained(family), data, &wide)?;
    let tests = constrained
        .iter()
        .map(|c| lr_from_fits(c, &unconstrained))
        .collect::<Result<Vec<_>>>()?;
    Ok(LrBattery {
        family,
        unconstrained,
        constrained,
        tests,
    })
}

/// Selection rule: if every hypothesis is rejected at `level`, the
/// unconstrained model; otherwise the non-rejected hypothesis with the
/// fewest free parameters, ties broken by the highest p-value.
pub fn select_model(reports: &[LrReport], level: f64) -> Result<ModelSpec> {
    let first = reports
        .first()
        .ok_or_else(|| Error::domain("model selection needs at least one test"))?;
    let accepted = reports
        .iter()
        .filter(|r| r.p_value >= level)
        .min_by(|a, b| {
            a.model
                .n_free()
                .cmp(&b.model.n_free())
                .then(b.p_value.total_cmp(&a.p_value))
        });
    Ok(match accepted {
        Some(r) => r.model.clone(),
        None => ModelSpec::unconstrained(first.model.family),
    })
}
