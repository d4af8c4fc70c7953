//! Correlation functions `R̂_k` (resolvents with increments on the sides
//! given by the metric) and `R_k` (imaginary parts), by several independent
//! routes.

mod closed_form;
mod fourier;
mod generating;
mod mixture_det;
pub mod time_domain;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensembles::EnsembleSpec;
use crate::kernels::HalfLineRule;
use crate::{Error, MetricSignature, Result, Side, C64};

pub use closed_form::{closed_form_gue_kernel, higher_trace_row_table};
pub use fourier::factorized_kernel;
pub use generating::generating_function_value;
pub use mixture_det::{convolution_row_table, imaginary_row_table, RowKind};

/// Points closer than this are split symmetrically before evaluation.
pub const COINCIDENCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Full resolvent correlations `R̂_k`.
    #[serde(rename = "Rhat")]
    Rhat,
    /// Imaginary-part correlations `R_k`.
    #[serde(rename = "R")]
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Convolution,
    EigenvalueIntegral,
    Factorized,
    ClosedFormGue,
    ClosedFormHigherTrace,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Convolution,
        Method::EigenvalueIntegral,
        Method::Factorized,
        Method::ClosedFormGue,
        Method::ClosedFormHigherTrace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Convolution => "convolution",
            Method::EigenvalueIntegral => "eigenvalue_integral",
            Method::Factorized => "factorized",
            Method::ClosedFormGue => "closed_form_gue",
            Method::ClosedFormHigherTrace => "closed_form_higher_trace",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::Config(format!(
                    "unknown method '{s}'; valid methods: {}",
                    names.join(", ")
                ))
            })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Rhat => "Rhat",
            Variant::R => "R",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Rhat" | "rhat" => Ok(Variant::Rhat),
            "R" | "r" => Ok(Variant::R),
            other => Err(Error::Config(format!(
                "unknown variant '{other}'; valid variants: Rhat, R"
            ))),
        }
    }
}

/// Numerical settings shared by all methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EngineOptions {
    /// Gauss–Hermite order of the convolution; the error estimate compares
    /// against twice this order.
    pub hermite_nodes: usize,
    /// Relative tolerance for successive-order agreement.
    pub tolerance: f64,
    /// Panels and order of the half-line Fourier integrals; the cutoff is
    /// chosen from the ensemble.
    pub panels: usize,
    pub order: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            hermite_nodes: 128,
            tolerance: 1e-8,
            panels: 16,
            order: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRequest {
    pub spec: EnsembleSpec,
    pub points: Vec<f64>,
    /// Sides of the increments; ignored for the `R` variant.
    pub metric: MetricSignature,
    pub variant: Variant,
    pub method: Method,
    pub options: EngineOptions,
}

impl CorrelationRequest {
    /// Request with all increments below the axis and default options.
    pub fn new(spec: EnsembleSpec, points: Vec<f64>, variant: Variant, method: Method) -> Self {
        let k = points.len();
        Self {
            spec,
            points,
            metric: MetricSignature::uniform(k, Side::Plus),
            variant,
            method,
            options: EngineOptions::default(),
        }
    }

    pub fn with_metric(mut self, metric: MetricSignature) -> Self {
        self.metric = metric;
        self
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub value: C64,
    pub error: f64,
    pub method: Method,
    pub variant: Variant,
    /// Method actually used after any fallback.
    pub evaluated_by: Method,
    pub notes: Vec<String>,
}

/// Raw outcome of one method at distinct points.
pub(crate) struct Evaluation {
    pub value: C64,
    pub error: f64,
    pub evaluated_by: Method,
    pub notes: Vec<String>,
}

pub fn evaluate(req: &CorrelationRequest) -> Result<CorrelationResult> {
    let k = req.k();
    if k == 0 {
        return Err(Error::Config("need at least one point".into()));
    }
    if req.variant == Variant::Rhat && req.metric.len() != k {
        return Err(Error::Config(format!(
            "metric has {} entries for {k} points",
            req.metric.len()
        )));
    }
    if req.points.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config("points must be finite".into()));
    }
    let mut coincident = false;
    for p in 0..k {
        for q in p + 1..k {
            if (req.points[p] - req.points[q]).abs() < COINCIDENCE {
                coincident = true;
            }
        }
    }
    let eval = if coincident {
        let shifted = |sign: f64| -> Vec<f64> {
            req.points
                .iter()
                .enumerate()
                .map(|(j, &x)| x + sign * 10.0 * COINCIDENCE * j as f64)
                .collect()
        };
        let up = dispatch(req, &shifted(1.0))?;
        let down = dispatch(req, &shifted(-1.0))?;
        let mut notes = up.notes;
        notes.push("coincident points split by ±10·δ_x and averaged".into());
        Evaluation {
            value: (up.value + down.value) * 0.5,
            error: up.error.max(down.error) + 0.5 * (up.value - down.value).norm(),
            evaluated_by: up.evaluated_by,
            notes,
        }
    } else {
        dispatch(req, &req.points)?
    };
    Ok(CorrelationResult {
        value: eval.value,
        error: eval.error,
        method: req.method,
        variant: req.variant,
        evaluated_by: eval.evaluated_by,
        notes: eval.notes,
    })
}

fn dispatch(req: &CorrelationRequest, x: &[f64]) -> Result<Evaluation> {
    let rows: Vec<RowKind> = match req.variant {
        Variant::Rhat => req.metric.sides().iter().map(|&s| RowKind::Side(s)).collect(),
        Variant::R => vec![RowKind::ImaginaryPart; x.len()],
    };
    let spec = &req.spec;
    let opts = &req.options;
    match req.method {
        Method::Convolution => mixture_det::convolution(spec, x, &rows, opts),
        Method::ClosedFormHigherTrace => closed_form::higher_trace(spec, x, &rows, opts),
        Method::ClosedFormGue => closed_form::gue(spec, x, &rows),
        Method::EigenvalueIntegral => fourier::eigenvalue_integral(spec, x, &rows, opts),
        Method::Factorized => fourier::factorized(spec, x, &rows, opts),
    }
}

/// Half-line rule whose cutoff makes `exp(-s r²/4) r^degree` negligible.
pub(crate) fn fourier_rule(scale: f64, degree: usize, opts: &EngineOptions) -> HalfLineRule {
    HalfLineRule {
        cutoff: 2.0 * ((40.0 + 2.0 * degree as f64) / scale).sqrt(),
        panels: opts.panels,
        order: opts.order,
    }
}

/// Checks successive-order agreement against the magnitude of the summed terms.
pub(crate) fn check_convergence(context: &str, coarse: C64, fine: C64, magnitude: f64, tol: f64) -> Result<f64> {
    let err = (fine - coarse).norm();
    if err > tol * magnitude.max(fine.norm()) {
        return Err(Error::NonConvergence {
            context: context.to_string(),
            coarse,
            fine,
        });
    }
    Ok(err)
}

#[cfg(test)]
mod tests;
