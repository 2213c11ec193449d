//! ε-sweeps over the example configurations and their CSV output.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::assembly::{assemble, assemble_energy_gram, assemble_h1_gram};
use crate::diagnostics::{energy_projection, equiv_constants, free_dofs};
use crate::element::ElementType;
use crate::error::{Error, Result};
use crate::geometry::{DomainKind, ImplicitDomain, SineSolution};
use crate::quadrature::DEFAULT_DEPTH;
use crate::solve::{error_norms, solve};
use crate::space::{boundary_dof_counts, Discretization};
use crate::stabilization::{stabilization_field, FormVariant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Example {
    Ex1Tri,
    Ex1Quad,
    Ex2,
    Ex3,
    Ex4,
}

impl Example {
    pub const ALL: [Example; 5] = [
        Example::Ex1Tri,
        Example::Ex1Quad,
        Example::Ex2,
        Example::Ex3,
        Example::Ex4,
    ];

    pub fn domain_kind(self) -> DomainKind {
        match self {
            Example::Ex1Tri | Example::Ex1Quad => DomainKind::OverlapSquare,
            Example::Ex2 => DomainKind::MixedSquare,
            Example::Ex3 => DomainKind::KinkedSquare,
            Example::Ex4 => DomainKind::PNormBall8,
        }
    }

    pub fn element_type(self, order: usize) -> Result<ElementType> {
        match (self, order) {
            (Example::Ex1Tri, 1) => Ok(ElementType::TriP1),
            (Example::Ex1Tri, _) => Err(Error::Config(
                "ex1-tri uses linear triangles; order must be 1".into(),
            )),
            (_, 1) => Ok(ElementType::QuadQ1),
            (_, 2) => Ok(ElementType::QuadQ2),
            (_, k) => Err(Error::Config(format!("unsupported order {k}"))),
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Example::Ex1Tri => "ex1-tri",
            Example::Ex1Quad => "ex1-quad",
            Example::Ex2 => "ex2",
            Example::Ex3 => "ex3",
            Example::Ex4 => "ex4",
        })
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Example::ALL
            .into_iter()
            .find(|e| e.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown example `{s}`")))
    }
}

/// Geometric list `from, from·factor, …` down to `to` (inclusive up to
/// rounding).
pub fn geometric_eps(from: f64, to: f64, factor: f64) -> Result<Vec<f64>> {
    if !(from > 0.0 && to > 0.0 && from.is_finite()) {
        return Err(Error::Config("sweep bounds must be positive".into()));
    }
    if !(factor > 0.0 && factor < 1.0) {
        return Err(Error::Config(format!("sweep factor must lie in (0, 1), got {factor}")));
    }
    if to > from {
        return Err(Error::Config("sweep must run from the larger to the smaller ε".into()));
    }
    let mut out = Vec::new();
    let mut i = 0;
    loop {
        let eps = from * factor.powi(i);
        if eps < to * (1.0 - 1e-9) {
            break;
        }
        out.push(eps);
        i += 1;
    }
    Ok(out)
}

/// `2⁻⁴, 2⁻⁵, …, 2⁻²⁴`.
pub fn default_eps() -> Vec<f64> {
    (4..=24).map(|p| 2f64.powi(-p)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub example: Example,
    pub k: usize,
    pub order: usize,
    pub eps_list: Vec<f64>,
    pub variant: FormVariant,
    pub depth: usize,
    pub diagnostics: bool,
}

impl ExperimentConfig {
    pub fn new(example: Example) -> Self {
        ExperimentConfig {
            example,
            k: 16,
            order: 1,
            eps_list: default_eps(),
            variant: FormVariant::SymmetricNitsche,
            depth: DEFAULT_DEPTH,
            diagnostics: false,
        }
    }

    pub fn validate(&self) -> Result<ElementType> {
        let ty = self.example.element_type(self.order)?;
        if self.k < 2 {
            return Err(Error::Config(format!("K must be at least 2, got {}", self.k)));
        }
        if self.eps_list.is_empty() {
            return Err(Error::Config("empty ε list".into()));
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::Config("ε values must be finite and positive".into()));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("ε values must be strictly descending".into()));
        }
        if let Some(cap) = self.variant.cap() {
            if !(cap > 0.0) {
                return Err(Error::Config(format!("penalty cap must be positive, got {cap}")));
            }
        }
        if self.depth > 8 {
            return Err(Error::Config(format!("tessellation depth {} is too large", self.depth)));
        }
        Ok(ty)
    }

    /// One-line description written as the CSV comment header.
    pub fn header(&self) -> String {
        let variant = match self.variant {
            FormVariant::SymmetricNitsche => "nitsche".to_string(),
            FormVariant::HybridNitschePenalty { cap } => format!("hybrid cap={cap}"),
        };
        let element = self
            .example
            .element_type(self.order)
            .map(|t| t.to_string())
            .unwrap_or_default();
        format!(
            "# example={} domain={} element={} K={} order={} variant={} depth={} diagnostics={} n_eps={} eps_first={} eps_last={}",
            self.example,
            self.example.domain_kind(),
            element,
            self.k,
            self.order,
            variant,
            self.depth,
            self.diagnostics,
            self.eps_list.len(),
            self.eps_list.first().copied().unwrap_or(f64::NAN),
            self.eps_list.last().copied().unwrap_or(f64::NAN),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    SliverDegenerate,
    SolveFailed,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::SliverDegenerate => "sliver-degenerate",
            Status::SolveFailed => "solve-failed",
        })
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(Status::Ok),
            "sliver-degenerate" => Ok(Status::SliverDegenerate),
            "solve-failed" => Ok(Status::SolveFailed),
            other => Err(Error::Input(format!("unknown status `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticValues {
    pub c_est: f64,
    pub big_c_est: f64,
    pub cea_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRecord {
    pub epsilon: f64,
    pub n_dofs: usize,
    pub m: usize,
    pub n: usize,
    /// Largest raw (uncapped) stabilization parameter.
    pub lambda_max: f64,
    pub err_energy: f64,
    pub err_h1: f64,
    pub err_l2: f64,
    pub diagnostics: Option<DiagnosticValues>,
    pub status: Status,
}

impl ResultRecord {
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}

/// Run one sweep point. Configuration problems are errors; degenerate
/// stabilization and failed solves are reported through the status.
pub fn run_point(config: &ExperimentConfig, epsilon: f64) -> Result<ResultRecord> {
    let ty = config.validate()?;
    let domain = ImplicitDomain::new(config.example.domain_kind(), epsilon)?;
    let disc = Discretization::new(domain, ty, config.k, config.depth)?;
    let (m, n) = boundary_dof_counts(&disc);
    let mut record = ResultRecord {
        epsilon,
        n_dofs: disc.space.n_dofs(),
        m,
        n,
        lambda_max: f64::NAN,
        err_energy: f64::NAN,
        err_h1: f64::NAN,
        err_l2: f64::NAN,
        diagnostics: None,
        status: Status::Ok,
    };
    let nan_diag = DiagnosticValues {
        c_est: f64::NAN,
        big_c_est: f64::NAN,
        cea_ratio: f64::NAN,
    };
    if config.diagnostics {
        record.diagnostics = Some(nan_diag);
    }
    let stab = match stabilization_field(&disc, config.variant) {
        Ok(s) => s,
        Err(Error::SliverDegenerate { .. }) => {
            record.lambda_max = f64::INFINITY;
            record.status = Status::SliverDegenerate;
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    record.lambda_max = stab.lambda_max();
    let sol = SineSolution;
    let system = assemble(&disc, &stab, &sol)?;
    let uh = match solve(&system) {
        Ok(u) => u,
        Err(Error::Singular { .. } | Error::Residual { .. }) => {
            record.status = Status::SolveFailed;
            return Ok(record);
        }
        Err(e) => return Err(e),
    };
    let err = error_norms(&disc, &stab, &uh.coefficients, &sol);
    record.err_energy = err.energy;
    record.err_h1 = err.h1;
    record.err_l2 = err.l2;
    if config.diagnostics {
        let e = assemble_energy_gram(&disc, &stab)?;
        let h1 = assemble_h1_gram(&disc);
        let free = free_dofs(&disc);
        let mut diag = nan_diag;
        if let Ok(c) = equiv_constants(&e, &h1, &free) {
            diag.c_est = c.c_est;
            diag.big_c_est = c.big_c_est;
        }
        if let Ok(pi) = energy_projection(&disc, &stab, &e, &sol) {
            let best = error_norms(&disc, &stab, &pi.coefficients, &sol).energy;
            diag.cea_ratio = err.energy / best;
        }
        record.diagnostics = Some(diag);
    }
    Ok(record)
}

/// All sweep points, in the order of `config.eps_list`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    config
        .eps_list
        .par_iter()
        .map(|&eps| run_point(config, eps))
        .collect()
}

pub const CSV_COLUMNS: [&str; 8] = [
    "epsilon", "n_dofs", "M", "N", "lambda_max", "err_energy", "err_h1", "err_l2",
];
pub const CSV_DIAGNOSTIC_COLUMNS: [&str; 3] = ["c_est", "C_est", "cea_ratio"];

pub fn csv_header(diagnostics: bool) -> String {
    let mut cols: Vec<&str> = CSV_COLUMNS.to_vec();
    if diagnostics {
        cols.extend(CSV_DIAGNOSTIC_COLUMNS);
    }
    cols.push("status");
    cols.join(",")
}

/// Write the comment header, the column header and one row per record.
/// Floats use the shortest representation that round-trips.
pub fn write_csv(config: &ExperimentConfig, records: &[ResultRecord], mut out: impl Write) -> Result<()> {
    writeln!(out, "{}", config.header())?;
    writeln!(out, "{}", csv_header(config.diagnostics))?;
    for r in records {
        let mut fields = vec![
            r.epsilon.to_string(),
            r.n_dofs.to_string(),
            r.m.to_string(),
            r.n.to_string(),
            r.lambda_max.to_string(),
            r.err_energy.to_string(),
            r.err_h1.to_string(),
            r.err_l2.to_string(),
        ];
        if config.diagnostics {
            let d = r.diagnostics.unwrap_or(DiagnosticValues {
                c_est: f64::NAN,
                big_c_est: f64::NAN,
                cea_ratio: f64::NAN,
            });
            fields.extend([d.c_est.to_string(), d.big_c_est.to_string(), d.cea_ratio.to_string()]);
        }
        fields.push(r.status.to_string());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Parse a CSV produced by [`write_csv`].
pub fn read_csv(input: impl BufRead) -> Result<Vec<ResultRecord>> {
    let mut lines = input.lines().filter(|l| !matches!(l, Ok(s) if s.starts_with('#')));
    let header = lines
        .next()
        .ok_or_else(|| Error::Input("missing CSV header".into()))??;
    let diagnostics = if header == csv_header(false) {
        false
    } else if header == csv_header(true) {
        true
    } else {
        return Err(Error::Input(format!("unexpected CSV columns `{header}`")));
    };
    let float = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| Error::Input(format!("bad number `{s}`")))
    };
    let int = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::Input(format!("bad integer `{s}`")))
    };
    let mut records = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let expected = if diagnostics { 12 } else { 9 };
        if f.len() != expected {
            return Err(Error::Input(format!("expected {expected} fields, got `{line}`")));
        }
        let diag = if diagnostics {
            Some(DiagnosticValues {
                c_est: float(f[8])?,
                big_c_est: float(f[9])?,
                cea_ratio: float(f[10])?,
            })
        } else {
            None
        };
        records.push(ResultRecord {
            epsilon: float(f[0])?,
            n_dofs: int(f[1])?,
            m: int(f[2])?,
            n: int(f[3])?,
            lambda_max: float(f[4])?,
            err_energy: float(f[5])?,
            err_h1: float(f[6])?,
            err_l2: float(f[7])?,
            diagnostics: diag,
            status: f[expected - 1].parse()?,
        });
    }
    Ok(records)
}

/// ε values (in descending sweep order) at which the number of dofs drops
/// compared to the previous sweep point.
pub fn dof_drop_markers(records: &[ResultRecord]) -> Vec<f64> {
    records
        .windows(2)
        .filter(|w| w[1].n_dofs < w[0].n_dofs)
        .map(|w| w[1].epsilon)
        .collect()
}
