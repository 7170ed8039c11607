//! Real potentials `u(x)` tabulated on the lattice.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{QslError, Result};
use crate::lattice::{GridFunction, LatticeSpec};
use crate::table;

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Constant(f64),
    /// `u(x) = c x^p`, with `p > -2` so that `x^2 u(x) -> 0` at the origin.
    Power { c: f64, p: f64 },
    /// Values keyed by lattice index.
    Table(BTreeMap<i64, f64>),
}

impl PotentialSpec {
    /// The confining default `u(x) = x^2`.
    pub fn harmonic() -> Self {
        PotentialSpec::Power { c: 1.0, p: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::Constant(c) if c.is_finite() => Ok(()),
            PotentialSpec::Constant(c) => Err(QslError::Validation(format!(
                "constant potential must be finite, got {c}"
            ))),
            PotentialSpec::Power { c, p } => {
                if !c.is_finite() || !p.is_finite() {
                    return Err(QslError::Validation("power potential must be finite".into()));
                }
                if *p <= -2.0 {
                    return Err(QslError::Validation(format!(
                        "power potential needs p > -2, got p = {p}"
                    )));
                }
                Ok(())
            }
            PotentialSpec::Table(values) => match values.iter().find(|(_, v)| !v.is_finite()) {
                Some((n, v)) => Err(QslError::Validation(format!(
                    "table value at index {n} is not finite: {v}"
                ))),
                None => Ok(()),
            },
        }
    }

    /// Tabulates `u(q^n)` over the window.
    pub fn materialize(&self, lattice: &LatticeSpec) -> Result<GridFunction> {
        self.validate()?;
        let values: Vec<f64> = match self {
            PotentialSpec::Zero => vec![0.0; lattice.len()],
            PotentialSpec::Constant(c) => vec![*c; lattice.len()],
            PotentialSpec::Power { c, p } => lattice
                .indices()
                .map(|n| c * lattice.x(n).powf(*p))
                .collect(),
            PotentialSpec::Table(table) => lattice
                .indices()
                .map(|n| {
                    table.get(&n).copied().ok_or_else(|| {
                        QslError::Validation(format!("potential table is missing index {n}"))
                    })
                })
                .collect::<Result<_>>()?,
        };
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(QslError::Validation(format!(
                "potential is not finite at index {}: {v}",
                lattice.n_outer() + i as i64
            )));
        }
        GridFunction::from_values(
            *lattice,
            values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        )
    }
}

pub fn materialize(spec: &PotentialSpec, lattice: &LatticeSpec) -> Result<GridFunction> {
    spec.materialize(lattice)
}

/// Reads a potential table (`n,x,re,im[,logscale]`) covering `lattice`.
pub fn load_table(path: impl AsRef<Path>, lattice: &LatticeSpec) -> Result<PotentialSpec> {
    let path = path.as_ref();
    let ingest = |line: u64, message: String| QslError::Ingestion {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut values = BTreeMap::new();
    for row in table::read_lattice_rows(path)? {
        if row.im != 0.0 {
            return Err(ingest(
                row.line,
                format!("potential must be real; index {} has im = {}", row.n, row.im),
            ));
        }
        let v = if row.logscale == 0.0 {
            row.re
        } else {
            row.re * row.logscale.exp()
        };
        if !v.is_finite() {
            return Err(ingest(row.line, format!("non-finite value at index {}", row.n)));
        }
        if values.insert(row.n, v).is_some() {
            return Err(ingest(row.line, format!("duplicate index {}", row.n)));
        }
    }
    if let Some(n) = lattice.indices().find(|n| !values.contains_key(n)) {
        return Err(QslError::Validation(format!(
            "potential table {} is missing index {n}",
            path.display()
        )));
    }
    Ok(PotentialSpec::Table(values))
}

/// Writes a materialized potential as a lattice-function table.
pub fn write_table(u: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    table::write_lattice_function(path, u)
}
