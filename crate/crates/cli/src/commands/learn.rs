use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use veob::supervised::{Alpha, Output, Targets, TrainParams};
use veob::{ColumnMatrix, SupervisedModel};

use super::TreeOpts;
use crate::bundle::Bundle;
use crate::error::{CliError, CliResult};
use crate::report::RunReport;

pub enum Target {
    Values(DMatrix<f64>),
    Labels(Vec<usize>),
}

/// Headerless numeric CSV, one sample per row; returned as `features × rows`.
pub fn read_features(path: &Path) -> CliResult<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    let mut data = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
        if *width.get_or_insert(rec.len()) != rec.len() {
            return Err(CliError::Format(format!("{}: row {} has {} fields", path.display(), line + 1, rec.len())));
        }
        for f in rec.iter() {
            let v: f64 = f
                .parse()
                .map_err(|_| CliError::Format(format!("{}: row {}: bad number {f:?}", path.display(), line + 1)))?;
            data.push(v);
        }
        rows += 1;
    }
    let width = width.ok_or_else(|| CliError::Format(format!("{} is empty", path.display())))?;
    Ok(DMatrix::from_vec(width, rows, data))
}

pub fn read_labels(path: &Path) -> CliResult<Vec<usize>> {
    std::fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse()
                .map_err(|_| CliError::Format(format!("{}: bad label {l:?}", path.display())))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn train(
    x: &DMatrix<f64>,
    y: &Target,
    kx: usize,
    ky: usize,
    kz: usize,
    alpha: Alpha,
    tree: &TreeOpts,
    seed: u64,
) -> CliResult<(Bundle, RunReport)> {
    let mut r = RunReport::new("train");
    r.param("kx", kx)
        .param("ky", ky)
        .param("kz", kz)
        .param("seed", seed)
        .param("min_cell", tree.min_cell)
        .param("max_levels", tree.max_levels.0)
        .param(
            "alpha",
            match alpha {
                Alpha::Auto => serde_json::Value::from("auto"),
                Alpha::Fixed(a) => serde_json::Value::from(a),
            },
        );
    r.count("samples", x.ncols());
    let targets = match y {
        Target::Values(v) => Targets::Values(ColumnMatrix::Dense(v.clone())),
        Target::Labels(l) => Targets::labels(l.clone(), l.iter().max().map_or(0, |m| m + 1)),
    };
    let params = TrainParams {
        kx,
        ky,
        kz,
        alpha,
        tree: tree.params(seed),
    };
    let model = SupervisedModel::train(&ColumnMatrix::Dense(x.clone()), &targets, &params)?;
    r.count("cells", model.cells().len())
        .count(
            "underdetermined_cells",
            model.cells().iter().filter(|c| c.underdetermined).count(),
        )
        .metric("alpha", model.alpha())
        .metric("training_residual", model.training_residual());
    r.stage("fit");
    let mut b = Bundle::new();
    b.put_text("kind", "supervised");
    b.put_text("params", &serde_json::to_string(&r.parameters).expect("parameters serialize"));
    b.put_supervised("supervised", &model);
    r.stage("store");
    Ok((b, r))
}

/// One CSV line per sample: outputs, then cell id and confidence.
pub fn predict(bundle: &Bundle, x: &DMatrix<f64>, out: &mut dyn Write) -> CliResult<()> {
    let model = bundle.supervised("supervised")?;
    for col in x.column_iter() {
        let p = model.predict(col.as_slice())?;
        let head = match p.output {
            Output::Label(l) => l.to_string(),
            Output::Value(v) => v.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
        };
        writeln!(out, "{head},{},{}", p.cell, p.confidence)?;
    }
    Ok(())
}
