use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "experiment,n,i,j,observable,value_re,value_im,value_abs,converged";

/// One CSV row. Site indices are 1-based; `-1` marks an unused index.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRecord {
    pub experiment: String,
    pub n: usize,
    pub i: i64,
    pub j: i64,
    pub observable: String,
    pub value_re: f64,
    pub value_im: f64,
    pub value_abs: f64,
    pub converged: bool,
}

impl ObservableRecord {
    pub fn complex(experiment: &str, n: usize, i: i64, j: i64, observable: &str, value: C64, converged: bool) -> Self {
        Self {
            experiment: experiment.to_string(),
            n,
            i,
            j,
            observable: observable.to_string(),
            value_re: value.re,
            value_im: value.im,
            value_abs: value.norm(),
            converged,
        }
    }

    pub fn real(experiment: &str, n: usize, i: i64, j: i64, observable: &str, value: f64, converged: bool) -> Self {
        Self::complex(experiment, n, i, j, observable, C64::new(value, 0.0), converged)
    }

    pub fn value(&self) -> C64 {
        C64::new(self.value_re, self.value_im)
    }

    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.n,
            self.i,
            self.j,
            self.observable,
            format_number(self.value_re),
            format_number(self.value_im),
            format_number(self.value_abs),
            self.converged
        )
    }
}

/// 17 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Sorts by `(experiment, n, i, j, observable)`.
pub fn sort_records(records: &mut [ObservableRecord]) {
    records.sort_by(|a, b| {
        (&a.experiment, a.n, a.i, a.j, &a.observable).cmp(&(&b.experiment, b.n, b.i, b.j, &b.observable))
    });
}

/// Header plus one line per record, in canonical order.
pub fn to_csv_string(records: &[ObservableRecord]) -> String {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut out = String::with_capacity(64 * (sorted.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &sorted {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn write_csv(records: &[ObservableRecord], path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = fs::File::create(path).map_err(io)?;
    file.write_all(to_csv_string(records).as_bytes()).map_err(io)?;
    file.flush().map_err(io)
}
