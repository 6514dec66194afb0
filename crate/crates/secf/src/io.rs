//! CSV readers and writers for samples, capture-recapture tables, design
//! matrices and preconditioner matrices.
//!
//! Sample files carry a header `x1..xd, g1..gd, f_<name>...`: the state, the
//! score `∇log p` at the state and one column per integrand.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use secf_core::targets::CjsData;
use secf_core::{Matrix, SampleSet};

use crate::error::{Result, SecfError};

fn parse_error(path: &Path, message: impl Into<String>) -> SecfError {
    SecfError::Parse { path: path.to_path_buf(), message: message.into() }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| SecfError::Io { path: path.to_path_buf(), source })
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| SecfError::Io { path: path.to_path_buf(), source })
}

/// Reads every record as floats, checking width and finiteness. Row numbers
/// in messages are 1-based data rows (the header is row 0).
fn read_table(path: &Path, has_header: bool) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(open(path)?);
    let header: Vec<String> = if has_header {
        reader.headers().map_err(|e| parse_error(path, e.to_string()))?.iter().map(str::to_owned).collect()
    } else {
        Vec::new()
    };
    let mut rows = Vec::new();
    let mut width = if has_header { Some(header.len()) } else { None };
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| parse_error(path, format!("row {row}: {e}")))?;
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_error(path, format!("row {row}: expected {w} fields, found {}", record.len())));
        }
        let mut values = Vec::with_capacity(w);
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(path, format!("row {row}, column {}: {field:?} is not a number", j + 1)))?;
            if !v.is_finite() {
                return Err(parse_error(path, format!("row {row}, column {}: non-finite value {field}", j + 1)));
            }
            values.push(v);
        }
        rows.push(values);
    }
    Ok((header, rows))
}

/// `prefix` followed by a positive integer.
fn indexed(name: &str, prefix: char) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    rest.parse().ok().filter(|&k| k >= 1)
}

pub fn load_samples(path: &Path) -> Result<SampleSet> {
    let (header, rows) = read_table(path, true)?;
    let mut xs = Vec::new();
    let mut gs = Vec::new();
    let mut fs = Vec::new();
    for (j, name) in header.iter().enumerate() {
        if let Some(f) = name.strip_prefix("f_") {
            if f.is_empty() {
                return Err(parse_error(path, "integrand column with an empty name"));
            }
            fs.push((f.to_owned(), j));
        } else if let Some(k) = indexed(name, 'x') {
            xs.push((k, j));
        } else if let Some(k) = indexed(name, 'g') {
            gs.push((k, j));
        } else {
            return Err(parse_error(path, format!("unrecognized column {name:?}")));
        }
    }
    if xs.len() != gs.len() {
        return Err(parse_error(
            path,
            format!("gradient column count mismatch: {} state columns but {} gradient columns", xs.len(), gs.len()),
        ));
    }
    if xs.is_empty() {
        return Err(parse_error(path, "no state columns x1..xd"));
    }
    if fs.is_empty() {
        return Err(parse_error(path, "no integrand columns f_<name>"));
    }
    xs.sort_unstable();
    gs.sort_unstable();
    let d = xs.len();
    for (expected, ((kx, _), (kg, _))) in (1..=d).zip(xs.iter().zip(&gs)) {
        if *kx != expected || *kg != expected {
            return Err(parse_error(path, format!("state and gradient columns must be numbered 1..{d} without gaps")));
        }
    }
    if rows.is_empty() {
        return Err(parse_error(path, "no data rows"));
    }
    let n = rows.len();
    let pick = |cols: &[(usize, usize)]| Matrix::from_fn(n, d, |i, k| rows[i][cols[k].1]);
    let integrands = fs.iter().map(|(name, j)| (name.clone(), rows.iter().map(|r| r[*j]).collect())).collect();
    SampleSet::new(pick(&xs), pick(&gs), integrands).map_err(|e| parse_error(path, e.to_string()))
}

/// Writes a sample file; floats use the shortest representation that reads
/// back to the same value.
pub fn write_samples(samples: &SampleSet, path: &Path) -> Result<()> {
    let io_err = |e: csv::Error| parse_error(path, e.to_string());
    let mut w = csv::Writer::from_writer(create(path)?);
    let d = samples.dim();
    let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    header.extend((1..=d).map(|k| format!("g{k}")));
    header.extend(samples.integrands().iter().map(|(n, _)| format!("f_{n}")));
    w.write_record(&header).map_err(io_err)?;
    for i in 0..samples.len() {
        let mut row: Vec<String> = samples.point(i).iter().map(|v| format!("{v:?}")).collect();
        row.extend(samples.gradient(i).iter().map(|v| format!("{v:?}")));
        row.extend(samples.integrands().iter().map(|(_, col)| format!("{:?}", col[i])));
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|source| SecfError::Io { path: path.to_path_buf(), source })
}

/// Capture-recapture table: header `released,y1..yT`, one row per release
/// occasion `1..T−1`.
pub fn load_cjs_table(path: &Path) -> Result<CjsData> {
    let (header, rows) = read_table(path, true)?;
    if header.first().map(String::as_str) != Some("released") {
        return Err(parse_error(path, "first column must be \"released\""));
    }
    let t = header.len() - 1;
    for (k, name) in header[1..].iter().enumerate() {
        if indexed(name, 'y') != Some(k + 1) {
            return Err(parse_error(path, format!("expected column y{} but found {name:?}", k + 1)));
        }
    }
    if rows.len() + 1 != t {
        return Err(parse_error(path, format!("{} release rows for {t} occasions; expected {}", rows.len(), t.saturating_sub(1))));
    }
    let released = rows.iter().map(|r| r[0]).collect();
    let recaptured = rows.iter().map(|r| r[1..].to_vec()).collect();
    CjsData::new(released, recaptured).map_err(|e| parse_error(path, e.to_string()))
}

/// Design file with a binary `y` column and predictor columns; an intercept
/// column is prepended to the predictors.
pub fn load_design(path: &Path) -> Result<(Matrix, Vec<f64>)> {
    let (header, rows) = read_table(path, true)?;
    let yi = header
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| parse_error(path, "missing response column \"y\""))?;
    if rows.is_empty() {
        return Err(parse_error(path, "no data rows"));
    }
    let preds: Vec<usize> = (0..header.len()).filter(|&j| j != yi).collect();
    let design = Matrix::from_fn(rows.len(), preds.len() + 1, |i, j| if j == 0 { 1.0 } else { rows[i][preds[j - 1]] });
    let y = rows.iter().map(|r| r[yi]).collect();
    Ok((design, y))
}

/// Square matrix without header, one row per line.
pub fn load_matrix(path: &Path) -> Result<Matrix> {
    let (_, rows) = read_table(path, false)?;
    let n = rows.len();
    if n == 0 || rows[0].len() != n {
        return Err(parse_error(path, format!("expected a square matrix, found {n} rows")));
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(text.as_bytes()).map_err(|source| SecfError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_a_small_file() {
        let f = file("x1,g1,f_a\n0.5,-0.5,1\n-1,1,2\n");
        let s = load_samples(f.path()).unwrap();
        assert_eq!((s.len(), s.dim()), (2, 1));
        assert_eq!(s.integrand("a").unwrap(), &[1.0, 2.0]);
    }

    #[test]
    fn rejects_malformed_files() {
        let err = load_samples(file("x1,x2,g1,f_a\n1,2,3,4\n").path()).unwrap_err();
        assert!(err.to_string().contains("gradient column count mismatch"));
        let err = load_samples(file("x1,g1,f_a\n1,2,3\n1,NaN,3\n").path()).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        let err = load_samples(file("x1,g1,f_a\n1,2,3\n1,2\n").path()).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        assert!(load_samples(file("x1,g1\n1,2\n").path()).is_err());
    }

    #[test]
    fn round_trip() {
        let s = secf_core::samplers::iid_standard_normal(2, 5, 1)
            .unwrap()
            .with_integrand("h", vec![0.1, 1.0 / 3.0, -2.5e-300, 7.0, 1e300])
            .unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_samples(&s, out.path()).unwrap();
        assert_eq!(load_samples(out.path()).unwrap(), s);
    }

    #[test]
    fn reads_tables() {
        let cjs = load_cjs_table(file("released,y1,y2,y3\n10,0,4,1\n8,0,0,3\n").path()).unwrap();
        assert_eq!(cjs.occasions(), 3);
        assert!(load_cjs_table(file("released,y1,y2,y3\n10,2,4,1\n8,0,0,3\n").path()).is_err());
        let (x, y) = load_design(file("a,y,b\n1,0,2\n3,1,4\n").path()).unwrap();
        assert_eq!(x.row(1), &[1.0, 3.0, 4.0]);
        assert_eq!(y, vec![0.0, 1.0]);
        let m = load_matrix(file("2,0.5\n0.5,1\n").path()).unwrap();
        assert_eq!(m[(0, 1)], 0.5);
    }
}
