//! Trajectory and table CSVs, `.licd` message files.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use licds_core::codec::EncodedMessage;
use licds_core::Trajectory;

use crate::error::CliError;

/// Relative slack when checking that CSV times are equally spaced.
const TIME_TOLERANCE: f64 = 1e-9;

/// Fixed scientific notation with 17 significant digits, enough to
/// round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_all(bytes).and_then(|_| w.flush()).map_err(|e| io_err(path, e))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| io_err(path, e))
}

/// Header `t,x1,...,xn`, one row per sample.
pub fn write_trajectory<W: Write>(traj: &Trajectory, w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    header.extend((1..=traj.dim()).map(|i| format!("x{i}")));
    out.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for (i, s) in traj.states().enumerate() {
        let mut row = vec![fmt_f64(traj.time(i))];
        row.extend(s.iter().map(|v| fmt_f64(*v)));
        out.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// Parses a trajectory CSV. Times must be equally spaced; `dt` and `t0` are
/// taken from them.
pub fn read_trajectory<R: Read>(r: R) -> Result<Trajectory, CliError> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(|e| CliError::Io(e.to_string()))?.clone();
    let dim = header.len().saturating_sub(1);
    let expected: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=dim).map(|i| format!("x{i}")))
        .collect();
    if dim == 0 || header.iter().map(str::trim).ne(expected.iter().map(String::as_str)) {
        return Err(CliError::Config(format!(
            "trajectory header must be `t,x1,...,xn`, got `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Io(e.to_string()))?;
        let row: Vec<f64> = rec
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(format!("row {}: {e}", line + 1)))?;
        times.push(row[0]);
        states.push(row[1..].to_vec());
    }
    if times.len() < 2 {
        return Err(CliError::Config("trajectory needs at least two samples".into()));
    }
    let steps = times.len() - 1;
    let dt = (times[steps] - times[0]) / steps as f64;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(CliError::Config("trajectory times must increase".into()));
    }
    for (i, t) in times.iter().enumerate() {
        let want = times[0] + i as f64 * dt;
        if (t - want).abs() > TIME_TOLERANCE * want.abs().max(1.0) {
            return Err(CliError::Config(format!("sample {i} at t = {t} breaks the uniform grid")));
        }
    }
    Ok(Trajectory::from_states(&states, dt, times[0]))
}

pub fn save_trajectory(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    write_trajectory(traj, create(path)?).map_err(|e| e.context(&path.display().to_string()))
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_trajectory(file).map_err(|e| e.context(&path.display().to_string()))
}

/// Writes a header row and rows of preformatted cells.
pub fn write_table<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        out.write_record(row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_message(path: &Path, msg: &EncodedMessage) -> Result<(), CliError> {
    write_file(path, &msg.to_bytes())
}

pub fn load_message(path: &Path) -> Result<EncodedMessage, CliError> {
    let bytes = read_file(path)?;
    EncodedMessage::from_bytes(&bytes)
        .map_err(|e| CliError::from(e).context(&path.display().to_string()))
}
