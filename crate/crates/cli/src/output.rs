use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::sweep::SweepTable;
use crate::CliError;

/// `%.12g`-style formatting: 12 significant digits, '.' decimal point.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn csv_text(table: &SweepTable) -> String {
    let mut out = String::from("gamma_t");
    for c in &table.columns {
        out.push(',');
        out.push_str(c.label());
    }
    out.push_str(",flags\n");
    for row in &table.rows {
        out.push_str(&format_number(row.gamma_t));
        for v in &row.values {
            out.push(',');
            out.push_str(&format_number(*v));
        }
        let _ = writeln!(out, ",{}", row.flags.join(";"));
    }
    out
}

pub fn csv_path(dir: &Path, state: &str) -> PathBuf {
    dir.join(format!("sweep_{state}.csv"))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_csvs(tables: &[SweepTable], dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    tables
        .iter()
        .map(|t| {
            let path = csv_path(dir, &t.state);
            write_file(&path, &csv_text(t))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.05), "0.05");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_number(-1234.5), "-1234.5");
        assert_eq!(format_number(1e-7), "1e-7");
        assert_eq!(format_number(1.23456789012345e-9), "1.23456789012e-9");
        assert_eq!(format_number(3e15), "3e15");
        assert_eq!(format_number(f64::NAN), "NaN");
        assert_eq!(format_number(f64::INFINITY), "inf");
        assert_eq!(format_number(3f64.ln()), "1.09861228867");
    }
}
