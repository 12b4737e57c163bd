//! Level files: comma-separated, header `n1,...,nl,energy`.

use std::collections::BTreeSet;

use qosc::models::{Level, LevelSpectrum};

use crate::error::CliError;
use crate::format::fmt_num;

/// Writes levels in spectrum order, energies multiplied by `unit`.
pub fn write_levels_csv(levels: &LevelSpectrum, modes: usize, unit: f64) -> String {
    let mut out = String::new();
    let header: Vec<String> = (1..=modes).map(|i| format!("n{i}")).collect();
    out.push_str(&header.join(","));
    out.push_str(",energy\n");
    for level in levels.iter() {
        for n in &level.assignment {
            out.push_str(&n.to_string());
            out.push(',');
        }
        out.push_str(&fmt_num(level.energy * unit));
        out.push('\n');
    }
    out
}

/// Parses a level file, dividing energies by `unit`.
///
/// Rejects a wrong header, non-integer quanta, non-finite energies and
/// repeated assignments.
pub fn read_levels_csv(text: &str, modes: usize, unit: f64) -> Result<LevelSpectrum, CliError> {
    let bad = |m: String| CliError::Usage(format!("level file: {m}"));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let expected: Vec<String> = (1..=modes)
        .map(|i| format!("n{i}"))
        .chain(std::iter::once("energy".to_string()))
        .collect();
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(bad(format!(
            "header must be '{}', found '{}'",
            expected.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut seen = BTreeSet::new();
    let mut levels = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| bad(format!("line {line}: {e}")))?;
        let assignment = (0..modes)
            .map(|i| {
                record[i].parse::<u32>().map_err(|_| {
                    bad(format!(
                        "line {line}: '{}' is not a quantum number",
                        &record[i]
                    ))
                })
            })
            .collect::<Result<Vec<u32>, _>>()?;
        let energy: f64 = record[modes]
            .parse()
            .map_err(|_| bad(format!("line {line}: '{}' is not a number", &record[modes])))?;
        if !energy.is_finite() {
            return Err(bad(format!("line {line}: energy is not finite")));
        }
        if !seen.insert(assignment.clone()) {
            return Err(bad(format!(
                "line {line}: duplicate assignment {assignment:?}"
            )));
        }
        levels.push(Level::new(assignment, energy / unit));
    }
    if levels.is_empty() {
        return Err(bad("no levels".into()));
    }
    LevelSpectrum::new(levels).map_err(|e| bad(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "n1,n2,energy\n0,0,0\n1,0,1.25\n0,1,0.75\n";
        let levels = read_levels_csv(text, 2, 1.0).unwrap();
        assert_eq!(levels.len(), 3);
        let written = write_levels_csv(&levels, 2, 1.0);
        assert_eq!(written, "n1,n2,energy\n0,0,0\n0,1,0.75\n1,0,1.25\n");
        assert_eq!(read_levels_csv(&written, 2, 1.0).unwrap(), levels);
    }

    #[test]
    fn unit_scaling() {
        let levels = read_levels_csv("n1,energy\n0,0\n1,200\n", 1, 100.0).unwrap();
        assert_eq!(levels.energy_of(&[1]), Some(2.0));
        assert_eq!(
            write_levels_csv(&levels, 1, 100.0),
            "n1,energy\n0,0\n1,200\n"
        );
    }

    #[test]
    fn malformed_files() {
        for text in [
            "n1,n2,energy\n0,0,0\n0,0,1\n",
            "n1,energy\n0,0\n",
            "n1,n2,energy\n0,x,0\n",
            "n1,n2,energy\n0,-1,0\n",
            "n1,n2,energy\n0,0,nan\n",
            "n1,n2,energy\n0,0\n",
            "n1,n2,energy\n",
        ] {
            assert!(
                matches!(read_levels_csv(text, 2, 1.0), Err(CliError::Usage(_))),
                "{text:?}"
            );
        }
    }
}
