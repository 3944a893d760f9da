//! Per-frame decisions produced elsewhere (e.g. by a trained network).
//!
//! Format: header `frame,p2,p4,p6,p8`, then one comma-separated record per
//! frame.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::RegulatorOutput;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct DecisionTable {
    rows: BTreeMap<usize, RegulatorOutput>,
}

impl DecisionTable {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        parse_decision_table(&text, path)
    }

    pub fn get(&self, frame: usize) -> Option<&RegulatorOutput> {
        self.rows.get(&frame)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("frame,p2,p4,p6,p8\n");
        for (f, o) in &self.rows {
            let p = o.probs();
            s.push_str(&format!("{f},{},{},{},{}\n", p[0], p[1], p[2], p[3]));
        }
        s
    }

    pub fn insert(&mut self, frame: usize, out: RegulatorOutput) {
        self.rows.insert(frame, out);
    }
}

pub fn parse_decision_table(text: &str, path: &Path) -> Result<DecisionTable> {
    let perr = |line: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim().replace(' ', "") == "frame,p2,p4,p6,p8" => {}
        Some((i, _)) => return Err(perr(i + 1, "expected header 'frame,p2,p4,p6,p8'".into())),
        None => return Err(perr(1, "empty decision table".into())),
    }
    let mut table = DecisionTable::default();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(perr(
                i + 1,
                format!("expected 5 fields, found {}", fields.len()),
            ));
        }
        let frame: usize = fields[0]
            .parse()
            .map_err(|_| perr(i + 1, format!("bad frame index '{}'", fields[0])))?;
        let mut p = [0.0; 4];
        for (k, f) in fields[1..].iter().enumerate() {
            p[k] = f
                .parse()
                .map_err(|_| perr(i + 1, format!("bad probability '{f}'")))?;
        }
        let out = RegulatorOutput::new(p).map_err(|e| perr(i + 1, e.to_string()))?;
        if table.rows.insert(frame, out).is_some() {
            return Err(perr(i + 1, format!("duplicate frame {frame}")));
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RadiusCategory;
    use crate::regulator::select_category;

    #[test]
    fn parses_and_round_trips() {
        let text = "frame,p2,p4,p6,p8\n1,0.7,0.1,0.1,0.1\n2,0,0,0,1\n";
        let t = parse_decision_table(text, Path::new("x.csv")).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(select_category(t.get(2).unwrap()), RadiusCategory::SR8);
        let again = parse_decision_table(&t.to_csv(), Path::new("x.csv")).unwrap();
        assert_eq!(again.get(1), t.get(1));
    }

    #[test]
    fn reports_line_numbers() {
        let text = "frame,p2,p4,p6,p8\n1,0.7,0.1,0.1,0.1\n2,0.5,0.1\n";
        match parse_decision_table(text, Path::new("x.csv")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_decision_table("1,1,0,0,0\n", Path::new("x.csv")).is_err());
        assert!(
            parse_decision_table("frame,p2,p4,p6,p8\n1,0.9,0.9,0,0\n", Path::new("x.csv")).is_err()
        );
    }
}
