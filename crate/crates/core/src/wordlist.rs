//! Word-list files: UTF-8 CSV, `#` starts a comment line, blank lines are
//! ignored. Pair lists have two columns (`female,male`), the other kinds one.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bias::ProfessionPair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordListKind {
    ProfessionPairs,
    DefinitionalPairs,
    EqualizePairs,
    GenderSpecific,
    Probes,
}

impl WordListKind {
    pub fn columns(self) -> usize {
        match self {
            Self::ProfessionPairs | Self::DefinitionalPairs | Self::EqualizePairs => 2,
            Self::GenderSpecific | Self::Probes => 1,
        }
    }
}

impl fmt::Display for WordListKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ProfessionPairs => "profession pairs",
            Self::DefinitionalPairs => "definitional pairs",
            Self::EqualizePairs => "equalize pairs",
            Self::GenderSpecific => "gender-specific words",
            Self::Probes => "probes",
        })
    }
}

fn read_rows<R: Read>(source: R, columns: usize) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::WordList {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != columns {
            return Err(Error::WordList {
                line,
                reason: format!("expected {columns} column(s), found {}", record.len()),
            });
        }
        let row: Vec<String> = record.iter().map(str::to_owned).collect();
        if row.iter().any(String::is_empty) {
            return Err(Error::WordList {
                line,
                reason: "empty entry".into(),
            });
        }
        if !seen.insert(row.clone()) {
            return Err(Error::WordList {
                line,
                reason: format!("duplicate row {}", row.join(",")),
            });
        }
        rows.push((line, row));
    }
    Ok(rows)
}

pub fn read_pairs<R: Read>(source: R) -> Result<Vec<ProfessionPair>> {
    read_rows(source, 2)?
        .into_iter()
        .map(|(line, mut row)| {
            let male = row.pop().expect("two columns");
            let female = row.pop().expect("two columns");
            ProfessionPair::new(female, male).map_err(|e| Error::WordList {
                line,
                reason: e.to_string(),
            })
        })
        .collect()
}

pub fn read_words<R: Read>(source: R) -> Result<Vec<String>> {
    Ok(read_rows(source, 1)?
        .into_iter()
        .map(|(_, mut row)| row.pop().expect("one column"))
        .collect())
}

pub fn read_pairs_path(path: &Path) -> Result<Vec<ProfessionPair>> {
    read_pairs(File::open(path)?)
}

pub fn read_words_path(path: &Path) -> Result<Vec<String>> {
    read_words(File::open(path)?)
}
