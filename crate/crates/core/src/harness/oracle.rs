use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use num_bigint::BigInt;
use serde::Deserialize;

use super::{HarnessError, Result};

/// Integer Hecke eigenvalues by level, `level -> n -> a_n`, one form per level.
pub type OracleTable = BTreeMap<u64, BTreeMap<u64, BigInt>>;

#[derive(Deserialize)]
struct Row {
    level: u64,
    n: u64,
    a_n: String,
}

/// Reads CSV with header `level,n,a_n`.
pub fn parse_oracle<R: Read>(input: R) -> Result<OracleTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(input);
    let mut table = OracleTable::new();
    for (i, row) in reader.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| HarnessError::Oracle(e.to_string()))?;
        let line = i + 2;
        if row.n == 0 || row.level == 0 {
            return Err(HarnessError::Oracle(format!("row {line}: level and n must be positive")));
        }
        let a: BigInt =
            row.a_n.parse().map_err(|_| HarnessError::Oracle(format!("row {line}: a_n {:?} is not an integer", row.a_n)))?;
        let prev = table.entry(row.level).or_default().insert(row.n, a.clone());
        if prev.is_some_and(|p| p != a) {
            return Err(HarnessError::Oracle(format!("row {line}: conflicting values for a_{} at level {}", row.n, row.level)));
        }
    }
    Ok(table)
}

pub fn load_oracle(path: &Path) -> Result<OracleTable> {
    let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
    parse_oracle(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows() {
        let t = parse_oracle("level,n,a_n\n11,2,-2\n# comment\n11, 3, -1\n15,2,-1\n".as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[&11][&2], BigInt::from(-2));
        assert_eq!(t[&11][&3], BigInt::from(-1));
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse_oracle("level,n,a_n\n11,2,x\n".as_bytes()).is_err());
        assert!(parse_oracle("level,n,a_n\n11,0,1\n".as_bytes()).is_err());
        assert!(parse_oracle("level,n,a_n\n11,2,1\n11,2,2\n".as_bytes()).is_err());
        assert!(parse_oracle("level,n\n11,2\n".as_bytes()).is_err());
    }
}
