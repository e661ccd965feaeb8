use std::path::Path;
use std::str::FromStr;

use mvgamma::{CorrelationMatrix, Error, Matrix, Result};

const MODULE: &str = "cli";

pub fn bad(msg: impl Into<String>) -> Error {
    Error::BadInput { module: MODULE, msg: msg.into() }
}

fn number(s: &str) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| bad(format!("not a number: '{t}'"))),
    }
}

/// Comma-separated numbers; `inf` is accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct List(pub Vec<f64>);

impl FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',').map(number).collect::<Result<Vec<_>>>().map(List).map_err(|e| e.to_string())
    }
}

/// Comma-separated block sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Sizes(pub Vec<usize>);

impl FromStr for Sizes {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| format!("not a block size: '{t}'")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if v.contains(&0) {
            return Err("block sizes must be positive".into());
        }
        Ok(Sizes(v))
    }
}

/// Blocks of 1-based indices separated by `|`, e.g. `1,2|3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks(pub Vec<Vec<usize>>);

impl FromStr for Blocks {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut out = Vec::new();
        for b in s.split('|') {
            let idx = b
                .split(',')
                .map(|t| match t.trim().parse::<usize>() {
                    Ok(i) if i >= 1 => Ok(i - 1),
                    _ => Err(format!("not a 1-based index: '{t}'")),
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            out.push(idx);
        }
        Ok(Blocks(out))
    }
}

/// Matrix text: the dimension `n` on the first line, then `n` rows of
/// whitespace-separated entries. `#` starts a comment.
pub fn parse_matrix(text: &str) -> Result<CorrelationMatrix> {
    let mut tokens = text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace);
    let n: usize = tokens
        .next()
        .ok_or_else(|| bad("matrix file is empty"))?
        .parse()
        .map_err(|_| bad("first entry of a matrix file must be the dimension"))?;
    let entries = tokens.map(number).collect::<Result<Vec<f64>>>()?;
    if entries.len() != n * n {
        return Err(bad(format!("matrix of dimension {n} needs {} entries, found {}", n * n, entries.len())));
    }
    CorrelationMatrix::validate(Matrix::from_fn(n, |i, j| entries[i * n + j]))
}

pub fn read_matrix(path: &Path) -> Result<CorrelationMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text)
}

/// Rows separated by `;`, entries by `,`.
pub fn inline_matrix(s: &str) -> Result<CorrelationMatrix> {
    let rows = s.split(';').map(|r| r.split(',').map(number).collect::<Result<Vec<f64>>>()).collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(bad("inline matrix must be square"));
    }
    CorrelationMatrix::validate(Matrix::from_fn(n, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_inf() {
        let r = parse_matrix("# two\n2\n1 0.5 # first row\n0.5 1\n").unwrap();
        assert_eq!(r.get(0, 1), 0.5);
        assert_eq!("1,inf,2".parse::<List>().unwrap().0[1], f64::INFINITY);
        assert!(parse_matrix("2\n1 0.5\n0.5").is_err());
    }

    #[test]
    fn blocks_are_one_based() {
        assert_eq!("1,2|3".parse::<Blocks>().unwrap().0, vec![vec![0, 1], vec![2]]);
        assert!("0|1".parse::<Blocks>().is_err());
    }
}
