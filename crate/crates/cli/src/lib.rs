//! Library side of the `setinc` command-line tool: problem files, reports
//! and the command implementations.

pub mod builders;
pub mod commands;
pub mod problem_file;
pub mod report;

use std::path::Path;

use setinc_core::analysis::Polyhedron;
use setinc_core::{instances, Problem, Vector};

pub use problem_file::ProblemFile;
pub use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] setinc_core::Error),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Dimension(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Parse(_) => "ParseError",
            CliError::Dimension(_) => "DimensionError",
            CliError::Io(_) => "IoError",
        }
    }
}

/// A problem together with the file it came from.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub file: ProblemFile,
    pub problem: Problem,
    pub solution_set: Option<Polyhedron>,
}

impl Loaded {
    pub fn from_file(file: ProblemFile) -> Result<Self, CliError> {
        let problem = file.problem()?;
        let solution_set = file.solution_set()?;
        Ok(Self { file, problem, solution_set })
    }

    /// Hex SHA-256 of the compact JSON form of the problem file.
    pub fn hash(&self) -> String {
        report::sha256_hex(&serde_json::to_string(&self.file).expect("problem files serialize"))
    }
}

/// Loads a builtin instance by name (`i1`, `i2`, `i2-fan`, `i3`, `i3-cone`,
/// `i4`) or a problem file by path.
pub fn load(spec: &str) -> Result<Loaded, CliError> {
    if let Some(inst) = instances::by_name(spec) {
        if !Path::new(spec).exists() {
            return Loaded::from_file(ProblemFile::from_instance(&inst));
        }
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::Io(format!("{spec}: {e}")))?;
    Loaded::from_file(ProblemFile::parse(&text)?)
}

/// Parses `"1,-2.5,3"` into a vector of finite reals.
pub fn parse_vector(text: &str) -> Result<Vector, CliError> {
    let xs = text
        .split(',')
        .map(|t| {
            let t = t.trim();
            let x: f64 = t.parse().map_err(|_| CliError::Parse(format!("not a number: {t:?}")))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(CliError::Parse(format!("non-finite value {t:?}")))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Vector::from_vec(xs))
}

/// Parses a list of vectors separated by `;`.
pub fn parse_vectors(text: &str) -> Result<Vec<Vector>, CliError> {
    text.split(';').filter(|t| !t.trim().is_empty()).map(parse_vector).collect()
}

/// Parses a region: `"a,b"` is the cube `[a, b]ⁿ`, `"l1,…,ln:u1,…,un"` a box.
pub fn parse_region(text: &str, n: usize) -> Result<(Vector, Vector), CliError> {
    let (lower, upper) = match text.split_once(':') {
        Some((l, u)) => (parse_vector(l)?, parse_vector(u)?),
        None => {
            let ab = parse_vector(text)?;
            if ab.len() != 2 {
                return Err(CliError::Parse(format!("region {text:?} must be \"a,b\" or \"lower:upper\"")));
            }
            (Vector::from_element(n, ab[0]), Vector::from_element(n, ab[1]))
        }
    };
    if lower.len() != n || upper.len() != n {
        return Err(CliError::Dimension(format!("region has dimension {} but n = {n}", lower.len().max(upper.len()))));
    }
    if lower.iter().zip(upper.iter()).any(|(l, u)| l >= u) {
        return Err(CliError::Parse("region needs lower < upper in every coordinate".into()));
    }
    Ok((lower, upper))
}

/// Reads JSON inline, or from a file when the argument names one.
pub fn read_json_arg<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T, CliError> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg).map_err(|e| CliError::Io(format!("{arg}: {e}")))?
    } else {
        arg.to_owned()
    };
    serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn check_len(x: &Vector, n: usize, what: &str) -> Result<(), CliError> {
    if x.len() != n {
        return Err(CliError::Dimension(format!("{what} has length {} but n = {n}", x.len())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_and_regions() {
        assert_eq!(parse_vector("1, -2.5,3").unwrap().as_slice(), &[1.0, -2.5, 3.0]);
        assert_eq!(parse_vector("inf").unwrap_err().category(), "ParseError");
        assert_eq!(parse_vector("1,,2").unwrap_err().category(), "ParseError");
        assert_eq!(parse_vectors("1,0;0,1;").unwrap().len(), 2);

        let (lo, hi) = parse_region("-5,5", 3).unwrap();
        assert_eq!((lo.as_slice(), hi.as_slice()), (&[-5.0; 3][..], &[5.0; 3][..]));
        let (lo, hi) = parse_region("-1,0:1,2", 2).unwrap();
        assert_eq!((lo[1], hi[1]), (0.0, 2.0));
        assert_eq!(parse_region("-1,0:1", 2).unwrap_err().category(), "DimensionError");
        assert_eq!(parse_region("2,1", 1).unwrap_err().category(), "ParseError");
        assert_eq!(parse_region("1,2,3", 1).unwrap_err().category(), "ParseError");
    }

    #[test]
    fn builtins_load_and_hash_stably() {
        let a = load("i3").unwrap();
        assert_eq!(a.hash(), load("i3").unwrap().hash());
        assert_ne!(a.hash(), load("i1").unwrap().hash());
        assert_eq!(a.hash().len(), 64);
        assert!(a.solution_set.is_some());
        assert_eq!(load("no/such/file.json").unwrap_err().category(), "IoError");
    }

    #[test]
    fn json_arguments_inline() {
        let rows: Vec<Vec<f64>> = read_json_arg("[[1,2],[3,4]]").unwrap();
        assert_eq!(rows[1], vec![3.0, 4.0]);
        assert_eq!(read_json_arg::<Vec<f64>>("[1,").unwrap_err().category(), "ParseError");
    }
}
