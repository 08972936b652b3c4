use std::io::Read;

use crate::error::{Error, Result};

/// Inputs `x` with map targets and derivative targets.
///
/// `targets[0]` holds the map values, `targets[d]` the desired d-th
/// derivative at each input.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    x: Vec<f64>,
    targets: Vec<Vec<f64>>,
}

impl TrainingSet {
    pub fn new(x: Vec<f64>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::invalid("training set needs at least one point"));
        }
        if targets.is_empty() {
            return Err(Error::invalid("training set needs map targets"));
        }
        if let Some(bad) = targets.iter().position(|t| t.len() != x.len()) {
            return Err(Error::invalid(format!(
                "target vector {bad} has length {}, expected {}",
                targets[bad].len(),
                x.len()
            )));
        }
        if x.iter().chain(targets.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("training data must be finite"));
        }
        let mut sorted = x.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate input {}", w[0])));
        }
        Ok(Self { x, targets })
    }

    /// Map targets only.
    pub fn from_values(x: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        Self::new(x, vec![t])
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    /// Highest derivative order carried by the set.
    pub fn order(&self) -> usize {
        self.targets.len() - 1
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Copy with derivative channels dropped.
    pub fn values_only(&self) -> Self {
        Self { x: self.x.clone(), targets: vec![self.targets[0].clone()] }
    }

    /// Parses `x,t[,d1[,d2,...]]` CSV. Rows repeating an input with identical
    /// targets are merged; conflicting repeats are rejected.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        let names: Vec<&str> = header.iter().collect();
        if names.len() < 2 || names[0] != "x" || names[1] != "t" {
            return Err(Error::Parse { line: 1, message: "header must start with `x,t`".into() });
        }
        for (k, name) in names.iter().enumerate().skip(2) {
            let expected = format!("d{}", k - 1);
            if *name != expected {
                return Err(Error::Parse { line: 1, message: format!("expected column `{expected}`, found `{name}`") });
            }
        }
        let channels = names.len() - 1;
        let mut x = Vec::new();
        let mut targets = vec![Vec::new(); channels];
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != names.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", names.len(), record.len()),
                });
            }
            let mut values = Vec::with_capacity(names.len());
            for field in record.iter() {
                let v: f64 =
                    field.parse().map_err(|_| Error::Parse { line, message: format!("`{field}` is not a number") })?;
                if !v.is_finite() {
                    return Err(Error::Parse { line, message: format!("non-finite value `{field}`") });
                }
                values.push(v);
            }
            if let Some(prev) = x.iter().position(|&p| p == values[0]) {
                let same = (0..channels).all(|c| targets[c][prev] == values[c + 1]);
                if same {
                    continue;
                }
                return Err(Error::Parse {
                    line,
                    message: format!("input {} repeated with conflicting targets", values[0]),
                });
            }
            x.push(values[0]);
            for c in 0..channels {
                targets[c].push(values[c + 1]);
            }
        }
        if x.is_empty() {
            return Err(Error::Parse { line: 1, message: "no data rows".into() });
        }
        Self::new(x, targets)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,t");
        for d in 1..=self.order() {
            out.push_str(&format!(",d{d}"));
        }
        out.push('\n');
        for k in 0..self.len() {
            out.push_str(&format!("{}", self.x[k]));
            for t in &self.targets {
                out.push_str(&format!(",{}", t[k]));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_derivative_columns() {
        let ts = TrainingSet::from_csv_reader("x,t,d1\n0,1,2\n1,3,4\n".as_bytes()).unwrap();
        assert_eq!(ts.order(), 1);
        assert_eq!(ts.x(), &[0.0, 1.0]);
        assert_eq!(ts.targets()[1], vec![2.0, 4.0]);
    }

    #[test]
    fn malformed_row_names_line() {
        let err = TrainingSet::from_csv_reader("x,t\n0,1\n1,abc\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn non_contiguous_derivative_columns_rejected() {
        assert!(TrainingSet::from_csv_reader("x,t,d2\n0,1,2\n".as_bytes()).is_err());
        assert!(TrainingSet::from_csv_reader("t,x\n0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn duplicates() {
        let ts = TrainingSet::from_csv_reader("x,t\n0,1\n0,1\n2,3\n".as_bytes()).unwrap();
        assert_eq!(ts.len(), 2);
        let err = TrainingSet::from_csv_reader("x,t\n0,1\n0,2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"));
        assert!(TrainingSet::from_values(vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let ts = TrainingSet::new(vec![0.25, -1.5], vec![vec![1.0, 2.0], vec![0.1, 0.2]]).unwrap();
        assert_eq!(TrainingSet::from_csv_reader(ts.to_csv().as_bytes()).unwrap(), ts);
    }
}
