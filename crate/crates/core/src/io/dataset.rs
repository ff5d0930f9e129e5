use crate::error::{Error, Result};

/// Sampled input/output record `{(u_k, y_k)}`, optionally with a measured
/// scheduling signal `p_k`. Rows are time steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub ts: f64,
    pub u: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub p: Option<Vec<Vec<f64>>>,
    /// Generator seed, when the data is synthetic.
    pub seed: Option<u64>,
}

fn check_rows(rows: &[Vec<f64>], width: usize, what: &'static str) -> Result<()> {
    for r in rows {
        if r.len() != width {
            return Err(Error::dims(what, width, r.len()));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(what));
        }
    }
    Ok(())
}

impl Dataset {
    pub fn new(ts: f64, u: Vec<Vec<f64>>, y: Vec<Vec<f64>>, p: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if !(ts > 0.0 && ts.is_finite()) {
            return Err(Error::Config(format!("sampling period must be positive, got {ts}")));
        }
        let n = y.len();
        if u.len() != n {
            return Err(Error::dims("input samples", n, u.len()));
        }
        let nu = u.first().map_or(0, Vec::len);
        let ny = y.first().map_or(0, Vec::len);
        check_rows(&u, nu, "dataset inputs")?;
        check_rows(&y, ny, "dataset outputs")?;
        if let Some(p) = &p {
            if p.len() != n {
                return Err(Error::dims("scheduling samples", n, p.len()));
            }
            check_rows(p, p.first().map_or(0, Vec::len), "dataset scheduling")?;
        }
        Ok(Dataset {
            ts,
            u,
            y,
            p,
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn nu(&self) -> usize {
        self.u.first().map_or(0, Vec::len)
    }

    pub fn ny(&self) -> usize {
        self.y.first().map_or(0, Vec::len)
    }

    pub fn np(&self) -> usize {
        self.p.as_ref().and_then(|p| p.first()).map_or(0, Vec::len)
    }

    /// Samples `range` as a new dataset.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Dataset {
        Dataset {
            ts: self.ts,
            u: self.u[range.clone()].to_vec(),
            y: self.y[range.clone()].to_vec(),
            p: self.p.as_ref().map(|p| p[range].to_vec()),
            seed: self.seed,
        }
    }

    /// Output channel `j` as a flat series.
    pub fn y_channel(&self, j: usize) -> Vec<f64> {
        self.y.iter().map(|r| r[j]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_checks() {
        assert!(Dataset::new(0.01, vec![vec![1.0]; 3], vec![vec![0.0]; 2], None).is_err());
        assert!(Dataset::new(0.0, vec![], vec![], None).is_err());
        assert!(Dataset::new(1.0, vec![vec![f64::NAN]], vec![vec![0.0]], None).is_err());
        let d = Dataset::new(1.0, vec![vec![1.0]; 4], vec![vec![0.0, 1.0]; 4], Some(vec![vec![0.5]; 4])).unwrap();
        assert_eq!((d.len(), d.nu(), d.ny(), d.np()), (4, 1, 2, 1));
        assert_eq!(d.slice(1..3).len(), 2);
    }
}
