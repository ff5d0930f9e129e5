use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named contiguous slice of a [`ParamVector`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamGroup {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl ParamGroup {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

/// Elementwise box `lower <= x <= upper`; infinite entries mean unbounded.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::dims("bounds", lower.len(), upper.len()));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] <= upper[i])) {
            return Err(Error::Config(format!(
                "inconsistent bounds at {i}: {} > {}",
                lower[i], upper[i]
            )));
        }
        Ok(Bounds { lower, upper })
    }

    pub fn unbounded(n: usize) -> Self {
        Bounds {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn project(&self, x: &mut [f64]) {
        for ((xi, &lo), &hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *xi = xi.clamp(lo, hi);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&xi, (&lo, &hi))| lo <= xi && xi <= hi)
    }
}

/// Flat parameter vector with a named partition of its entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamVector {
    values: Vec<f64>,
    groups: Vec<ParamGroup>,
    bounds: Option<Bounds>,
}

impl ParamVector {
    /// Groups must be listed in order and tile `0..values.len()` exactly.
    pub fn new(values: Vec<f64>, groups: Vec<ParamGroup>) -> Result<Self> {
        let mut next = 0;
        for g in &groups {
            if g.start != next {
                return Err(Error::InvalidStructure(format!(
                    "group `{}` starts at {} but the previous group ended at {next}",
                    g.name, g.start
                )));
            }
            next += g.len;
        }
        if next != values.len() {
            return Err(Error::dims("parameter groups", values.len(), next));
        }
        Ok(ParamVector {
            values,
            groups,
            bounds: None,
        })
    }

    /// Single anonymous group covering every entry.
    pub fn ungrouped(values: Vec<f64>) -> Self {
        let len = values.len();
        ParamVector {
            values,
            groups: vec![ParamGroup {
                name: "all".into(),
                start: 0,
                len,
            }],
            bounds: None,
        }
    }

    pub fn with_bounds(mut self, bounds: Bounds) -> Result<Self> {
        if bounds.len() != self.values.len() {
            return Err(Error::dims("bounds", self.values.len(), bounds.len()));
        }
        if !bounds.contains(&self.values) {
            return Err(Error::Config("parameter values violate their bounds".into()));
        }
        self.bounds = Some(bounds);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn groups(&self) -> &[ParamGroup] {
        &self.groups
    }

    pub fn bounds(&self) -> Option<&Bounds> {
        self.bounds.as_ref()
    }

    pub fn range(&self, name: &str) -> Option<Range<usize>> {
        self.groups.iter().find(|g| g.name == name).map(|g| g.range())
    }

    pub fn group(&self, name: &str) -> Option<&[f64]> {
        self.range(name).map(|r| &self.values[r])
    }

    /// Replace the values, keeping groups and bounds.
    pub fn set_values(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::dims("parameter values", self.values.len(), values.len()));
        }
        self.values = values;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(name: &str, start: usize, len: usize) -> ParamGroup {
        ParamGroup {
            name: name.into(),
            start,
            len,
        }
    }

    #[test]
    fn groups_must_tile() {
        assert!(ParamVector::new(vec![0.0; 3], vec![g("a", 0, 1), g("b", 1, 2)]).is_ok());
        assert!(ParamVector::new(vec![0.0; 3], vec![g("a", 0, 1), g("b", 2, 1)]).is_err());
        assert!(ParamVector::new(vec![0.0; 3], vec![g("a", 0, 2)]).is_err());
        let empty = ParamVector::new(vec![1.0], vec![g("a", 0, 0), g("b", 0, 1)]).unwrap();
        assert_eq!(empty.group("a").unwrap().len(), 0);
    }

    #[test]
    fn bounds_are_checked() {
        let p = ParamVector::ungrouped(vec![0.5, 2.0]);
        let b = Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(p.clone().with_bounds(b).is_err());
        assert!(Bounds::new(vec![1.0], vec![0.0]).is_err());
        let mut x = vec![-1.0, 3.0];
        Bounds::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap().project(&mut x);
        assert_eq!(x, vec![0.0, 1.0]);
    }
}
