//! Plug-in entropy and mutual information of labelings, in bits.

use crate::error::{Error, Result};

/// Cluster assignment of a dataset; ids need not be contiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling(pub Vec<usize>);

impl Labeling {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn counts(a: &Labeling) -> (usize, Vec<usize>) {
    let width = a.0.iter().copied().max().map_or(0, |m| m + 1);
    let mut c = vec![0usize; width];
    for &l in &a.0 {
        c[l] += 1;
    }
    (width, c)
}

/// Plug-in entropy H(a) in bits.
pub fn entropy(a: &Labeling) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyInput("labeling"));
    }
    let n = a.len() as f64;
    let (_, c) = counts(a);
    Ok(c.iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let p = k as f64 / n;
            -p * p.log2()
        })
        .sum())
}

/// Plug-in mutual information I(a, b) in bits from the contingency table.
pub fn mutual_information(a: &Labeling, b: &Labeling) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyInput("labeling"));
    }
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "labelings have lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as f64;
    let (wa, ca) = counts(a);
    let (wb, cb) = counts(b);
    let mut joint = vec![0usize; wa * wb];
    for (&x, &y) in a.0.iter().zip(&b.0) {
        joint[x * wb + y] += 1;
    }
    let mut mi = 0.0;
    for x in 0..wa {
        for y in 0..wb {
            let k = joint[x * wb + y];
            if k == 0 {
                continue;
            }
            let p = k as f64 / n;
            let px = ca[x] as f64 / n;
            let py = cb[y] as f64 / n;
            mi += p * (p / (px * py)).log2();
        }
    }
    Ok(mi.max(0.0))
}
