//! Weighted graphs on the terminal set.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{DemandVector, Graph};

/// A weighted complete graph on terminals, indexed by terminal position.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sparsifier {
    names: Vec<String>,
    weights: BTreeMap<(usize, usize), f64>,
}

impl Sparsifier {
    pub fn new(names: Vec<String>) -> Self {
        Sparsifier {
            names,
            weights: BTreeMap::new(),
        }
    }

    /// Empty sparsifier on the terminals of `g`, in terminal order.
    pub fn on_terminals(g: &Graph) -> Self {
        Sparsifier::new(
            g.terminals()
                .iter()
                .map(|&t| g.name(t).to_string())
                .collect(),
        )
    }

    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn key(&self, i: usize, j: usize) -> Result<(usize, usize)> {
        if i == j || i >= self.k() || j >= self.k() {
            return Err(Error::input(format!("invalid sparsifier pair ({i}, {j})")));
        }
        Ok((i.min(j), i.max(j)))
    }

    /// Adds `w` to the weight of pair `{i, j}`.
    pub fn add(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::input(format!(
                "sparsifier weight must be nonnegative, got {w}"
            )));
        }
        let key = self.key(i, j)?;
        *self.weights.entry(key).or_default() += w;
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Stored pairs `((i, j), w)` with `i < j`, in order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.weights.iter().map(|(&p, &w)| (p, w))
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.values().sum()
    }

    /// Total weight incident to terminal `i`.
    pub fn degree(&self, i: usize) -> f64 {
        self.iter()
            .filter(|((a, b), _)| *a == i || *b == i)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> Sparsifier {
        Sparsifier {
            names: self.names.clone(),
            weights: self
                .weights
                .iter()
                .map(|(&p, &w)| (p, w * factor))
                .collect(),
        }
    }

    /// Cut value of the terminal bitmask `bits` (bit `i` = position `i`).
    pub fn cut_bits(&self, bits: u64) -> f64 {
        self.iter()
            .filter(|((a, b), _)| (bits >> a & 1) != (bits >> b & 1))
            .map(|(_, w)| w)
            .sum()
    }

    /// Cut value of every bitmask in `0..2^k`.
    pub fn all_cuts(&self) -> Result<Vec<f64>> {
        let k = self.k();
        if k > 24 {
            return Err(Error::size(format!(
                "exhaustive sparsifier cuts need k <= 24, got {k}"
            )));
        }
        // Gray-code style accumulation would be faster; k <= 16 keeps this cheap.
        Ok((0..1u64 << k).map(|b| self.cut_bits(b)).collect())
    }

    /// The sparsifier as a graph whose nodes are all terminals.
    pub fn to_graph(&self) -> Result<Graph> {
        let edges = self
            .iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|((a, b), w)| (a, b, w));
        Graph::new(self.names.clone(), edges, (0..self.k()).collect())
    }

    /// Checks that the terminals agree with `g`'s terminals by name and order.
    pub fn check_matches(&self, g: &Graph) -> Result<()> {
        if self.k() != g.k() {
            return Err(Error::input(format!(
                "sparsifier has {} terminals, graph has {}",
                self.k(),
                g.k()
            )));
        }
        for (name, &t) in self.names.iter().zip(g.terminals()) {
            if name != g.name(t) {
                return Err(Error::input(format!(
                    "sparsifier terminal `{name}` does not match graph terminal `{}`",
                    g.name(t)
                )));
            }
        }
        Ok(())
    }

    /// The weights as a demand vector between `g`'s terminal nodes.
    pub fn as_demand(&self, g: &Graph) -> Result<DemandVector> {
        self.check_matches(g)?;
        let t = g.terminals();
        let mut d = DemandVector::new();
        for ((a, b), w) in self.iter() {
            if w > 0.0 {
                d.add(t[a], t[b], w)?;
            }
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cuts_and_degree() {
        let mut h = Sparsifier::new(vec!["a".into(), "b".into(), "c".into()]);
        h.add(0, 1, 1.0).unwrap();
        h.add(1, 2, 2.0).unwrap();
        h.add(2, 1, 0.5).unwrap();
        assert_eq!(h.get(1, 2), 2.5);
        assert_eq!(h.cut_bits(0b010), 3.5);
        assert_eq!(h.degree(1), 3.5);
        assert!(h.add(0, 0, 1.0).is_err());
        assert!(h.add(0, 1, -1.0).is_err());
        let cuts = h.all_cuts().unwrap();
        assert_eq!(cuts[0], 0.0);
        assert_eq!(cuts[0b001], cuts[0b110]);
    }
}
