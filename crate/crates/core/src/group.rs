//! Finite groups as explicit multiplication tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    names: Vec<String>,
    /// table[a][b] = a * b
    table: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Validates the full group laws over the table.
    pub fn new(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::Validation("empty group".into()));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("multiplication table is not n x n".into()));
        }
        for row in &table {
            for &v in row {
                if v >= n {
                    return Err(Error::Validation("table entry out of range".into()));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::Validation("no identity element".into()))?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::Validation(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            let i = (0..n)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| Error::Validation(format!("element {a} has no inverse")))?;
            inv[a] = i;
        }
        Ok(FiniteGroup {
            names,
            table,
            inv,
            identity,
        })
    }

    pub fn trivial() -> Self {
        FiniteGroup::new(vec!["e".into()], vec![vec![0]]).unwrap()
    }

    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1);
        let names = (0..n)
            .map(|i| if i == 0 { "e".into() } else { format!("g{i}") })
            .collect();
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        FiniteGroup::new(names, table).unwrap()
    }

    pub fn direct_product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let n = a.order() * b.order();
        let idx = |x: usize, y: usize| x * b.order() + y;
        let mut names = Vec::with_capacity(n);
        for x in 0..a.order() {
            for y in 0..b.order() {
                names.push(format!("{}.{}", a.name(x), b.name(y)));
            }
        }
        let mut table = vec![vec![0; n]; n];
        for x1 in 0..a.order() {
            for y1 in 0..b.order() {
                for x2 in 0..a.order() {
                    for y2 in 0..b.order() {
                        table[idx(x1, y1)][idx(x2, y2)] =
                            idx(a.mul(x1, x2), b.mul(y1, y2));
                    }
                }
            }
        }
        FiniteGroup::new(names, table).unwrap()
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.order()
    }

    /// Conjugation b^{-1} a b.
    pub fn conj(&self, a: usize, b: usize) -> usize {
        self.mul(self.mul(self.inv(b), a), b)
    }
}

/// Group homomorphism given by its value table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homomorphism {
    values: Vec<usize>,
}

impl Homomorphism {
    pub fn new(source: &FiniteGroup, target: &FiniteGroup, values: Vec<usize>) -> Result<Self> {
        if values.len() != source.order() {
            return Err(Error::Validation(
                "homomorphism table length differs from group order".into(),
            ));
        }
        if values.iter().any(|&v| v >= target.order()) {
            return Err(Error::Validation("homomorphism value out of range".into()));
        }
        if values[source.identity()] != target.identity() {
            return Err(Error::Validation(
                "homomorphism does not preserve the identity".into(),
            ));
        }
        for a in source.elements() {
            for b in source.elements() {
                if values[source.mul(a, b)] != target.mul(values[a], values[b]) {
                    return Err(Error::Validation(format!(
                        "homomorphism fails at ({}, {})",
                        source.name(a),
                        source.name(b)
                    )));
                }
            }
        }
        Ok(Homomorphism { values })
    }

    pub fn apply(&self, a: usize) -> usize {
        self.values[a]
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupJson {
    pub elements: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

impl FiniteGroup {
    pub fn to_json(&self) -> GroupJson {
        GroupJson {
            elements: self.names.clone(),
            table: self.table.clone(),
        }
    }

    pub fn from_json(j: &GroupJson) -> Result<Self> {
        FiniteGroup::new(j.elements.clone(), j.table.clone())
    }

    /// Lookup map from element name to index.
    pub fn name_map(&self) -> BTreeMap<String, usize> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect()
    }
}
