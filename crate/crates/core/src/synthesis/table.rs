//! Contingency tables and marginal targets.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One dimension of a contingency table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub categories: Vec<String>,
}

impl Axis {
    pub fn new(name: impl Into<String>, categories: impl IntoIterator<Item = String>) -> Axis {
        Axis { name: name.into(), categories: categories.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}

/// An n-dimensional non-negative contingency table, cells stored row-major
/// (last axis varies fastest). Construction validates shape and sign, so a
/// `ContingencyTable` value is always structurally sound; a zero total is
/// permitted here and rejected by the operations that cannot handle it.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    axes: Vec<Axis>,
    cells: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    axes: Vec<Axis>,
    cells: Vec<f64>,
}

impl ContingencyTable {
    pub fn new(axes: Vec<Axis>, cells: Vec<f64>) -> Result<ContingencyTable> {
        if axes.is_empty() {
            return Err(Error::Table("a table needs at least one axis".into()));
        }
        let mut names = BTreeSet::new();
        for axis in &axes {
            if axis.categories.is_empty() {
                return Err(Error::Table(format!("axis {:?} has no categories", axis.name)));
            }
            if !names.insert(axis.name.clone()) {
                return Err(Error::Table(format!("duplicate axis {:?}", axis.name)));
            }
            let mut cats = BTreeSet::new();
            for c in &axis.categories {
                if !cats.insert(c.clone()) {
                    return Err(Error::Table(format!(
                        "axis {:?} lists category {c:?} twice",
                        axis.name
                    )));
                }
            }
        }
        let expected: usize = axes.iter().map(Axis::len).product();
        if cells.len() != expected {
            return Err(Error::Table(format!(
                "expected {expected} cells for axes {:?}, got {}",
                axes.iter().map(|a| a.len()).collect::<Vec<_>>(),
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::Table(format!("cells must be finite and >= 0, found {bad}")));
        }
        Ok(ContingencyTable { axes, cells })
    }

    /// All-ones table over the given axes (the default fitting seed).
    pub fn uniform_seed(axes: Vec<Axis>) -> Result<ContingencyTable> {
        let n: usize = axes.iter().map(Axis::len).product();
        ContingencyTable::new(axes, vec![1.0; n])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub(crate) fn cells_mut(&mut self) -> &mut [f64] {
        &mut self.cells
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// Flat index of a coordinate vector (one category index per axis).
    pub fn index_of(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.axes.len());
        coords
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&c, axis)| acc * axis.len() + c)
    }

    /// Coordinate vector of a flat index.
    pub fn coords_of(&self, mut index: usize) -> Vec<usize> {
        let mut coords = vec![0; self.axes.len()];
        for (slot, axis) in coords.iter_mut().zip(&self.axes).rev() {
            *slot = index % axis.len();
            index /= axis.len();
        }
        coords
    }

    /// Category names of a flat index, axis by axis.
    pub fn categories_of(&self, index: usize) -> Vec<&str> {
        self.coords_of(index)
            .into_iter()
            .zip(&self.axes)
            .map(|(c, axis)| axis.categories[c].as_str())
            .collect()
    }

    /// Sum of cells along every axis except `axis`, indexed by its category.
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes[axis].len()];
        for (i, &cell) in self.cells.iter().enumerate() {
            out[self.coords_of(i)[axis]] += cell;
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ContingencyTable> {
        let path = path.as_ref();
        let go = || -> Result<ContingencyTable> {
            let raw: RawTable = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            ContingencyTable::new(raw.axes, raw.cells)
        };
        go().map_err(|e| e.in_file(path))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let go = || -> Result<()> {
            let text = serde_json::to_string_pretty(self)?;
            std::fs::write(path, text + "\n")?;
            Ok(())
        };
        go().map_err(|e| e.in_file(path))
    }
}

impl Serialize for ContingencyTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = RawTable { axes: self.axes.clone(), cells: self.cells.clone() };
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ContingencyTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawTable::deserialize(d)?;
        ContingencyTable::new(raw.axes, raw.cells).map_err(serde::de::Error::custom)
    }
}

/// Target marginal masses, keyed by attribute then category.
///
/// Category order inside an attribute is irrelevant here — vectors are
/// aligned to a table's declared axis order on use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarginalTargets {
    targets: BTreeMap<String, BTreeMap<String, f64>>,
}

impl MarginalTargets {
    pub fn new(targets: BTreeMap<String, BTreeMap<String, f64>>) -> MarginalTargets {
        MarginalTargets { targets }
    }

    pub fn attributes(&self) -> impl Iterator<Item = &String> {
        self.targets.keys()
    }

    pub fn get(&self, attribute: &str) -> Option<&BTreeMap<String, f64>> {
        self.targets.get(attribute)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<MarginalTargets> {
        let path = path.as_ref();
        let go = || -> Result<MarginalTargets> {
            let t: MarginalTargets = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            t.validate()?;
            Ok(t)
        };
        go().map_err(|e| e.in_file(path))
    }

    /// Check masses are finite and non-negative, every attribute has at
    /// least one category, and all attributes agree on total mass (within
    /// 1e-9 relative — marginals of one population must weigh the same).
    pub fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::Targets("no target attributes".into()));
        }
        let mut totals = Vec::new();
        for (attr, cats) in &self.targets {
            if cats.is_empty() {
                return Err(Error::Targets(format!("attribute {attr:?} has no categories")));
            }
            let mut sum = 0.0;
            for (cat, &mass) in cats {
                if !mass.is_finite() || mass < 0.0 {
                    return Err(Error::Targets(format!(
                        "target mass for {attr:?}/{cat:?} must be finite and >= 0, got {mass}"
                    )));
                }
                sum += mass;
            }
            if sum <= 0.0 {
                return Err(Error::Targets(format!("attribute {attr:?} has zero total mass")));
            }
            totals.push((attr.clone(), sum));
        }
        let (_, first) = &totals[0];
        for (attr, sum) in &totals {
            if (sum - first).abs() > 1e-9 * first.max(1.0) {
                return Err(Error::Targets(format!(
                    "total mass disagrees across attributes: {:?} has {first}, {attr:?} has {sum}",
                    totals[0].0
                )));
            }
        }
        Ok(())
    }

    /// Shared total mass (validated).
    pub fn total_mass(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.targets.values().next().unwrap().values().sum())
    }

    /// Target vectors aligned with a table's axes: one vector per axis, in
    /// the axis's declared category order. The attribute sets must match
    /// exactly in both directions.
    pub fn aligned_to(&self, table: &ContingencyTable) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        for attr in self.targets.keys() {
            if !table.axes().iter().any(|a| &a.name == attr) {
                return Err(Error::Targets(format!(
                    "target attribute {attr:?} is not an axis of the table"
                )));
            }
        }
        let mut aligned = Vec::with_capacity(table.axes().len());
        for axis in table.axes() {
            let cats = self.targets.get(&axis.name).ok_or_else(|| {
                Error::Targets(format!("no target for table axis {:?}", axis.name))
            })?;
            if cats.len() != axis.categories.len() {
                return Err(Error::Targets(format!(
                    "axis {:?} has {} categories but the target lists {}",
                    axis.name,
                    axis.categories.len(),
                    cats.len()
                )));
            }
            let mut v = Vec::with_capacity(axis.len());
            for cat in &axis.categories {
                let mass = cats.get(cat).ok_or_else(|| {
                    Error::Targets(format!(
                        "target for axis {:?} is missing category {cat:?}",
                        axis.name
                    ))
                })?;
                v.push(*mass);
            }
            aligned.push(v);
        }
        Ok(aligned)
    }

    /// All-ones seed table spanning these targets. Axes are ordered by
    /// attribute name and categories lexicographically — the canonical order
    /// used whenever no table declares one.
    pub fn uniform_seed(&self) -> Result<ContingencyTable> {
        self.validate()?;
        let axes: Vec<Axis> = self
            .targets
            .iter()
            .map(|(name, cats)| Axis::new(name.clone(), cats.keys().cloned()))
            .collect();
        ContingencyTable::uniform_seed(axes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_2x3() -> ContingencyTable {
        ContingencyTable::new(
            vec![
                Axis::new("g", ["f", "m"].map(String::from)),
                Axis::new("a", ["x", "y", "z"].map(String::from)),
            ],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        )
        .unwrap()
    }

    #[test]
    fn indexing_is_row_major_last_axis_fastest() {
        let t = table_2x3();
        assert_eq!(t.index_of(&[0, 0]), 0);
        assert_eq!(t.index_of(&[0, 2]), 2);
        assert_eq!(t.index_of(&[1, 0]), 3);
        assert_eq!(t.coords_of(5), vec![1, 2]);
        assert_eq!(t.categories_of(4), vec!["m", "y"]);
    }

    #[test]
    fn marginals_sum_along_other_axes() {
        let t = table_2x3();
        assert_eq!(t.marginal(0), vec![6.0, 15.0]);
        assert_eq!(t.marginal(1), vec![5.0, 7.0, 9.0]);
        assert!((t.total() - 21.0).abs() < 1e-12);
    }

    #[test]
    fn construction_rejects_malformed_input() {
        assert!(ContingencyTable::new(vec![], vec![]).is_err());
        assert!(ContingencyTable::new(
            vec![Axis::new("g", ["f", "m"].map(String::from))],
            vec![1.0]
        )
        .is_err());
        assert!(ContingencyTable::new(
            vec![Axis::new("g", ["f", "f"].map(String::from))],
            vec![1.0, 1.0]
        )
        .is_err());
        assert!(ContingencyTable::new(
            vec![Axis::new("g", ["f", "m"].map(String::from))],
            vec![1.0, -0.5]
        )
        .is_err());
    }

    #[test]
    fn serde_round_trip() {
        let t = table_2x3();
        let json = serde_json::to_string(&t).unwrap();
        let back: ContingencyTable = serde_json::from_str(&json).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn targets_validate_mass_consistency() {
        let mut t = BTreeMap::new();
        t.insert("g".to_string(), BTreeMap::from([("f".into(), 3.0), ("m".into(), 1.0)]));
        t.insert("a".to_string(), BTreeMap::from([("x".into(), 2.0), ("y".into(), 2.0)]));
        assert!(MarginalTargets::new(t.clone()).validate().is_ok());
        t.get_mut("a").unwrap().insert("y".into(), 2.5);
        assert!(MarginalTargets::new(t).validate().is_err());
    }

    #[test]
    fn aligned_targets_follow_axis_order_and_catch_mismatches() {
        let table = table_2x3();
        let mut t = BTreeMap::new();
        t.insert("g".to_string(), BTreeMap::from([("m".into(), 15.0), ("f".into(), 6.0)]));
        t.insert(
            "a".to_string(),
            BTreeMap::from([("z".into(), 9.0), ("x".into(), 5.0), ("y".into(), 7.0)]),
        );
        let targets = MarginalTargets::new(t);
        let aligned = targets.aligned_to(&table).unwrap();
        assert_eq!(aligned, vec![vec![6.0, 15.0], vec![5.0, 7.0, 9.0]]);

        let mut missing = BTreeMap::new();
        missing.insert("g".to_string(), BTreeMap::from([("f".into(), 21.0)]));
        assert!(MarginalTargets::new(missing).aligned_to(&table).is_err());
    }

    #[test]
    fn uniform_seed_spans_sorted_axes() {
        let mut t = BTreeMap::new();
        t.insert("b".to_string(), BTreeMap::from([("1".into(), 1.0), ("2".into(), 1.0)]));
        t.insert("a".to_string(), BTreeMap::from([("x".into(), 2.0)]));
        let seed = MarginalTargets::new(t).uniform_seed().unwrap();
        assert_eq!(seed.axes()[0].name, "a");
        assert_eq!(seed.axes()[1].name, "b");
        assert_eq!(seed.cells(), &[1.0, 1.0]);
    }
}
