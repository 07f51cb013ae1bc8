//! Brute-force Euclidean neighbor search shared by both classifiers.

use ndarray::{ArrayView1, ArrayView2};

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

fn squared_euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// The `k` training rows closest to `query`, ascending by distance with ties
/// resolved toward the lower training index. `skip` excludes one row
/// (leave-one-out search inside the training set).
pub fn nearest(
    train: ArrayView2<'_, f64>,
    query: ArrayView1<'_, f64>,
    k: usize,
    skip: Option<usize>,
) -> Result<Vec<Neighbor>> {
    if query.len() != train.ncols() {
        return Err(Error::Shape(format!(
            "query has {} features, training data has {}",
            query.len(),
            train.ncols()
        )));
    }
    let available = train.nrows() - usize::from(skip.is_some_and(|s| s < train.nrows()));
    if k == 0 || k > available {
        return Err(Error::InvalidParameter(format!(
            "K must lie in 1..={available}, got {k}"
        )));
    }
    let mut all: Vec<(f64, usize)> = train
        .rows()
        .into_iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(i, row)| (squared_euclidean(row, query), i))
        .collect();
    let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, order);
        all.truncate(k);
    }
    all.sort_unstable_by(order);
    Ok(all
        .into_iter()
        .map(|(d2, index)| Neighbor {
            index,
            distance: d2.sqrt(),
        })
        .collect())
}

/// Precomputed neighbor lists (length `k_max`) for a batch of queries, so
/// several K values and label sources can share one distance pass.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    k_max: usize,
    lists: Vec<Vec<Neighbor>>,
}

impl NeighborTable {
    pub fn build(train: &FeatureMatrix, queries: &FeatureMatrix, k_max: usize) -> Result<Self> {
        let lists = queries
            .view()
            .rows()
            .into_iter()
            .map(|q| nearest(train.view(), q, k_max, None))
            .collect::<Result<Vec<_>>>()?;
        Ok(NeighborTable { k_max, lists })
    }

    /// Leave-one-out neighbors of every training row among the others.
    pub fn build_loo(train: &FeatureMatrix, k_max: usize) -> Result<Self> {
        let x = train.view();
        let lists = (0..train.nrows())
            .map(|i| nearest(x, x.row(i), k_max, Some(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(NeighborTable { k_max, lists })
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// First `k` neighbors of query `q`.
    pub fn get(&self, q: usize, k: usize) -> &[Neighbor] {
        &self.lists[q][..k.min(self.k_max)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn one_dimensional_example() {
        let train = array![[0.0], [1.0], [3.0]];
        let got = nearest(train.view(), array![0.9].view(), 2, None).unwrap();
        assert_eq!(got.iter().map(|n| n.index).collect::<Vec<_>>(), vec![1, 0]);
    }

    #[test]
    fn ties_go_to_lower_index_and_exact_match_first() {
        let train = array![[1.0], [-1.0], [0.0], [1.0]];
        let got = nearest(train.view(), array![0.0].view(), 4, None).unwrap();
        assert_eq!(got.iter().map(|n| n.index).collect::<Vec<_>>(), vec![2, 0, 1, 3]);
        assert_eq!(got[0].distance, 0.0);
    }

    #[test]
    fn skip_excludes_row() {
        let train = array![[0.0], [1.0], [3.0]];
        let got = nearest(train.view(), array![0.0].view(), 2, Some(0)).unwrap();
        assert_eq!(got.iter().map(|n| n.index).collect::<Vec<_>>(), vec![1, 2]);
        assert!(nearest(train.view(), array![0.0].view(), 3, Some(0)).is_err());
    }

    #[test]
    fn rejects_bad_k_and_dimension() {
        let train = array![[0.0, 1.0]];
        assert!(nearest(train.view(), array![0.0].view(), 1, None).is_err());
        assert!(nearest(train.view(), array![0.0, 0.0].view(), 2, None).is_err());
        assert!(nearest(train.view(), array![0.0, 0.0].view(), 0, None).is_err());
    }
}
